"""Content-free classification of message propagation networks with PrNet-DTW and k-NN."""
