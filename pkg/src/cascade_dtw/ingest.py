"""Reconstruct labeled propagation networks from raw interaction event logs.

A tweet of class ``a`` is taken to travel from ``u`` to ``v`` when ``u``
first posted about ``a`` strictly before ``v`` did and the two are related:
``v`` follows ``u``, ``u`` mentioned ``v`` in a class-``a`` tweet, or ``v``
retweeted a class-``a`` tweet by ``u``.

Follow direction: a ``{"type": "follow", "src": v, "dst": u}`` event means
``v`` follows ``u``. For a user ``u``, ``following(u)`` is the set of users
``u`` follows and ``followers(u)`` the users following ``u``.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .prnet import Arc, PropagationNetwork, WeightVector


class LogParseError(ValueError):
    def __init__(self, msg, lineno=None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {msg}" if lineno is not None else msg)


@dataclass(frozen=True)
class Tweet:
    id: str
    user: str
    label: str
    ts: int


@dataclass(frozen=True)
class Retweet:
    user: str
    orig: str
    ts: int


@dataclass(frozen=True)
class Mention:
    tweet: str
    by: str
    of: str


@dataclass
class InteractionLog:
    follows: set[tuple[str, str]] = field(default_factory=set)  # (follower, followee)
    tweets: list[Tweet] = field(default_factory=list)
    retweets: list[Retweet] = field(default_factory=list)
    mentions: list[Mention] = field(default_factory=list)

    def __post_init__(self):
        self.follows = set(self.follows)
        self.tweet_by_id: dict[str, Tweet] = {}
        for t in self.tweets:
            if t.id in self.tweet_by_id:
                raise LogParseError(f"duplicate tweet id {t.id!r}")
            self.tweet_by_id[t.id] = t
        for r in self.retweets:
            if r.orig not in self.tweet_by_id:
                raise LogParseError(f"retweet of unknown tweet {r.orig!r}")
        for m in self.mentions:
            t = self.tweet_by_id.get(m.tweet)
            if t is None:
                raise LogParseError(f"mention in unknown tweet {m.tweet!r}")
            if t.user != m.by:
                raise LogParseError(f"mention by {m.by!r} in tweet {m.tweet!r} authored by {t.user!r}")
        self._index()

    def _index(self):
        self.following = defaultdict(set)
        self.followers = defaultdict(set)
        for a, b in self.follows:
            self.following[a].add(b)
            self.followers[b].add(a)
        self.tweets_of = defaultdict(set)
        for t in self.tweets:
            self.tweets_of[t.user].add(t.id)
        self.mentioning_tweets = defaultdict(set)          # u -> tweets where u mentions anyone
        self.mention_tweets_of = defaultdict(set)          # (u, v) -> tweets of u mentioning v
        for m in self.mentions:
            self.mentioning_tweets[m.by].add(m.tweet)
            self.mention_tweets_of[m.by, m.of].add(m.tweet)
        self.retweeted_by = defaultdict(set)               # (u, v) -> tweets of u retweeted by v
        for r in self.retweets:
            self.retweeted_by[self.tweet_by_id[r.orig].user, r.user].add(r.orig)
        self.users = set(self.tweets_of) | set(self.following) | set(self.followers)
        self.users |= {m.of for m in self.mentions} | {r.user for r in self.retweets}


def parse_event(obj: dict):
    kind = obj.get("type")
    if kind == "follow":
        return kind, (str(obj["src"]), str(obj["dst"]))
    if kind == "tweet":
        return kind, Tweet(str(obj["id"]), str(obj["user"]), str(obj["label"]), _int(obj["ts"]))
    if kind == "retweet":
        return kind, Retweet(str(obj["user"]), str(obj["orig"]), _int(obj["ts"]))
    if kind == "mention":
        return kind, Mention(str(obj["tweet"]), str(obj["by"]), str(obj["of"]))
    raise ValueError(f"unknown event type {kind!r}")


def _int(x) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValueError(f"timestamp must be an integer, got {x!r}")
    return x


def parse_log(lines: Iterable[str]) -> InteractionLog:
    """Parse JSON Lines events. Errors carry the offending line number."""
    follows, tweets, retweets, mentions = set(), [], [], []
    where: dict[int, int] = {}
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            kind, ev = parse_event(json.loads(line))
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise LogParseError(str(exc), lineno) from exc
        if kind == "follow":
            follows.add(ev)
        elif kind == "tweet":
            tweets.append(ev)
        elif kind == "retweet":
            retweets.append(ev)
        else:
            mentions.append(ev)
        where[id(ev)] = lineno
    seen = set()
    for t in tweets:
        if t.id in seen:
            raise LogParseError(f"duplicate tweet id {t.id!r}", where[id(t)])
        seen.add(t.id)
    for r in retweets:
        if r.orig not in seen:
            raise LogParseError(f"retweet of unknown tweet {r.orig!r}", where[id(r)])
    for m in mentions:
        if m.tweet not in seen:
            raise LogParseError(f"mention in unknown tweet {m.tweet!r}", where[id(m)])
    try:
        return InteractionLog(follows, tweets, retweets, mentions)
    except LogParseError as exc:
        raise LogParseError(str(exc)) from exc


def read_log(path) -> InteractionLog:
    with open(path) as fh:
        return parse_log(fh)


def log_to_lines(log: InteractionLog) -> list[str]:
    out = [json.dumps({"type": "follow", "src": a, "dst": b}) for a, b in sorted(log.follows)]
    out += [json.dumps({"type": "tweet", "id": t.id, "user": t.user, "label": t.label, "ts": t.ts})
            for t in log.tweets]
    out += [json.dumps({"type": "retweet", "user": r.user, "orig": r.orig, "ts": r.ts}) for r in log.retweets]
    out += [json.dumps({"type": "mention", "tweet": m.tweet, "by": m.by, "of": m.of}) for m in log.mentions]
    return out


def compute_weights(log: InteractionLog, u: str, v: str, wf_mode: str = "reciprocal") -> WeightVector:
    """Relationship strengths on an arc u -> v.

    w_m: share of u's mention-bearing tweets that mention v.
    w_r: share of u's tweets retweeted by v.
    w_f: when v follows u, the fraction of the users u follows who follow u
    back; zero otherwise. ``wf_mode="literal"`` intersects with ``{u}``
    instead, which is zero for any log without self-follows.
    """
    if u == v:
        raise ValueError("weights need two distinct users")
    for x in (u, v):
        if x not in log.users:
            raise ValueError(f"unknown user {x!r}")
    following = log.following.get(u, set())
    w_f = 0.0
    if following and u in log.following.get(v, set()):
        followers = log.followers.get(u, set())
        if wf_mode == "reciprocal":
            w_f = len(following & followers) / len(following)
        elif wf_mode == "literal":
            w_f = len(following & (followers & {u})) / len(following)
        else:
            raise ValueError(f"unknown wf_mode {wf_mode!r}")
    mentioning = log.mentioning_tweets.get(u, set())
    w_m = len(log.mention_tweets_of.get((u, v), ())) / len(mentioning) if mentioning else 0.0
    own = log.tweets_of.get(u, set())
    w_r = len(log.retweeted_by.get((u, v), ())) / len(own) if own else 0.0
    return WeightVector(w_f, w_m, w_r)


def first_post_times(log: InteractionLog, label: str) -> dict[str, int]:
    first: dict[str, int] = {}
    for t in log.tweets:
        if t.label == label and (t.user not in first or t.ts < first[t.user]):
            first[t.user] = t.ts
    return first


def propagation_pairs(log: InteractionLog, label: str) -> set[tuple[str, str]]:
    """All (u, v) such that the class travelled from u to v."""
    first = first_post_times(log, label)
    related = set()
    for follower, followee in log.follows:
        related.add((followee, follower))
    for m in log.mentions:
        if log.tweet_by_id[m.tweet].label == label:
            related.add((m.by, m.of))
    for r in log.retweets:
        t = log.tweet_by_id[r.orig]
        if t.label == label:
            related.add((t.user, r.user))
    return {(u, v) for u, v in related
            if u != v and u in first and v in first and first[u] < first[v]}


def _nearest_parent(pairs, first):
    best = {}
    for u, v in pairs:
        cur = best.get(v)
        if cur is None or (first[u], u) > (first[cur], cur):
            best[v] = u
    return {(u, v) for v, u in best.items()}


def _longest_depths(source, succ):
    # Kahn order over the reachable sub-DAG, then relax to the longest hop count.
    reach = {source}
    stack = [source]
    while stack:
        n = stack.pop()
        for d in succ.get(n, ()):
            if d not in reach:
                reach.add(d)
                stack.append(d)
    indeg = dict.fromkeys(reach, 0)
    for n in reach:
        for d in succ.get(n, ()):
            indeg[d] += 1
    depth = dict.fromkeys(reach, 0)
    ready = [source]
    while ready:
        n = ready.pop()
        for d in succ.get(n, ()):
            depth[d] = max(depth[d], depth[n] + 1)
            indeg[d] -= 1
            if indeg[d] == 0:
                ready.append(d)
    return depth


def build_traces(log: InteractionLog, label: str, wf_mode: str = "reciprocal",
                 tree_mode: bool = False, keep_isolated: bool = False) -> list[PropagationNetwork]:
    """One network per user from whom no other user received the class.

    Each network holds the users reachable from its source. Arc rank is
    the longest hop count from the source to the arc's head. Users without
    any propagation link are dropped unless ``keep_isolated``.
    """
    first = first_post_times(log, label)
    pairs = propagation_pairs(log, label)
    if tree_mode:
        pairs = _nearest_parent(pairs, first)
    succ: dict[str, list[str]] = defaultdict(list)
    has_parent = set()
    for u, v in sorted(pairs):
        succ[u].append(v)
        has_parent.add(v)
    weights = {(u, v): compute_weights(log, u, v, wf_mode) for u, v in pairs}
    nets = []
    for src in sorted(first, key=lambda x: (first[x], x)):
        if src in has_parent:
            continue
        if not succ.get(src) and not keep_isolated:
            continue
        depth = _longest_depths(src, succ)
        arcs = tuple(Arc(u, v, weights[u, v], depth[v])
                     for u in sorted(depth) for v in succ.get(u, ()))
        nets.append(PropagationNetwork(src, arcs, label))
    return nets


def ingest(log: InteractionLog, labels: Iterable[str], **kw) -> list[PropagationNetwork]:
    out = []
    for lab in labels:
        out.extend(build_traces(log, lab, **kw))
    return out


@dataclass
class ClassStats:
    users: int = 0
    links: int = 0
    prnets: int = 0


@dataclass
class DatasetStats:
    per_class: dict[str, ClassStats]
    total: ClassStats

    def to_dict(self) -> dict:
        rows = {k: vars(v) for k, v in self.per_class.items()}
        rows["__total__"] = vars(self.total)
        return rows

    def format_table(self) -> str:
        lines = [f"{'':<12}{'#User':>8}{'#Prop. links':>14}{'#PrNet':>8}"]
        for lab, s in self.per_class.items():
            lines.append(f"{lab:<12}{s.users:>8}{s.links:>14}{s.prnets:>8}")
        t = self.total
        lines.append(f"{'Total':<12}{t.users:>8}{t.links:>14}{t.prnets:>8}")
        return "\n".join(lines)


def dataset_stats(networks: Iterable[PropagationNetwork]) -> DatasetStats:
    """Distinct users, propagation links and network count per class label."""
    users = defaultdict(set)
    per = {}
    total = ClassStats()
    all_users = set()
    for net in networks:
        lab = str(net.label)
        s = per.setdefault(lab, ClassStats())
        s.links += len(net.arcs)
        s.prnets += 1
        users[lab] |= net.nodes
        all_users |= net.nodes
        total.links += len(net.arcs)
        total.prnets += 1
    for lab, s in per.items():
        s.users = len(users[lab])
    total.users = len(all_users)
    return DatasetStats(dict(sorted(per.items())), total)
