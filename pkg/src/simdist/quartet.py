"""Quartet-tree clustering of a distance matrix.

For every set of four leaves {u, v, w, x} there are three pairings,
uv|wx, uw|vx and ux|vw; the cost of a pairing is d(u, v) + d(w, x). An
unrooted tree with degree-3 internal nodes induces exactly one pairing per
quartet. Summed over all quartets, let ``m`` be the total of the cheapest
pairings, ``W`` the total of the dearest and ``C_T`` the total the tree
induces. The normalized benefit is

    S(T) = (W - C_T) / (W - m),      S(T) = 1 when W == m.

``search`` hill-climbs S(T) from random trees with three kinds of mutation
(leaf swap, subtree prune-and-regraft, nearest-neighbour interchange),
accepting only strict improvements. ``brute_force_best_tree`` enumerates
every tree for n <= 8 and serves as the exact reference.
"""
from __future__ import annotations

import itertools
import math
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .matrix import DistanceMatrix

BRUTE_FORCE_MAX_N = 8
DEFAULT_RESTARTS = 10
MUTATIONS = ("leaf_swap", "spr", "nni")


class TreeError(ValueError):
    pass


# --------------------------------------------------------------------------
# Quartet topologies
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuartetTopology:
    """A pairing ab|cd of four labels, stored in canonical order."""

    left: tuple[str, str]
    right: tuple[str, str]

    @classmethod
    def of(cls, u: str, v: str, w: str, x: str) -> "QuartetTopology":
        if len({u, v, w, x}) != 4:
            raise ValueError("a quartet needs four distinct labels")
        a, b = sorted((tuple(sorted((u, v))), tuple(sorted((w, x)))))
        return cls(a, b)

    @property
    def labels(self) -> frozenset:
        return frozenset(self.left + self.right)

    def __str__(self):
        return f"{''.join(self.left) if all(len(s) == 1 for s in self.left) else ','.join(self.left)}|" \
               f"{''.join(self.right) if all(len(s) == 1 for s in self.right) else ','.join(self.right)}"


def pairings(u: str, v: str, w: str, x: str) -> tuple[QuartetTopology, QuartetTopology, QuartetTopology]:
    """The three topologies uv|wx, uw|vx, ux|vw."""
    return (QuartetTopology.of(u, v, w, x), QuartetTopology.of(u, w, v, x),
            QuartetTopology.of(u, x, v, w))


def _check_finite(d: DistanceMatrix, labels):
    idx = [d.index(lab) for lab in labels]
    sub = d.values[np.ix_(idx, idx)]
    if not np.isfinite(sub).all():
        bad = [(labels[i], labels[j]) for i in range(len(idx)) for j in range(len(idx))
               if i < j and not math.isfinite(sub[i, j])]
        raise ValueError(f"infinite distances between {bad}")


def quartet_cost(d: DistanceMatrix, t: QuartetTopology) -> float:
    _check_finite(d, list(t.left + t.right))
    return d[t.left] + d[t.right]


# --------------------------------------------------------------------------
# Trees
# --------------------------------------------------------------------------

class QuartetTree:
    """Unrooted tree: leaves 0..n-1 carry ``labels``, internal nodes n..2n-3.

    ``adj`` holds the neighbour lists. Trees are treated as immutable;
    ``mutate`` returns a new tree.
    """

    __slots__ = ("labels", "adj", "_newick", "_dist")

    def __init__(self, labels: Sequence[str], adj: Sequence[Sequence[int]], validate: bool = True):
        self.labels = tuple(labels)
        self.adj = tuple(tuple(nb) for nb in adj)
        self._newick = None
        self._dist = None
        if validate:
            self.validate()

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def n_nodes(self) -> int:
        return len(self.adj)

    def validate(self) -> None:
        n = self.n
        if n < 4:
            raise TreeError(f"a quartet tree needs at least 4 leaves, got {n}")
        if len(set(self.labels)) != n:
            raise TreeError("leaf labels must be unique")
        if self.n_nodes != 2 * n - 2:
            raise TreeError(f"expected {2 * n - 2} nodes, found {self.n_nodes}")
        for v, nb in enumerate(self.adj):
            want = 1 if v < n else 3
            if len(nb) != want or len(set(nb)) != want or v in nb:
                raise TreeError(f"node {v} has neighbours {nb}, expected degree {want}")
            for u in nb:
                if v not in self.adj[u]:
                    raise TreeError(f"edge {v}-{u} is not symmetric")
        if len(self.edges()) != 2 * n - 3:
            raise TreeError("wrong edge count")
        seen = {0}
        stack = [0]
        while stack:
            for u in self.adj[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != self.n_nodes:
            raise TreeError("tree is not connected")

    def edges(self) -> list[tuple[int, int]]:
        return [(v, u) for v, nb in enumerate(self.adj) for u in nb if v < u]

    def leaf_distances(self) -> np.ndarray:
        """Path lengths in edges between every pair of leaves."""
        if self._dist is None:
            # root at node n; leaves a, b share depth(lca) + 1 ancestors
            n, adj = self.n, self.adj
            k = len(adj)
            anc = np.zeros((k, k), dtype=np.float64)
            depth = np.zeros(k)
            parent = [-1] * k
            root = n
            anc[root, root] = 1.0
            order = [root]
            for v in order:
                for u in adj[v]:
                    if u != parent[v]:
                        parent[u] = v
                        depth[u] = depth[v] + 1
                        anc[u] = anc[v]
                        anc[u, u] = 1.0
                        order.append(u)
            leaves = anc[:n]
            common = leaves @ leaves.T
            dl = depth[:n]
            self._dist = (dl[:, None] + dl[None, :] - 2.0 * (common - 1.0)).astype(np.int64)
        return self._dist

    def splits(self) -> frozenset:
        """Leaf bipartitions of the internal edges, each given by the side without the smallest label."""
        anchor = min(range(self.n), key=lambda i: self.labels[i])
        result = set()
        for a, b in self.edges():
            if a < self.n or b < self.n:
                continue
            side = self._side(b, a)
            if anchor in side:
                side = set(range(self.n)) - side
            result.add(frozenset(self.labels[i] for i in side))
        return frozenset(result)

    def has_split(self, group) -> bool:
        """True when some edge separates ``group`` from the remaining leaves."""
        group = frozenset(group)
        rest = frozenset(self.labels) - group
        if len(group) <= 1 or len(rest) <= 1:
            return bool(group) and bool(rest)
        return group in self.splits() or rest in self.splits()

    def _side(self, start: int, blocked: int) -> set:
        leaves = set()
        stack = [(start, blocked)]
        while stack:
            v, parent = stack.pop()
            if v < self.n:
                leaves.add(v)
            for u in self.adj[v]:
                if u != parent:
                    stack.append((u, v))
        return leaves

    def same_topology(self, other: "QuartetTree") -> bool:
        return set(self.labels) == set(other.labels) and self.splits() == other.splits()

    def to_newick(self) -> str:
        if self._newick is None:
            self._newick = to_newick(self)
        return self._newick

    def __repr__(self):
        return f"QuartetTree({self.to_newick()})"

    def __eq__(self, other):
        return isinstance(other, QuartetTree) and self.to_newick() == other.to_newick()

    def __hash__(self):
        return hash(self.to_newick())


def induced_topology(tree: QuartetTree, quartet: Sequence[str]) -> QuartetTopology:
    """The pairing of four leaves whose connecting paths do not share an edge."""
    if len(set(quartet)) != 4:
        raise ValueError("induced_topology needs four distinct labels")
    try:
        u, v, w, x = (tree.labels.index(lab) for lab in quartet)
    except ValueError:
        raise ValueError(f"labels {list(quartet)} are not all leaves of the tree") from None
    dist = tree.leaf_distances()
    sums = (dist[u, v] + dist[w, x], dist[u, w] + dist[v, x], dist[u, x] + dist[v, w])
    k = int(np.argmin(sums))
    return pairings(*quartet)[k]


# --------------------------------------------------------------------------
# Scoring
# --------------------------------------------------------------------------

class QuartetScorer:
    """Precomputed quartet costs for one matrix; ``score`` evaluates S(T)."""

    def __init__(self, d: DistanceMatrix):
        n = len(d)
        if n < 4:
            raise ValueError(f"quartet scoring needs at least 4 objects, got {n}")
        if not np.isfinite(d.values).all():
            raise ValueError("matrix has infinite entries: " + ", ".join(
                f"({a}, {b})" for a, b in d.infinite_pairs()))
        if not d.is_symmetric():
            raise ValueError("quartet clustering needs a symmetric matrix")
        self.matrix = d
        self.labels = d.labels
        q = np.array(list(itertools.combinations(range(n), 4)), dtype=np.intp)
        i, j, k, l = q.T
        # flat pair indices for the three pairings ij|kl, ik|jl, il|jk
        self._pairs = [(i * n + j, k * n + l), (i * n + k, j * n + l), (i * n + l, j * n + k)]
        flat = d.values.ravel()
        self.costs = np.stack([flat[a] + flat[b] for a, b in self._pairs], axis=1)
        self._c0, self._c1, self._c2 = (np.ascontiguousarray(c) for c in self.costs.T)
        self.m = float(self.costs.min(axis=1).sum())
        self.W = float(self.costs.max(axis=1).sum())

    def _perm(self, tree: QuartetTree):
        if tree.labels == self.labels:
            return None
        try:
            return [tree.labels.index(lab) for lab in self.labels]
        except ValueError:
            raise ValueError("tree leaves do not match the matrix labels") from None

    def tree_cost(self, tree: QuartetTree) -> float:
        dist = tree.leaf_distances()
        perm = self._perm(tree)
        if perm is not None:
            dist = dist[np.ix_(perm, perm)]
        flat = dist.ravel()
        (a0, b0), (a1, b1), (a2, b2) = self._pairs
        s0 = flat[a0] + flat[b0]
        s1 = flat[a1] + flat[b1]
        s2 = flat[a2] + flat[b2]
        # exactly one sum is strictly smallest in a binary tree
        cost = np.where(s0 < s1, np.where(s0 < s2, self._c0, self._c2),
                        np.where(s1 < s2, self._c1, self._c2))
        return float(cost.sum())

    def score(self, tree: QuartetTree) -> float:
        if self.W == self.m:
            return 1.0
        return (self.W - self.tree_cost(tree)) / (self.W - self.m)


def tree_score(d: DistanceMatrix, tree: QuartetTree) -> float:
    return QuartetScorer(d).score(tree)


# --------------------------------------------------------------------------
# Random trees and mutations
# --------------------------------------------------------------------------

def _rng(seed):
    return np.random.default_rng(seed)


def random_tree(labels: Sequence[str], seed=None) -> QuartetTree:
    """Uniform random topology by inserting leaves one at a time on random edges."""
    labels = list(labels)
    n = len(labels)
    if n < 4:
        raise TreeError(f"a quartet tree needs at least 4 leaves, got {n}")
    rng = _rng(seed)
    adj: list[list[int]] = [[] for _ in range(2 * n - 2)]
    center = n
    for leaf in range(3):
        adj[leaf].append(center)
        adj[center].append(leaf)
    edges = [(0, center), (1, center), (2, center)]
    next_internal = n + 1
    for leaf in range(3, n):
        a, b = edges[int(rng.integers(len(edges)))]
        _subdivide(adj, edges, a, b, next_internal, leaf)
        next_internal += 1
    return QuartetTree(labels, adj, validate=False)


def _subdivide(adj, edges, a, b, mid, leaf):
    """Replace edge a-b by a-mid-b and hang ``leaf`` off mid."""
    adj[a][adj[a].index(b)] = mid
    adj[b][adj[b].index(a)] = mid
    adj[mid] = [a, b, leaf]
    adj[leaf] = [mid]
    if edges is not None:
        k = edges.index((a, b)) if (a, b) in edges else edges.index((b, a))
        edges[k] = (a, mid)
        edges += [(mid, b), (mid, leaf)]


def all_trees(labels: Sequence[str]) -> Iterator[QuartetTree]:
    """Every unrooted binary topology on ``labels``, (2n-5)!! of them."""
    labels = list(labels)
    n = len(labels)
    if n < 4:
        raise TreeError(f"a quartet tree needs at least 4 leaves, got {n}")

    def grow(adj, edges, leaf):
        if leaf == n:
            yield QuartetTree(labels, adj, validate=False)
            return
        for a, b in list(edges):
            adj2 = [list(nb) for nb in adj]
            edges2 = list(edges)
            _subdivide(adj2, edges2, a, b, n + leaf - 2, leaf)
            yield from grow(adj2, edges2, leaf + 1)

    adj0: list[list[int]] = [[] for _ in range(2 * n - 2)]
    for leaf in range(3):
        adj0[leaf] = [n]
    adj0[n] = [0, 1, 2]
    yield from grow(adj0, [(0, n), (1, n), (2, n)], 3)


def _replace(adj, v, old, new):
    adj[v][adj[v].index(old)] = new


def _leaf_swap(adj, n, rng):
    a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
    pa, pb = adj[a][0], adj[b][0]
    if pa == pb:
        return
    _replace(adj, pa, a, b)
    _replace(adj, pb, b, a)
    adj[a] = [pb]
    adj[b] = [pa]


def _nni(adj, n, rng):
    internal_edges = [(u, v) for u in range(n, len(adj)) for v in adj[u] if v >= n and u < v]
    u, v = internal_edges[int(rng.integers(len(internal_edges)))]
    a = [x for x in adj[u] if x != v][int(rng.integers(2))]
    b = [x for x in adj[v] if x != u][int(rng.integers(2))]
    _replace(adj, u, a, b)
    _replace(adj, v, b, a)
    _replace(adj, a, u, v)
    _replace(adj, b, v, u)


def _spr(adj, n, rng):
    # prune the subtree hanging from internal node p on the side of c
    directed = [(p, c) for p in range(n, len(adj)) for c in adj[p]]
    p, c = directed[int(rng.integers(len(directed)))]
    a, b = [x for x in adj[p] if x != c]
    _replace(adj, a, p, b)
    _replace(adj, b, p, a)
    pruned = set()
    stack = [(c, p)]
    while stack:
        v, parent = stack.pop()
        pruned.add(v)
        stack.extend((u, v) for u in adj[v] if u != parent)
    targets = [(s, t) for s in range(len(adj)) if s not in pruned and s != p
               for t in adj[s] if s < t and t not in pruned and t != p]
    s, t = targets[int(rng.integers(len(targets)))]
    _replace(adj, s, t, p)
    _replace(adj, t, s, p)
    adj[p] = [s, t, c]


_MUTATORS = {"leaf_swap": _leaf_swap, "spr": _spr, "nni": _nni}


def mutate(tree: QuartetTree, seed=None, kind: str | None = None) -> QuartetTree:
    """Apply one randomly chosen mutation (or ``kind``) to a copy of ``tree``."""
    rng = _rng(seed)
    if kind is None:
        kind = MUTATIONS[int(rng.integers(len(MUTATIONS)))]
    adj = [list(nb) for nb in tree.adj]
    _MUTATORS[kind](adj, tree.n, rng)
    return QuartetTree(tree.labels, adj, validate=False)


# --------------------------------------------------------------------------
# Search
# --------------------------------------------------------------------------

@dataclass
class RestartResult:
    restart: int
    best_score: float
    newick: str
    trace: list[float]
    steps: int


@dataclass
class SearchResult:
    tree: QuartetTree
    score: float
    restarts: list[RestartResult]
    params: dict
    wall_time: float = field(default=0.0, compare=False)

    def report(self) -> dict:
        return {
            "seed": self.params["seed"],
            "restarts": self.params["restarts"],
            "max_non_improving": self.params["max_non_improving"],
            "per_restart_best_score": [r.best_score for r in self.restarts],
            "per_restart_steps": [r.steps for r in self.restarts],
            "final_score": self.score,
            "newick": self.tree.to_newick(),
            "wall_time": self.wall_time,
        }


def _climb(d: DistanceMatrix, seed_seq, max_non_improving: int) -> RestartResult:
    scorer = QuartetScorer(d)
    rng = np.random.default_rng(seed_seq)
    tree = random_tree(d.labels, rng)
    best = scorer.score(tree)
    trace = [best]
    fails = steps = 0
    while fails < max_non_improving and best < 1.0:
        cand = mutate(tree, rng)
        s = scorer.score(cand)
        steps += 1
        if s > best:
            tree, best, fails = cand, s, 0
            trace.append(s)
        else:
            fails += 1
    return RestartResult(int(seed_seq.spawn_key[-1]), best, tree.to_newick(), trace, steps)


def search(d: DistanceMatrix, restarts: int = DEFAULT_RESTARTS, max_non_improving: int | None = None,
           seed: int = 0, workers: int = 1) -> SearchResult:
    """Randomized hill climbing on S(T) with independent restarts.

    A restart stops after ``max_non_improving`` consecutive rejected
    mutations (default 1000 * n) or as soon as S reaches 1. The best tree
    over all restarts wins; ties go to the smaller canonical Newick string.
    """
    QuartetScorer(d)  # validate before any work
    n = len(d)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if max_non_improving is None:
        max_non_improving = 1000 * n
    t0 = time.perf_counter()
    children = np.random.SeedSequence(seed).spawn(restarts)
    if workers > 1 and restarts > 1:
        with ProcessPoolExecutor(max_workers=min(workers, restarts)) as pool:
            results = list(pool.map(_climb, [d] * restarts, children, [max_non_improving] * restarts))
    else:
        results = [_climb(d, c, max_non_improving) for c in children]
    winner = min(results, key=lambda r: (-r.best_score, r.newick))
    tree = parse_newick(winner.newick, order=d.labels)
    params = {"seed": seed, "restarts": restarts, "max_non_improving": max_non_improving}
    return SearchResult(tree, winner.best_score, results, params, time.perf_counter() - t0)


def brute_force_best_tree(d: DistanceMatrix) -> tuple[QuartetTree, float]:
    """Exhaustive maximum of S(T); ties broken by canonical Newick order."""
    n = len(d)
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    scorer = QuartetScorer(d)
    best_key, best_tree = None, None
    for tree in all_trees(d.labels):
        s = scorer.score(tree)
        key = (-s, tree.to_newick())
        if best_key is None or key < best_key:
            best_key, best_tree = key, tree
    return best_tree, -best_key[0]


def count_trees(n: int) -> int:
    """(2n-5)!!, the number of unrooted binary trees on n labeled leaves."""
    return math.prod(range(1, 2 * n - 4, 2)) if n >= 3 else 1


# --------------------------------------------------------------------------
# Newick and DOT
# --------------------------------------------------------------------------

_NEWICK_SPECIAL = set("()[]':;, \t\n_")


def quote_label(label: str) -> str:
    if label and not any(ch in _NEWICK_SPECIAL for ch in label):
        return label
    return "'" + label.replace("'", "''") + "'"


def _canonical_root(tree: QuartetTree) -> int:
    last = max(range(tree.n), key=lambda i: tree.labels[i])
    return tree.adj[last][0]


def to_newick(tree: QuartetTree) -> str:
    """Newick rooted at the internal node next to the greatest label.

    Children are ordered by the smallest label in their subtree, so equal
    topologies serialize identically.
    """
    labels = tree.labels

    def render_key(v, parent):
        if v < tree.n:
            return (labels[v], quote_label(labels[v]))
        kids = sorted(render_key(u, v) for u in tree.adj[v] if u != parent)
        return (kids[0][0], "(" + ",".join(k[1] for k in kids) + ")")

    root = _canonical_root(tree)
    kids = sorted(render_key(u, root) for u in tree.adj[root])
    return "(" + ",".join(k[1] for k in kids) + ");"


def to_dot(tree: QuartetTree, name: str = "tree") -> str:
    lines = [f"graph {name} {{"]
    for v in range(tree.n_nodes):
        if v < tree.n:
            lab = tree.labels[v].replace("\\", "\\\\").replace('"', '\\"')
            lines.append(f'  n{v} [label="{lab}", shape=box];')
        else:
            lines.append(f"  n{v} [label=\"\", shape=point];")
    for a, b in sorted(tree.edges()):
        lines.append(f"  n{a} -- n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _tokenize_newick(text: str):
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "(),;":
            yield ch
            i += 1
        elif ch == ":":
            i += 1
            while i < n and text[i] not in "(),;":
                i += 1
        elif ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise TreeError("unterminated comment in Newick")
            i = end + 1
        elif ch == "'":
            buf = []
            i += 1
            while True:
                if i >= n:
                    raise TreeError("unterminated quoted label in Newick")
                if text[i] == "'":
                    if i + 1 < n and text[i + 1] == "'":
                        buf.append("'")
                        i += 2
                        continue
                    i += 1
                    break
                buf.append(text[i])
                i += 1
            yield ("label", "".join(buf))
        else:
            j = i
            while j < n and text[j] not in "(),;:[" and not text[j].isspace():
                j += 1
            yield ("label", text[i:j].replace("_", " "))
            i = j


def parse_newick(text: str, order: Sequence[str] | None = None) -> QuartetTree:
    """Read a Newick tree with degree-3 internal nodes (a degree-2 root is suppressed).

    Internal node labels and branch lengths are ignored. ``order`` fixes the
    leaf numbering; by default leaves are numbered in order of appearance.
    """
    tokens = list(_tokenize_newick(text))
    if not tokens or tokens[-1] != ";":
        raise TreeError("Newick text must end with ';'")
    tokens.pop()
    pos = 0
    edges: list[tuple[int, int]] = []
    leaf_names: dict[int, str] = {}
    counter = itertools.count()

    def node():
        nonlocal pos
        me = next(counter)
        if pos < len(tokens) and tokens[pos] == "(":
            pos += 1
            while True:
                child = node()
                edges.append((me, child))
                if pos >= len(tokens):
                    raise TreeError("unbalanced parentheses in Newick")
                tok = tokens[pos]
                pos += 1
                if tok == ")":
                    break
                if tok != ",":
                    raise TreeError(f"unexpected token {tok!r} in Newick")
            if pos < len(tokens) and isinstance(tokens[pos], tuple):
                pos += 1  # internal label
        else:
            if pos >= len(tokens) or not isinstance(tokens[pos], tuple):
                raise TreeError("leaf without a label in Newick")
            leaf_names[me] = tokens[pos][1]
            pos += 1
        return me

    root = node()
    if pos != len(tokens):
        raise TreeError("trailing tokens after the Newick tree")
    nbrs: dict[int, list[int]] = {}
    for a, b in edges:
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)
    if len(nbrs.get(root, ())) == 2:
        a, b = nbrs.pop(root)
        _replace(nbrs, a, root, b)
        _replace(nbrs, b, root, a)

    names = list(leaf_names[v] for v in sorted(leaf_names) if v in nbrs)
    if order is not None:
        if sorted(order) != sorted(names):
            raise TreeError("Newick leaves do not match the requested label order")
        names = list(order)
    leaf_ids = {name: i for i, name in enumerate(names)}
    n = len(names)
    if len(leaf_ids) != n:
        raise TreeError("duplicate leaf labels in Newick")
    mapping = {v: leaf_ids[leaf_names[v]] for v in leaf_names}
    internal = [v for v in sorted(nbrs) if v not in leaf_names]
    mapping.update({v: n + k for k, v in enumerate(internal)})
    adj: list[list[int]] = [[] for _ in range(len(mapping))]
    for v, nb in nbrs.items():
        adj[mapping[v]] = [mapping[u] for u in nb]
    return QuartetTree(names, adj)
