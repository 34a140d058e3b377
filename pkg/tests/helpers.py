"""Shared test utilities: independent oracles and random model builders.

Everything here is deliberately written from first principles (exact
rational arithmetic, brute-force enumeration) so the tests do not reuse
the library's own numerics as their reference.
"""

from __future__ import annotations

import heapq
import itertools
import math
from fractions import Fraction

import numpy as np

from cnetlearn import (
    ChowLiuTree,
    CutsetNetwork,
    DecisionNode,
    Leaf,
    WeightedDataset,
)


def unit_dataset(rows, ids=None) -> WeightedDataset:
    x = np.atleast_2d(np.array(rows, dtype=np.uint8))
    vids = None if ids is None else np.array(ids, dtype=np.int64)
    return WeightedDataset(x, np.ones(x.shape[0]), vids)


def random_dataset(rng, n_rows: int, n_vars: int, ids=None) -> WeightedDataset:
    x = rng.integers(0, 2, size=(n_rows, n_vars)).astype(np.uint8)
    return unit_dataset(x, ids)


def enumerate_bits(n_vars: int) -> np.ndarray:
    combos = itertools.product((0, 1), repeat=n_vars)
    return np.array(list(combos), dtype=np.uint8).reshape(-1, n_vars)


# ---------------------------------------------------------------------------
# spanning-tree enumeration (Pruefer sequences)

def prufer_edges(seq, n: int) -> list:
    """Undirected edge list of the labeled tree with Pruefer sequence
    `seq` over nodes 0..n-1."""
    if n == 1:
        return []
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, v), max(leaf, v)))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    u = heapq.heappop(leaves)
    w = heapq.heappop(leaves)
    edges.append((min(u, w), max(u, w)))
    return edges


def all_spanning_trees(n: int):
    """Yield the edge list of every labeled tree on n nodes."""
    if n == 1:
        yield []
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        yield prufer_edges(seq, n)


def tree_weight(mi: np.ndarray, edges) -> float:
    return math.fsum(mi[i][j] for i, j in sorted(edges))


def orient_at_zero(n: int, edges):
    """(parents, order) arrays for the tree rooted at local index 0."""
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    parents = np.full(n, -1, dtype=np.int64)
    order = [0]
    seen = {0}
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        for v in sorted(adj[u]):
            if v not in seen:
                seen.add(v)
                parents[v] = u
                order.append(v)
    return parents, np.array(order, dtype=np.int64)


# ---------------------------------------------------------------------------
# random models with known-valid structure

def random_tree(rng, ids) -> ChowLiuTree:
    """Random labeled tree over `ids` with random interior CPTs."""
    ids = np.array(sorted(int(v) for v in ids), dtype=np.int64)
    n = len(ids)
    if n == 1:
        parents = np.array([-1], dtype=np.int64)
        order = np.array([0], dtype=np.int64)
    else:
        seq = [int(rng.integers(0, n)) for _ in range(max(0, n - 2))]
        parents, order = orient_at_zero(n, prufer_edges(seq, n))
    cpt = []
    for v in range(n):
        n_rows = 1 if parents[v] < 0 else 2
        p1 = rng.uniform(0.05, 0.95, size=n_rows)
        cpt.append(np.stack([1.0 - p1, p1], axis=1))
    return ChowLiuTree(ids, parents, order, cpt)


def random_net(rng, ids, n_decisions: int) -> CutsetNetwork:
    """Random cutset network over `ids` with at most `n_decisions`
    decision nodes and random-tree leaves."""
    ids = sorted(int(v) for v in ids)
    budget = [n_decisions]

    def build(scope):
        if len(scope) >= 2 and budget[0] > 0 and rng.random() < 0.8:
            budget[0] -= 1
            var = int(scope[int(rng.integers(0, len(scope)))])
            rest = [v for v in scope if v != var]
            p1 = float(rng.uniform(0.1, 0.9))
            kids = (build(rest), build(rest))
            return DecisionNode(var, np.array([1.0 - p1, p1]), kids)
        return Leaf(random_tree(rng, scope))

    return CutsetNetwork(build(ids), np.array(ids, dtype=np.int64))


def count_decisions(net) -> int:
    total = 0
    stack = [net.root]
    while stack:
        node = stack.pop()
        if node.kind == "decision":
            total += 1
            stack.extend(node.children)
    return total


def leaf_scopes(net) -> list:
    out = []
    stack = [net.root]
    while stack:
        node = stack.pop()
        if node.kind == "leaf":
            out.append(node.tree.variable_ids)
        else:
            stack.extend(node.children)
    return out


# ---------------------------------------------------------------------------
# exact prequential oracle for the BD score

def prequential_cnet_log(net, samples: np.ndarray, alpha) -> float:
    """Log of the sequential posterior-predictive product, in exact
    rational arithmetic.

    Each row is routed through the decision nodes and its leaf's tree
    families; every event contributes (alpha/2 + n_value) / (alpha + n)
    with counts from the previously processed rows only.  For Dirichlet
    models this product equals the marginal likelihood, which makes it
    an independent reference for the closed-form score.
    """
    alpha = Fraction(alpha).limit_denominator(10**6)
    half = alpha / 2
    dec_counts: dict = {}
    fam_counts: dict = {}
    product = Fraction(1)
    col = {int(g): i for i, g in enumerate(net.variable_ids)}

    for row in np.asarray(samples, dtype=np.int64):
        node = net.root
        while node.kind == "decision":
            c = dec_counts.setdefault(id(node), [0, 0])
            k = int(row[col[int(node.var)]])
            product *= (half + c[k]) / (alpha + c[0] + c[1])
            c[k] += 1
            node = node.children[k]
        tree = node.tree
        for v in tree.order:
            p = int(tree.parents[v])
            u = 0 if p < 0 else int(row[col[int(tree.variable_ids[p])]])
            key = (id(node), int(v), u)
            c = fam_counts.setdefault(key, [0, 0])
            x = int(row[col[int(tree.variable_ids[v])]])
            product *= (half + c[x]) / (alpha + c[0] + c[1])
            c[x] += 1
    return math.log(product.numerator) - math.log(product.denominator)


def prequential_counts_log(counts, alpha) -> float:
    """Same chain for a single Dirichlet(alpha/2, alpha/2) family given
    final branch counts (order does not matter)."""
    alpha = Fraction(alpha).limit_denominator(10**6)
    half = alpha / 2
    product = Fraction(1)
    seen = [0, 0]
    for k, n_k in enumerate(counts):
        for _ in range(int(n_k)):
            product *= (half + seen[k]) / (alpha + seen[0] + seen[1])
            seen[k] += 1
    return math.log(product.numerator) - math.log(product.denominator)


# ---------------------------------------------------------------------------
# two-regime synthetic generator with a known entropy rate

def regime_samples(rng, n: int, d: int, flip: float = 0.1) -> np.ndarray:
    """Variable 0 picks a regime; each pair (2i+1, 2i+2) is equal in
    regime 0 and opposite in regime 1, with `flip` noise; any leftover
    variable is uniform."""
    x = rng.integers(0, 2, size=(n, d)).astype(np.uint8)
    for i in range((d - 1) // 2):
        a, b = 1 + 2 * i, 2 + 2 * i
        expected = x[:, a] ^ x[:, 0]
        noise = rng.random(n) < flip
        x[:, b] = np.where(noise, 1 - expected, expected).astype(np.uint8)
    return x


def regime_log_prob_rows(x: np.ndarray, flip: float = 0.1) -> np.ndarray:
    """Exact generator log probability of each row."""
    x = np.asarray(x, dtype=np.int64)
    d = x.shape[1]
    n_pairs = (d - 1) // 2
    free = d - n_pairs  # regime bit, pair anchors, leftovers
    lp = np.full(x.shape[0], free * math.log(0.5))
    for i in range(n_pairs):
        a, b = 1 + 2 * i, 2 + 2 * i
        expected = x[:, a] ^ x[:, 0]
        lp += np.where(x[:, b] == expected, math.log1p(-flip), math.log(flip))
    return lp


def regime_entropy_nats(d: int, flip: float = 0.1) -> float:
    n_pairs = (d - 1) // 2
    h_flip = -(flip * math.log(flip) + (1 - flip) * math.log1p(-flip))
    return (d - n_pairs) * math.log(2) + n_pairs * h_flip


def switch_dataset_16() -> WeightedDataset:
    """Tiny 3-variable regime switch: x2 copies x1 when x0 = 0 and
    negates it when x0 = 1, all (x0, x1) combinations balanced.  Pairwise
    counts alone look independent, so conditioning is the only way to a
    better score."""
    rows = []
    for x0 in (0, 1):
        for x1 in (0, 1):
            x2 = x1 if x0 == 0 else 1 - x1
            rows.extend([[x0, x1, x2]] * 4)
    return unit_dataset(rows)


# ---------------------------------------------------------------------------
# routing reference

def routed_decision_counts(net, d: WeightedDataset) -> dict:
    """id(decision node) -> [weight routed to 0, weight routed to 1],
    computed by walking every row independently of the library."""
    counts: dict = {}
    col = {int(g): i for i, g in enumerate(net.variable_ids)}
    for row, w in zip(d.samples, d.weights):
        node = net.root
        while node.kind == "decision":
            k = int(row[col[int(node.var)]])
            counts.setdefault(id(node), [0.0, 0.0])[k] += float(w)
            node = node.children[k]
    return counts
