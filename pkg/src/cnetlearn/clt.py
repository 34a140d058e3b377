"""Chow-Liu trees over binary variables.

A tree is learned as the maximum-weight spanning tree of the pairwise
mutual-information graph, rooted at the lowest variable index, with
Laplace-smoothed conditional probability tables.  These trees serve as
the leaf distributions of cutset networks but are usable on their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import WeightedDataset, DatasetError, pair_counts
from .numerics import log_gamma

__all__ = [
    "ChowLiuTree",
    "mutual_information",
    "learn_clt",
    "clt_log_likelihood",
    "clt_log_density_rows",
    "clt_bd_score",
    "clt_sample",
    "clt_mpe",
    "clt_param_count",
]


@dataclass(eq=False)
class ChowLiuTree:
    """Directed tree with per-family conditional probability tables.

    variable_ids -- global ids of the scope, ascending
    parents      -- local parent index per variable, -1 for the root
    order        -- topological order of local indices, root first
    cpt          -- cpt[v][u, x] = P(X_v = x | parent = u); the root table
                    has a single row
    """

    variable_ids: np.ndarray
    parents: np.ndarray
    order: np.ndarray
    cpt: list

    @property
    def n_vars(self) -> int:
        return len(self.variable_ids)

    @property
    def root(self) -> int:
        return int(self.order[0])

    @property
    def parent_map(self) -> dict:
        """Global-id view of the parent pointers (None at the root)."""
        ids = self.variable_ids
        return {
            int(ids[v]): (None if p < 0 else int(ids[p]))
            for v, p in enumerate(self.parents)
        }

    def children(self) -> list:
        kids = [[] for _ in range(self.n_vars)]
        for v, p in enumerate(self.parents):
            if p >= 0:
                kids[p].append(v)
        return kids

    def validate(self) -> None:
        """Raise AssertionError if any structural invariant is broken."""
        d = self.n_vars
        assert self.parents.shape == (d,) and self.order.shape == (d,)
        assert np.sum(self.parents < 0) == 1, "exactly one root"
        assert sorted(self.order.tolist()) == list(range(d))
        seen = set()
        for v in self.order:
            p = self.parents[v]
            assert p < 0 or p in seen, "order must place parents first"
            seen.add(int(v))
        for v in range(d):
            rows = self.cpt[v]
            expected = 1 if self.parents[v] < 0 else 2
            assert rows.shape == (expected, 2)
            assert np.all(rows >= 0) and np.all(rows <= 1)
            assert np.allclose(rows.sum(axis=1), 1.0, atol=1e-12)


def _mi_from_table(table: np.ndarray, total: float) -> float:
    p = table / total
    pi = p.sum(axis=1)
    pj = p.sum(axis=0)
    mi = 0.0
    for a in range(2):
        for b in range(2):
            if p[a, b] > 0:
                mi += p[a, b] * (math.log(p[a, b]) - math.log(pi[a]) - math.log(pj[b]))
    return max(mi, 0.0)


def mutual_information(d: WeightedDataset, i: int, j: int) -> float:
    """Empirical mutual information (nats) between variables i and j,
    from raw weighted counts, clamped at 0."""
    if i == j:
        raise DatasetError("mutual information needs two distinct variables")
    total = d.total_weight
    if total <= 0:
        raise DatasetError("mutual information of a zero-weight dataset")
    return _mi_from_table(pair_counts(d, i, j), total)


def _pairwise_counts(d: WeightedDataset):
    """All pairwise weighted counts at once.

    Returns (total, n1, n11) where n1[v] is the weight of rows with
    x_v = 1 and n11[u, v] the weight of rows with x_u = x_v = 1.
    """
    x = d.samples.astype(np.float64)
    n11 = (x * d.weights[:, None]).T @ x
    n1 = np.diag(n11).copy()
    return d.total_weight, n1, n11


def _mi_matrix(total: float, n1: np.ndarray, n11: np.ndarray) -> np.ndarray:
    dvars = len(n1)
    counts = np.empty((2, 2, dvars, dvars))
    counts[1, 1] = n11
    counts[1, 0] = n1[:, None] - n11
    counts[0, 1] = n1[None, :] - n11
    counts[0, 0] = total - n1[:, None] - n1[None, :] + n11
    counts = np.clip(counts, 0.0, None)  # guard tiny negative rounding
    p = counts / total
    pi = np.stack([1.0 - n1 / total, n1 / total])  # pi[a, v]
    mi = np.zeros((dvars, dvars))
    for a in range(2):
        for b in range(2):
            pab = p[a, b]
            denom = pi[a][:, None] * pi[b][None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                term = pab * (np.log(pab) - np.log(denom))
            mi += np.where(pab > 0, term, 0.0)
    np.fill_diagonal(mi, 0.0)
    return np.clip(mi, 0.0, None)


def _max_spanning_tree(mi: np.ndarray) -> list:
    """Kruskal on the complete graph; ties prefer the lexicographically
    smaller (i, j) pair, so results are reproducible."""
    dvars = mi.shape[0]
    edges = sorted(
        ((i, j) for i in range(dvars) for j in range(i + 1, dvars)),
        key=lambda e: (-mi[e[0], e[1]], e[0], e[1]),
    )
    parent = list(range(dvars))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    chosen = []
    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            chosen.append((i, j))
            if len(chosen) == dvars - 1:
                break
    return chosen


def _orient(dvars: int, edges: list):
    """Root at local index 0 and direct all edges away from it."""
    adj = [[] for _ in range(dvars)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    parents = np.full(dvars, -1, dtype=np.int64)
    order = np.empty(dvars, dtype=np.int64)
    order[0] = 0
    seen = np.zeros(dvars, dtype=bool)
    seen[0] = True
    head = 0
    filled = 1
    while head < filled:
        u = order[head]
        head += 1
        for v in sorted(adj[u]):
            if not seen[v]:
                seen[v] = True
                parents[v] = u
                order[filled] = v
                filled += 1
    return parents, order


def _smoothed_row(counts: np.ndarray, beta: float) -> np.ndarray:
    """(n_x + beta) / (n + 2 beta), falling back to uniform when both the
    counts and beta are zero."""
    denom = counts.sum() + 2.0 * beta
    if denom <= 0:
        return np.array([0.5, 0.5])
    return (counts + beta) / denom


def _fit_cpts(d: WeightedDataset, parents: np.ndarray, beta: float) -> list:
    """Maximum-likelihood CPTs with additive smoothing `beta`, for a fixed
    tree structure over exactly the dataset's variables."""
    cpts = []
    w = d.weights
    for v in range(d.n_vars):
        xv = d.samples[:, v].astype(np.int64)
        if parents[v] < 0:
            counts = np.zeros(2)
            np.add.at(counts, xv, w)
            cpts.append(_smoothed_row(counts, beta)[None, :])
        else:
            xu = d.samples[:, parents[v]].astype(np.int64)
            table = np.zeros((2, 2))
            np.add.at(table, (xu, xv), w)
            cpts.append(np.vstack([_smoothed_row(table[u], beta) for u in (0, 1)]))
    return cpts


def learn_clt(d: WeightedDataset, beta: float) -> ChowLiuTree:
    """Chow-Liu structure plus beta-smoothed CPTs.

    Mutual information uses the raw weighted counts (no smoothing); only
    the CPTs are smoothed.  Ties in the spanning tree and the rooting are
    broken deterministically (lowest indices win), so identical data
    always yields an identical tree.
    """
    if d.n_vars < 1:
        raise DatasetError("learn_clt needs at least one variable")
    dvars = d.n_vars
    if dvars == 1:
        parents = np.array([-1], dtype=np.int64)
        order = np.array([0], dtype=np.int64)
    else:
        total = d.total_weight
        if total > 0:
            total, n1, n11 = _pairwise_counts(d)
            mi = _mi_matrix(total, n1, n11)
        else:
            mi = np.zeros((dvars, dvars))
        edges = _max_spanning_tree(mi)
        parents, order = _orient(dvars, edges)
    cpts = _fit_cpts(d, parents, beta)
    return ChowLiuTree(d.variable_ids.copy(), parents, order, cpts)


def _check_scope(t: ChowLiuTree, d: WeightedDataset) -> None:
    if t.n_vars != d.n_vars or np.any(t.variable_ids != d.variable_ids):
        raise DatasetError("dataset variables do not match the tree scope")


def clt_log_density_rows(t: ChowLiuTree, x: np.ndarray, columns=None) -> np.ndarray:
    """Per-row log density of the assignments in `x`.

    `columns[v]` gives the column of x holding tree-local variable v;
    by default the columns are the tree scope in order.
    """
    if columns is None:
        columns = np.arange(t.n_vars)
    n = x.shape[0]
    ll = np.zeros(n)
    for v in t.order:
        with np.errstate(divide="ignore"):
            logrows = np.log(t.cpt[v])
        xv = x[:, columns[v]].astype(np.int64)
        p = t.parents[v]
        if p < 0:
            ll += logrows[0, xv]
        else:
            xu = x[:, columns[p]].astype(np.int64)
            ll += logrows[xu, xv]
    return ll


def clt_log_likelihood(t: ChowLiuTree, d: WeightedDataset) -> float:
    """Weighted data log-likelihood; -inf only when a required CPT entry
    is exactly zero (possible with beta = 0)."""
    _check_scope(t, d)
    if d.n_rows == 0:
        return 0.0
    rows = clt_log_density_rows(t, d.samples)
    live = d.weights > 0  # 0 * -inf would poison the sum
    return float(d.weights[live] @ rows[live])


def _bd_family(counts: np.ndarray, alpha: float) -> float:
    """Marginal likelihood of one Dirichlet(alpha/2, alpha/2) row with the
    given branch counts."""
    n = counts.sum()
    score = log_gamma(alpha) - log_gamma(alpha + n)
    for k in (0, 1):
        score += log_gamma(alpha / 2 + counts[k]) - log_gamma(alpha / 2)
    return score


def clt_bd_score(t: ChowLiuTree, d: WeightedDataset, alpha: float) -> float:
    """Closed-form log marginal likelihood of the tree structure.

    Parameters are integrated out against per-row Dirichlet(alpha/2,
    alpha/2) priors; the CPT values stored on the tree are ignored.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    _check_scope(t, d)
    w = d.weights
    score = 0.0
    for v in range(t.n_vars):
        xv = d.samples[:, v].astype(np.int64)
        if t.parents[v] < 0:
            counts = np.zeros(2)
            np.add.at(counts, xv, w)
            score += _bd_family(counts, alpha)
        else:
            xu = d.samples[:, t.parents[v]].astype(np.int64)
            table = np.zeros((2, 2))
            np.add.at(table, (xu, xv), w)
            for u in (0, 1):
                score += _bd_family(table[u], alpha)
    return score


def clt_sample(t: ChowLiuTree, rng: np.random.Generator) -> np.ndarray:
    """Ancestral sample, returned in scope (variable_ids) order."""
    values = np.zeros(t.n_vars, dtype=np.uint8)
    for v in t.order:
        p = t.parents[v]
        row = t.cpt[v][0] if p < 0 else t.cpt[v][values[p]]
        values[v] = 1 if rng.random() < row[1] else 0
    return values


def clt_mpe(t: ChowLiuTree, evidence: dict) -> tuple:
    """Most probable completion of `evidence` (a global-id -> value map).

    Exact max-product over the tree; ties are broken toward value 0.
    Returns (assignment over the scope in order, its log density).
    """
    id_to_local = {int(g): v for v, g in enumerate(t.variable_ids)}
    fixed = {}
    for g, val in evidence.items():
        if g not in id_to_local:
            raise DatasetError(f"evidence variable {g} outside tree scope")
        fixed[id_to_local[g]] = int(val)

    kids = t.children()
    # message[v][u] = best log score of v's subtree given parent value u
    msg = np.zeros((t.n_vars, 2))
    choice = np.zeros((t.n_vars, 2), dtype=np.int64)
    with np.errstate(divide="ignore"):
        logcpt = [np.log(c) for c in t.cpt]

    for v in t.order[::-1]:
        p = t.parents[v]
        n_pvals = 1 if p < 0 else 2
        for u in range(n_pvals):
            best, best_x = -math.inf, 0
            for x in (0, 1):
                if v in fixed and fixed[v] != x:
                    continue
                s = logcpt[v][u, x]
                for c in kids[v]:
                    s += msg[c, x]
                if s > best:
                    best, best_x = s, x
            msg[v, u] = best
            choice[v, u] = best_x

    values = np.zeros(t.n_vars, dtype=np.uint8)
    for v in t.order:
        p = t.parents[v]
        u = 0 if p < 0 else values[p]
        values[v] = choice[v, u]
    # re-evaluate so the returned score is exactly the assignment's density
    score = float(clt_log_density_rows(t, values[None, :])[0])
    return values, score


def clt_param_count(t: ChowLiuTree) -> int:
    """Independent parameters: 1 for the root row plus 2 per other family."""
    return 2 * t.n_vars - 1
