"""Cutset networks: decision trees over variables with Chow-Liu leaves.

A cutset network routes each sample down a binary decision tree.  Every
internal node conditions on one variable, weights its two branches, and
removes that variable from the child scopes; each leaf holds a Chow-Liu
tree over the variables that remain.  The density of a sample is the
product of the branch weights along its path times the leaf density.

The learner is greedy: at every leaf it ranks conditioning candidates by
information gain, evaluates the top few by the exact local change of the
configured structure score, and keeps cutting while the best change is
positive.  No other stopping rule exists; the score penalties are what
end the recursion.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .clt import ChowLiuTree, clt_log_density_rows, clt_mpe, clt_sample, learn_clt
from .data import DatasetError, WeightedDataset
from .scores import BIC, CutCandidate, ScoreConfig, evaluate_cut

__all__ = [
    "Leaf",
    "DecisionNode",
    "CutsetNetwork",
    "LearnerConfig",
    "information_gain",
    "select_best_candidates",
    "select_best_cut",
    "learn_cnet",
    "cnet_log_density",
    "cnet_log_density_rows",
    "cnet_sample",
    "cnet_mpe",
]


@dataclass(eq=False)
class Leaf:
    """Terminal node: a Chow-Liu tree over the remaining scope."""

    tree: ChowLiuTree
    kind = "leaf"


@dataclass(eq=False)
class DecisionNode:
    """Conditions on one variable (global id); weights sum to one and the
    conditioned variable is absent from both child scopes."""

    var: int
    weights: np.ndarray
    children: tuple
    kind = "decision"


@dataclass(eq=False)
class CutsetNetwork:
    root: object
    variable_ids: np.ndarray

    @property
    def n_vars(self) -> int:
        return len(self.variable_ids)

    def column_of(self, var: int) -> int:
        pos = int(np.searchsorted(self.variable_ids, var))
        if pos >= self.n_vars or self.variable_ids[pos] != var:
            raise DatasetError(f"variable {var} not in network scope")
        return pos

    def validate(self) -> None:
        """Check scope bookkeeping at every node; raises on violation."""

        def rec(node, scope: np.ndarray) -> None:
            if node.kind == "leaf":
                assert np.array_equal(node.tree.variable_ids, scope)
                node.tree.validate()
                return
            assert node.var in scope
            assert node.weights.shape == (2,)
            assert abs(float(node.weights.sum()) - 1.0) <= 1e-12
            assert np.all(node.weights >= 0)
            child_scope = scope[scope != node.var]
            for child in node.children:
                rec(child, child_scope)

        rec(self.root, self.variable_ids)


@dataclass
class LearnerConfig:
    """Greedy-learner knobs: the structure score and the number of
    highest-gain candidates evaluated exactly at each leaf."""

    score: ScoreConfig = field(default_factory=ScoreConfig)
    lam: int = 10

    def __post_init__(self) -> None:
        if self.lam < 1:
            raise ValueError("lam must be at least 1")


def _xlogx(c: np.ndarray) -> np.ndarray:
    out = np.zeros_like(c)
    m = c > 0
    out[m] = c[m] * np.log(c[m])
    return out


def _mean_entropy(samples: np.ndarray, weights: np.ndarray) -> float:
    """Average over columns of the weighted binary entropy (nats)."""
    total = float(weights.sum())
    if total <= 0:
        return 0.0
    c1 = weights @ samples
    c0 = total - c1
    h = math.log(total) - (_xlogx(c0) + _xlogx(c1)) / total
    return float(h.mean())


def information_gain(d: WeightedDataset, var: int) -> float:
    """Drop in the column-averaged entropy when the rows are split on
    `var`.  The split keeps every column (including `var`, which is then
    constant in each part), so a constant variable scores exactly zero.
    """
    if d.n_vars < 2:
        raise DatasetError("information gain needs at least two variables")
    col = int(np.searchsorted(d.variable_ids, var))
    if col >= d.n_vars or d.variable_ids[col] != var:
        raise DatasetError(f"variable {var} not in dataset")
    total = d.total_weight
    if total <= 0:
        raise DatasetError("information gain of a zero-weight dataset")
    gain = _mean_entropy(d.samples, d.weights)
    vals = d.samples[:, col]
    for k in (0, 1):
        mask = vals == k
        wk = d.weights[mask]
        part = float(wk.sum())
        if part > 0:
            gain -= (part / total) * _mean_entropy(d.samples[mask], wk)
    return gain


def select_best_candidates(d: WeightedDataset, lam: int) -> list:
    """Top-lam variables by information gain; ties broken toward the
    lower variable id."""
    if lam < 1:
        raise ValueError("lam must be at least 1")
    if d.n_vars < 2:
        raise DatasetError("candidate selection needs at least two variables")
    ranked = sorted(
        (int(v) for v in d.variable_ids),
        key=lambda v: (-information_gain(d, v), v),
    )
    return ranked[: min(lam, len(ranked))]


def _select_best_cut(
    leaf_tree: ChowLiuTree,
    d_leaf: WeightedDataset,
    candidates: list,
    score: ScoreConfig,
):
    best = None
    for var in sorted(candidates):
        cand = evaluate_cut(leaf_tree, d_leaf, var, score)
        if best is None or cand.delta > best.delta:
            best = cand
    if best is None or best.delta <= 0:
        return None
    return best


def select_best_cut(
    d_leaf: WeightedDataset, candidates: list, cfg: LearnerConfig
) -> CutCandidate | None:
    """Best candidate cut of a leaf learned on `d_leaf`, or None when no
    candidate improves the score."""
    leaf_tree = learn_clt(d_leaf, cfg.score.fit_beta)
    return _select_best_cut(leaf_tree, d_leaf, candidates, cfg.score)


def _decision_weights(n0: float, n1: float, score: ScoreConfig) -> np.ndarray:
    h = score.alpha / 2.0 if score.kind != BIC else score.beta
    denom = n0 + n1 + 2 * h
    return np.array([(n0 + h) / denom, (n1 + h) / denom])


def learn_cnet(
    d: WeightedDataset, cfg: LearnerConfig, trace: list | None = None
) -> CutsetNetwork:
    """Greedy top-down learner.

    When `trace` is a list, one record per accepted cut is appended:
    {"var", "delta", "n0", "n1", "depth"}.  The BIC penalty base is
    pinned to the entry dataset's total weight for the whole recursion.
    """
    if not d.total_weight > 0:
        raise DatasetError("cannot learn from a zero-weight dataset")
    score = cfg.score
    if score.kind == BIC:
        score = dataclasses.replace(score, root_dataset_size=d.total_weight)

    def build(dsub: WeightedDataset, tree: ChowLiuTree | None, depth: int):
        if tree is None:
            tree = learn_clt(dsub, score.fit_beta)
        if dsub.n_vars >= 2 and dsub.total_weight > 0:
            cands = select_best_candidates(dsub, cfg.lam)
            cut = _select_best_cut(tree, dsub, cands, score)
            if cut is not None:
                if trace is not None:
                    trace.append(
                        {
                            "var": cut.var,
                            "delta": cut.delta,
                            "n0": cut.counts.n0,
                            "n1": cut.counts.n1,
                            "depth": depth,
                        }
                    )
                children = tuple(
                    build(cut.child_data[k], cut.child_trees[k], depth + 1)
                    for k in (0, 1)
                )
                weights = _decision_weights(cut.counts.n0, cut.counts.n1, score)
                return DecisionNode(cut.var, weights, children)
        return Leaf(tree)

    return CutsetNetwork(build(d, None, 0), d.variable_ids.copy())


def _check_assignment_matrix(net: CutsetNetwork, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[1] != net.n_vars:
        raise DatasetError("assignment matrix does not match the network scope")
    if x.size and not np.all((x == 0) | (x == 1)):
        raise DatasetError("assignments must be 0/1")
    return x.astype(np.uint8, copy=False)


def cnet_log_density_rows(net: CutsetNetwork, x: np.ndarray) -> np.ndarray:
    """Per-row log density of full assignments given in scope order."""
    x = _check_assignment_matrix(net, x)
    ll = np.zeros(x.shape[0])

    def rec(node, idx: np.ndarray) -> None:
        if idx.size == 0:
            return
        if node.kind == "leaf":
            cols = np.searchsorted(net.variable_ids, node.tree.variable_ids)
            ll[idx] += clt_log_density_rows(node.tree, x[idx], columns=cols)
            return
        vals = x[idx, net.column_of(node.var)]
        for k in (0, 1):
            sub = idx[vals == k]
            if sub.size:
                w = float(node.weights[k])
                ll[sub] += math.log(w) if w > 0 else -math.inf
                rec(node.children[k], sub)

    rec(net.root, np.arange(x.shape[0]))
    return ll


def cnet_log_density(net: CutsetNetwork, x: np.ndarray) -> float:
    """Log density of one full assignment in scope order."""
    return float(cnet_log_density_rows(net, np.asarray(x)[None, :])[0])


def cnet_sample(net: CutsetNetwork, rng: np.random.Generator) -> np.ndarray:
    """One ancestral sample in scope order: branch draws along the path,
    then the leaf's tree draws."""
    out = np.zeros(net.n_vars, dtype=np.uint8)
    node = net.root
    while node.kind == "decision":
        k = 1 if rng.random() < node.weights[1] else 0
        out[net.column_of(node.var)] = k
        node = node.children[k]
    tree = node.tree
    if tree.n_vars:
        cols = np.searchsorted(net.variable_ids, tree.variable_ids)
        out[cols] = clt_sample(tree, rng)
    return out


def cnet_mpe(net: CutsetNetwork, evidence: dict) -> tuple:
    """Most probable completion of partial evidence.

    Evidence maps global variable ids to 0/1.  At an unobserved decision
    node both branches are maximized and compared including the branch
    weight; ties go to branch 0.  Returns (values in scope order, log
    density of the returned assignment); the score is recomputed through
    the density evaluator so the pair is exactly self-consistent.
    """
    scope = set(int(v) for v in net.variable_ids)
    ev_all = {int(v): int(val) for v, val in evidence.items()}
    for v, val in ev_all.items():
        if v not in scope:
            raise DatasetError(f"evidence variable {v} outside the network scope")
        if val not in (0, 1):
            raise DatasetError("evidence values must be 0 or 1")

    def rec(node):
        if node.kind == "leaf":
            ids = node.tree.variable_ids
            ev = {int(g): ev_all[int(g)] for g in ids if int(g) in ev_all}
            vals, s = clt_mpe(node.tree, ev)
            return dict(zip((int(g) for g in ids), (int(v) for v in vals))), s
        logw = [
            math.log(float(w)) if w > 0 else -math.inf for w in node.weights
        ]
        if int(node.var) in ev_all:
            k = ev_all[int(node.var)]
            assign, s = rec(node.children[k])
        else:
            a0, s0 = rec(node.children[0])
            a1, s1 = rec(node.children[1])
            k = 1 if logw[1] + s1 > logw[0] + s0 else 0
            assign, s = (a0, s0) if k == 0 else (a1, s1)
        assign[int(node.var)] = k
        return assign, s + logw[k]

    assign, _ = rec(net.root)
    values = np.array(
        [assign[int(v)] for v in net.variable_ids], dtype=np.uint8
    )
    return values, cnet_log_density(net, values)
