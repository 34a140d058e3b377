"""Structure scores for cutset networks.

Two scores drive the greedy learner:

* the Bayes-Dirichlet (BD) score -- the exact log marginal likelihood of
  a structure with Dirichlet priors on every decision weight pair and
  every CPT row, computed in closed form via log-Gamma terms; and
* a corrected BIC score -- smoothed maximum-likelihood fit minus
  (log N / 2) times the number of independent parameters, counting both
  the decision weights and the Chow-Liu-tree CPT entries.

Both scores decompose over nodes, so the effect of replacing one leaf by
a decision node is a purely local delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clt import (
    ChowLiuTree,
    _fit_cpts,
    clt_bd_score,
    clt_log_likelihood,
    clt_param_count,
    learn_clt,
)
from .data import WeightedDataset, DatasetError, restrict
from .numerics import log_beta

__all__ = [
    "ScoreConfig",
    "SumNodeCounts",
    "bd_sum_node",
    "bd_cnet",
    "bic_cnet",
    "cut_score_delta",
    "evaluate_cut",
    "CutCandidate",
    "structure_param_count",
]

BD = "bd"
BIC = "bic"


@dataclass
class ScoreConfig:
    """Which structure score to use, and its (few) constants.

    alpha is the equivalent sample size of the BD score's Dirichlet
    priors; beta the Laplace smoothing of the BIC fit;
    root_dataset_size the penalty base |D| of BIC, which is always the
    full training-set weight, never a local sub-dataset size.
    """

    kind: str = BD
    alpha: float = 0.1
    beta: float = 0.01
    root_dataset_size: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in (BD, BIC):
            raise ValueError(f"unknown score kind {self.kind!r}")
        if self.kind == BD and not self.alpha > 0:
            raise ValueError("BD score needs alpha > 0")
        if self.kind == BIC:
            if self.beta < 0:
                raise ValueError("beta must be nonnegative")
            if not self.root_dataset_size > 0:
                raise ValueError("root_dataset_size must be positive")

    @property
    def fit_beta(self) -> float:
        """Smoothing used when fitting parameters under this score: the
        Dirichlet posterior mean for BD, plain Laplace beta for BIC."""
        return self.alpha / 2.0 if self.kind == BD else self.beta


@dataclass
class SumNodeCounts:
    """Weighted counts routed to the two branches of one decision node."""

    n0: float
    n1: float

    def __post_init__(self) -> None:
        if self.n0 < 0 or self.n1 < 0:
            raise ValueError("branch counts must be nonnegative")

    @property
    def total(self) -> float:
        return self.n0 + self.n1


def bd_sum_node(counts: SumNodeCounts, alpha: float) -> float:
    """Log marginal likelihood of one decision node's branch counts under
    a Dirichlet(alpha/2, alpha/2) prior on its weight pair."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return log_beta(alpha / 2 + counts.n0, alpha / 2 + counts.n1) - log_beta(
        alpha / 2, alpha / 2
    )


def _check_net_scope(net, d: WeightedDataset) -> None:
    if len(net.variable_ids) != d.n_vars or np.any(net.variable_ids != d.variable_ids):
        raise DatasetError("dataset variables do not match the network scope")


def bd_cnet(net, d: WeightedDataset, alpha: float) -> float:
    """Exact log marginal likelihood of a whole cutset-network structure:
    the sum of per-decision-node and per-leaf local scores over the data
    routed to each node."""
    _check_net_scope(net, d)

    def rec(node, dsub: WeightedDataset) -> float:
        if node.kind == "leaf":
            return clt_bd_score(node.tree, dsub, alpha)
        d0 = restrict(dsub, node.var, 0)
        d1 = restrict(dsub, node.var, 1)
        local = bd_sum_node(SumNodeCounts(d0.total_weight, d1.total_weight), alpha)
        return local + rec(node.children[0], d0) + rec(node.children[1], d1)

    return rec(net.root, d)


def structure_param_count(net) -> int:
    """Independent parameters of a cutset network: one per decision node
    plus 2d - 1 per leaf over d variables."""

    def rec(node) -> int:
        if node.kind == "leaf":
            return clt_param_count(node.tree)
        return 1 + rec(node.children[0]) + rec(node.children[1])

    return rec(net.root)


def _refit_tree(tree: ChowLiuTree, dsub: WeightedDataset, beta: float) -> ChowLiuTree:
    if tree.n_vars != dsub.n_vars or np.any(tree.variable_ids != dsub.variable_ids):
        raise DatasetError("dataset variables do not match the leaf scope")
    cpts = _fit_cpts(dsub, tree.parents, beta)
    return ChowLiuTree(tree.variable_ids, tree.parents, tree.order, cpts)


def _weighted_branch_ll(n0: float, n1: float, beta: float) -> float:
    """n0 log w0 + n1 log w1 at the smoothed ML weights."""
    total = n0 + n1
    ll = 0.0
    for nk in (n0, n1):
        if nk > 0:
            ll += nk * math.log((nk + beta) / (total + 2 * beta))
    return ll


def bic_cnet(net, d: WeightedDataset, cfg: ScoreConfig) -> float:
    """Penalized log-likelihood of the structure: parameters are refit on
    `d` with Laplace smoothing cfg.beta, and every independent parameter
    (decision weights and CPT rows alike) pays log|D|/2."""
    if cfg.kind != BIC:
        raise ValueError("bic_cnet requires a BIC score config")
    _check_net_scope(net, d)

    def rec(node, dsub: WeightedDataset) -> float:
        if node.kind == "leaf":
            refit = _refit_tree(node.tree, dsub, cfg.beta)
            return clt_log_likelihood(refit, dsub)
        d0 = restrict(dsub, node.var, 0)
        d1 = restrict(dsub, node.var, 1)
        ll = _weighted_branch_ll(d0.total_weight, d1.total_weight, cfg.beta)
        return ll + rec(node.children[0], d0) + rec(node.children[1], d1)

    ll = rec(net.root, d)
    penalty = 0.5 * math.log(cfg.root_dataset_size) * structure_param_count(net)
    return ll - penalty


@dataclass
class CutCandidate:
    """One evaluated conditioning candidate: the score delta plus the
    child trees and routed datasets, kept so an accepted cut does not
    have to relearn anything."""

    var: int
    delta: float
    counts: SumNodeCounts
    child_trees: tuple
    child_data: tuple


def evaluate_cut(
    leaf: ChowLiuTree, d_leaf: WeightedDataset, var: int, cfg: ScoreConfig
) -> CutCandidate:
    """Score change of replacing `leaf` by a decision node on `var` with
    two freshly learned Chow-Liu children."""
    if leaf.n_vars < 2:
        raise DatasetError("cannot cut a leaf with fewer than two variables")
    if var not in leaf.variable_ids:
        raise DatasetError(f"variable {var} not in leaf scope")
    d0 = restrict(d_leaf, var, 0)
    d1 = restrict(d_leaf, var, 1)
    counts = SumNodeCounts(d0.total_weight, d1.total_weight)
    t0 = learn_clt(d0, cfg.fit_beta)
    t1 = learn_clt(d1, cfg.fit_beta)

    if cfg.kind == BD:
        delta = (
            bd_sum_node(counts, cfg.alpha)
            + clt_bd_score(t0, d0, cfg.alpha)
            + clt_bd_score(t1, d1, cfg.alpha)
            - clt_bd_score(leaf, d_leaf, cfg.alpha)
        )
    else:
        ll_after = (
            _weighted_branch_ll(counts.n0, counts.n1, cfg.beta)
            + clt_log_likelihood(t0, d0)
            + clt_log_likelihood(t1, d1)
        )
        ll_before = clt_log_likelihood(_refit_tree(leaf, d_leaf, cfg.beta), d_leaf)
        extra_params = 2 * leaf.n_vars - 4
        penalty = 0.5 * math.log(cfg.root_dataset_size) * extra_params
        delta = ll_after - ll_before - penalty

    return CutCandidate(var, float(delta), counts, (t0, t1), (d0, d1))


def cut_score_delta(
    leaf: ChowLiuTree, d_leaf: WeightedDataset, var: int, cfg: ScoreConfig
) -> float:
    """Local score change of one candidate cut; positive means the cut
    improves the configured global score."""
    return evaluate_cut(leaf, d_leaf, var, cfg).delta
