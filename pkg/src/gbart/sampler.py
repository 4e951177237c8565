"""Back-fitting MCMC for the sum-of-trees regression model.

One sweep updates each tree in turn against the partial residuals left by
all the others (a Metropolis-Hastings move on the structure followed by a
conjugate redraw of its leaf values), then redraws the noise level from its
scaled-inverse-chi-square full conditional.  The response is affinely
mapped onto [-0.5, 0.5] before sampling.

A per-observation cache of the running sum-of-trees fit is maintained
incrementally; `audit_fit_cache` recomputes it from scratch for checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

import numpy as np
from scipy.stats import chi2

from .data import Dataset
from .errors import DegenerateResponseError, InvalidInputError
from .trees import (
    Change,
    Grow,
    Leaf,
    Prune,
    RegressionTree,
    SplitRule,
    _route_subtree,
    apply_move,
    tree_from_json,
    tree_to_json,
    tree_values,
)

if TYPE_CHECKING:  # pragma: no cover
    from .grouping import Partition

# Leaves must keep at least this many training observations; structural
# proposals that would violate it are rejected outright.
MIN_LEAF_SIZE = 5

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class McmcConfig:
    """Sampler configuration.

    Attributes:
        num_trees: ensemble size B.
        ndpost: retained post-burn-in draws.
        burn_in: discarded initial sweeps.
        alpha, beta: tree prior, P(split at depth d) = alpha * (1 + d)^(-beta).
        k: leaf-prior spread divisor; sigma_mu = 0.5 / (k * sqrt(B)).
        nu, q: noise prior degrees of freedom and calibration quantile.
        num_cutpoints: uniformly spaced candidate cut values per variable.
        proposal_probs: (grow, prune, change) proposal mix, summing to 1.
        fixed_sigma: when set, the noise level is pinned instead of sampled
            (diagnostic use, e.g. flat-likelihood prior checks).
    """

    num_trees: int = 200
    ndpost: int = 1000
    burn_in: int = 100
    alpha: float = 0.95
    beta: float = 2.0
    k: float = 2.0
    nu: float = 3.0
    q: float = 0.90
    num_cutpoints: int = 100
    proposal_probs: tuple[float, float, float] = (0.3, 0.3, 0.4)
    fixed_sigma: float | None = None

    def __post_init__(self):
        if self.num_trees < 1:
            raise InvalidInputError("num_trees must be positive")
        if self.ndpost < 1:
            raise InvalidInputError("ndpost must be positive")
        if self.burn_in < 0:
            raise InvalidInputError("burn_in must be non-negative")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInputError("alpha must lie in (0, 1)")
        if self.beta < 0.0:
            raise InvalidInputError("beta must be non-negative")
        if self.k <= 0.0 or self.nu <= 0.0:
            raise InvalidInputError("k and nu must be positive")
        if not 0.0 < self.q < 1.0:
            raise InvalidInputError("q must lie in (0, 1)")
        if self.num_cutpoints < 1:
            raise InvalidInputError("num_cutpoints must be positive")
        probs = tuple(float(p) for p in self.proposal_probs)
        if len(probs) != 3 or min(probs) < 0.0:
            raise InvalidInputError("proposal_probs must be three non-negative reals")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise InvalidInputError("proposal_probs must sum to 1 within 1e-12")
        object.__setattr__(self, "proposal_probs", probs)
        if self.fixed_sigma is not None and self.fixed_sigma <= 0.0:
            raise InvalidInputError("fixed_sigma must be positive")

    def sigma_mu(self) -> float:
        return 0.5 / (self.k * math.sqrt(self.num_trees))

    def to_json(self) -> dict:
        return {
            "num_trees": self.num_trees,
            "ndpost": self.ndpost,
            "burn_in": self.burn_in,
            "alpha": self.alpha,
            "beta": self.beta,
            "k": self.k,
            "nu": self.nu,
            "q": self.q,
            "num_cutpoints": self.num_cutpoints,
            "proposal_probs": list(self.proposal_probs),
            "fixed_sigma": self.fixed_sigma,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "McmcConfig":
        kwargs = dict(obj)
        kwargs["proposal_probs"] = tuple(kwargs["proposal_probs"])
        return cls(**kwargs)


@dataclass(frozen=True)
class ResponseTransform:
    """Affine map sending [y_min, y_max] onto [-0.5, 0.5]."""

    y_min: float
    y_max: float

    def __post_init__(self):
        if not self.y_max > self.y_min:
            raise DegenerateResponseError("y_max must exceed y_min")

    def apply(self, y) -> np.ndarray:
        return (np.asarray(y, dtype=np.float64) - self.y_min) / (
            self.y_max - self.y_min
        ) - 0.5

    def invert(self, scaled) -> np.ndarray:
        return (np.asarray(scaled, dtype=np.float64) + 0.5) * (
            self.y_max - self.y_min
        ) + self.y_min


@dataclass(frozen=True)
class Ensemble:
    """One retained posterior draw: B trees and the noise level (scaled units)."""

    trees: tuple[RegressionTree, ...]
    sigma: float


@dataclass(frozen=True)
class ChainState:
    """Sampler state: current trees, noise level, and the cached sum-of-trees fit."""

    trees: tuple[RegressionTree, ...]
    sigma: float
    fit_cache: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise InvalidInputError("sigma must be positive and finite")


@dataclass
class ChainDiagnostics:
    """Proposal bookkeeping accumulated over a chain."""

    grow_proposed: int = 0
    grow_accepted: int = 0
    prune_proposed: int = 0
    prune_accepted: int = 0
    change_proposed: int = 0
    change_accepted: int = 0
    auto_rejected: int = 0
    mean_tree_depth: float = 0.0

    @property
    def accepted(self) -> int:
        return self.grow_accepted + self.prune_accepted + self.change_accepted

    @property
    def proposed(self) -> int:
        return self.grow_proposed + self.prune_proposed + self.change_proposed


@dataclass(frozen=True)
class FitResult:
    """Retained posterior snapshots plus everything needed to predict."""

    snapshots: tuple[Ensemble, ...]
    transform: ResponseTransform
    partition: "Partition | None"
    config: McmcConfig
    seed: int
    diagnostics: ChainDiagnostics | None = None


def scale_response(y) -> tuple[np.ndarray, ResponseTransform]:
    """Map the response onto [-0.5, 0.5]; raises if y is constant."""
    y = np.asarray(y, dtype=np.float64)
    y_min, y_max = float(y.min()), float(y.max())
    if y_max <= y_min:
        raise DegenerateResponseError(
            "response is constant; fit a mean predictor instead"
        )
    transform = ResponseTransform(y_min, y_max)
    return transform.apply(y), transform


def calibrate_lambda(sigma_hat: float, nu: float, q: float) -> float:
    """Noise-prior scale putting prior probability q on sigma < sigma_hat."""
    return float(chi2.ppf(1.0 - q, nu)) * sigma_hat**2 / nu


def leaf_log_marginal(
    n_leaf: int, sum_r: float, sumsq_r: float, sigma: float, sigma_mu: float
) -> float:
    """Log marginal likelihood of one leaf's residuals with the mean integrated out.

    Computes log of the integral over mu of
    prod_i Normal(r_i; mu, sigma^2) * Normal(mu; 0, sigma_mu^2),
    which depends on the residuals only through (n, sum, sum of squares).
    """
    if n_leaf == 0:
        return 0.0
    s2 = sigma * sigma
    sm2 = sigma_mu * sigma_mu
    denom = s2 + n_leaf * sm2
    return (
        -0.5 * n_leaf * math.log(_TWO_PI * s2)
        + 0.5 * math.log(s2 / denom)
        - sumsq_r / (2.0 * s2)
        + sm2 * sum_r * sum_r / (2.0 * s2 * denom)
    )


def _log_marginal_part(n_leaf: float, sum_r: float, s2: float, sm2: float) -> float:
    # leaf_log_marginal minus the terms that cancel in structural-move ratios
    # (the -n/2 log(2 pi s2) and -sumsq/(2 s2) pieces, both additive over any
    # fixed partition of the same observations).
    if n_leaf == 0:
        return 0.0
    denom = s2 + n_leaf * sm2
    return 0.5 * math.log(s2 / denom) + sm2 * sum_r * sum_r / (2.0 * s2 * denom)


def sample_leaf_values(
    tree: RegressionTree,
    leaf_stats: Mapping[int, tuple[float, float]],
    sigma: float,
    sigma_mu: float,
    rng: np.random.Generator,
) -> RegressionTree:
    """Redraw every leaf value from its conjugate normal posterior.

    leaf_stats maps leaf id to (count, residual sum); leaves absent from the
    mapping are treated as empty and draw from the prior.  Draws are made in
    sorted leaf-id order.
    """
    s2 = sigma * sigma
    ratio = s2 / (sigma_mu * sigma_mu)
    ids = tree.leaf_ids
    z = rng.standard_normal(len(ids))
    values: dict[int, float] = {}
    for i, nid in enumerate(ids):
        n_leaf, sum_r = leaf_stats.get(nid, (0.0, 0.0))
        denom = n_leaf + ratio
        values[nid] = sum_r / denom + math.sqrt(s2 / denom) * z[i]
    return tree._replace_leaf_values(values)


def sample_sigma(
    sse: float, n: int, nu: float, lam: float, rng: np.random.Generator
) -> float:
    """Draw the noise standard deviation: sigma^2 ~ (nu*lam + sse) / chi2(nu + n)."""
    return math.sqrt((nu * lam + sse) / rng.chisquare(nu + n))


class _ChainRunner:
    """Mutable engine for one chain; owns per-tree caches.

    Per tree it keeps the leaf assignment of every training row, the fitted
    value per row, and per-node observation counts, so a single tree update
    costs O(n) vector work regardless of ensemble size.
    """

    def __init__(
        self,
        X: np.ndarray,
        y: np.ndarray,
        trees: list[RegressionTree],
        config: McmcConfig,
        sigma: float,
    ):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        self.n, self.p = self.X.shape
        self.config = config
        self.sigma = sigma
        self.sigma_mu = config.sigma_mu()
        self.cols = [np.ascontiguousarray(self.X[:, j]) for j in range(self.p)]
        self.cutgrids = [self._cutgrid(j) for j in range(self.p)]
        self.trees = list(trees)
        all_rows = np.arange(self.n)
        self.assign = [
            np.full(self.n, t.root, dtype=np.int64)
            if t.is_stump()
            else _route_subtree(t, t.root, self.X, all_rows)
            for t in self.trees
        ]
        self.fit = [tree_values(t, self.X) for t in self.trees]
        self.counts = [
            np.bincount(a, minlength=t.next_id).astype(np.float64)
            for a, t in zip(self.assign, self.trees)
        ]
        self.fit_cache = np.sum(self.fit, axis=0)
        self.diag = ChainDiagnostics()
        self._r = np.empty(self.n)
        self._all_rows = np.arange(self.n)

    def _cutgrid(self, j: int) -> np.ndarray:
        lo = float(self.cols[j].min())
        hi = float(self.cols[j].max())
        if hi <= lo:
            return np.empty(0)
        return np.linspace(lo, hi, self.config.num_cutpoints + 2)[1:-1]

    def _split_prob(self, depth: int) -> float:
        return self.config.alpha * (1.0 + depth) ** (-self.config.beta)

    def update_tree(self, b: int, rng: np.random.Generator) -> bool:
        """One Metropolis-Hastings structure move plus a full leaf redraw."""
        tree = self.trees[b]
        assign = self.assign[b]
        counts = self.counts[b]
        n = self.n

        # partial residuals: response minus every other tree's fit
        r = self._r
        np.subtract(self.y, self.fit_cache, out=r)
        r += self.fit[b]

        sums = np.bincount(assign, weights=r, minlength=tree.next_id)

        s2 = self.sigma * self.sigma
        sm2 = self.sigma_mu * self.sigma_mu
        pg, pp, _ = self.config.proposal_probs
        u = rng.random()

        accepted = False
        new_tree = None
        new_assign = None

        if u < pg:
            self.diag.grow_proposed += 1
            move = self._propose_grow(tree, assign, r, sums, s2, sm2, rng)
            if move is not None:
                log_ratio, grow, rows, left_mask = move
                if math.log(rng.random()) < log_ratio:
                    accepted = True
                    self.diag.grow_accepted += 1
                    new_tree = apply_move(tree, grow)
                    grown = new_tree.nodes[grow.leaf]
                    new_assign = assign.copy()
                    new_assign[rows[left_mask]] = grown.left
                    new_assign[rows[~left_mask]] = grown.right
        elif u < pg + pp:
            if not tree.prunable_ids:
                # impossible move: state unchanged, stream advanced
                self.diag.auto_rejected += 1
                return False
            self.diag.prune_proposed += 1
            log_ratio, node, lid, rid = self._propose_prune(
                tree, counts, sums, s2, sm2, rng
            )
            if math.log(rng.random()) < log_ratio:
                accepted = True
                self.diag.prune_accepted += 1
                new_tree = apply_move(tree, Prune(node))
                new_assign = assign.copy()
                new_assign[(assign == lid) | (assign == rid)] = node
        else:
            if not tree.internal_ids:
                self.diag.auto_rejected += 1
                return False
            self.diag.change_proposed += 1
            move = self._propose_change(tree, assign, r, counts, sums, s2, sm2, rng)
            if move is not None:
                log_ratio, change, rows, sub_assign = move
                if math.log(rng.random()) < log_ratio:
                    accepted = True
                    self.diag.change_accepted += 1
                    new_tree = apply_move(tree, change)
                    new_assign = assign.copy()
                    new_assign[rows] = sub_assign

        if accepted:
            tree = new_tree
            assign = new_assign
            counts = np.bincount(assign, minlength=tree.next_id).astype(np.float64)
            sums = np.bincount(assign, weights=r, minlength=tree.next_id)

        leaf_stats = {
            nid: (counts[nid], sums[nid]) for nid in tree.leaf_ids
        }
        tree = sample_leaf_values(tree, leaf_stats, self.sigma, self.sigma_mu, rng)

        lookup = np.zeros(tree.next_id)
        nodes = tree.nodes
        for nid in tree.leaf_ids:
            lookup[nid] = nodes[nid].value
        new_fit = lookup[assign]
        self.fit_cache += new_fit
        self.fit_cache -= self.fit[b]
        self.trees[b] = tree
        self.assign[b] = assign
        self.counts[b] = counts
        self.fit[b] = new_fit
        return accepted

    def _propose_grow(self, tree, assign, r, sums, s2, sm2, rng):
        leaf_ids = tree.leaf_ids
        leaf = leaf_ids[rng.integers(len(leaf_ids))]
        group = tree.group
        var = group[rng.integers(len(group))]
        grid = self.cutgrids[var]
        if grid.size == 0:
            return None
        cut = float(grid[rng.integers(grid.size)])

        rows = np.flatnonzero(assign == leaf)
        xv = self.cols[var][rows]
        left_mask = xv <= cut
        n_left = int(left_mask.sum())
        n_right = rows.size - n_left
        if n_left < MIN_LEAF_SIZE or n_right < MIN_LEAF_SIZE:
            return None

        sum_parent = float(sums[leaf])
        sum_left = float(r[rows[left_mask]].sum())
        sum_right = sum_parent - sum_left
        delta = (
            _log_marginal_part(n_left, sum_left, s2, sm2)
            + _log_marginal_part(n_right, sum_right, s2, sm2)
            - _log_marginal_part(rows.size, sum_parent, s2, sm2)
        )

        d = tree.depth_of(leaf)
        p_d = self._split_prob(d)
        p_d1 = self._split_prob(d + 1)
        log_prior = math.log(p_d) + 2.0 * math.log1p(-p_d1) - math.log1p(-p_d)

        # prunable count of the grown tree: the grown leaf becomes prunable,
        # and its parent stops being prunable if it was (sibling is a leaf)
        parent = tree.parents.get(leaf)
        sibling_leaf = False
        if parent is not None:
            rec = tree.nodes[parent]
            sib = rec.right if rec.left == leaf else rec.left
            sibling_leaf = type(tree.nodes[sib]) is Leaf
        n_prunable_after = len(tree.prunable_ids) + 1 - (1 if sibling_leaf else 0)

        pg, pp, _ = self.config.proposal_probs
        log_proposal = math.log(pp * len(leaf_ids)) - math.log(pg * n_prunable_after)
        move = Grow(leaf, SplitRule(var, cut))
        return delta + log_prior + log_proposal, move, rows, left_mask

    def _propose_prune(self, tree, counts, sums, s2, sm2, rng):
        prunables = tree.prunable_ids
        node = prunables[rng.integers(len(prunables))]
        internal = tree.nodes[node]
        lid, rid = internal.left, internal.right
        n_l, n_r = counts[lid], counts[rid]
        sum_l, sum_r = float(sums[lid]), float(sums[rid])
        delta = (
            _log_marginal_part(n_l + n_r, sum_l + sum_r, s2, sm2)
            - _log_marginal_part(n_l, sum_l, s2, sm2)
            - _log_marginal_part(n_r, sum_r, s2, sm2)
        )

        d = tree.depth_of(node)
        p_d = self._split_prob(d)
        p_d1 = self._split_prob(d + 1)
        log_prior = math.log(p_d) + 2.0 * math.log1p(-p_d1) - math.log1p(-p_d)

        pg, pp, _ = self.config.proposal_probs
        # the pruned tree has one leaf fewer
        log_proposal = math.log(pg * len(prunables)) - math.log(
            pp * (len(tree.leaf_ids) - 1)
        )
        return delta - log_prior + log_proposal, node, lid, rid

    def _propose_change(self, tree, assign, r, counts, sums, s2, sm2, rng):
        internals = tree.internal_ids
        node = internals[rng.integers(len(internals))]
        group = tree.group
        var = group[rng.integers(len(group))]
        grid = self.cutgrids[var]
        if grid.size == 0:
            return None
        cut = float(grid[rng.integers(grid.size)])

        leaves_under = _leaves_under(tree, node)
        if node == tree.root:
            rows = self._all_rows
        else:
            mask = assign == leaves_under[0]
            for lid in leaves_under[1:]:
                mask |= assign == lid
            rows = np.flatnonzero(mask)

        # route: the new rule at `node`, the unchanged subtrees below it
        rec = tree.nodes[node]
        go_left = self.cols[var][rows] <= cut
        sub_assign = np.empty(rows.size, dtype=np.int64)
        sub_assign[go_left] = _route_subtree(tree, rec.left, self.X, rows[go_left])
        sub_assign[~go_left] = _route_subtree(tree, rec.right, self.X, rows[~go_left])

        new_counts = np.bincount(sub_assign, minlength=tree.next_id)
        new_sums = np.bincount(sub_assign, weights=r[rows], minlength=tree.next_id)
        delta = 0.0
        for nid in leaves_under:
            c = int(new_counts[nid])
            if c < MIN_LEAF_SIZE:
                return None
            delta += _log_marginal_part(c, float(new_sums[nid]), s2, sm2)
            delta -= _log_marginal_part(counts[nid], float(sums[nid]), s2, sm2)
        # change keeps the shape and draws rules uniformly, so the proposal
        # and rule-prior terms cancel exactly
        return delta, Change(node, SplitRule(var, cut)), rows, sub_assign

    def state(self) -> ChainState:
        return ChainState(tuple(self.trees), self.sigma, self.fit_cache.copy())


def _leaves_under(tree: RegressionTree, node: int) -> list[int]:
    out = []
    stack = [node]
    nodes = tree.nodes
    while stack:
        nid = stack.pop()
        rec = nodes[nid]
        if type(rec) is Leaf:
            out.append(nid)
        else:
            stack.append(rec.left)
            stack.append(rec.right)
    return sorted(out)


def mh_tree_update(
    tree_index: int,
    state: ChainState,
    data: Dataset,
    config: McmcConfig,
    rng: np.random.Generator,
) -> ChainState:
    """One structure-plus-leaves update of a single tree against partial residuals.

    Value-level convenience around the chain engine: rebuilds the per-tree
    caches from `state`, performs the update, and returns the new state.
    Impossible proposals (e.g. pruning a stump) leave everything unchanged
    except the RNG stream.
    """
    runner = _ChainRunner(data.X, data.y, list(state.trees), config, state.sigma)
    # trust the caller's cache; the update only needs it to be consistent
    runner.fit_cache = state.fit_cache.astype(np.float64).copy()
    runner.update_tree(tree_index, rng)
    return runner.state()


def audit_fit_cache(state: ChainState, X) -> float:
    """Max absolute difference between the cached fit and a full recomputation."""
    X = np.asarray(X, dtype=np.float64)
    total = np.zeros(X.shape[0])
    for tree in state.trees:
        total += tree_values(tree, X)
    return float(np.abs(state.fit_cache - total).max())


def _run_chain(
    data: Dataset,
    trees: list[RegressionTree],
    config: McmcConfig,
    rng: np.random.Generator,
    transform: ResponseTransform,
    partition,
    seed: int,
) -> tuple[FitResult, ChainState]:
    y = data.y
    n = data.n
    sigma_hat = float(np.std(y, ddof=1))
    lam = calibrate_lambda(sigma_hat, config.nu, config.q)
    sigma0 = config.fixed_sigma if config.fixed_sigma is not None else sigma_hat
    runner = _ChainRunner(data.X, y, trees, config, sigma0)

    snapshots: list[Ensemble] = []
    depth_total = 0.0
    total_sweeps = config.burn_in + config.ndpost
    for sweep in range(total_sweeps):
        for b in range(config.num_trees):
            runner.update_tree(b, rng)
        if config.fixed_sigma is None:
            sse = float(((y - runner.fit_cache) ** 2).sum())
            runner.sigma = sample_sigma(sse, n, config.nu, lam, rng)
        if sweep >= config.burn_in:
            snapshots.append(Ensemble(tuple(runner.trees), runner.sigma))
            depth_total += sum(t.max_depth for t in runner.trees) / config.num_trees

    runner.diag.mean_tree_depth = depth_total / config.ndpost
    result = FitResult(
        snapshots=tuple(snapshots),
        transform=transform,
        partition=partition,
        config=config,
        seed=seed,
        diagnostics=runner.diag,
    )
    return result, runner.state()


def run_chain(
    data: Dataset,
    trees: list[RegressionTree],
    config: McmcConfig,
    seed: int,
    *,
    transform: ResponseTransform,
    partition=None,
) -> FitResult:
    """Run burn_in + ndpost back-fitting sweeps over group-assigned trees.

    `data.y` must already be in scaled-response units (see `scale_response`);
    `transform` records how to map predictions back.  Each sweep updates
    every tree in order, then redraws the noise level from the total
    residuals.  One snapshot is retained per post-burn-in sweep.
    """
    result, _ = run_chain_with_state(
        data, trees, config, seed, transform=transform, partition=partition
    )
    return result


def run_chain_with_state(
    data: Dataset,
    trees: list[RegressionTree],
    config: McmcConfig,
    seed: int,
    *,
    transform: ResponseTransform,
    partition=None,
) -> tuple[FitResult, ChainState]:
    """As `run_chain`, but also returns the final chain state for auditing."""
    if data.n < 1:
        raise InvalidInputError("data must be nonempty")
    if len(trees) != config.num_trees:
        raise InvalidInputError(
            f"got {len(trees)} trees for num_trees={config.num_trees}"
        )
    rng = np.random.default_rng(seed)
    return _run_chain(data, trees, config, rng, transform, partition, seed)


def predict(fit: FitResult, X) -> np.ndarray:
    """Posterior-mean prediction on the original response scale.

    Per row: the sum-of-trees evaluation averaged over retained snapshots,
    mapped back through the inverse response transform.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidInputError(f"expected a 2-D predictor matrix, got shape {X.shape}")
    required = 0
    if fit.partition is not None:
        required = fit.partition.p
    for snap in fit.snapshots:
        for tree in snap.trees:
            for nid in tree.internal_ids:
                v = tree.nodes[nid].rule.variable + 1
                if v > required:
                    required = v
    if X.shape[1] < required:
        raise InvalidInputError(
            f"predictor matrix has {X.shape[1]} columns, model needs {required}"
        )
    if not np.isfinite(X).all():
        raise InvalidInputError("predictor matrix contains non-finite values")

    total = np.zeros(X.shape[0])
    constant = 0.0
    all_rows = np.arange(X.shape[0])
    for snap in fit.snapshots:
        for tree in snap.trees:
            if tree.is_stump():
                constant += tree.nodes[tree.root].value
            else:
                assign = _route_subtree(tree, tree.root, X, all_rows)
                lookup = np.zeros(tree.next_id)
                nodes = tree.nodes
                for nid in tree.leaf_ids:
                    lookup[nid] = nodes[nid].value
                total += lookup[assign]
    scaled = (total + constant) / len(fit.snapshots)
    return fit.transform.invert(scaled)


def save_model(fit: FitResult, path: str) -> None:
    """Write a fit to a JSON model file."""
    import json

    with open(path, "w") as fh:
        json.dump(model_to_json(fit), fh, sort_keys=True)


def model_to_json(fit: FitResult) -> dict:
    return {
        "transform": {"y_min": fit.transform.y_min, "y_max": fit.transform.y_max},
        "partition": None
        if fit.partition is None
        else [list(g) for g in fit.partition.groups],
        "config": fit.config.to_json(),
        "seed": fit.seed,
        "snapshots": [
            [tree_to_json(t) for t in snap.trees] for snap in fit.snapshots
        ],
        "sigmas": [snap.sigma for snap in fit.snapshots],
    }


def model_from_json(obj: dict) -> FitResult:
    from .grouping import Partition

    transform = ResponseTransform(obj["transform"]["y_min"], obj["transform"]["y_max"])
    partition = None
    if obj["partition"] is not None:
        partition = Partition.from_groups(obj["partition"])
    config = McmcConfig.from_json(obj["config"])
    snapshots = tuple(
        Ensemble(tuple(tree_from_json(t) for t in trees), sigma)
        for trees, sigma in zip(obj["snapshots"], obj["sigmas"])
    )
    return FitResult(
        snapshots=snapshots,
        transform=transform,
        partition=partition,
        config=config,
        seed=int(obj["seed"]),
    )


def load_model(path: str) -> FitResult:
    """Read a fit back from a JSON model file."""
    import json

    with open(path) as fh:
        return model_from_json(json.load(fh))
