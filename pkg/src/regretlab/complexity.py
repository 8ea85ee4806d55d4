"""Exact desk-scale computation of sequential complexities and bounds.

Everything here is exact at small scale: expectations over sign paths are
full enumerations, covering numbers are minimal set covers over selector
trees, the fat-shattering dimension is an exhaustive search with witness
normalization, and every closed-form bound has its tuning parameters
optimized by deterministic scalar searches.

All functions are pure; path sweeps and candidate searches are plain
reductions with no shared mutable state, so concurrent callers are safe.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .comparators import FiniteTableFamily
from .errors import DomainError, ResourceGuardError, ShapeError
from .scalarmin import adaptive_simpson, minimize_log_axis
from .trees import LabeledTree, SignPath, all_paths, prefix_index

PATH_ENUMERATION_GUARD = 20  # depth above which exact expectations refuse to run
COVER_CANDIDATE_GUARD = 10**6
SUP_SEARCH_GUARD = 10**9
FAT_SEARCH_GUARD = 10**7
_EPS = 1e-9


def _require_finite_table(family: Any) -> FiniteTableFamily:
    if not isinstance(family, FiniteTableFamily):
        raise DomainError("exact complexity computations need a finite table family")
    return family


def _check_depth(x: LabeledTree, guard: int) -> None:
    if x.depth > guard:
        raise ResourceGuardError(
            f"depth {x.depth} above the exact-enumeration guard {guard}; "
            "use the Monte Carlo estimator for larger depths",
            size_estimate=2.0**x.depth,
        )


# ---------------------------------------------------------------------------
# Rademacher complexities
# ---------------------------------------------------------------------------


def seq_rademacher(
    family: FiniteTableFamily, x: LabeledTree, guard: int = PATH_ENUMERATION_GUARD
) -> float:
    """Exact sequential Rademacher complexity of a finite family on tree ``x``:
    the mean over all sign paths of ``max_f sum_t eps_t f(x_t(eps))``."""
    family = _require_finite_table(family)
    _check_depth(x, guard)
    n = x.depth
    if n == 0:
        return 0.0
    node_vals = _node_value_arrays(family, x)
    per_path = []
    for path in all_paths(n, guard):
        sums = np.zeros(family.n_predictors)
        for t in range(1, n + 1):
            sums = sums + path[t - 1] * node_vals[t - 1][prefix_index(path[: t - 1])]
        per_path.append(float(sums.max()))
    return math.fsum(per_path) / 2.0**n


def seq_rademacher_mc(
    family: FiniteTableFamily,
    x: LabeledTree,
    n_samples: int,
    seed: int,
) -> tuple[float, float]:
    """Monte Carlo estimate of :func:`seq_rademacher` for depths past the
    exact guard.  Returns ``(estimate, standard_error)``; the generator is
    PCG64 seeded with ``seed`` so runs are reproducible."""
    family = _require_finite_table(family)
    rng = np.random.Generator(np.random.PCG64(seed))
    n = x.depth
    node_vals = _node_value_arrays(family, x)
    draws = np.empty(n_samples)
    for k in range(n_samples):
        path = tuple(int(s) for s in rng.choice((-1, 1), size=n))
        sums = np.zeros(family.n_predictors)
        for t in range(1, n + 1):
            sums = sums + path[t - 1] * node_vals[t - 1][prefix_index(path[: t - 1])]
        draws[k] = sums.max()
    est = float(draws.mean())
    stderr = float(draws.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else math.inf
    return est, stderr


def _node_value_arrays(family: FiniteTableFamily, x: LabeledTree) -> list[list[np.ndarray]]:
    """Per level, per node: vector of every predictor's value at the node."""
    return [
        [family.evaluate_all(label) for label in level] for level in x.levels
    ]


def offset_tree_max(
    trees: Sequence[LabeledTree],
    C: float,
    offset: Callable[[float], float],
    guard: int = PATH_ENUMERATION_GUARD,
) -> float:
    """Exact ``E max_w sum_t [2C eps_t w_t(eps) - offset(w_t(eps))]`` over an
    explicit finite collection of real-valued trees."""
    if not trees:
        raise DomainError("the tree collection must be nonempty")
    n = trees[0].depth
    for w in trees:
        if w.depth != n:
            raise ShapeError("all trees in the collection must share one depth")
    if n == 0:
        return 0.0
    _check_depth(trees[0], guard)
    per_path = []
    for path in all_paths(n, guard):
        best = -math.inf
        for w in trees:
            total = 0.0
            for t in range(1, n + 1):
                v = w.label_at(t, path)
                total += 2.0 * C * path[t - 1] * v - offset(v)
            best = max(best, total)
        per_path.append(best)
    return math.fsum(per_path) / 2.0**n


def offset_rademacher(
    family: FiniteTableFamily,
    x: LabeledTree,
    mu: LabeledTree,
    C: float,
    offset: Callable[[float], float],
    guard: int = PATH_ENUMERATION_GUARD,
) -> float:
    """Exact offset Rademacher complexity on given covariate and mean trees:
    ``E max_f sum_t [2C eps_t (f(x_t) - mu_t) - offset(f(x_t) - mu_t)]``."""
    family = _require_finite_table(family)
    if mu.depth != x.depth:
        raise ShapeError(
            f"mean tree depth {mu.depth} does not match covariate tree depth {x.depth}"
        )
    n = x.depth
    if n == 0:
        return 0.0
    _check_depth(x, guard)
    node_vals = _node_value_arrays(family, x)
    per_path = []
    for path in all_paths(n, guard):
        sums = np.zeros(family.n_predictors)
        for t in range(1, n + 1):
            idx = prefix_index(path[: t - 1])
            diffs = node_vals[t - 1][idx] - mu.levels[t - 1][idx]
            sign = path[t - 1]
            penal = np.array([offset(d) for d in diffs])
            sums = sums + (2.0 * C * sign) * diffs - penal
        per_path.append(float(sums.max()))
    return math.fsum(per_path) / 2.0**n


def offset_rademacher_sup(
    family: FiniteTableFamily,
    covariate_set: Sequence[Any],
    mu_grid: Sequence[float],
    n: int,
    C: float,
    offset: Callable[[float], float],
    initial_scores: Sequence[float] | None = None,
    guard: float = SUP_SEARCH_GUARD,
) -> float:
    """Exact supremum of the offset Rademacher complexity over all covariate
    trees labeled from ``covariate_set`` and mean trees labeled from
    ``mu_grid``.

    The supremum decomposes node-by-node because each node is reached under
    exactly one sign prefix, so an optimal labeling can be chosen by backward
    induction over (round, per-predictor partial sums).  ``initial_scores``
    seeds the per-predictor sums (used by the conditional relaxation, which
    subtracts past losses before taking the supremum over the future).
    """
    family = _require_finite_table(family)
    if not covariate_set or not mu_grid:
        raise DomainError("covariate set and mean grid must be nonempty")
    size = (len(covariate_set) * len(mu_grid)) ** (2**n - 1)
    if size > guard:
        raise ResourceGuardError(
            "offset supremum search above the guard", size_estimate=float(size)
        )
    if initial_scores is None:
        scores0 = np.zeros(family.n_predictors)
    else:
        scores0 = np.asarray(initial_scores, dtype=float)
        if scores0.shape != (family.n_predictors,):
            raise ShapeError("initial_scores must have one entry per predictor")

    value_table = {x: family.evaluate_all(x) for x in covariate_set}
    penal_cache: dict[tuple[Any, float], tuple[np.ndarray, np.ndarray]] = {}
    for x in covariate_set:
        for mu in mu_grid:
            diffs = value_table[x] - mu
            penal = np.array([offset(d) for d in diffs])
            penal_cache[(x, mu)] = (diffs, penal)

    def best_from(t: int, scores: np.ndarray) -> float:
        if t > n:
            return float(scores.max())
        best = -math.inf
        for x in covariate_set:
            for mu in mu_grid:
                diffs, penal = penal_cache[(x, mu)]
                up = best_from(t + 1, scores + 2.0 * C * diffs - penal)
                down = best_from(t + 1, scores - 2.0 * C * diffs - penal)
                best = max(best, 0.5 * (up + down))
        return best

    return best_from(1, scores0)


# ---------------------------------------------------------------------------
# Finite-collection bounds
# ---------------------------------------------------------------------------


def finite_class_offset_bound(
    size_W: int, n: int, C: float, gamma_star: Callable[[float], float]
) -> float:
    """Bound on the offset maximum over any ``size_W`` trees of depth ``n``:
    ``inf_{lam > 0} [log(size_W)/lam + n * gamma_star(2 C^2 lam)]``.

    The infimum runs over a bracketing grid on log-lambda in [-30, 30] with
    golden-section refinement; +inf branches are skipped.  Returns +inf when
    every lambda is infeasible.
    """
    if size_W < 1:
        raise DomainError(f"collection size must be >= 1, got {size_W}")
    log_w = math.log(size_W)

    def objective(lam: float) -> float:
        g = gamma_star(2.0 * C * C * lam)
        if math.isinf(g):
            return math.inf
        return log_w / lam + n * g

    _, best = minimize_log_axis(objective)
    return best


def finite_class_linear_bound(trees: Sequence[LabeledTree], G: float) -> float:
    """``G * sqrt(2 log|W| * max_{w, eps} sum_t w_t(eps)^2)`` with the inner
    maximum computed exhaustively over trees and paths."""
    if not trees:
        raise DomainError("the tree collection must be nonempty")
    n = trees[0].depth
    for w in trees:
        if w.depth != n:
            raise ShapeError("all trees in the collection must share one depth")
    if len(trees) == 1 or n == 0:
        return 0.0
    max_sq = 0.0
    for w in trees:
        for path in all_paths(n):
            total = math.fsum(v * v for v in w.path_values(path))
            max_sq = max(max_sq, total)
    return G * math.sqrt(2.0 * math.log(len(trees)) * max_sq)


# ---------------------------------------------------------------------------
# Sequential covers
# ---------------------------------------------------------------------------


@dataclass
class CoverReport:
    """A minimal cover with its witness assignment.

    ``certificate`` maps ``(predictor handle, sign path)`` to the index into
    ``cover`` of the tree within ``beta`` of that evaluation.
    """

    beta: float
    norm: str
    size: int
    cover: tuple[LabeledTree, ...]
    certificate: dict[tuple[int, SignPath], int] = field(repr=False)

    def validate(self, family: FiniteTableFamily, x: LabeledTree) -> bool:
        n = x.depth
        for (handle, path), vi in self.certificate.items():
            v = self.cover[vi]
            fn = family.predictor(handle)
            devs = [
                abs(fn(x.label_at(t, path)) - v.label_at(t, path))
                for t in range(1, n + 1)
            ]
            if self.norm == "linf":
                if max(devs) > self.beta + _EPS:
                    return False
            else:
                if math.fsum(d * d for d in devs) > n * self.beta**2 + _EPS:
                    return False
        return True

    def to_json_dict(self) -> dict:
        return {
            "beta": self.beta,
            "norm": self.norm,
            "size": self.size,
            "cover": [[list(level) for level in v.levels] for v in self.cover],
            "certificate": [
                {"predictor": h, "path": list(p), "tree": vi}
                for (h, p), vi in sorted(self.certificate.items())
            ],
        }


def _exact_set_cover(masks: list[int], universe: int) -> list[int]:
    """Indices of a minimum-size subfamily of ``masks`` covering ``universe``.

    Greedy seeding provides the initial upper bound; branch and bound on the
    least-covered element makes the result exact.
    """
    full = (1 << universe) - 1

    # Greedy upper bound.
    greedy: list[int] = []
    uncovered = full
    while uncovered:
        i = max(range(len(masks)), key=lambda j: (masks[j] & uncovered).bit_count())
        if masks[i] & uncovered == 0:
            raise DomainError("candidate set cannot cover the universe")
        greedy.append(i)
        uncovered &= ~masks[i]
    best = list(greedy)

    covers_elem: dict[int, list[int]] = {}
    for e in range(universe):
        covers_elem[e] = [i for i, m in enumerate(masks) if m >> e & 1]

    max_size = max(m.bit_count() for m in masks)

    def search(uncovered: int, chosen: list[int]) -> None:
        nonlocal best
        if uncovered == 0:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        need = (uncovered.bit_count() + max_size - 1) // max_size
        if len(chosen) + need >= len(best):
            return
        # Branch on the uncovered element with the fewest candidate sets.
        elem = min(
            (e for e in range(universe) if uncovered >> e & 1),
            key=lambda e: len(covers_elem[e]),
        )
        for i in covers_elem[elem]:
            chosen.append(i)
            search(uncovered & ~masks[i], chosen)
            chosen.pop()

    search(full, [])
    return best


class CoverSearch:
    """Reusable minimal-cover search on one (family, covariate tree) pair.

    Candidate covers are selector trees: each node label is some predictor's
    value at that node.  The restriction keeps the search finite; it can
    overstate the unrestricted minimum by at most a doubling of the scale,
    which is why combinatorial comparisons are asserted at scale ``2 beta``.
    The per-node value tables and the candidate enumeration are shared
    across scales and norms.
    """

    def __init__(
        self,
        family: FiniteTableFamily,
        x: LabeledTree,
        guard: float = COVER_CANDIDATE_GUARD,
    ):
        self.family = _require_finite_table(family)
        self.x = x
        n = x.depth
        self.n = n
        self.n_f = family.n_predictors
        if n == 0 or self.n_f == 0:
            return
        self.offsets = [2 ** (t - 1) - 1 for t in range(1, n + 2)]
        self.node_fvals: list[np.ndarray] = []
        self.node_cands: list[np.ndarray] = []
        for t in range(1, n + 1):
            for i in range(2 ** (t - 1)):
                fv = family.evaluate_all(x.node_label(t, i))
                self.node_fvals.append(fv)
                self.node_cands.append(np.unique(fv))
        total = 1
        for c in self.node_cands:
            total *= len(c)
            if total > guard:
                raise ResourceGuardError(
                    "selector-tree candidate set above the guard",
                    size_estimate=float(total),
                )
        self.total = total
        dims = [len(c) for c in self.node_cands]
        self.choice = np.stack(
            np.unravel_index(np.arange(total), dims), axis=1
        )  # (total, n_nodes)
        self.paths = list(all_paths(n))
        self.path_nodes = [
            [self.offsets[t - 1] + prefix_index(p[: t - 1]) for t in range(1, n + 1)]
            for p in self.paths
        ]
        self.pairs = [(f, p) for f in range(self.n_f) for p in self.paths]

    def solve(self, beta: float, norm: str) -> CoverReport:
        if beta <= 0:
            raise DomainError(f"cover scale must be positive, got {beta}")
        if norm not in ("linf", "l2"):
            raise DomainError(f"norm must be 'linf' or 'l2', got {norm!r}")
        n, n_f = self.n, self.n_f
        if n == 0 or n_f == 0:
            empty_tree = LabeledTree([])
            cert = {(h, ()): 0 for h in range(n_f)} if n == 0 and n_f else {}
            return CoverReport(beta, norm, 1 if n_f else 0,
                               (empty_tree,) if n_f else (), cert)

        n_pairs = len(self.pairs)
        covered = np.empty((self.total, n_pairs), dtype=bool)
        for pi, nodes in enumerate(self.path_nodes):
            # All predictors at once for this path: (total, n_f).
            if norm == "linf":
                ok = np.ones((self.total, n_f), dtype=bool)
                for nd in nodes:
                    dev = np.abs(
                        self.node_cands[nd][:, None] - self.node_fvals[nd][None, :]
                    )
                    ok &= (dev <= beta + _EPS)[self.choice[:, nd]]
                block = ok
            else:
                dist = np.zeros((self.total, n_f))
                for nd in nodes:
                    dev = (
                        self.node_cands[nd][:, None] - self.node_fvals[nd][None, :]
                    ) ** 2
                    dist += dev[self.choice[:, nd]]
                block = dist <= n * beta**2 + _EPS
            covered[:, pi::len(self.paths)] = block

        packed = np.packbits(covered, axis=1, bitorder="little")
        uniq, first_idx = np.unique(packed, axis=0, return_index=True)
        masks = [int.from_bytes(row.tobytes(), "little") for row in uniq]
        reps = [int(i) for i in first_idx]
        # Keep only maximal masks: a dominated set can always be swapped out.
        keep = []
        for i, m in enumerate(masks):
            if not any(m != mj and m | mj == mj for mj in masks):
                keep.append(i)
        masks = [masks[i] for i in keep]
        reps = [reps[i] for i in keep]

        chosen = _exact_set_cover(masks, n_pairs)
        cover_trees = []
        for ci in chosen:
            cand = self.choice[reps[ci]]
            levels = []
            for t in range(1, n + 1):
                off = self.offsets[t - 1]
                levels.append(
                    [
                        float(self.node_cands[off + i][cand[off + i]])
                        for i in range(2 ** (t - 1))
                    ]
                )
            cover_trees.append(LabeledTree(levels))
        certificate = {}
        for col, (f, path) in enumerate(self.pairs):
            for k, ci in enumerate(chosen):
                if masks[ci] >> col & 1:
                    certificate[(f, path)] = k
                    break
            else:
                raise DomainError("internal cover search error: uncovered pair")
        return CoverReport(beta, norm, len(chosen), tuple(cover_trees), certificate)


def seq_cover_number(
    family: FiniteTableFamily,
    x: LabeledTree,
    beta: float,
    norm: str = "linf",
    guard: float = COVER_CANDIDATE_GUARD,
) -> CoverReport:
    """Smallest selector-tree cover of the family on tree ``x`` at scale
    ``beta``, by greedy seeding plus exact branch and bound.  Use
    :class:`CoverSearch` directly to amortize the setup across scales."""
    return CoverSearch(family, x, guard).solve(beta, norm)


# ---------------------------------------------------------------------------
# Fat-shattering dimension
# ---------------------------------------------------------------------------


@dataclass
class ShatterCertificate:
    """A shattered covariate tree with its witness and path selectors."""

    depth: int
    covariate_tree: LabeledTree
    witness: LabeledTree
    selectors: dict[SignPath, int]
    beta: float

    def validate(self, family: FiniteTableFamily) -> bool:
        for path, handle in self.selectors.items():
            fn = family.predictor(handle)
            for t in range(1, self.depth + 1):
                gap = path[t - 1] * (
                    fn(self.covariate_tree.label_at(t, path))
                    - self.witness.label_at(t, path)
                )
                if gap < self.beta / 2.0 - _EPS:
                    return False
        return True

    def to_json_dict(self) -> dict:
        return {
            "depth": self.depth,
            "beta": self.beta,
            "covariate_tree": [list(l) for l in self.covariate_tree.levels],
            "witness": [list(l) for l in self.witness.levels],
            "selectors": [
                {"path": list(p), "predictor": h} for p, h in sorted(self.selectors.items())
            ],
        }


def _witness_candidates(values: np.ndarray, extra: Sequence[float]) -> list[float]:
    """Midpoints of achievable value pairs, the values themselves, and any
    configured extra grid; a shattering witness can be normalized to these."""
    vals = sorted(set(float(v) for v in values))
    cands = set(vals)
    for a, b in itertools.combinations(vals, 2):
        cands.add((a + b) / 2.0)
    cands.update(float(e) for e in extra)
    return sorted(cands)


def fat_shattering(
    family: FiniteTableFamily,
    covariate_set: Sequence[Any] | None = None,
    beta: float = 1.0,
    max_depth: int = 8,
    extra_witness_grid: Sequence[float] = (),
    guard: float = FAT_SEARCH_GUARD,
) -> tuple[int, ShatterCertificate | None]:
    """Largest depth ``d <= max_depth`` at which some covariate tree is
    shattered at margin ``beta / 2`` around a witness tree, with certificate.

    The search is exhaustive over covariate labels and normalized witness
    labels; feasible predictor sets are tracked per path prefix, so the
    recursion memoizes on (alive predictors, remaining depth).
    """
    family = _require_finite_table(family)
    if beta <= 0:
        raise DomainError(f"shattering scale must be positive, got {beta}")
    xs = tuple(covariate_set) if covariate_set is not None else family.covariate_ids
    if not xs:
        raise DomainError("covariate set must be nonempty")
    witness: dict[Any, list[float]] = {}
    vals: dict[Any, np.ndarray] = {}
    for xv in xs:
        vals[xv] = family.evaluate_all(xv)
        witness[xv] = _witness_candidates(vals[xv], extra_witness_grid)
    est = (
        2.0 ** family.n_predictors
        * max_depth
        * len(xs)
        * max(len(w) for w in witness.values())
    )
    if est > guard:
        raise ResourceGuardError("shattering search above the guard", size_estimate=est)

    half = beta / 2.0 - _EPS
    all_f = frozenset(range(family.n_predictors))
    memo: dict[tuple[frozenset, int], tuple[Any, float] | None] = {}

    def can(alive: frozenset, k: int):
        """A (covariate, witness) choice shattering ``k`` more levels, or None."""
        if not alive:
            return None
        if k == 0:
            return ("", 0.0)  # sentinel: nonempty feasible set suffices
        key = (alive, k)
        if key in memo:
            return memo[key]
        found = None
        for xv in xs:
            fv = vals[xv]
            for s in witness[xv]:
                plus = frozenset(f for f in alive if fv[f] - s >= half)
                minus = frozenset(f for f in alive if s - fv[f] >= half)
                if plus and minus and can(plus, k - 1) and can(minus, k - 1):
                    found = (xv, s)
                    break
            if found:
                break
        memo[key] = found
        return found

    depth = 0
    while depth < max_depth and can(all_f, depth + 1):
        depth += 1
    if depth == 0:
        return 0, None

    # Reconstruct one shattered tree by replaying the recorded choices.
    cov_levels: list[list[Any]] = [[None] * 2 ** (t - 1) for t in range(1, depth + 1)]
    wit_levels: list[list[float]] = [[0.0] * 2 ** (t - 1) for t in range(1, depth + 1)]
    selectors: dict[SignPath, int] = {}

    def build(alive: frozenset, t: int, prefix: SignPath) -> None:
        k = depth - t + 1
        if k == 0:
            return
        xv, s = can(alive, k)
        idx = prefix_index(prefix)
        cov_levels[t - 1][idx] = xv
        wit_levels[t - 1][idx] = s
        fv = vals[xv]
        plus = frozenset(f for f in alive if fv[f] - s >= half)
        minus = frozenset(f for f in alive if s - fv[f] >= half)
        if t == depth:
            # Any predictor still alive at the leaf satisfies the margin
            # constraint at every level of its path.
            for sign, group in ((-1, minus), (1, plus)):
                selectors[prefix + (sign,)] = min(group)
        else:
            build(minus, t + 1, prefix + (-1,))
            build(plus, t + 1, prefix + (1,))

    build(all_f, 1, ())
    cert = ShatterCertificate(
        depth=depth,
        covariate_tree=LabeledTree(cov_levels),
        witness=LabeledTree(wit_levels),
        selectors=selectors,
        beta=beta,
    )
    return depth, cert


def cover_fat_bound(beta: float, n: int, fat: int) -> float:
    """Combinatorial bound ``(2 e n / beta) ** fat`` on the pointwise-scale
    sequential covering number of a [-1, 1]-valued class."""
    if fat == 0:
        return 1.0
    return (2.0 * math.e * n / beta) ** fat


# ---------------------------------------------------------------------------
# Chaining bounds
# ---------------------------------------------------------------------------


def dudley_bound(
    log_cover: Callable[[float], float],
    n: int,
    rho: float,
    gamma: float,
    rel_tol: float = 1e-8,
) -> float:
    """Integrated-entropy bound ``4 rho n + 12 sqrt(n) * int_rho^gamma
    sqrt(log_cover(delta)) d delta`` with adaptive Simpson quadrature."""
    if rho <= 0:
        raise DomainError(f"lower scale must be positive, got {rho}")
    if gamma < rho:
        raise DomainError(f"upper scale {gamma} below lower scale {rho}")
    integral = adaptive_simpson(
        lambda d: math.sqrt(max(log_cover(d), 0.0)), rho, gamma, rel_tol=rel_tol
    )
    return 4.0 * rho * n + 12.0 * math.sqrt(n) * integral


def chained_offset_bound(
    log_cover_linf: Callable[[float], float],
    n: int,
    C: float,
    gamma_star: Callable[[float], float],
) -> float:
    """Two-regime chaining bound on the offset complexity of a class with the
    given pointwise entropy: an integrated-entropy term up to radius gamma
    plus the finite-collection offset bound at scale gamma/2, minimized over
    gamma (and internally over the integration cutoff and the conjugate
    parameter) by nested searches on logarithmic axes."""
    if n == 0:
        return 0.0

    def finite_term(gamma: float) -> float:
        log_n_half = log_cover_linf(gamma / 2.0)

        def obj(lam: float) -> float:
            g = gamma_star(2.0 * C * C * lam)
            if math.isinf(g):
                return math.inf
            return log_n_half / lam + n * g

        _, best = minimize_log_axis(obj, coarse=121)
        return best

    def chaining_term(gamma: float) -> float:
        def obj(rho: float) -> float:
            if rho >= gamma:
                return math.inf
            return dudley_bound(log_cover_linf, n, rho, gamma, rel_tol=1e-6)

        _, best = minimize_log_axis(
            obj, log_lo=-20.0, log_hi=math.log(gamma), coarse=81
        )
        return best

    def total(gamma: float) -> float:
        return C * chaining_term(gamma) + finite_term(gamma)

    _, best = minimize_log_axis(total, log_lo=-18.0, log_hi=5.0, coarse=61)
    return best


# ---------------------------------------------------------------------------
# Rate formulas
# ---------------------------------------------------------------------------


def rate_exponent(p: float, r: float = 2.0) -> float:
    """Power of n in the per-round minimax rate for entropy exponent ``p``
    and curvature power ``r`` (identical for the upper and lower formulas)."""
    if p <= 0:
        raise DomainError(f"entropy exponent must be positive, got {p}")
    if r < 2:
        raise DomainError(f"curvature power must be >= 2, got {r}")
    if p < 2:
        return -r / (2.0 * (r - 1.0) + p)
    if p == 2:
        return -0.5
    return -1.0 / p


def rate_upper(
    p: float,
    r: float,
    G: float,
    K: float,
    n: int,
    c: float = 1.0,
    c_f: float = 1.0,
    with_log: bool = True,
) -> float:
    """Per-round upper rate for entropy exponent ``p`` and minorant
    ``K * t**r``.

    Below the critical exponent the rate is the better of the
    curvature-driven bound and the curvature-free ``G sqrt(log n / n)``
    bound; above it the curvature no longer helps.  ``with_log=False`` drops
    the logarithmic factors (used when extracting pure power-law slopes).
    """
    if p <= 0:
        raise DomainError(f"entropy exponent must be positive, got {p}")
    if r < 2:
        raise DomainError(f"curvature power must be >= 2, got {r}")
    if n < 2:
        raise DomainError(f"horizon must be >= 2, got {n}")
    log_n = math.log(n)
    if p < 2:
        denom = 2.0 * (r - 1.0) + p
        if K > 0:
            curved = (
                c
                * n ** (-r / denom)
                * G ** (2.0 * r / denom)
                * K ** (-(2.0 - p) / denom)
                * (log_n if with_log else 1.0)
            )
        else:
            curved = math.inf
        flat = c_f * G * (math.sqrt(log_n) if with_log else 1.0) * n**-0.5
        return min(curved, flat)
    if p == 2:
        # The massive-class bound picks up an extra log factor right at the
        # phase transition.
        return c * G * n**-0.5 * (math.sqrt(log_n) * log_n if with_log else 1.0)
    return c * G * n ** (-1.0 / p) * (math.sqrt(log_n) if with_log else 1.0)


def rate_lower(
    p: float,
    r: float,
    R: float,
    K: float,
    n: int,
    c: float = 1.0,
) -> float:
    """Per-round lower rate matching :func:`rate_upper` in its n-exponent."""
    if p <= 0:
        raise DomainError(f"entropy exponent must be positive, got {p}")
    if r < 2:
        raise DomainError(f"curvature power must be >= 2, got {r}")
    if n < 2:
        raise DomainError(f"horizon must be >= 2, got {n}")
    if p <= 2:
        denom = 2.0 * (r - 1.0) + p
        if K > 0:
            curved = (
                n ** (-r / denom)
                * R ** (2.0 * r / denom)
                * K ** (-(2.0 - p) / denom)
            )
        else:
            curved = math.inf
        flat = R * n**-0.5
        return c * min(curved, flat)
    return (R / 2.0) * n ** (-1.0 / p)


def sparse_cover_bound(M: int, s: int, beta: float) -> float:
    """Log covering bound for convex combinations of at most ``s`` of ``M``
    bounded base functions: ``s log(e M / s) + s log(1 / beta)``."""
    if not 1 <= s <= M:
        raise DomainError(f"sparsity {s} must lie in [1, {M}]")
    if beta <= 0:
        raise DomainError(f"cover scale must be positive, got {beta}")
    return s * math.log(math.e * M / s) + s * math.log(1.0 / beta)


def sparse_rate_bound(M: int, s: int, n: int) -> float:
    """Companion per-round rate ``s log(M / s) / n`` for the sparse class."""
    if not 1 <= s <= M:
        raise DomainError(f"sparsity {s} must lie in [1, {M}]")
    if n < 1:
        raise DomainError(f"horizon must be >= 1, got {n}")
    return s * math.log(M / s) / n


# ---------------------------------------------------------------------------
# Khinchine
# ---------------------------------------------------------------------------


def khinchine_lower_bound(k: int, guard: int = 24) -> tuple[float, bool]:
    """Exact ``E |eps_1 + ... + eps_k|`` and whether it is >= sqrt(k / 2).

    The expectation enumerates the sign vectors grouped by their number of
    +1 entries, in integer arithmetic, so the returned dyadic value is exact.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if k > guard:
        raise ResourceGuardError(
            f"exact enumeration limited to k <= {guard}", size_estimate=2.0**k
        )
    numer = sum(math.comb(k, i) * abs(2 * i - k) for i in range(k + 1))
    value = numer / 2**k
    return value, value >= math.sqrt(k / 2.0)


__all__ = [
    "CoverReport",
    "ShatterCertificate",
    "seq_rademacher",
    "seq_rademacher_mc",
    "offset_tree_max",
    "offset_rademacher",
    "offset_rademacher_sup",
    "finite_class_offset_bound",
    "finite_class_linear_bound",
    "seq_cover_number",
    "fat_shattering",
    "cover_fat_bound",
    "dudley_bound",
    "chained_offset_bound",
    "rate_exponent",
    "rate_upper",
    "rate_lower",
    "sparse_cover_bound",
    "sparse_rate_bound",
    "khinchine_lower_bound",
]
