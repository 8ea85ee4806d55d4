"""Relaxation-based forecasters and their admissibility verification.

A relaxation is a mapping from observed histories to reals.  It is
admissible when (i) at the full horizon it dominates the negated best
comparator loss and (ii) one minimax prediction step never increases it.
Any admissible relaxation yields a forecaster whose regret is at most the
relaxation's value at the empty history; :func:`check_admissibility`
verifies both conditions numerically on finite grids.

Two closed-form instances are provided: the aggregating forecaster over a
finite family (softmin of squared errors) and the Vovk-Azoury-Warmuth
ridge-regression forecaster.  A forecaster instance is a sequential state
machine; distinct instances never share state, so separate runs may execute
concurrently.  Relaxation evaluators are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .comparators import (
    ComparatorFamily,
    FiniteTableFamily,
    LinearFamily,
    best_comparator_loss,
)
from .complexity import offset_rademacher_sup
from .errors import DomainError
from .losses import LossModel, square_loss


def clip(z: float, B: float) -> float:
    """Clamp a prediction to the outcome interval [-B, B]."""
    if z > B:
        return B
    if z < -B:
        return -B
    return z


# ---------------------------------------------------------------------------
# Relaxations
# ---------------------------------------------------------------------------


@dataclass
class RelaxationOracle:
    """A history-to-real mapping driving the generic forecaster.

    ``benchmark_loss`` returns the comparator infimum the initial condition
    is checked against (it carries any ridge modification of the regret).
    """

    evaluator: Callable[[Sequence[Any], Sequence[float]], float]
    horizon: int
    metadata: dict = field(default_factory=dict)
    benchmark_loss: Callable[[Sequence[tuple[Any, float]]], float] | None = None


def _logsumexp(a: np.ndarray) -> float:
    m = float(a.max())
    return m + math.log(float(np.exp(a - m).sum()))


def experts_relaxation(
    family: FiniteTableFamily, B: float, x_hist: Sequence[Any], y_hist: Sequence[float]
) -> float:
    """Softmin potential ``2 B^2 log sum_f exp(-(1/(2B^2)) sum_j (f(x_j) - y_j)^2)``,
    computed with a max-shifted log-sum-exp.

    The inverse temperature ``1/(2B^2)`` is the largest one for which the
    one-step minimax condition holds for square loss on [-B, B] (witness
    against a larger scale: two constant experts +-B, one round, where the
    best equalized prediction already exceeds the potential drop).  The
    certified regret bound is the empty-history value ``2 B^2 log |F|``.
    """
    cum = np.zeros(family.n_predictors)
    for x, y in zip(x_hist, y_hist):
        fv = family.evaluate_all(x)
        cum = cum + (fv - y) ** 2
    eta = 0.5 / (B * B)
    return _logsumexp(-eta * cum) / eta


def _experts_clip_prediction(cum: np.ndarray, fv: np.ndarray, B: float) -> float:
    eta = 0.5 / (B * B)
    num = _logsumexp(-eta * (cum + (fv - B) ** 2))
    den = _logsumexp(-eta * (cum + (fv + B) ** 2))
    return clip((num - den) / (4.0 * B * eta), B)


def experts_forecast(
    family: FiniteTableFamily,
    B: float,
    x_hist: Sequence[Any],
    y_hist: Sequence[float],
    x_t: Any,
) -> float:
    """Closed-form aggregating prediction derived from the softmin potential."""
    cum = np.zeros(family.n_predictors)
    for x, y in zip(x_hist, y_hist):
        fv = family.evaluate_all(x)
        cum = cum + (fv - y) ** 2
    return _experts_clip_prediction(cum, family.evaluate_all(x_t), B)


def experts_relaxation_oracle(
    family: FiniteTableFamily, B: float, horizon: int
) -> RelaxationOracle:
    model = square_loss(B)
    return RelaxationOracle(
        evaluator=lambda xs, ys: experts_relaxation(family, B, xs, ys),
        horizon=horizon,
        metadata={"name": "experts", "B": B, "size": family.n_predictors},
        benchmark_loss=lambda hist: best_comparator_loss(family, model, hist),
    )


def vaw_forecast(
    history: Sequence[tuple[Sequence[float], float]],
    x_t: Sequence[float],
    lam: float,
    B: float,
) -> float:
    """Vovk-Azoury-Warmuth prediction: ridge solution with the current
    covariate already counted in the regularized Gram matrix, clipped."""
    if lam <= 0:
        raise DomainError(f"ridge parameter must be positive, got {lam}")
    x = np.asarray(x_t, dtype=float)
    d = x.shape[0]
    A = lam * np.eye(d) + np.outer(x, x)
    b = np.zeros(d)
    for z, y in history:
        z = np.asarray(z, dtype=float)
        A += np.outer(z, z)
        b += y * z
    return clip(float(x @ np.linalg.solve(A, b)), B)


def vaw_relaxation(
    x_hist: Sequence[Sequence[float]],
    y_hist: Sequence[float],
    lam: float,
    B: float,
    n: int,
    d: int,
) -> float:
    """Ridge potential ``||sum y_j z_j||^2_{A^-1} + 4 B^2 log((n/d)^d / det A)
    - sum y_j^2`` with ``A = sum z_j z_j^T + lam I``.

    One Cholesky factorization supplies both the quadratic form and the log
    determinant.
    """
    if lam <= 0:
        raise DomainError(f"ridge parameter must be positive, got {lam}")
    A = lam * np.eye(d)
    b = np.zeros(d)
    sum_y2 = 0.0
    for z, y in zip(x_hist, y_hist):
        z = np.asarray(z, dtype=float)
        A += np.outer(z, z)
        b += y * z
        sum_y2 += y * y
    L = np.linalg.cholesky(A)
    half = np.linalg.solve(L, b)
    quad = float(half @ half)
    logdet = 2.0 * float(np.log(np.diag(L)).sum())
    return quad + 4.0 * B * B * (d * math.log(n / d) - logdet) - sum_y2


def vaw_relaxation_oracle(lam: float, B: float, horizon: int, d: int) -> RelaxationOracle:
    model = square_loss(B)
    family = LinearFamily(d)
    return RelaxationOracle(
        evaluator=lambda xs, ys: vaw_relaxation(xs, ys, lam, B, horizon, d),
        horizon=horizon,
        metadata={"name": "vaw", "lambda": lam, "B": B, "d": d},
        benchmark_loss=lambda hist: best_comparator_loss(family, model, hist, ridge=lam),
    )


def conditional_rademacher_oracle(
    family: FiniteTableFamily,
    model: LossModel,
    covariate_set: Sequence[Any],
    mu_grid: Sequence[float],
    horizon: int,
) -> RelaxationOracle:
    """The offset-complexity-of-the-future relaxation.

    Each evaluation runs an exact supremum over covariate and mean trees for
    the remaining rounds, seeded with the negated past losses per predictor.
    Usable at toy scale only (the metadata flags this).
    """
    xs_fixed = tuple(covariate_set)

    def evaluator(x_hist: Sequence[Any], y_hist: Sequence[float]) -> float:
        init = np.zeros(family.n_predictors)
        for x, y in zip(x_hist, y_hist):
            init -= model.value_vector(family.evaluate_all(x), y)
        return offset_rademacher_sup(
            family,
            xs_fixed,
            mu_grid,
            horizon - len(x_hist),
            C=model.grad_bound,
            offset=model.curvature_minorant,
            initial_scores=init,
        )

    return RelaxationOracle(
        evaluator=evaluator,
        horizon=horizon,
        metadata={"name": "conditional_rademacher", "toy_scale": True},
        benchmark_loss=lambda hist: best_comparator_loss(family, model, hist),
    )


# ---------------------------------------------------------------------------
# The generic forecaster
# ---------------------------------------------------------------------------


def relaxation_forecast(
    rel: RelaxationOracle,
    model: LossModel,
    x_hist: Sequence[Any],
    y_hist: Sequence[float],
    x_t: Any,
    prediction_grid: Sequence[float],
    outcome_grid: Sequence[float],
) -> float:
    """One prediction of the generic relaxation forecaster.

    For square loss with outcome grid {-B, +B} the equalizing closed form
    ``Clip((Rel(.., +B) - Rel(.., -B)) / (4B))`` is used; otherwise the
    prediction is the grid argmin of the worst-case one-step potential,
    ties broken toward the smallest prediction.
    """
    if not prediction_grid or not outcome_grid:
        raise DomainError("prediction and outcome grids must be nonempty")
    xs = tuple(x_hist) + (x_t,)
    b = model.outcome_bound
    sorted_outcomes = sorted(outcome_grid)
    if (
        model.name == "square"
        and len(sorted_outcomes) == 2
        and abs(sorted_outcomes[0] + b) <= 1e-12
        and abs(sorted_outcomes[1] - b) <= 1e-12
    ):
        r_plus = rel.evaluator(xs, tuple(y_hist) + (b,))
        r_minus = rel.evaluator(xs, tuple(y_hist) + (-b,))
        return clip((r_plus - r_minus) / (4.0 * b), b)
    continuations = {
        y: rel.evaluator(xs, tuple(y_hist) + (y,)) for y in sorted_outcomes
    }
    best_p, best = None, math.inf
    for p in sorted(prediction_grid):
        worst = max(model.value(p, y) + rv for y, rv in continuations.items())
        if worst < best:
            best_p, best = p, worst
    return best_p


# ---------------------------------------------------------------------------
# Admissibility verification
# ---------------------------------------------------------------------------


@dataclass
class MarginRow:
    t: int
    x: Any
    recursive: float
    distributional: float


@dataclass
class AdmissibilityReport:
    """Worst-case margins of the two admissibility conditions.

    Violations appear as negative margins; nothing raises.
    """

    rows: list[MarginRow]
    initial_margins: list[float]
    horizon: int

    @property
    def worst_recursive(self) -> float:
        return min((r.recursive for r in self.rows), default=math.inf)

    @property
    def worst_distributional(self) -> float:
        return min((r.distributional for r in self.rows), default=math.inf)

    @property
    def worst_initial(self) -> float:
        return min(self.initial_margins, default=math.inf)

    @property
    def worst_margin(self) -> float:
        return min(self.worst_recursive, self.worst_distributional, self.worst_initial)

    def worst_per_round(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for r in self.rows:
            out[r.t] = min(out.get(r.t, math.inf), r.recursive)
        return out

    def passed(self, tol: float = 1e-8) -> bool:
        return self.worst_margin >= -tol

    def to_json_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "worst_recursive": self.worst_recursive,
            "worst_distributional": self.worst_distributional,
            "worst_initial": self.worst_initial,
            "worst_per_round": self.worst_per_round(),
            "passed": self.passed(),
        }


def _two_point_expected_loss_min(
    model: LossModel, q: float, prediction_grid: Sequence[float]
) -> float:
    """``inf_yhat [q loss(yhat, B) + (1-q) loss(yhat, -B)]`` over the grid,
    with the exact mean minimizer added for square loss."""
    b = model.outcome_bound
    candidates = list(prediction_grid)
    if model.name == "square":
        candidates.append((2.0 * q - 1.0) * b)
    return min(
        q * model.value(p, b) + (1.0 - q) * model.value(p, -b) for p in candidates
    )


def check_admissibility(
    rel: RelaxationOracle,
    model: LossModel,
    covariate_set: Sequence[Any],
    outcome_grid: Sequence[float],
    prediction_grid: Sequence[float],
    sample_histories: Sequence[Sequence[tuple[Any, float]]],
    mixing_grid_points: int = 101,
) -> AdmissibilityReport:
    """Verify both admissibility conditions on the sampled histories.

    For every distinct history prefix and every next covariate the recursive
    condition is evaluated at the forecaster's own prediction (an upper bound
    on the one-step infimum, so a passing margin certifies the algorithm).
    The distributional condition is checked over two-point outcome
    distributions on {-B, +B} with the mixing weight on a uniform grid.  The
    initial condition is checked on every full history.
    """
    b = model.outcome_bound
    n = rel.horizon
    prefixes: set[tuple[tuple, tuple]] = set()
    initial: list[float] = []
    for hist in sample_histories:
        if len(hist) != n:
            raise DomainError("each sampled history must have the oracle's horizon")
        xs = tuple(x for x, _ in hist)
        ys = tuple(y for _, y in hist)
        for t in range(n):
            prefixes.add((xs[:t], ys[:t]))
        if rel.benchmark_loss is not None:
            initial.append(rel.evaluator(xs, ys) + rel.benchmark_loss(list(hist)))

    qs = np.linspace(0.0, 1.0, mixing_grid_points)
    rows: list[MarginRow] = []
    for xs, ys in sorted(prefixes, key=lambda p: (len(p[0]), repr(p))):
        t = len(xs) + 1
        rel_prefix = rel.evaluator(xs, ys)
        for x_t in covariate_set:
            yhat = relaxation_forecast(
                rel, model, xs, ys, x_t, prediction_grid, outcome_grid
            )
            conts = {
                y: rel.evaluator(xs + (x_t,), ys + (y,)) for y in outcome_grid
            }
            worst = max(model.value(yhat, y) + rv for y, rv in conts.items())
            recursive = rel_prefix - worst

            rel_hi = conts.get(b)
            if rel_hi is None:
                rel_hi = rel.evaluator(xs + (x_t,), ys + (b,))
            rel_lo = conts.get(-b)
            if rel_lo is None:
                rel_lo = rel.evaluator(xs + (x_t,), ys + (-b,))
            dist_worst = -math.inf
            for q in qs:
                e_loss = _two_point_expected_loss_min(model, float(q), prediction_grid)
                e_rel = q * rel_hi + (1.0 - q) * rel_lo
                dist_worst = max(dist_worst, e_loss + e_rel)
            rows.append(MarginRow(t, x_t, recursive, rel_prefix - dist_worst))
    return AdmissibilityReport(rows=rows, initial_margins=initial, horizon=n)


# ---------------------------------------------------------------------------
# Forecaster state machines
# ---------------------------------------------------------------------------


class ExpertsForecaster:
    """Aggregating forecaster over a finite table, square loss on [-B, B]."""

    def __init__(self, family: FiniteTableFamily, B: float):
        self.family = family
        self.B = B
        self.reset()

    def reset(self) -> None:
        self._cum = np.zeros(self.family.n_predictors)

    def predict(self, x: Any) -> float:
        return _experts_clip_prediction(self._cum, self.family.evaluate_all(x), self.B)

    def observe(self, x: Any, y: float) -> None:
        fv = self.family.evaluate_all(x)
        self._cum = self._cum + (fv - y) ** 2


class VAWForecaster:
    """Online ridge regression with the current covariate in the Gram matrix."""

    def __init__(self, lam: float, B: float, d: int):
        if lam <= 0:
            raise DomainError(f"ridge parameter must be positive, got {lam}")
        self.lam = lam
        self.B = B
        self.d = d
        self.reset()

    def reset(self) -> None:
        self._A = self.lam * np.eye(self.d)
        self._b = np.zeros(self.d)

    def predict(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        A = self._A + np.outer(x, x)
        return clip(float(x @ np.linalg.solve(A, self._b)), self.B)

    def observe(self, x: Sequence[float], y: float) -> None:
        x = np.asarray(x, dtype=float)
        self._A = self._A + np.outer(x, x)
        self._b = self._b + y * x


class RelaxationForecaster:
    """Generic forecaster driven by a relaxation oracle and finite grids."""

    def __init__(
        self,
        rel: RelaxationOracle,
        model: LossModel,
        prediction_grid: Sequence[float],
        outcome_grid: Sequence[float],
    ):
        self.rel = rel
        self.model = model
        self.prediction_grid = tuple(prediction_grid)
        self.outcome_grid = tuple(outcome_grid)
        self.reset()

    def reset(self) -> None:
        self._xs: list[Any] = []
        self._ys: list[float] = []

    def predict(self, x: Any) -> float:
        return relaxation_forecast(
            self.rel,
            self.model,
            self._xs,
            self._ys,
            x,
            self.prediction_grid,
            self.outcome_grid,
        )

    def observe(self, x: Any, y: float) -> None:
        self._xs.append(x)
        self._ys.append(y)


class FixedComparatorForecaster:
    """Plays one comparator from the family, verbatim."""

    def __init__(self, family: ComparatorFamily, handle: Any):
        self.family = family
        self.handle = handle

    def reset(self) -> None:
        pass

    def predict(self, x: Any) -> float:
        return self.family.evaluate(self.handle, x)

    def observe(self, x: Any, y: float) -> None:
        pass


class GridSnapForecaster:
    """Wraps a forecaster, snapping predictions to a grid (ties go low)."""

    def __init__(self, inner, grid: Sequence[float]):
        self.inner = inner
        self.grid = sorted(grid)

    def reset(self) -> None:
        self.inner.reset()

    def predict(self, x: Any) -> float:
        z = self.inner.predict(x)
        return min(self.grid, key=lambda g: (abs(g - z), g))

    def observe(self, x: Any, y: float) -> None:
        self.inner.observe(x, y)


# ---------------------------------------------------------------------------
# Online runs and bounds
# ---------------------------------------------------------------------------


@dataclass
class RoundRecord:
    """One round of an online run."""

    t: int
    x: Any
    yhat: float
    y: float
    loss: float
    cumulative_regret: float

    def to_dict(self) -> dict:
        x = self.x
        if isinstance(x, np.ndarray):
            x = x.tolist()
        return {
            "t": self.t,
            "x": x,
            "yhat": self.yhat,
            "y": self.y,
            "loss": self.loss,
            "cumulative_regret": self.cumulative_regret,
        }


class _BestLossTracker:
    """Incremental best-in-family cumulative loss along a growing history."""

    def __init__(self, family: ComparatorFamily, model: LossModel, ridge: float):
        self.family = family
        self.model = model
        self.ridge = ridge
        self.history: list[tuple[Any, float]] = []
        if isinstance(family, FiniteTableFamily):
            self._cum = np.zeros(family.n_predictors)
        elif isinstance(family, LinearFamily) and model.name == "square" and ridge > 0:
            self._A = ridge * np.eye(family.dimension)
            self._b = np.zeros(family.dimension)
            self._sum_y2 = 0.0

    def add(self, x: Any, y: float) -> float:
        self.history.append((x, y))
        if isinstance(self.family, FiniteTableFamily):
            fv = self.family.evaluate_all(x)
            self._cum = self._cum + self.model.value_vector(fv, y)
            return float(self._cum.min())
        if (
            isinstance(self.family, LinearFamily)
            and self.model.name == "square"
            and self.ridge > 0
        ):
            z = np.asarray(x, dtype=float)
            self._A = self._A + np.outer(z, z)
            self._b = self._b + y * z
            self._sum_y2 += y * y
            # min_w sum (w.x - y)^2 + ridge ||w||^2 = sum y^2 - b' A^-1 b
            return float(self._sum_y2 - self._b @ np.linalg.solve(self._A, self._b))
        return best_comparator_loss(self.family, self.model, self.history, self.ridge)


def run_online(
    forecaster,
    sequence: Sequence[tuple[Any, float]],
    model: LossModel,
    family: ComparatorFamily,
    ridge: float = 0.0,
) -> tuple[list[RoundRecord], float]:
    """Play a forecaster through a sequence, logging one record per round.

    The cumulative regret at each round subtracts the best comparator loss
    on the prefix (ridge-modified when ``ridge > 0``).  A forecaster failure
    aborts with the partial log attached to the raised exception.
    """
    forecaster.reset()
    tracker = _BestLossTracker(family, model, ridge)
    records: list[RoundRecord] = []
    cum_loss = 0.0
    for t, (x, y) in enumerate(sequence, start=1):
        try:
            yhat = forecaster.predict(x)
            loss = model.value(yhat, y)
            forecaster.observe(x, y)
        except Exception as exc:
            exc.partial_log = records  # type: ignore[attr-defined]
            raise
        cum_loss += loss
        best = tracker.add(x, y)
        records.append(RoundRecord(t, x, yhat, y, loss, cum_loss - best))
    final = records[-1].cumulative_regret if records else 0.0
    return records, final


def regret_bound(kind: str, **params) -> float:
    """Closed-form regret bound for the built-in forecasters.

    ``experts`` needs (B, size); ``vaw`` needs (n, d, B, lam).  The experts
    value is the relaxation's empty-history potential ``2 B^2 log(size)``,
    which the admissibility margins certify end to end (see
    :func:`experts_relaxation` for why the factor is 2).
    """
    if kind == "experts":
        b, size = params["B"], params["size"]
        if size < 1:
            raise DomainError("family size must be >= 1")
        return 2.0 * b * b * math.log(size)
    if kind == "vaw":
        n, d, b, lam = params["n"], params["d"], params["B"], params["lam"]
        if n < lam * d:
            raise DomainError(
                f"bound needs n >= lam * d, got n={n}, lam={lam}, d={d}"
            )
        return 4.0 * d * b * b * math.log(n / (lam * d))
    raise DomainError(f"unknown bound kind {kind!r}")
