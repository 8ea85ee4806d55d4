"""Loss models: values, subgradients, curvature envelopes, conjugates.

A :class:`LossModel` bundles a convex loss with everything the bound
machinery needs to know about it:

* a uniform subgradient bound ``G`` over the configured ranges,
* a certified curvature minorant ``K * |x|**r`` of the Taylor residual
  (the residual of the linear expansion between any two predictions),
* a restricted-smoothness majorant for the models that support one,
* the convex conjugate of ``x -> minorant(sqrt(|x|))``, which drives the
  finite-collection offset bound.

All operations are pure functions of their arguments and safe to call
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CapabilityError, DomainError

_RANGE_EPS = 1e-12
_LOGISTIC_GRID_STEP = 1e-3


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _log1pexp(z: float) -> float:
    """log(1 + exp(z)), overflow-safe."""
    if z > 35.0:
        return z + math.log1p(math.exp(-z))
    return math.log1p(math.exp(z))


def _logistic_strong_convexity(outcome_bound: float, pred_max: float) -> float:
    """Infimum of the logistic second derivative over the configured rectangle.

    The second derivative in the prediction argument is
    ``y**2 * sig(yhat*y) * (1 - sig(yhat*y))``, which for fixed ``y`` is
    smallest at the prediction endpoint maximizing ``|yhat * y|``; the scan
    below walks the outcome grid at the configured resolution with that
    endpoint reduction applied.  The grid is centered so that ``y = 0`` is
    always a grid point; with outcomes straddling zero the infimum is 0.
    """
    half_points = int(round(outcome_bound / _LOGISTIC_GRID_STEP))
    best = math.inf
    for i in range(half_points + 1):
        y = i * _LOGISTIC_GRID_STEP
        s = _sigmoid(y * pred_max)
        best = min(best, y * y * s * (1.0 - s))
    return best


@dataclass(frozen=True)
class LossModel:
    """A convex loss together with its curvature and gradient constants.

    ``outcome_bound`` is the half-width B of the outcome interval [-B, B];
    ``prediction_range`` is the closed interval of admissible predictions.
    ``curvature_const`` and ``curvature_power`` certify
    ``taylor_residual(a, b, y) >= curvature_const * |b - a|**curvature_power``
    over the configured ranges.
    """

    name: str
    outcome_bound: float
    prediction_range: tuple[float, float]
    grad_bound: float
    curvature_const: float
    curvature_power: float
    q: float | None = None

    # -- range checks -----------------------------------------------------

    @property
    def outcome_range(self) -> tuple[float, float]:
        return (-self.outcome_bound, self.outcome_bound)

    def _check_prediction(self, yhat: float, arg: str = "yhat") -> None:
        lo, hi = self.prediction_range
        if not (lo - _RANGE_EPS <= yhat <= hi + _RANGE_EPS):
            raise DomainError(
                f"{arg}={yhat!r} outside the prediction range [{lo}, {hi}]"
            )

    def _check_outcome(self, y: float) -> None:
        b = self.outcome_bound
        if not (-b - _RANGE_EPS <= y <= b + _RANGE_EPS):
            raise DomainError(f"y={y!r} outside the outcome range [{-b}, {b}]")

    # -- pointwise operations ---------------------------------------------

    def value(self, yhat: float, y: float) -> float:
        """Loss of predicting ``yhat`` against outcome ``y``."""
        self._check_prediction(yhat)
        self._check_outcome(y)
        return self._value(yhat, y)

    def _value(self, yhat: float, y: float) -> float:
        if self.name == "square":
            d = yhat - y
            return d * d
        if self.name == "absolute":
            return abs(yhat - y)
        if self.name == "q_loss":
            return abs(y - yhat) ** self.q
        if self.name == "logistic":
            return _log1pexp(-yhat * y)
        raise CapabilityError(f"unknown loss {self.name!r}")

    def value_vector(self, yhats, y: float):
        """Losses of many predictions against one outcome (vectorized).

        Range checks run once on the outcome and on the extreme predictions.
        """
        import numpy as np

        arr = np.asarray(yhats, dtype=float)
        self._check_outcome(y)
        if arr.size:
            self._check_prediction(float(arr.min()), "yhat")
            self._check_prediction(float(arr.max()), "yhat")
        if self.name == "square":
            return (arr - y) ** 2
        if self.name == "absolute":
            return np.abs(arr - y)
        if self.name == "q_loss":
            return np.abs(y - arr) ** self.q
        if self.name == "logistic":
            return np.logaddexp(0.0, -arr * y)
        raise CapabilityError(f"unknown loss {self.name!r}")

    def subgradient(self, yhat: float, y: float) -> float:
        """A valid subgradient of the loss in its first argument.

        At kinks the midpoint of the subdifferential interval is returned
        (0 for the absolute loss at ``yhat == y``).
        """
        self._check_prediction(yhat)
        self._check_outcome(y)
        if self.name == "square":
            return 2.0 * (yhat - y)
        if self.name == "absolute":
            d = yhat - y
            return 0.0 if d == 0 else math.copysign(1.0, d)
        if self.name == "q_loss":
            d = yhat - y
            if d == 0:
                return 0.0
            return self.q * abs(d) ** (self.q - 1.0) * math.copysign(1.0, d)
        if self.name == "logistic":
            return -y * _sigmoid(-yhat * y)
        raise CapabilityError(f"unknown loss {self.name!r}")

    def taylor_residual(self, a: float, b: float, y: float) -> float:
        """Error of the linear expansion at ``a`` evaluated at ``b``.

        Nonnegative by convexity.
        """
        self._check_prediction(a, "a")
        self._check_prediction(b, "b")
        self._check_outcome(y)
        return self._value(b, y) - (self._value(a, y) + self.subgradient(a, y) * (b - a))

    # -- curvature envelopes ------------------------------------------------

    def curvature_minorant(self, x: float) -> float:
        """Certified lower envelope of the Taylor residual at separation ``x``.

        Returns ``curvature_const * |x|**curvature_power``; the constant is
        chosen so the envelope minorizes the residual over the whole
        configured rectangle (zero for losses with no certified curvature).
        """
        return self.curvature_const * abs(x) ** self.curvature_power

    def smoothness_majorant(self, x: float) -> float:
        """Upper envelope of the Taylor residual at the two-point witnesses.

        Supported for the square loss (witness set = whole prediction range)
        and the q-loss with q in (1, 2) (witness set = {0}).
        """
        if self.name == "square":
            return x * x
        if self.name == "q_loss" and self.q is not None and 1.0 < self.q < 2.0:
            return 2.0 * self.q * (self.q - 1.0) * x * x
        raise CapabilityError(
            f"no restricted-smoothness majorant configured for {self.name!r}"
        )

    def offset_conjugate(self, s: float) -> float:
        """Conjugate of ``x -> curvature_minorant(sqrt(|x|))`` at ``s >= 0``.

        Nondecreasing on its domain; +inf marks branches a bound minimizer
        must skip.
        """
        return power_conjugate(self.curvature_const, self.curvature_power, s)

    # -- two-point adversary support ---------------------------------------

    def two_point_witness(self, s: float) -> tuple[float, float, float]:
        """Outcomes ``(y_plus, y_minus)`` and slope ``R`` for witness point ``s``.

        The returned pair satisfies: ``s`` minimizes the average loss of the
        two outcomes, the subgradient at ``s`` against ``y_plus`` is ``+R``
        and against ``y_minus`` is ``-R``.  Outcomes are pushed to the
        boundary of the outcome interval (maximal separation).
        """
        b = self.outcome_bound
        delta = b - abs(s)
        if delta <= 0:
            raise DomainError(
                f"witness point {s!r} leaves no room inside [-{b}, {b}]"
            )
        y_plus, y_minus = s - delta, s + delta
        if self.name == "square":
            r = 2.0 * delta
        elif self.name == "absolute":
            r = 1.0
        elif self.name == "q_loss":
            r = self.q * delta ** (self.q - 1.0)
        else:
            raise CapabilityError(
                f"two-point witnesses not configured for {self.name!r}"
            )
        return y_plus, y_minus, r


def power_conjugate(K: float, r: float, s: float) -> float:
    """Conjugate of ``u >= 0 -> K * u**(r/2)`` evaluated at ``s >= 0``.

    For ``r == 2`` this is the 0/+inf step at threshold ``K``; for ``r > 2``
    the supremum has the closed form ``((r-2)/r) * (2/(K r))**(2/(r-2)) *
    s**(r/(r-2))``.  A zero ``K`` makes every positive ``s`` infeasible.
    """
    if s < 0:
        raise DomainError(f"conjugate argument must be nonnegative, got {s!r}")
    if s == 0:
        return 0.0
    if K == 0:
        return math.inf
    if r == 2:
        return 0.0 if s <= K * (1.0 + 1e-15) else math.inf
    if r < 2:
        raise DomainError(f"curvature power must be >= 2, got {r!r}")
    return (r - 2.0) / r * (2.0 / (K * r)) ** (2.0 / (r - 2.0)) * s ** (r / (r - 2.0))


def power_conjugate_bound(K: float, r: float, s: float) -> float:
    """Closed-form upper bound on :func:`power_conjugate` for ``r > 2``:
    ``((r-2)/(2e)) * s**(r/(r-2)) / K**(2/(r-2))``.

    Exposed separately because rate calculations quote this looser constant.
    """
    if s < 0:
        raise DomainError(f"conjugate argument must be nonnegative, got {s!r}")
    if s == 0:
        return 0.0
    if K == 0:
        return math.inf
    if r == 2:
        return power_conjugate(K, r, s)
    return (r - 2.0) / (2.0 * math.e) * s ** (r / (r - 2.0)) / K ** (2.0 / (r - 2.0))


def _default_prediction_range(B: float) -> tuple[float, float]:
    return (-B, B)


def _max_separation(B: float, prediction_range: tuple[float, float]) -> float:
    lo, hi = prediction_range
    return max(hi + B, B - lo)


def square_loss(B: float, prediction_range: tuple[float, float] | None = None) -> LossModel:
    """Square loss on outcomes in [-B, B]; the residual equals the squared
    separation exactly, so the minorant constant is 1 with power 2."""
    if B <= 0:
        raise DomainError(f"outcome bound must be positive, got {B!r}")
    pr = prediction_range or _default_prediction_range(B)
    return LossModel(
        name="square",
        outcome_bound=B,
        prediction_range=pr,
        grad_bound=2.0 * _max_separation(B, pr),
        curvature_const=1.0,
        curvature_power=2.0,
    )


def absolute_loss(B: float, prediction_range: tuple[float, float] | None = None) -> LossModel:
    """Absolute loss; no curvature, unit gradient bound."""
    if B <= 0:
        raise DomainError(f"outcome bound must be positive, got {B!r}")
    pr = prediction_range or _default_prediction_range(B)
    return LossModel(
        name="absolute",
        outcome_bound=B,
        prediction_range=pr,
        grad_bound=1.0,
        curvature_const=0.0,
        curvature_power=2.0,
    )


def q_loss(
    q: float,
    B: float = 1.0,
    prediction_range: tuple[float, float] | None = None,
    curvature_const: float | None = None,
) -> LossModel:
    """Power loss ``|y - yhat|**q`` for q > 1.

    For q in (1, 2) the second derivative over separations up to D is at
    least ``q (q-1) D**(q-2)``, giving the quadratic minorant with constant
    ``q (q-1) D**(q-2) / 2``.  For q >= 2 the loss is q-uniformly convex and
    the default minorant is ``2**(1-q) |x|**q``.  Both constants are the
    certified ones (every residual on the configured rectangle dominates the
    envelope); pass ``curvature_const`` to override.
    """
    if q <= 1:
        raise DomainError(f"q must exceed 1, got {q!r}")
    if B <= 0:
        raise DomainError(f"outcome bound must be positive, got {B!r}")
    pr = prediction_range or _default_prediction_range(B)
    d = _max_separation(B, pr)
    if q < 2.0:
        k = q * (q - 1.0) * d ** (q - 2.0) / 2.0
        r = 2.0
    elif q == 2.0:
        k = 1.0  # the residual is exactly the squared separation
        r = 2.0
    else:
        k = 2.0 ** (1.0 - q)
        r = q
    if curvature_const is not None:
        k = curvature_const
    return LossModel(
        name="q_loss",
        outcome_bound=B,
        prediction_range=pr,
        grad_bound=q * d ** (q - 1.0),
        curvature_const=k,
        curvature_power=r,
        q=q,
    )


def logistic_loss(B: float, prediction_range: tuple[float, float] | None = None) -> LossModel:
    """Logistic loss ``log(1 + exp(-yhat * y))`` on the rectangle [-B, B]^2.

    The strong-convexity constant is the grid infimum of the second
    derivative over the rectangle.  Because the outcome interval contains 0
    (where the loss is flat in the prediction), that infimum is 0 and the
    certified minorant degenerates; outcomes bounded away from zero would be
    needed for a positive constant.
    """
    if B <= 0:
        raise DomainError(f"outcome bound must be positive, got {B!r}")
    pr = prediction_range or _default_prediction_range(B)
    pmax = max(abs(pr[0]), abs(pr[1]))
    strong = _logistic_strong_convexity(B, pmax)
    corners = [
        abs(-y * _sigmoid(-a * y)) for a in pr for y in (-B, B)
    ]
    return LossModel(
        name="logistic",
        outcome_bound=B,
        prediction_range=pr,
        grad_bound=max(corners),
        curvature_const=strong / 2.0,
        curvature_power=2.0,
    )


def from_config(config: dict) -> LossModel:
    """Build a loss model from a configuration record
    ``{name, B, q?, K?, r?, prediction_range?}``."""
    name = config["name"]
    b = float(config["B"])
    pr = config.get("prediction_range")
    pr = tuple(float(v) for v in pr) if pr is not None else None
    if name == "square":
        return square_loss(b, pr)
    if name == "absolute":
        return absolute_loss(b, pr)
    if name == "q_loss":
        return q_loss(float(config["q"]), b, pr, config.get("K"))
    if name == "logistic":
        return logistic_loss(b, pr)
    raise CapabilityError(f"unknown loss name {name!r}")
