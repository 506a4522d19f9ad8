"""
Generating-function engine for layer- and multiplex-node removal.

For a joint degree law p(k) and a removal rule phi this module evaluates

    H0(x)  = sum_k p(k) prod_i (phi_i + (1 - phi_i) x_i^k_i)
    v_i    = <k_i phi_i> / z_i + (1/z_i) dH0/dx_i (v)
    R      = 1 - H0(v)

and the largest eigenvalue of the 2x2 Jacobian of the v-map at (1, 1),
whose crossing of 1 marks the percolation threshold. Joint rules use
phi(k) + (1 - phi(k)) prod_i x_i^k_i in place of the per-layer product.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import optimize

from .attack import AttackKind, AttackMode, AttackRule, AttackSpec, LayerRandom
from .core import JointDegreeHistogram
from .exceptions import AttackRuleError, ConvergenceError, HistogramError, RobustnessError


logger = logging.getLogger(__name__)

FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAX_ITER = 100_000
MONOTONE_SLACK = 1e-13
GIANT_EPSILON = 1e-9
BISECT_XTOL = 1e-8


@dataclass(frozen=True)
class FixedPoint:
    v: tuple[float, ...]
    iterations: int
    residual: float
    converged: bool


@dataclass(frozen=True)
class JacobianSpectrum:
    kappa: tuple[float, float]
    K: tuple[float, float]
    lambda_max: float


@dataclass(frozen=True)
class TheoryResult:
    v: tuple[float, ...]
    r: float
    lambda_max: float | None
    iterations: int
    residual: float = 0.0
    converged: bool = True


class ThresholdFlag(str, Enum):
    OK = "ok"
    # giant component survives the whole range; threshold pinned at 1
    ABOVE = "above"
    # no giant component even at 0; threshold pinned at 0
    BELOW = "below"


@dataclass(frozen=True)
class ThresholdPoint:
    value: float
    flag: ThresholdFlag


@dataclass(frozen=True)
class CurvePoint:
    phi1: float
    phi2_c: float
    flag: ThresholdFlag


# ---------------------------------------------------------------------
# Generating functions
# ---------------------------------------------------------------------

class _Terms:
    """Per-entry arrays shared by every evaluation for one (histogram, rule) pair."""

    def __init__(self, hist: JointDegreeHistogram, rule: AttackRule):
        if not rule.fits(hist.m):
            raise AttackRuleError(f"rule does not fit a histogram with {hist.m} layers")
        self.m = hist.m
        self.k = hist.degrees.astype(float)
        self.k_minus_one = np.maximum(self.k - 1.0, 0.0)
        self.p = hist.masses
        self.z = np.asarray(hist.z, dtype=float)
        self.joint = rule.mode is AttackMode.JOINT
        # phi is (E, m) for per-layer rules and (E,) for joint ones
        self.phi = rule.probabilities(hist.degrees)

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.m,):
            raise HistogramError(f"expected a point with {self.m} coordinates, got shape {x.shape}")
        return x

    def h0(self, x: np.ndarray) -> float:
        powers = x ** self.k
        if self.joint:
            return float(self.p @ (self.phi + (1.0 - self.phi) * powers.prod(axis=1)))
        return float(self.p @ (self.phi + (1.0 - self.phi) * powers).prod(axis=1))

    def step(self, v: np.ndarray) -> np.ndarray:
        powers = v ** self.k
        reach = v ** self.k_minus_one
        factors = powers if self.joint else self.phi + (1.0 - self.phi) * powers
        out = np.ones(self.m)
        for i in range(self.m):
            if self.z[i] <= 0:
                continue
            others = np.delete(factors, i, axis=1).prod(axis=1)
            phi_i = self.phi if self.joint else self.phi[:, i]
            out[i] = self.p @ (self.k[:, i] * (phi_i + (1.0 - phi_i) * reach[:, i] * others)) / self.z[i]
        return out


def eval_G0(hist: JointDegreeHistogram, x: Sequence[float]) -> float:
    """Intact generating function sum_k p(k) prod_i x_i^k_i."""
    x = np.asarray(x, dtype=float)
    if x.shape != (hist.m,):
        raise HistogramError(f"expected a point with {hist.m} coordinates, got shape {x.shape}")
    return float(hist.masses @ (x ** hist.degrees).prod(axis=1))


def eval_H0(hist: JointDegreeHistogram, rule: AttackRule, x: Sequence[float]) -> float:
    terms = _Terms(hist, rule)
    return terms.h0(terms.check_point(x))


def fixed_point_map(hist: JointDegreeHistogram, rule: AttackRule, v: Sequence[float]) -> np.ndarray:
    """One application of the self-consistency map; layers with z_i = 0 map to 1."""
    terms = _Terms(hist, rule)
    return terms.step(terms.check_point(v))


# ---------------------------------------------------------------------
# Fixed point and giant component
# ---------------------------------------------------------------------

def _solve(terms: _Terms, tol: float, max_iter: int, strict: bool) -> FixedPoint:
    v = np.where(terms.z > 0, 0.0, 1.0)
    previous = None

    for iteration in range(1, max_iter + 1):
        new = np.minimum(terms.step(v), 1.0)
        delta = new - v
        if np.any(delta < -MONOTONE_SLACK):
            raise RobustnessError(
                f"fixed-point iterate decreased at iteration {iteration} (min step {delta.min():.3e})"
            )
        v = new
        size = float(np.abs(delta).max())
        if size < tol:
            return FixedPoint(tuple(float(x) for x in _extrapolate(v, delta, previous)), iteration, size, True)
        previous = delta

    residual = float(np.abs(terms.step(v) - v).max())
    logger.warning("fixed point not converged after %d iterations (residual %.3e)", max_iter, residual)
    if strict:
        raise ConvergenceError(max_iter, residual)
    return FixedPoint(tuple(float(x) for x in v), max_iter, residual, False)


def _extrapolate(v: np.ndarray, delta: np.ndarray, previous: np.ndarray | None) -> np.ndarray:
    # Aitken tail for linearly converging iterates; matters only close to the threshold
    if previous is None:
        return v
    last, before = np.abs(delta).max(), np.abs(previous).max()
    if before <= 0 or last <= 0:
        return v
    ratio = last / before
    if ratio >= 1.0:
        return v
    return np.minimum(v + delta * ratio / (1.0 - ratio), 1.0)


def solve_fixed_point(
    hist: JointDegreeHistogram,
    rule: AttackRule,
    *,
    tol: float = FIXED_POINT_TOL,
    max_iter: int = FIXED_POINT_MAX_ITER,
    strict: bool = False,
) -> FixedPoint:
    """
    Smallest fixed point of the v-map, iterating from 0 until the largest
    coordinate step is below ``tol``. Hitting ``max_iter`` logs the residual
    and returns converged=False, or raises ConvergenceError when strict.
    """
    return _solve(_Terms(hist, rule), tol, max_iter, strict)


def solve_intact(hist: JointDegreeHistogram, **kwargs) -> FixedPoint:
    """u_i = G1^(i)(u): the no-removal special case."""
    return solve_fixed_point(hist, LayerRandom(*([0.0] * hist.m)), **kwargs)


def giant_component_size(hist: JointDegreeHistogram, rule: AttackRule, **kwargs) -> float:
    """R = 1 - H0(v) at the fixed point."""
    return evaluate(hist, rule, **kwargs).r


def evaluate(hist: JointDegreeHistogram, rule: AttackRule, **kwargs) -> TheoryResult:
    terms = _Terms(hist, rule)
    fp = _solve(
        terms,
        kwargs.get("tol", FIXED_POINT_TOL),
        kwargs.get("max_iter", FIXED_POINT_MAX_ITER),
        kwargs.get("strict", False),
    )
    r = min(max(1.0 - terms.h0(np.asarray(fp.v)), 0.0), 1.0)
    lam = None
    if hist.m == 2 and all(z > 0 for z in hist.z):
        lam = jacobian_lambda(hist, rule).lambda_max
    return TheoryResult(
        v=fp.v, r=r, lambda_max=lam, iterations=fp.iterations,
        residual=fp.residual, converged=fp.converged,
    )


# ---------------------------------------------------------------------
# Threshold criterion (two layers)
# ---------------------------------------------------------------------

def jacobian_lambda(hist: JointDegreeHistogram, rule: AttackRule) -> JacobianSpectrum:
    """
    kappa_i = (<k_i^2 s_i> - <k_i s_i>) / z_i and K_i = <k_1 k_2 s_12> / z_i,
    with s the survival probability (1 - phi); Lambda is the larger
    eigenvalue of [[kappa_1, K_1], [K_2, kappa_2]].
    """
    if hist.m != 2:
        raise HistogramError(f"the threshold criterion is defined for two layers, got {hist.m}")
    if any(z <= 0 for z in hist.z):
        raise HistogramError(f"the threshold criterion needs z_i > 0, got {hist.z}")

    terms = _Terms(hist, rule)
    k, p = terms.k, terms.p
    if terms.joint:
        survive = np.column_stack([1.0 - terms.phi, 1.0 - terms.phi])
        both = 1.0 - terms.phi
    else:
        survive = 1.0 - terms.phi
        both = survive[:, 0] * survive[:, 1]

    z1, z2 = hist.z
    kappa1 = (p @ (k[:, 0] ** 2 * survive[:, 0]) - p @ (k[:, 0] * survive[:, 0])) / z1
    kappa2 = (p @ (k[:, 1] ** 2 * survive[:, 1]) - p @ (k[:, 1] * survive[:, 1])) / z2
    cross = p @ (k[:, 0] * k[:, 1] * both)
    big1, big2 = cross / z1, cross / z2

    lam = 0.5 * (kappa1 + kappa2 + math.sqrt((kappa1 - kappa2) ** 2 + 4.0 * big1 * big2))
    return JacobianSpectrum((float(kappa1), float(kappa2)), (float(big1), float(big2)), float(max(lam, 0.0)))


def critical_phi2(
    hist: JointDegreeHistogram,
    rule_family: Callable[[float], AttackRule],
    *,
    xtol: float = BISECT_XTOL,
) -> ThresholdPoint:
    """
    Root of Lambda(t) = 1 for a one-parameter family t -> rule on [0, 1].
    Lambda is non-increasing in t; without a sign change the nearer end of
    the interval is returned with a flag.
    """
    def excess(t: float) -> float:
        return jacobian_lambda(hist, rule_family(t)).lambda_max - 1.0

    if excess(0.0) <= 0.0:
        return ThresholdPoint(0.0, ThresholdFlag.BELOW)
    if excess(1.0) >= 0.0:
        return ThresholdPoint(1.0, ThresholdFlag.ABOVE)
    root = optimize.bisect(excess, 0.0, 1.0, xtol=xtol)
    return ThresholdPoint(float(root), ThresholdFlag.OK)


def threshold_curve(
    hist: JointDegreeHistogram,
    attack_kind: AttackKind,
    grid: Sequence[float],
) -> list[CurvePoint]:
    """
    (phi1, phi2_c) along the Lambda = 1 line. Targeted kinds read phi1 and
    phi2 as removed fractions and go through the degree cutoffs first.
    """
    attack_kind = AttackKind(attack_kind)
    if not attack_kind.is_layer:
        raise AttackRuleError(f"threshold curves need a layer attack, got {attack_kind.value}")

    curve = []
    for phi1 in grid:
        point = critical_phi2(hist, lambda t, phi1=phi1: AttackSpec(attack_kind, phi1, t).rule_for(hist))
        curve.append(CurvePoint(float(phi1), point.value, point.flag))
    return curve


def symmetric_threshold(hist: JointDegreeHistogram, attack_kind: AttackKind) -> ThresholdPoint:
    """phi_c along phi1 = phi2 = phi for layer kinds, or the single phi of multiplex kinds."""
    attack_kind = AttackKind(attack_kind)
    return critical_phi2(hist, lambda t: AttackSpec(attack_kind, t, t).rule_for(hist))
