"""Angular cross-sections for grazing collisions and their singular quadrature.

The cross-sections have a nonintegrable singularity at angle zero; every
integral in the code pairs them against integrands that vanish there, and
the graded-panel rules below exploit that cancellation instead of
subtracting a local expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import AccuracyNotReached, DivergentMoment, DomainError, SingularPoint

HALF_PI = math.pi / 2.0

FAMILIES = ("power_law", "debye_yukawa", "truncated_power_law", "converted_3d")

# Default absolute tolerances (moments are used as fitted constants and
# oracle targets, right-hand-side integrals only need to beat the time
# stepper's local error).
MOMENT_TOL = 1e-10
RHS_TOL = 1e-9


@dataclass(frozen=True)
class KernelSpec:
    """Angular cross-section family.

    ``power_law`` is C0*|cos t|/|sin t|^(1+2s); ``debye_yukawa`` is
    C0*(|cos t|/|sin t|)*max(log 1/|t|, 0)^m (the logarithm is clamped at
    zero so the weight stays nonnegative on the whole range, which only
    modifies it away from the singularity); ``truncated_power_law`` is the
    power law cut to |t| >= theta_cut; ``converted_3d`` wraps a reduced
    three-dimensional kernel table and flips Bobylev sampling to half
    angles.
    """

    family: str = "power_law"
    C0: float = 1.0
    s: float = 0.25
    m: float = 1.0
    theta_cut: float = 0.1
    K3d: float = 0.0
    half_angle: bool = False
    b3d: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, compare=False
    )
    tail_amp: float = 0.0
    tail_exp: float = 0.0
    nonsingular: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown cross-section family {self.family!r}")
        if not (0.0 < self.s < 1.0):
            raise DomainError(f"singularity exponent s={self.s} not in (0, 1)")
        if self.C0 < 0.0:
            raise DomainError("amplitude C0 must be nonnegative")
        if self.family == "debye_yukawa" and self.m <= 0.0:
            raise DomainError("Debye-Yukawa log power m must be positive")
        if self.family == "truncated_power_law" and not (0.0 < self.theta_cut <= HALF_PI):
            raise DomainError("truncation angle must lie in (0, pi/2]")
        if self.family == "converted_3d" and self.b3d is None:
            raise DomainError("converted_3d kernel requires a b3d table")


def beta_values(spec: KernelSpec, theta: np.ndarray) -> np.ndarray:
    """Vectorised cross-section values; assumes 0 < |theta| <= pi/2."""
    t = np.abs(np.asarray(theta, dtype=float))
    if spec.family == "power_law":
        return spec.C0 * np.cos(t) / np.sin(t) ** (1.0 + 2.0 * spec.s)
    if spec.family == "debye_yukawa":
        logpart = np.maximum(np.log(1.0 / t), 0.0)
        return spec.C0 * (np.cos(t) / np.sin(t)) * logpart**spec.m
    if spec.family == "truncated_power_law":
        vals = spec.C0 * np.cos(t) / np.sin(t) ** (1.0 + 2.0 * spec.s)
        return np.where(t >= spec.theta_cut, vals, 0.0)
    # converted_3d: reduced kernel built from a 3D angular table; b3d takes
    # the angle itself (cos(theta) rounds to 1.0 below theta ~ 1e-8, which
    # would destroy the grazing tail)
    return 0.5 * np.sin(t) * np.asarray(spec.b3d(t), dtype=float)


def eval_beta(spec: KernelSpec, theta: float) -> float:
    """Cross-section at one angle, with domain checks."""
    if not np.isfinite(theta):
        raise DomainError(f"theta={theta} is not finite")
    if theta == 0.0:
        raise SingularPoint("cross-section has a nonintegrable singularity at theta=0")
    if abs(theta) > HALF_PI + 1e-15:
        raise DomainError(f"theta={theta} outside [-pi/2, pi/2]")
    return float(beta_values(spec, np.array([theta]))[0])


def tail_moment(spec: KernelSpec, theta_min: float, power: int = 2) -> float:
    """Upper bound for integral of beta(t)*t^power over (0, theta_min].

    Used by the quadrature error model; a safety factor covers the
    sub-leading terms of the small-angle expansions.
    """
    t = float(theta_min)
    if t <= 0.0:
        return 0.0
    if spec.family == "truncated_power_law":
        if t <= spec.theta_cut:
            return 0.0
        lo = spec.theta_cut
        p = power - 2.0 * spec.s
        return 1.1 * spec.C0 * (t**p - lo**p) / p
    if spec.family == "power_law":
        p = power - 2.0 * spec.s
        if p <= 0.0:
            return math.inf
        return 1.1 * spec.C0 * t**p / p
    if spec.family == "debye_yukawa":
        # beta*t^power ~ C0 t^(power-1) log(1/t)^m near zero
        if t >= 1.0:
            return math.inf
        return 1.1 * spec.C0 * t**power * math.log(1.0 / t) ** spec.m
    # converted_3d: use the measured tail beta ~ tail_amp * t^(-tail_exp)
    if spec.nonsingular or spec.tail_amp == 0.0:
        bound = float(np.max(beta_values(spec, np.array([t, t / 2, t / 4])), initial=0.0))
        return 1.1 * bound * t ** (power + 1) / (power + 1)
    p = power + 1.0 - spec.tail_exp
    if p <= 0.0:
        return math.inf
    return 1.1 * spec.tail_amp * t**p / p


def _breakpoints(spec: KernelSpec):
    """Interior angles where the cross-section is not smooth."""
    pts = []
    if spec.family == "debye_yukawa":
        pts.append(1.0)  # the clamped logarithm kinks at |theta| = 1
    if spec.family == "truncated_power_law":
        pts.append(spec.theta_cut)
    return [p for p in pts if 0.0 < p < HALF_PI]


def _theta_min_for(spec: KernelSpec, tol: float, power: int, margin: float) -> float:
    """Largest truncation angle whose tail bound is below tol/(2*margin)."""
    target = tol / (2.0 * margin)
    if tail_moment(spec, 1e-300, power) > target:
        raise DivergentMoment(
            f"beta*theta^{power} is not integrable for family={spec.family}, s={spec.s}"
        )
    lo, hi = 1e-300, HALF_PI
    if tail_moment(spec, hi, power) <= target:
        return hi / 4.0
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if tail_moment(spec, mid, power) <= target:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-9:
            break
    return lo


@lru_cache(maxsize=32)
def _gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Graded-panel Gauss rule on [theta_min, pi/2].

    Panels refine geometrically (ratio 1/2) toward the singular endpoint;
    Gauss nodes are interior, so the endpoint itself is never evaluated.
    ``theta``/``weights`` is the fine rule, the coarse pair (half the
    nodes per panel) feeds the error estimate.
    """

    theta: np.ndarray
    weights: np.ndarray
    coarse_theta: np.ndarray
    coarse_weights: np.ndarray
    edges: np.ndarray
    theta_min: float
    tol: float
    nodes_per_panel: int


def _panelize(edges: np.ndarray, nodes: int):
    x, w = _gauss(nodes)
    lo = edges[:-1]
    hi = edges[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    theta = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return theta, weights


def build_rule(
    spec: KernelSpec,
    tol: float = RHS_TOL,
    theta_min: Optional[float] = None,
    nodes_per_panel: int = 16,
    decay_order: int = 2,
    margin: float = 100.0,
    resolve_frequency: float = 64.0,
) -> QuadratureRule:
    """Construct a graded rule adequate for integrands vanishing like theta^decay_order.

    ``margin`` is the headroom assumed for the integrand's curvature scale
    relative to the unit-curvature tail model.  ``resolve_frequency`` is
    the largest phase rate (in radians per unit of sin theta) the rule
    must resolve: Bobylev brackets oscillate like fhat(xi sin theta), so
    it should be at least xi_max times the datum's velocity support.
    Panels are subdivided until the coarse (error-estimate) nodes resolve
    every oscillation.
    """
    if nodes_per_panel < 2:
        raise DomainError("need at least 2 nodes per panel")
    if theta_min is None:
        theta_min = _theta_min_for(spec, tol, decay_order, margin)
    if not (0.0 < theta_min < HALF_PI):
        raise DomainError("theta_min must lie in (0, pi/2)")
    edges = [HALF_PI]
    while edges[-1] * 0.5 > theta_min:
        edges.append(edges[-1] * 0.5)
    edges.append(theta_min)
    edges = np.array(edges[::-1])
    breaks = [p for p in _breakpoints(spec) if theta_min < p < HALF_PI]
    if breaks:
        edges = np.unique(np.concatenate([edges, np.array(breaks)]))
    if resolve_frequency > 0.0:
        # keep phase sweep per panel <= 4 rad so 8 Gauss nodes suffice
        sweep_cap = 4.0
        work = list(edges)
        i = 0
        while i < len(work) - 1:
            lo, hi = work[i], work[i + 1]
            if resolve_frequency * (math.sin(hi) - math.sin(lo)) > sweep_cap:
                work.insert(i + 1, 0.5 * (lo + hi))
            else:
                i += 1
        edges = np.array(work)
    theta, weights = _panelize(edges, nodes_per_panel)
    c_theta, c_weights = _panelize(edges, max(2, nodes_per_panel // 2))
    return QuadratureRule(
        theta=theta,
        weights=weights,
        coarse_theta=c_theta,
        coarse_weights=c_weights,
        edges=edges,
        theta_min=float(theta_min),
        tol=float(tol),
        nodes_per_panel=int(nodes_per_panel),
    )


def _apply(rule_theta, rule_w, spec, integrand):
    g = np.asarray(integrand(rule_theta), dtype=float)
    return 2.0 * float(np.dot(rule_w, beta_values(spec, rule_theta) * g))


def integrate_singular(
    rule: QuadratureRule,
    spec: KernelSpec,
    integrand: Callable[[np.ndarray], np.ndarray],
    decay_order: int = 2,
) -> float:
    """Integral of beta(t)*integrand(t) over [-pi/2, pi/2] for even integrands.

    The integrand must vanish at zero at least linearly; the error
    estimate combines the fine/coarse Gauss difference with the tail
    bound M*int(beta*t^decay_order) below theta_min, M being measured
    from the integrand at the smallest resolved angles.
    """
    fine = _apply(rule.theta, rule.weights, spec, integrand)
    coarse = _apply(rule.coarse_theta, rule.coarse_weights, spec, integrand)

    small = rule.theta[:4]
    gs = np.abs(np.asarray(integrand(small), dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        m_hat = float(np.max(gs / small**decay_order))
    tail = 2.0 * m_hat * tail_moment(spec, rule.theta_min, decay_order)
    est = abs(fine - coarse) + tail

    if est <= rule.tol:
        return fine
    if tail > rule.tol:
        raise AccuracyNotReached(
            f"tail bound {tail:.3e} above tol {rule.tol:.3e}; integrand decays "
            f"too slowly against this singularity (s={spec.s})"
        )
    # One round of node refinement on the same panels.
    nodes = rule.nodes_per_panel
    prev = fine
    for _ in range(2):
        nodes *= 2
        th, w = _panelize(rule.edges, nodes)
        fine = _apply(th, w, spec, integrand)
        est = abs(fine - prev) + tail
        if est <= rule.tol:
            return fine
        prev = fine
    raise AccuracyNotReached(
        f"estimated error {est:.3e} above tol {rule.tol:.3e} after refinement"
    )


_MOMENT_INTEGRANDS = {
    "abs_theta": (lambda t: np.abs(t), 1),
    "theta_sq": (lambda t: t * t, 2),
    "relax4": (lambda t: 2.0 * np.sin(t) ** 2 * np.cos(t) ** 2, 2),
}


def kernel_moment(spec: KernelSpec, kind: str, tol: float = MOMENT_TOL) -> float:
    """Angular moments of the cross-section over [-pi/2, pi/2].

    ``abs_theta`` is int beta*|t|, ``theta_sq`` is int beta*t^2, and
    ``relax4`` is 2*int beta*sin^2*cos^2 -- the relaxation rate of the
    fourth moment toward its Gaussian value.
    """
    if kind not in _MOMENT_INTEGRANDS:
        raise DomainError(f"unknown moment kind {kind!r}")
    integrand, decay = _MOMENT_INTEGRANDS[kind]
    if kind == "abs_theta" and spec.s >= 0.5:
        singular_power_law = spec.family == "power_law" or (
            spec.family == "converted_3d" and not spec.nonsingular
        )
        if singular_power_law:
            raise DivergentMoment(
                f"int beta*|theta| diverges for s={spec.s} >= 1/2"
            )
    rule = build_rule(spec, tol=tol, decay_order=decay, margin=10.0)
    return integrate_singular(rule, spec, integrand, decay_order=decay)
