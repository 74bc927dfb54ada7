"""Gevrey-weight multipliers, smoothing-rate fits, and the a-priori tracker.

Two regularized multiplier families act on spectral states: an
exponential weight exp(c0 t <xi>^(2s')) damped by a delta-regularization
(bounded by 1/delta for every delta in (0,1)), and a polynomial weight
<xi>^(tN-1) (1+delta |xi|^2)^(-N0).  All symbol arithmetic runs in log
space with an explicit overflow guard at exponent 700.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DegenerateFit, DomainError, OverflowGuard, WindowTooSmall
from .spectral import SpectralState, to_physical

LOG_GUARD = 700.0


def _bracket_sq(xi):
    return 1.0 + np.asarray(xi, dtype=float) ** 2


@dataclass(frozen=True)
class GevreyMultiplier:
    """Regularized exponential weight G(t, xi) = e^E / (1 + delta e^E).

    E = c0 t <xi>^(2 s'); the symbol is even, nondecreasing in |xi| and
    bounded by min(1/delta, e^E).  c0 = 0 degenerates to the constant
    1/(1+delta), which the a-priori tracker uses as a frozen baseline.
    """

    c0: float
    t: float
    s_prime: float
    delta: float

    def __post_init__(self):
        if self.c0 < 0:
            raise DomainError("rate constant c0 must be nonnegative")
        if self.t < 0:
            raise DomainError("time must be nonnegative")
        if not (0.0 < self.s_prime < 0.5):
            raise DomainError("s' must lie in (0, 1/2)")
        if not (0.0 < self.delta <= 1.0):
            raise DomainError("delta must lie in (0, 1]")

    def exponent(self, xi):
        return self.c0 * self.t * _bracket_sq(xi) ** self.s_prime

    def log_symbol(self, xi):
        # e^E/(1+delta e^E) = 1/(e^-E + delta): stable for any E >= 0
        e = self.exponent(xi)
        return -np.log(self.delta + np.exp(-e))

    def symbol(self, xi):
        return np.exp(self.log_symbol(xi))

    # exact derivative formulas, used by the certification scans
    def dt_symbol(self, xi):
        e = self.exponent(xi)
        damp = 1.0 / (1.0 + self.delta * np.exp(np.minimum(e, LOG_GUARD)))
        return self.c0 * _bracket_sq(xi) ** self.s_prime * self.symbol(xi) * damp

    def dxi_symbol(self, xi):
        xi = np.asarray(xi, dtype=float)
        e = self.exponent(xi)
        damp = 1.0 / (1.0 + self.delta * np.exp(np.minimum(e, LOG_GUARD)))
        pref = 2.0 * self.s_prime * self.c0 * self.t
        return pref * _bracket_sq(xi) ** (self.s_prime - 1.0) * xi * self.symbol(xi) * damp

    def d2xi_symbol(self, xi):
        xi = np.asarray(xi, dtype=float)
        sp, c0, t, d = self.s_prime, self.c0, self.t, self.delta
        e = self.exponent(xi)
        expe = np.exp(np.minimum(e, LOG_GUARD))
        damp = 1.0 / (1.0 + d * expe)
        b = _bracket_sq(xi)
        g = self.symbol(xi)
        first = (2.0 * sp * c0 * t * b ** (sp - 1.0) * xi) ** 2 * g \
            * (1.0 - d * expe) * damp**2
        second = 2.0 * sp * c0 * t * (
            b ** (sp - 1.0) + 2.0 * (sp - 1.0) * xi**2 * b ** (sp - 2.0)
        ) * g * damp
        return first + second


@dataclass(frozen=True)
class PolyMultiplier:
    """Polynomial weight M(t, xi) = <xi>^(t N - 1) (1 + delta |xi|^2)^(-N0).

    The damping order is tied to the horizon by 2 N0 = T0 N + 4, which
    keeps the symbol bounded on [0, T0] for every delta in (0, 1).
    """

    N: float
    T0: float
    t: float
    delta: float
    N0: float = field(default=None)

    def __post_init__(self):
        if self.N <= 0 or self.T0 <= 0:
            raise DomainError("growth rate N and horizon T0 must be positive")
        if not (0.0 <= self.t <= self.T0):
            raise DomainError("t must lie in [0, T0]")
        if not (0.0 < self.delta < 1.0):
            raise DomainError("delta must lie in (0, 1)")
        required = (self.T0 * self.N + 4.0) / 2.0
        if self.N0 is None:
            object.__setattr__(self, "N0", required)
        elif abs(self.N0 - required) > 1e-12 * max(1.0, required):
            raise DomainError("N0 must satisfy 2 N0 = T0 N + 4")

    def log_symbol(self, xi):
        b = _bracket_sq(xi)
        return 0.5 * (self.t * self.N - 1.0) * np.log(b) \
            - self.N0 * np.log1p(self.delta * (b - 1.0))

    def symbol(self, xi):
        return np.exp(self.log_symbol(xi))

    def dt_log_symbol(self, xi):
        return 0.5 * self.N * np.log(_bracket_sq(xi))


Multiplier = Union[GevreyMultiplier, PolyMultiplier]


def apply_multiplier(state: SpectralState, mult: Multiplier) -> SpectralState:
    """Pointwise multiplication of the Fourier samples by the symbol."""
    log_sym = mult.log_symbol(state.grid.xi())
    peak = float(np.max(log_sym))
    if peak > LOG_GUARD:
        raise OverflowGuard(f"log-symbol {peak:.1f} > {LOG_GUARD:.0f}")
    return state.with_values(state.values * np.exp(log_sym))


def weighted_l2_1(state: SpectralState) -> float:
    """||<v> f||_L2 with the weight applied in physical space."""
    phys = to_physical(state)
    sq = np.trapezoid((1.0 + phys.v**2) * phys.values**2, dx=phys.dv)
    return math.sqrt(float(sq))


# ---------------------------------------------------------------------------
# Smoothing-rate fit


@dataclass(frozen=True)
class GevreyFitPoint:
    t: float
    c: float
    residual: float
    window_lo: float
    window_hi: float
    n_points: int
    saturated: bool


@dataclass(frozen=True)
class GevreyFitSeries:
    s_prime: float
    floor: float
    points: list

    def rates(self) -> np.ndarray:
        return np.array([p.c for p in self.points])

    def times(self) -> np.ndarray:
        return np.array([p.t for p in self.points])


def _bin_envelope(xi, absvals, x, floor, n_bins):
    """Per-bin maxima of |fhat| over equal-width bins in x = <xi>^(2s')."""
    usable = absvals > floor
    if usable.sum() < 2:
        return None
    edges = np.linspace(x[usable].min(), x[usable].max(), n_bins + 1)
    env_x, env_y = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mask = usable & (x >= lo) & (x <= hi)
        if not mask.any():
            continue
        env_x.append(0.5 * (lo + hi))
        env_y.append(float(np.max(absvals[mask])))
    return np.array(env_x), np.array(env_y)


def gevrey_fit(traj, s_prime: float, floor: float = 1e-12,
               n_bins: int = 24) -> GevreyFitSeries:
    """Exponential Fourier-decay rate c(t) against <xi>^(2 s').

    For each output time the decay accumulated since t = 0 is measured:
    c(t) is the least-squares slope of -log(env_t / env_0) over binned
    spectral envelopes, where env is the per-bin maximum of |fhat| above
    the amplitude floor.  Referencing the initial snapshot removes the
    datum's own (typically algebraic) decay, so a rough datum reports
    c(0) = 0 and any positive c(t) is decay produced by the evolution.
    The top 10% of frequencies are excluded as truncation-contaminated.
    """
    if s_prime >= traj.kernel_spec.s:
        raise DomainError("s' must be smaller than the kernel exponent s")
    grid = traj.grid
    xi = grid.xi()
    keep = xi <= 0.9 * grid.xi_max
    xi = xi[keep]
    x = _bracket_sq(xi) ** s_prime
    ref = np.abs(traj.states[0].values[keep])
    ref_env = _bin_envelope(xi, ref, x, floor, n_bins)
    if ref_env is None or ref_env[0].size < 8:
        raise WindowTooSmall("fewer than 8 usable envelope bins at t=0")
    ref_x, ref_y = ref_env

    points = []
    for t, state in zip(traj.times, traj.states):
        vals = np.abs(state.values[keep])
        env = _bin_envelope(xi, vals, x, floor, n_bins)
        if env is None or env[0].size < 8:
            raise WindowTooSmall(f"fewer than 8 usable envelope bins at t={t}")
        ex, ey = env
        # intersect bins usable at both times (grids of bins coincide)
        common_x, y_rel = [], []
        for cx, cy in zip(ex, ey):
            j = np.argmin(np.abs(ref_x - cx))
            if abs(ref_x[j] - cx) < 1e-9:
                common_x.append(cx)
                y_rel.append(-(math.log(cy) - math.log(ref_y[j])))
        common_x = np.array(common_x)
        y_rel = np.array(y_rel)
        if common_x.size < 8:
            raise WindowTooSmall(f"fewer than 8 common envelope bins at t={t}")
        slope, intercept = np.polyfit(common_x, y_rel, 1)
        pred = slope * common_x + intercept
        resid = float(np.sqrt(np.mean((y_rel - pred) ** 2)))
        usable_xi = xi[vals > floor]
        hi = float(usable_xi.max()) if usable_xi.size else 0.0
        saturated = hi < 0.999 * xi.max()  # the floor, not the grid, ends the window
        points.append(GevreyFitPoint(
            t=float(t), c=float(slope), residual=resid,
            window_lo=float(usable_xi.min()) if usable_xi.size else 0.0,
            window_hi=hi, n_points=common_x.size, saturated=saturated,
        ))
    return GevreyFitSeries(s_prime=s_prime, floor=floor, points=points)


# ---------------------------------------------------------------------------
# A-priori estimate tracker


@dataclass(frozen=True)
class AprioriReport:
    times: np.ndarray
    y: np.ndarray
    dy_dt: np.ndarray          # centred differences at interior output times
    bound_rhs: np.ndarray      # C1 y + C2 y^(p+1) at the same times
    C1: float
    C2: float
    exponent_p: float
    T_star: float
    worst_residual: float
    nonmonotonic: bool


def apriori_tracker(traj, c0: float, s_prime: float, delta: float) -> AprioriReport:
    """Track y(t) = ||G_delta f(t)||_{L2_1} and fit its growth inequality.

    Fits the smallest constants (C1, C2) with
    dy/dt <= C1 y + C2 y^(p+1), p = s'/(s - s'), along the discrete
    series, and reports the blow-up horizon T* of the matching scalar
    ODE solution.
    """
    s = traj.kernel_spec.s
    if not (0.0 < s_prime < s):
        raise DomainError("need 0 < s' < s")
    p = s_prime / (s - s_prime)
    xi_top = _bracket_sq(traj.grid.xi_max) ** s_prime
    if c0 * traj.times[-1] * xi_top > LOG_GUARD:
        raise OverflowGuard("c0 * T * <xi_max>^(2s') exceeds the overflow guard")

    y = np.array([
        weighted_l2_1(apply_multiplier(
            st, GevreyMultiplier(c0=c0, t=float(t), s_prime=s_prime, delta=delta)))
        for t, st in zip(traj.times, traj.states)
    ])
    t = traj.times
    dy = np.gradient(y, t)

    nonmono = bool(np.any(np.diff(y) < -1e-9 * np.max(np.abs(y))))

    pos = dy > 0
    if not pos.any():
        c1 = c2 = 0.0
    else:
        from scipy.optimize import nnls

        a = np.column_stack([y[pos], y[pos] ** (p + 1.0)])
        sol, _ = nnls(a, dy[pos])
        c1, c2 = float(sol[0]), float(sol[1])
        rhs = c1 * y + c2 * y ** (p + 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(rhs > 0, dy / rhs, 0.0)
        worst = float(np.max(ratios))
        if worst > 1.0:
            c1 *= worst
            c2 *= worst
        c1 *= 1.05  # 5% guard
        c2 *= 1.05

    bound = c1 * y + c2 * y ** (p + 1.0)
    resid = float(np.max(dy - bound))

    if c2 <= 0.0 or y[0] <= 0.0:
        t_star = math.inf
    elif c1 <= 0.0:
        t_star = 1.0 / (p * c2 * y[0] ** p)
    else:
        t_star = math.log1p(c1 / (c2 * y[0] ** p)) / (p * c1)

    return AprioriReport(
        times=t, y=y, dy_dt=dy, bound_rhs=bound, C1=c1, C2=c2,
        exponent_p=p, T_star=t_star, worst_residual=resid,
        nonmonotonic=nonmono,
    )


def ode_bound_curve(report: AprioriReport) -> np.ndarray:
    """Closed-form solution of du/dt = C1 u + C2 u^(p+1) from y(0).

    Along [0, min(T, T*)) the measured series must stay below this curve
    (up to the fitted guard); used as a self-consistency diagnostic.
    """
    c1, c2, p = report.C1, report.C2, report.exponent_p
    y0 = report.y[0]
    t = report.times
    if c2 == 0.0:
        return y0 * np.exp(c1 * t)
    if c1 == 0.0:
        base = 1.0 - p * c2 * y0**p * t
        return y0 * np.where(base > 0, base, np.nan) ** (-1.0 / p)
    base = 1.0 + (c2 / c1) * y0**p * (1.0 - np.exp(p * c1 * t))
    curve = y0 * np.exp(c1 * t) * np.where(base > 0, base, np.nan) ** (-1.0 / p)
    return curve


# ---------------------------------------------------------------------------
# Symbol-bound certification scans (exact formulas vs. stated bounds)


def _sample_symbol_space(rng, n, t_max=1.0, xi_max=40.0):
    delta = 10.0 ** rng.uniform(-6, 0, n)
    t = rng.uniform(0.0, t_max, n)
    xi = rng.uniform(-xi_max, xi_max, n)
    return delta, t, xi


def scan_derivative_bounds(c0: float, s_prime: float, n_samples: int = 10_000,
                           seed: int = 2024, t_max: float = 1.0):
    """Check the three derivative bounds of the exponential symbol.

    |d_t G| <= c0 <xi>^(2s') G and |d_xi G| <= 2 s' c0 t <xi>^(2s'-1) G
    hold with constant one; |d2_xi G| <= C <xi>^(2(2s'-1)) G holds with a
    fitted C.  Returns (violations, fitted_C, worst_margin).
    """
    rng = np.random.default_rng(seed)
    delta, t, xi = _sample_symbol_space(rng, n_samples, t_max)
    viol = 0
    worst = -math.inf
    ratios = []
    for d, tt, x in zip(delta, t, xi):
        m = GevreyMultiplier(c0=c0, t=tt, s_prime=s_prime, delta=d)
        g = float(m.symbol(x))
        b = float(_bracket_sq(x))
        bound_t = c0 * b**s_prime * g
        bound_x = 2.0 * s_prime * c0 * tt * b ** (s_prime - 0.5) * g
        if abs(float(m.dt_symbol(x))) > bound_t * (1 + 1e-12):
            viol += 1
        if abs(float(m.dxi_symbol(x))) > bound_x * (1 + 1e-12):
            viol += 1
        denom = b ** (2.0 * s_prime - 1.0) * g
        ratios.append(abs(float(m.d2xi_symbol(x))) / denom)
        worst = max(worst, max(
            abs(float(m.dt_symbol(x))) / bound_t if bound_t > 0 else 0.0,
            abs(float(m.dxi_symbol(x))) / bound_x if bound_x > 0 else 0.0,
        ))
    fitted_c = float(np.max(ratios)) * 1.05
    return viol, fitted_c, worst


def scan_submultiplicative(c0: float, s_prime: float, n_samples: int = 10_000,
                           seed: int = 2024, t_max: float = 1.0):
    """G(xi) <= 3 G(xi cos a) G(xi sin a) over sampled (xi, a, delta, t)."""
    rng = np.random.default_rng(seed)
    delta, t, xi = _sample_symbol_space(rng, n_samples, t_max)
    ang = rng.uniform(-math.pi / 2, math.pi / 2, n_samples)
    viol = 0
    worst = 0.0
    for d, tt, x, a in zip(delta, t, xi, ang):
        m = GevreyMultiplier(c0=c0, t=tt, s_prime=s_prime, delta=d)
        lhs = float(m.symbol(x))
        rhs = 3.0 * float(m.symbol(x * math.cos(a))) * float(m.symbol(x * math.sin(a)))
        ratio = lhs / rhs
        worst = max(worst, ratio)
        if ratio > 1.0 + 1e-12:
            viol += 1
    return viol, worst


def scan_difference_bounds(c0: float, s_prime: float, n_samples: int = 10_000,
                           seed: int = 2024, t_max: float = 1.0):
    """Taylor-difference bounds of the symbol and its xi-derivative.

    |G(xi) - G(xi cos a)| <= C sin^2(a/2) <xi>^(2s') G(xi cos a) G(xi sin a)
    and the derivative analogue with exponent (4s'-1)^+.  Returns
    (violations_with_fitted_C, C_value, C_derivative).
    """
    rng = np.random.default_rng(seed)
    delta, t, xi = _sample_symbol_space(rng, n_samples, t_max)
    ang = rng.uniform(-math.pi / 2, math.pi / 2, n_samples)
    r_val, r_der = [], []
    for d, tt, x, a in zip(delta, t, xi, ang):
        m = GevreyMultiplier(c0=c0, t=tt, s_prime=s_prime, delta=d)
        sin_half_sq = math.sin(a / 2.0) ** 2
        if sin_half_sq == 0.0:
            continue
        gc = float(m.symbol(x * math.cos(a)))
        gs = float(m.symbol(x * math.sin(a)))
        b = float(_bracket_sq(x))
        base = sin_half_sq * gc * gs
        lhs_val = abs(float(m.symbol(x)) - gc)
        r_val.append(lhs_val / (base * b**s_prime))
        lhs_der = abs(float(m.dxi_symbol(x)) - float(m.dxi_symbol(x * math.cos(a))))
        expo = max(4.0 * s_prime - 1.0, 0.0) / 2.0
        r_der.append(lhs_der / (base * b**expo))
    c_val = float(np.max(r_val)) * 1.05
    c_der = float(np.max(r_der)) * 1.05
    viol = int(np.sum(np.array(r_val) > c_val)) + int(np.sum(np.array(r_der) > c_der))
    return viol, c_val, c_der


def scan_poly_compression(N: float, T0: float, n_samples: int = 10_000,
                          seed: int = 2024):
    """M(xi) <= C M(xi cos a) for |a| <= pi/4, with fitted C."""
    rng = np.random.default_rng(seed)
    delta = 10.0 ** rng.uniform(-6, -1e-9, n_samples)
    t = rng.uniform(0.0, T0, n_samples)
    xi = rng.uniform(-40.0, 40.0, n_samples)
    ang = rng.uniform(-math.pi / 4, math.pi / 4, n_samples)
    ratios = []
    for d, tt, x, a in zip(delta, t, xi, ang):
        m = PolyMultiplier(N=N, T0=T0, t=tt, delta=d)
        ratios.append(float(np.exp(m.log_symbol(x) - m.log_symbol(x * math.cos(a)))))
    fitted = float(np.max(ratios)) * 1.05
    viol = int(np.sum(np.array(ratios) > fitted))
    # the multiplier-independent cap 2^((T0 N - 1)/2) must also hold
    cap = 2.0 ** ((T0 * N - 1.0) / 2.0) if T0 * N > 1 else 2.0 ** 0.5
    return viol, fitted, cap
