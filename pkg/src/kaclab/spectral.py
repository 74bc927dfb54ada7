"""Even real densities represented by Fourier samples on [0, Xi].

Convention: fhat(xi) = int exp(-i v xi) f(v) dv with no prefactor, so
fhat(0) is the mass, -fhat''(0) the energy, and the evolution equation in
Fourier variables carries no 2*pi factor.  All densities are even and
real, so fhat is even and real and only nonnegative frequencies are
stored; fhat(-xi) := fhat(xi) everywhere (even reflection).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DomainError, OverflowGuard, ResolutionError, UnreliableEntropyWarning

SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class GridSpec:
    """Uniform frequency grid on [0, xi_max] plus the physical window.

    ``n_v`` is the physical sample count used for reconstruction-based
    norms (odd so Simpson weights apply); ``interp_order`` is the local
    Lagrange window used when sampling between frequency nodes.
    """

    xi_max: float = 20.0
    n: int = 256
    v_max: float = 8.0
    n_v: Optional[int] = None
    interp_order: int = 12

    def __post_init__(self):
        if self.n < 16:
            raise DomainError("need at least 16 frequency samples")
        if self.xi_max <= 0 or self.v_max <= 0:
            raise DomainError("xi_max and v_max must be positive")
        if self.interp_order % 2 or self.interp_order < 2:
            raise DomainError("interp_order must be an even integer >= 2")
        if self.n_v is None:
            object.__setattr__(self, "n_v", 2 * self.n - 1)
        if self.n_v % 2 == 0:
            raise DomainError("n_v must be odd")

    @property
    def dxi(self) -> float:
        return self.xi_max / (self.n - 1)

    def xi(self) -> np.ndarray:
        return np.linspace(0.0, self.xi_max, self.n)

    def v_points(self) -> np.ndarray:
        return np.linspace(-self.v_max, self.v_max, self.n_v)


@dataclass(frozen=True)
class SpectralState:
    """Samples of fhat on a GridSpec at one time."""

    grid: GridSpec
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise DomainError(
                f"expected {self.grid.n} samples, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("non-finite Fourier samples")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def validate_density(self, slack: float = 1e-9):
        """Check the necessary conditions for an even nonnegative density."""
        f0 = self.values[0]
        if f0 <= 0.0:
            raise DomainError("fhat(0) must be positive (positive mass)")
        if np.max(np.abs(self.values)) > f0 * (1.0 + slack):
            raise DomainError("|fhat| exceeds fhat(0); not a nonnegative density")
        return self

    def with_values(self, values, time=None) -> "SpectralState":
        return SpectralState(self.grid, values, self.time if time is None else time)

    def interpolate(self, xi, order: Optional[int] = None):
        """Sample fhat between nodes; exact at nodes, even reflection at 0."""
        xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
        if np.any(xi_arr < 0.0) or np.any(xi_arr > self.grid.xi_max * (1 + 1e-12)):
            raise DomainError("interpolation point outside [0, xi_max]")
        p = order or self.grid.interp_order
        idx, wgt = lagrange_stencil(self.grid.n, self.grid.dxi, xi_arr.ravel(), p)
        out = np.einsum("mp,mp->m", self.values[idx], wgt)
        out = out.reshape(xi_arr.shape)
        return float(out[0]) if np.isscalar(xi) or np.ndim(xi) == 0 else out


@dataclass(frozen=True)
class PhysicalState:
    """Density samples on a symmetric uniform velocity grid."""

    v: np.ndarray
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if v.shape != vals.shape:
            raise DomainError("v grid and samples must share a shape")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "values", vals)

    @property
    def dv(self) -> float:
        return float(self.v[1] - self.v[0])

    def clamped_negative_fraction(self) -> float:
        neg = -np.minimum(self.values, 0.0)
        total = np.trapezoid(np.abs(self.values), dx=self.dv)
        if total == 0.0:
            return 0.0
        return float(np.trapezoid(neg, dx=self.dv) / total)


# ---------------------------------------------------------------------------
# Initial profiles


@dataclass(frozen=True)
class Gaussian:
    mass: float = 1.0
    temperature: float = 1.0


@dataclass(frozen=True)
class Indicator:
    mass: float = 1.0
    half_width: float = 1.0


@dataclass(frozen=True)
class TwoBump:
    mass: float = 1.0
    centers: Sequence[float] = (1.5,)
    widths: Sequence[float] = (0.5,)


Profile = Union[Gaussian, Indicator, TwoBump]


def init_from_profile(profile: Profile, grid: GridSpec) -> SpectralState:
    """Exact Fourier samples of an even initial profile; fhat(0) = mass."""
    xi = grid.xi()
    if isinstance(profile, Gaussian):
        if profile.mass <= 0 or profile.temperature <= 0:
            raise DomainError("gaussian profile needs positive mass and temperature")
        vals = profile.mass * np.exp(-0.5 * profile.temperature * xi**2)
    elif isinstance(profile, Indicator):
        if profile.mass <= 0 or profile.half_width <= 0:
            raise DomainError("indicator profile needs positive mass and half width")
        vals = profile.mass * np.sinc(profile.half_width * xi / np.pi)
    elif isinstance(profile, TwoBump):
        centers = np.asarray(profile.centers, dtype=float)
        widths = np.asarray(profile.widths, dtype=float)
        if profile.mass <= 0 or np.any(widths <= 0) or centers.size != widths.size:
            raise DomainError("two-bump profile needs positive mass/widths of equal length")
        parts = np.exp(-0.5 * (widths[:, None] * xi[None, :]) ** 2) * np.cos(
            centers[:, None] * xi[None, :]
        )
        vals = profile.mass * parts.mean(axis=0)
    else:
        raise DomainError(f"unknown profile {profile!r}")
    return SpectralState(grid, vals, 0.0).validate_density()


def profile_moments(profile: Profile):
    """(mass, energy, fourth moment) of the exact profile."""
    if isinstance(profile, Gaussian):
        m, T = profile.mass, profile.temperature
        return m, m * T, 3.0 * m * T**2
    if isinstance(profile, Indicator):
        m, a = profile.mass, profile.half_width
        return m, m * a**2 / 3.0, m * a**4 / 5.0
    c = np.asarray(profile.centers, float)
    w = np.asarray(profile.widths, float)
    m = profile.mass
    e = m * np.mean(w**2 + c**2)
    m4 = m * np.mean(3 * w**4 + 6 * w**2 * c**2 + c**4)
    return m, e, m4


# ---------------------------------------------------------------------------
# Local Lagrange interpolation on the uniform grid


def lagrange_stencil(n: int, dx: float, pts: np.ndarray, order: int,
                     parity: str = "even"):
    """Gather indices and weights for local Lagrange interpolation.

    Windows are centred where possible, clipped at the top node, and
    reflected below zero (index -k reads node +k), which keeps the full
    order for points near the origin.  ``parity`` states the symmetry of
    the interpolated array: reflected reads flip sign for odd data.
    """
    p = order
    t = pts / dx
    # snap points that are nodes up to rounding (a few ulp), so they stay
    # exact; the threshold must not move genuine off-node samples
    t_round = np.round(t)
    snap = np.abs(t - t_round) <= 1e-12 * np.maximum(1.0, np.abs(t_round))
    t = np.where(snap, t_round, t)
    start = np.floor(t).astype(np.int64) - (p // 2 - 1)
    start = np.minimum(start, n - p)
    start = np.maximum(start, 1 - p)  # keep reflected indices within range
    offsets = np.arange(p)
    nodes = start[:, None] + offsets[None, :]
    tau = t[:, None] - nodes
    # weight_k = prod_{m != k} (t - node_m) / (node_k - node_m); the
    # denominator depends only on the offset pattern.
    k = np.arange(p)
    denom = np.empty(p)
    for j in range(p):
        d = j - k
        denom[j] = np.prod(d[d != 0].astype(float))
    full = np.ones((pts.size, p))
    for j in range(p):
        cols = [m for m in range(p) if m != j]
        full[:, j] = np.prod(tau[:, cols], axis=1) / denom[j]
    if parity == "odd":
        full = full * np.where(nodes < 0, -1.0, 1.0)
    elif parity != "even":
        raise DomainError(f"unknown parity {parity!r}")
    idx = np.abs(nodes).astype(np.int32)
    return idx, full


# ---------------------------------------------------------------------------
# Transforms


def _check_resolution(dxi: float, vmax: float):
    # fewer than 4 samples per oscillation of cos(v xi) makes the
    # quadrature in xi meaningless at the edge of the physical window
    if dxi * vmax > math.pi / 2.0 + 1e-12:
        raise ResolutionError(
            f"dxi*v_max = {dxi * vmax:.3f} > pi/2: fewer than 4 points per oscillation"
        )


def to_physical(state: SpectralState, v: Optional[np.ndarray] = None) -> PhysicalState:
    """Reconstruct f(v) = (1/pi) * int_0^Xi fhat(xi) cos(v xi) dxi (trapezoid)."""
    grid = state.grid
    if v is None:
        v = grid.v_points()
    v = np.asarray(v, dtype=float)
    _check_resolution(grid.dxi, float(np.max(np.abs(v), initial=0.0)))
    xi = grid.xi()
    w = np.full(grid.n, grid.dxi)
    w[0] *= 0.5
    w[-1] *= 0.5
    vals = np.cos(np.outer(v, xi)) @ (w * state.values) / math.pi
    return PhysicalState(v, vals, state.time)


def _simpson_weights(n: int, dx: float) -> np.ndarray:
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (dx / 3.0)


def to_spectral(phys: PhysicalState, grid: GridSpec) -> SpectralState:
    """Forward transform of even physical samples by composite Simpson."""
    v = phys.v
    _check_resolution(grid.dxi, float(np.max(np.abs(v))))
    if v.size % 2 == 0:
        raise DomainError("to_spectral needs an odd sample count (Simpson)")
    dv = phys.dv
    if dv * grid.xi_max > math.pi / 2.0 + 1e-12:
        raise ResolutionError("physical grid too coarse for the requested frequencies")
    w = _simpson_weights(v.size, dv)
    xi = grid.xi()
    vals = np.cos(np.outer(xi, v)) @ (w * phys.values)
    return SpectralState(grid, vals, phys.time)


# ---------------------------------------------------------------------------
# Derivative stencils in xi (even reflection at 0, one-sided at the top)


def d1(values: np.ndarray, dx: float) -> np.ndarray:
    """First derivative, 4th order, even reflection below zero."""
    n = values.size
    out = np.empty(n)
    f = values

    def get(i):
        j = np.abs(i)
        j = np.where(j > n - 1, 2 * (n - 1) - j, j)  # crude top reflection guard
        return f[j]

    i = np.arange(n)
    out = (-get(i + 2) + 8 * get(i + 1) - 8 * get(i - 1) + get(i - 2)) / (12 * dx)
    # one-sided at the top two nodes (values there are tail-small)
    for j in (n - 2, n - 1):
        out[j] = (f[j] - f[j - 1]) / dx if j == n - 1 else (f[j + 1] - f[j - 1]) / (2 * dx)
    return out


def d2(values: np.ndarray, dx: float) -> np.ndarray:
    """Second derivative, 4th order, even reflection below zero."""
    n = values.size
    f = values

    def get(i):
        j = np.abs(i)
        j = np.where(j > n - 1, 2 * (n - 1) - j, j)
        return f[j]

    i = np.arange(n)
    out = (
        -get(i + 2) + 16 * get(i + 1) - 30 * f[i] + 16 * get(i - 1) - get(i - 2)
    ) / (12 * dx * dx)
    for j in (n - 2, n - 1):
        lo = min(j, n - 3)
        out[j] = (f[lo + 2] - 2 * f[lo + 1] + f[lo]) / (dx * dx)
    return out


def second_derivative_at_zero(values: np.ndarray, dx: float) -> float:
    """f''(0) by a 7-point symmetric stencil under even reflection, O(dx^6)."""
    f0, f1, f2, f3 = values[0], values[1], values[2], values[3]
    return (-490.0 * f0 + 540.0 * f1 - 54.0 * f2 + 4.0 * f3) / (180.0 * dx * dx)


def fourth_derivative_at_zero(values: np.ndarray, dx: float) -> float:
    """f''''(0) by a 7-point symmetric stencil under even reflection, O(dx^4)."""
    f0, f1, f2, f3 = values[0], values[1], values[2], values[3]
    return (56.0 * f0 - 78.0 * f1 + 24.0 * f2 - 2.0 * f3) / (6.0 * dx**4)


# ---------------------------------------------------------------------------
# Norms


def _half_line_sq(grid: GridSpec, u: np.ndarray, sigma: float = 0.0) -> float:
    """(1/pi) int_0^Xi <xi>^(2 sigma) u(xi)^2 dxi by trapezoid."""
    xi = grid.xi()
    wgt = (1.0 + xi**2) ** sigma if sigma != 0.0 else 1.0
    return float(np.trapezoid(wgt * u * u, dx=grid.dxi) / math.pi)


def norm_l2(state: SpectralState) -> float:
    """Plancherel L2 norm of the even density."""
    return math.sqrt(_half_line_sq(state.grid, state.values))


def norm_hs(state: SpectralState, sigma: float, weight: float = 0) -> float:
    """Weighted Sobolev norm ||<v>^weight f||_{H^sigma}.

    Integer weights act in frequency (multiplication by v is i*d/dxi,
    by <v>^2 the second-difference stencil); fractional weights go
    through physical reconstruction.
    """
    g = state.grid
    if weight == 0:
        return math.sqrt(_half_line_sq(g, state.values, sigma))
    if weight == 1:
        base = _half_line_sq(g, state.values, sigma)
        vpart = _half_line_sq(g, d1(state.values, g.dxi), sigma)
        return math.sqrt(base + vpart)
    if weight == 2:
        w = state.values - d2(state.values, g.dxi)
        return math.sqrt(_half_line_sq(g, w, sigma))
    if weight < 0:
        raise DomainError("negative weights are not supported")
    phys = to_physical(state)
    weighted = (1.0 + phys.v**2) ** (weight / 2.0) * phys.values
    back = to_spectral(PhysicalState(phys.v, weighted, state.time), g)
    return math.sqrt(_half_line_sq(g, back.values, sigma))


def norm_l1k(state: SpectralState, k: float) -> float:
    """int <v>^k |f(v)| dv via physical reconstruction."""
    phys = to_physical(state)
    wgt = (1.0 + phys.v**2) ** (k / 2.0) if k != 0 else 1.0
    return float(np.trapezoid(wgt * np.abs(phys.values), dx=phys.dv))


def entropy(state: SpectralState, reliability_threshold: float = 1e-6) -> float:
    """int f log f dv over the clamped-positive part of the reconstruction."""
    from scipy.special import xlogy

    phys = to_physical(state)
    frac = phys.clamped_negative_fraction()
    if frac > reliability_threshold:
        warnings.warn(
            f"clamped-negative mass fraction {frac:.2e} exceeds "
            f"{reliability_threshold:.0e}; entropy value is unreliable",
            UnreliableEntropyWarning,
            stacklevel=2,
        )
    pos = np.maximum(phys.values, 0.0)
    return float(np.trapezoid(xlogy(pos, pos), dx=phys.dv))


def gevrey_log_weight(xi: np.ndarray, c0: float, t: float, s_prime: float) -> np.ndarray:
    """log of the sharp Gevrey weight exp(c0 t <xi>^(2 s'))."""
    return c0 * t * (1.0 + xi**2) ** s_prime


def norm_gevrey(state: SpectralState, c0: float, t: float, s_prime: float) -> float:
    """Weighted L2_1 norm of the sharp Gevrey weight applied to fhat.

    The <v> weight is applied in physical space after the multiplier
    (reconstruct, weight, measure).
    """
    log_w = gevrey_log_weight(state.grid.xi(), c0, t, s_prime)
    if np.max(log_w) > 700.0:
        raise OverflowGuard(
            f"log-symbol {np.max(log_w):.1f} > 700; weight overflows double precision"
        )
    weighted = state.with_values(state.values * np.exp(log_w))
    phys = to_physical(weighted)
    sq = np.trapezoid((1.0 + phys.v**2) * phys.values**2, dx=phys.dv)
    return math.sqrt(float(sq))


_NORMS = ("L2", "Hs", "L1k", "entropy", "gevrey")


def norm(state: SpectralState, kind: str, **kw) -> float:
    """Dispatcher over the norm family used by the monitors and the CLI."""
    if kind == "L2":
        return norm_l2(state)
    if kind == "Hs":
        return norm_hs(state, kw["sigma"], kw.get("weight", 0))
    if kind == "L1k":
        return norm_l1k(state, kw.get("k", 0))
    if kind == "entropy":
        return entropy(state)
    if kind == "gevrey":
        return norm_gevrey(state, kw["c0"], kw["t"], kw["s_prime"])
    raise DomainError(f"unknown norm kind {kind!r}; expected one of {_NORMS}")
