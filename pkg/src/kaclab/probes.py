"""Numerical certification harness for the functional inequalities.

Certification here means: zero violations over a documented,
deterministically seeded sample family, with the best (smallest)
constants reported.  Inequalities with an absolute constant (the
interpolation inequality, the factor-3 submultiplicative bound, the
unit-constant symbol derivative bounds) are genuine checks; the rest fit
their constant on the family, and stability of that fit under sample
doubling is what the test suite asserts.  A violation always signals an
implementation bug, never a counterexample.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import gevrey as gv
from .collision import get_evaluator, weak_pairing
from .errors import DomainError, InsufficientSamples, UnsupportedRegime
from .kernel import KernelSpec, QuadratureRule, integrate_singular
from .spectral import (
    GridSpec,
    Gaussian,
    Indicator,
    SpectralState,
    TwoBump,
    d1,
    init_from_profile,
    norm_hs,
    norm_l1k,
    norm_l2,
)


@dataclass
class ProbeReport:
    """Outcome of one inequality scan."""

    inequality_id: str
    sample_count: int
    violation_count: int
    fitted_constants: dict
    worst_margin: float
    sampling: str
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def to_json(self) -> str:
        payload = {
            "inequality_id": self.inequality_id,
            "sample_count": self.sample_count,
            "violation_count": self.violation_count,
            "fitted_constants": self.fitted_constants,
            "worst_margin": self.worst_margin,
            "sampling": self.sampling,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": self.details,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# Deterministic sample families


def density_family(grid: GridSpec) -> list:
    """Nonnegative unit-mass data spanning smooth and rough profiles."""
    profiles = [
        Gaussian(1.0, 0.6), Gaussian(1.0, 1.0), Gaussian(1.0, 1.8),
        Indicator(1.0, 0.8), Indicator(1.0, math.sqrt(3.0)), Indicator(1.0, 2.5),
        TwoBump(1.0, centers=(1.2,), widths=(0.45,)),
        TwoBump(1.0, centers=(0.8, 2.0), widths=(0.5, 0.4)),
    ]
    return [init_from_profile(p, grid) for p in profiles]


def packet(grid: GridSpec, xi0: float, width: float = 0.6) -> SpectralState:
    """Even cosine-windowed packet centred at frequency xi0 (signed data)."""
    xi = grid.xi()
    vals = np.exp(-0.5 * ((xi - xi0) / width) ** 2)
    vals = vals + np.exp(-0.5 * ((xi + xi0) / width) ** 2)
    return SpectralState(grid, vals, 0.0)


def window_family(grid: GridSpec, seed: int = 7, extra: int = 4) -> list:
    """Signed test functions: dyadic packets, a flat window, random mixtures."""
    rng = np.random.default_rng(seed)
    out = [packet(grid, x0) for x0 in (1.0, 2.0, 4.0, 8.0)]
    out.append(init_from_profile(Gaussian(1.0, 9.0), grid))  # flat window
    basis = density_family(grid) + out[:4]
    for _ in range(extra):
        coef = rng.normal(size=len(basis))
        vals = sum(c * b.values for c, b in zip(coef, basis))
        vals = vals / max(1e-30, np.max(np.abs(vals)))
        out.append(SpectralState(grid, vals, 0.0))
    return out


def _fit_and_count(ratios: np.ndarray, guard: float = 1.05):
    """Smallest constant passing every sample, plus the guarded violations."""
    ratios = np.asarray(ratios, dtype=float)
    fitted = float(np.max(ratios)) * guard
    violations = int(np.sum(ratios > fitted))
    return fitted, violations


# ---------------------------------------------------------------------------
# Coercivity of the collision quadratic form


def probe_coercivity(f_family: Sequence[SpectralState],
                     g_family: Sequence[SpectralState],
                     spec: KernelSpec, rule: QuadratureRule) -> ProbeReport:
    """-(K(f,g), g) >= c ||g||_Hs^2 - C ||f||_L1 ||g||_L2^2 with c > 0.

    The offset constant C is pinned to the exact cancellation coefficient
    (1/2) int beta (sec - 1); the coercivity constant is then fitted per
    f as the smallest quotient over the g family and must stay positive.
    """
    if len(g_family) < 5:
        raise InsufficientSamples("need at least 5 test functions g")
    c_cancel = 0.5 * integrate_singular(rule, spec, lambda t: 1.0 / np.cos(t) - 1.0)
    constants = {}
    worst = math.inf
    violations = 0
    count = 0
    for i, f in enumerate(f_family):
        mass = norm_l1k(f, 0)
        quotients = []
        for g in g_family:
            q = -weak_pairing(f, g, g, spec, rule)
            a = norm_hs(g, spec.s) ** 2
            b = mass * norm_l2(g) ** 2
            quotients.append((q + c_cancel * b) / a)
            count += 1
        c_f = float(np.min(quotients))
        constants[f"c_f[{i}]"] = c_f
        worst = min(worst, c_f)
        if c_f <= 0.0:
            violations += 1
    constants["C_cancellation"] = c_cancel
    return ProbeReport(
        inequality_id="coercivity",
        sample_count=count,
        violation_count=violations,
        fitted_constants=constants,
        worst_margin=worst,
        sampling=f"{len(f_family)} densities x {len(g_family)} windows",
        tolerance=0.0,
    )


# ---------------------------------------------------------------------------
# Commutator of the mollifier with the collision operator


def _odd_window_family(grid: GridSpec, seed: int = 11, count: int = 6):
    """Odd test functions represented by w with F(h) = i w, w real odd."""
    rng = np.random.default_rng(seed)
    xi = grid.xi()
    out = []
    for _ in range(count):
        x0 = rng.uniform(0.5, 6.0)
        sig = rng.uniform(0.5, 2.0)
        w = xi * np.exp(-0.5 * ((xi - x0) / sig) ** 2)
        out.append(w / np.max(np.abs(w)))
    return out


def _hs_norm_of_window(grid: GridSpec, w: np.ndarray, sigma: float) -> float:
    xi = grid.xi()
    return math.sqrt(float(
        np.trapezoid((1 + xi**2) ** sigma * w * w, dx=grid.dxi) / math.pi))


def commutator_pairing(f: SpectralState, g: SpectralState, h: SpectralState,
                       mult: gv.GevreyMultiplier, spec: KernelSpec,
                       rule: QuadratureRule) -> float:
    """(G K(f,g) - K(f, G g), h) for even h, via the Fourier-side identity.

    Both collision applications collapse to a single angular integral of
    fhat(xi sin t) [G(xi) - G(xi cos t)] ghat(xi cos t), so the
    cancellation at t = 0 is explicit and the non-cutoff integral is
    finite term by term.
    """
    ev = get_evaluator(f.grid, spec, rule)
    xi = f.grid.xi()
    ang = ev.angles()
    f_s = ev.sample_sin(f.values)
    g_c = ev.sample_cos(g.values)
    g_sym = mult.symbol(xi)
    g_sym_cos = mult.symbol(np.outer(xi, np.cos(ang)))
    inner = (f_s * (g_sym[:, None] - g_sym_cos) * g_c) @ ev.w
    return float(np.trapezoid(inner * h.values, dx=f.grid.dxi) / math.pi)


def weighted_commutator_pairing(f: SpectralState, g: SpectralState,
                                w_odd: np.ndarray, mult: gv.GevreyMultiplier,
                                spec: KernelSpec, rule: QuadratureRule) -> float:
    """((v G) K(f,g) - K(f, (v G) g), h) for odd h with F(h) = i w.

    Multiplication by v is i d/dxi on the Fourier side; the first slot
    needs d/dxi of G(xi) Khat(xi) on the grid, the second interpolates
    the odd array (G ghat)' at the compressed frequencies.
    """
    grid = f.grid
    ev = get_evaluator(grid, spec, rule)
    xi = grid.xi()
    ang = ev.angles()
    k_hat = ev.k_of(f.values, g.values)
    g_sym = mult.symbol(xi)
    gk_prime = d1(g_sym * k_hat, grid.dxi)
    gg_prime = d1(g_sym * g.values, grid.dxi)  # odd array on [0, Xi]

    f_s = ev.sample_sin(f.values)
    gg_prime_c = ev.sample_cos(gg_prime, parity="odd")
    # assemble the combined bracket before the angular weights: the gain
    # and loss parts are separately nonintegrable
    second = (f_s * gg_prime_c - f.values[0] * gg_prime[:, None]) @ ev.w
    integrand = gk_prime - second
    return float(np.trapezoid(integrand * w_odd, dx=grid.dxi) / math.pi)


def probe_commutator(f: SpectralState, g: SpectralState,
                     h_family: Sequence[SpectralState],
                     mult: gv.GevreyMultiplier, spec: KernelSpec,
                     rule: QuadratureRule,
                     t_sweep: Sequence[float] = (0.1, 0.2, 0.4),
                     delta_sweep: Sequence[float] = (1e-1, 1e-3, 1e-6)) -> ProbeReport:
    """Mollifier commutator bounds at s < 1/2, plain and v-weighted."""
    if spec.s >= 0.5:
        raise UnsupportedRegime(
            f"commutator bounds hold for s < 1/2 (got s={spec.s})")
    if len(h_family) < 3:
        raise InsufficientSamples("need at least 3 test functions h")
    grid = f.grid
    sp = mult.s_prime
    ratios_plain, ratios_weighted = [], []
    count = 0
    odd_windows = _odd_window_family(grid)
    for tt in t_sweep:
        for dd in delta_sweep:
            m = gv.GevreyMultiplier(c0=mult.c0, t=tt, s_prime=sp, delta=dd)
            gf = gv.apply_multiplier(f, m)
            gg = gv.apply_multiplier(g, m)
            rhs_plain_base = gv.weighted_l2_1(gf) * norm_hs(gg, sp)
            rhs_wt_base = (norm_l1k(f, 1) + gv.weighted_l2_1(gf)) * norm_hs(gg, sp, weight=1)
            for h in h_family:
                lhs = abs(commutator_pairing(f, g, h, m, spec, rule))
                ratios_plain.append(lhs / (rhs_plain_base * norm_hs(h, sp)))
                count += 1
            for w in odd_windows:
                lhs = abs(weighted_commutator_pairing(f, g, w, m, spec, rule))
                ratios_weighted.append(
                    lhs / (rhs_wt_base * _hs_norm_of_window(grid, w, sp)))
                count += 1
    c_plain, v1 = _fit_and_count(np.array(ratios_plain))
    c_weighted, v2 = _fit_and_count(np.array(ratios_weighted))
    worst = max(np.max(ratios_plain) / c_plain, np.max(ratios_weighted) / c_weighted)
    return ProbeReport(
        inequality_id="commutator",
        sample_count=count,
        violation_count=v1 + v2,
        fitted_constants={"C_plain": c_plain, "C_weighted": c_weighted},
        worst_margin=float(worst),
        sampling=(f"t in {list(t_sweep)}, delta in {list(delta_sweep)}, "
                  f"{len(h_family)} even + {len(odd_windows)} odd windows"),
        tolerance=0.0,
        details={"s": spec.s, "s_prime": sp},
    )


# ---------------------------------------------------------------------------
# Upper bound of the bilinear operator in weighted Sobolev scales


def probe_upper_bound(f_family: Sequence[SpectralState],
                      g_family: Sequence[SpectralState],
                      m: int, ell: int, spec: KernelSpec,
                      rule: QuadratureRule) -> ProbeReport:
    """||K(f,g)||_{H^m_ell} <= C ||f||_{L1_{ell+2s}} ||g||_{H^{m+2s}_{ell+2s}}."""
    if m not in (-2, -1, 0) or ell not in (0, 2):
        raise DomainError("supported ranges: m in {-2,-1,0}, ell in {0,2}")
    grid = f_family[0].grid
    ev = get_evaluator(grid, spec, rule)
    ratios = []
    for f in f_family:
        f_l1 = norm_l1k(f, ell + 2 * spec.s)
        for g in g_family:
            k_hat = ev.k_of(f.values, g.values)
            k_state = SpectralState(grid, k_hat, 0.0)
            lhs = norm_hs(k_state, m, weight=ell)
            rhs = f_l1 * norm_hs(g, m + 2 * spec.s, weight=ell + 2 * spec.s)
            if rhs == 0.0:
                if lhs > 1e-14:
                    ratios.append(math.inf)
                continue
            ratios.append(lhs / rhs)
    fitted, violations = _fit_and_count(np.array(ratios))
    return ProbeReport(
        inequality_id=f"upper-bound(m={m},ell={ell})",
        sample_count=len(ratios),
        violation_count=violations,
        fitted_constants={"C": fitted},
        worst_margin=float(np.max(ratios) / fitted),
        sampling=f"{len(f_family)} densities x {len(g_family)} windows",
        tolerance=0.0,
        details={"m": m, "ell": ell, "s": spec.s},
    )


# ---------------------------------------------------------------------------
# Interpolation inequality between Sobolev scales (exact constant 1)


def probe_interpolation(u_family: Sequence[SpectralState],
                        lambda_grid: Sequence[float],
                        s: float, s_prime: float,
                        rel_tol: float = 1e-12) -> ProbeReport:
    """||u||_{H^s'}^2 <= lam ||u||_{H^s}^2 + lam^(-s'/(s-s')) ||u||_{L2}^2."""
    if not (0.0 < s_prime < s):
        raise DomainError("need 0 < s' < s")
    expo = -s_prime / (s - s_prime)
    violations = 0
    worst = -math.inf
    count = 0
    for u in u_family:
        a = norm_hs(u, s_prime) ** 2
        b = norm_hs(u, s) ** 2
        c = norm_l2(u) ** 2
        for lam in lambda_grid:
            rhs = lam * b + lam**expo * c
            margin = (a - rhs) / max(rhs, 1e-300)
            worst = max(worst, margin)
            if margin > rel_tol:
                violations += 1
            count += 1
    return ProbeReport(
        inequality_id="interpolation",
        sample_count=count,
        violation_count=violations,
        fitted_constants={"C": 1.0},
        worst_margin=float(worst),
        sampling=f"{len(u_family)} states x {len(lambda_grid)} lambdas",
        tolerance=rel_tol,
        details={"s": s, "s_prime": s_prime},
    )


# ---------------------------------------------------------------------------
# Registry used by the CLI


def _std_grid(grid: Optional[GridSpec]) -> GridSpec:
    return grid if grid is not None else GridSpec(xi_max=16.0, n=128, v_max=8.0)


def run_probe_by_id(probe_id: str, spec: KernelSpec, rule: QuadratureRule,
                    grid: Optional[GridSpec] = None, s_prime: float = 0.2,
                    seed: int = 7, n_symbol_samples: int = 10_000):
    """Run one registered probe with its standard seeded sample family."""
    g = _std_grid(grid)
    if probe_id == "interpolation":
        fam = density_family(g) + window_family(g, seed=seed)
        lams = list(np.logspace(-3, 3, 13))
        return probe_interpolation(fam, lams, spec.s, s_prime)
    if probe_id == "coercivity":
        return probe_coercivity(density_family(g), window_family(g, seed=seed),
                                spec, rule)
    if probe_id == "commutator":
        if spec.s >= 0.5:
            raise UnsupportedRegime(
                f"commutator bounds hold for s < 1/2 (got s={spec.s})")
        f = init_from_profile(Gaussian(1.0, 1.0), g)
        gd = init_from_profile(Indicator(1.0, math.sqrt(3.0)), g)
        h_fam = window_family(g, seed=seed)[:6]
        mult = gv.GevreyMultiplier(c0=1.0, t=0.2, s_prime=s_prime, delta=1e-3)
        return probe_commutator(f, gd, h_fam, mult, spec, rule)
    if probe_id == "upper-bound":
        f_fam = density_family(g)
        g_fam = window_family(g, seed=seed)
        reports = [probe_upper_bound(f_fam, g_fam, m, ell, spec, rule)
                   for m in (-2, -1, 0) for ell in (0, 2)]
        merged = ProbeReport(
            inequality_id="upper-bound",
            sample_count=sum(r.sample_count for r in reports),
            violation_count=sum(r.violation_count for r in reports),
            fitted_constants={r.inequality_id: r.fitted_constants["C"]
                              for r in reports},
            worst_margin=max(r.worst_margin for r in reports),
            sampling=reports[0].sampling + " per (m, ell)",
            tolerance=0.0,
        )
        return merged
    if probe_id == "symbol-bounds":
        viol, c_fit, worst = gv.scan_derivative_bounds(
            1.0, s_prime, n_samples=n_symbol_samples, seed=seed)
        return ProbeReport(
            inequality_id="symbol-bounds", sample_count=3 * n_symbol_samples,
            violation_count=viol,
            fitted_constants={"C_second_derivative": c_fit},
            worst_margin=worst,
            sampling=f"{n_symbol_samples} random (delta, t, xi) triples",
            tolerance=1e-12)
    if probe_id == "submultiplicative":
        viol, worst = gv.scan_submultiplicative(
            1.0, s_prime, n_samples=n_symbol_samples, seed=seed)
        return ProbeReport(
            inequality_id="submultiplicative", sample_count=n_symbol_samples,
            violation_count=viol, fitted_constants={"C": 3.0},
            worst_margin=worst,
            sampling=f"{n_symbol_samples} random (delta, t, xi, angle)",
            tolerance=1e-12)
    if probe_id == "difference-bounds":
        viol, c_val, c_der = gv.scan_difference_bounds(
            1.0, s_prime, n_samples=n_symbol_samples, seed=seed)
        return ProbeReport(
            inequality_id="difference-bounds", sample_count=2 * n_symbol_samples,
            violation_count=viol,
            fitted_constants={"C_value": c_val, "C_derivative": c_der},
            worst_margin=1.0 / 1.05,
            sampling=f"{n_symbol_samples} random (delta, t, xi, angle)",
            tolerance=0.0)
    if probe_id == "poly-compression":
        viol, fitted, cap = gv.scan_poly_compression(
            4.0, 1.0, n_samples=n_symbol_samples, seed=seed)
        return ProbeReport(
            inequality_id="poly-compression", sample_count=n_symbol_samples,
            violation_count=viol + (1 if fitted > cap * 1.05 else 0),
            fitted_constants={"C": fitted, "analytic_cap": cap},
            worst_margin=fitted / cap,
            sampling=f"{n_symbol_samples} random (delta, t, xi, angle<=pi/4)",
            tolerance=0.0)
    raise DomainError(f"unknown probe id {probe_id!r}")


PROBE_IDS = (
    "interpolation",
    "coercivity",
    "commutator",
    "upper-bound",
    "symbol-bounds",
    "submultiplicative",
    "difference-bounds",
    "poly-compression",
)
