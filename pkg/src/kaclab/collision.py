"""Kac collision operator in Fourier variables (Bobylev form).

The gain and loss parts are never separated: the loss coefficient alone
diverges for non-cutoff kernels, and only the combined bracket

    fhat(xi sin t) ghat(xi cos t) - fhat(0) ghat(xi)

is integrable (it vanishes quadratically at t = 0 for even data).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import parallel
from .errors import AccuracyNotReached, DomainError
from .kernel import KernelSpec, QuadratureRule, beta_values, integrate_singular, tail_moment
from .spectral import GridSpec, PhysicalState, SpectralState, lagrange_stencil, to_physical

try:  # optional accelerator; the numpy path is the reference implementation
    from numba import njit as _njit

    @_njit(cache=True, nogil=True)
    def _gather_dot(f, idx, wgt, out, lo, hi):
        nq = idx.shape[1]
        p = idx.shape[2]
        for j in range(lo, hi):
            for q in range(nq):
                acc = 0.0
                for k in range(p):
                    acc += f[idx[j, q, k]] * wgt[j, q, k]
                out[j, q] = acc

except ImportError:  # pragma: no cover

    def _gather_dot(f, idx, wgt, out, lo, hi):
        out[lo:hi] = np.einsum("jqp,jqp->jq", f[idx[lo:hi]], wgt[lo:hi])


_EVALUATOR_CACHE: dict = {}


class BobylevEvaluator:
    """Precomputed machinery for evaluating F(K(f, g)) on a fixed grid.

    All sampling points xi*sin(a), xi*cos(a) are fixed once (grid, rule)
    are fixed, so interpolation reduces to cached gathers; an evaluation
    is a handful of elementwise passes over (n * n_theta) arrays and is
    embarrassingly parallel over frequency blocks.
    """

    def __init__(self, grid: GridSpec, spec: KernelSpec, rule: QuadratureRule,
                 order: Optional[int] = None):
        self.grid = grid
        self.spec = spec
        self.rule = rule
        self.order = order or grid.interp_order
        xi = grid.xi()
        self._xi = xi

        ang = rule.theta / 2.0 if spec.half_angle else rule.theta
        c_ang = rule.coarse_theta / 2.0 if spec.half_angle else rule.coarse_theta
        # symmetric integral over [-pi/2, pi/2] of an even bracket
        self.w = 2.0 * rule.weights * beta_values(spec, rule.theta)
        self.cw = 2.0 * rule.coarse_weights * beta_values(spec, rule.coarse_theta)

        self._fine = self._stencils(xi, ang)
        self._coarse = self._stencils(xi, c_ang)

        # error model pieces: integral of beta * t^2 below theta_min, and
        # which fine nodes sit closest to the singularity
        self.tail2 = 2.0 * tail_moment(spec, rule.theta_min, 2)
        self._small = np.argsort(rule.theta)[:4]
        self._small_theta = rule.theta[self._small]

    def _stencils(self, xi, ang):
        n, p = self.grid.n, self.order
        sin_pts = np.outer(xi, np.sin(ang)).ravel()
        cos_pts = np.outer(xi, np.cos(ang)).ravel()
        top = self.grid.xi_max * (1.0 + 1e-12)
        if sin_pts.max(initial=0.0) > top or cos_pts.max(initial=0.0) > top:
            raise DomainError("Bobylev sampling left [0, xi_max]")  # cannot happen
        idx_s, w_s = lagrange_stencil(n, self.grid.dxi, sin_pts, p)
        idx_c, w_c = lagrange_stencil(n, self.grid.dxi, cos_pts, p)
        nq = ang.size
        return (idx_s.reshape(n, nq, p), w_s.reshape(n, nq, p),
                idx_c.reshape(n, nq, p), w_c.reshape(n, nq, p))

    def angles(self) -> np.ndarray:
        """Sampling angles of the fine rule (halved in half-angle mode)."""
        return self.rule.theta / 2.0 if self.spec.half_angle else self.rule.theta

    def sample_sin(self, vals: np.ndarray, parity: str = "even") -> np.ndarray:
        """(n, n_theta) matrix of vals interpolated at xi_j * sin(angle_q)."""
        return self._sample(vals, slot=0, parity=parity)

    def sample_cos(self, vals: np.ndarray, parity: str = "even") -> np.ndarray:
        """(n, n_theta) matrix of vals interpolated at xi_j * cos(angle_q)."""
        return self._sample(vals, slot=2, parity=parity)

    def _sample(self, vals, slot, parity):
        idx, wgt = self._fine[slot], self._fine[slot + 1]
        if parity == "odd":
            # reflected reads flip sign; re-derive the sign pattern from
            # the raw points rather than caching a second stencil set
            pts = np.outer(self._xi, np.sin(self.angles()) if slot == 0
                           else np.cos(self.angles())).ravel()
            idx2, wgt2 = lagrange_stencil(
                self.grid.n, self.grid.dxi, pts, self.order, parity="odd")
            out = np.einsum("mp,mp->m", vals[idx2], wgt2)
            return out.reshape(idx.shape[0], idx.shape[1])
        out = np.empty((idx.shape[0], idx.shape[1]))
        _gather_dot(vals, idx, wgt, out, 0, idx.shape[0])
        return out

    def _bracket(self, fvals, gvals, stencils, scratch, lo, hi):
        idx_s, w_s, idx_c, w_c = stencils
        fs, gc = scratch
        _gather_dot(fvals, idx_s, w_s, fs, lo, hi)
        _gather_dot(gvals, idx_c, w_c, gc, lo, hi)
        return fs[lo:hi] * gc[lo:hi] - fvals[0] * gvals[lo:hi, None]

    def k_of(self, fvals: np.ndarray, gvals: np.ndarray,
             estimate_error: bool = False) -> np.ndarray:
        """Samples of F(K(f, g)) on the grid; entry at xi = 0 is exactly zero."""
        n = self.grid.n
        out = np.empty(n)
        est = np.zeros(n)
        fine_scratch = (
            np.empty((n, self.w.size)),
            np.empty((n, self.w.size)),
        )
        coarse_scratch = (
            np.empty((n, self.cw.size)),
            np.empty((n, self.cw.size)),
        ) if estimate_error else None

        def work(lo, hi):
            br = self._bracket(fvals, gvals, self._fine, fine_scratch, lo, hi)
            out[lo:hi] = br @ self.w
            if estimate_error:
                cbr = self._bracket(fvals, gvals, self._coarse, coarse_scratch, lo, hi)
                diff = np.abs(out[lo:hi] - cbr @ self.cw)
                m_hat = np.max(
                    np.abs(br[:, self._small]) / self._small_theta**2, axis=1
                )
                est[lo:hi] = diff + m_hat * self.tail2
            return None

        parallel.map_blocks(work, n)
        out[0] = 0.0
        if estimate_error:
            est[0] = 0.0
            worst = float(np.max(est))
            if worst > self.rule.tol:
                raise AccuracyNotReached(
                    f"collision quadrature error estimate {worst:.3e} above "
                    f"tol {self.rule.tol:.3e}"
                )
        return out


def get_evaluator(grid: GridSpec, spec: KernelSpec, rule: QuadratureRule,
                  order: Optional[int] = None) -> BobylevEvaluator:
    key = (grid, id(spec), id(rule), order)
    ev = _EVALUATOR_CACHE.get(key)
    if ev is None:
        ev = BobylevEvaluator(grid, spec, rule, order)
        if len(_EVALUATOR_CACHE) > 16:
            _EVALUATOR_CACHE.clear()
        _EVALUATOR_CACHE[key] = ev
    return ev


def bobylev_rhs(state: SpectralState, spec: KernelSpec, rule: QuadratureRule,
                order: Optional[int] = None, estimate_error: bool = False) -> np.ndarray:
    """d fhat/dt samples for the Kac equation (K(f, f) in Fourier form)."""
    ev = get_evaluator(state.grid, spec, rule, order)
    return ev.k_of(state.values, state.values, estimate_error)


def weak_pairing(f: SpectralState, g: SpectralState, h: SpectralState,
                 spec: KernelSpec, rule: QuadratureRule) -> float:
    """(K(f, g), h)_{L^2} via Plancherel on the half-line."""
    if f.grid != g.grid or f.grid != h.grid:
        raise DomainError("weak_pairing requires states on a common grid")
    ev = get_evaluator(f.grid, spec, rule)
    k_hat = ev.k_of(f.values, g.values)
    return float(np.trapezoid(k_hat * h.values, dx=f.grid.dxi) / math.pi)


@dataclass(frozen=True)
class CoercivitySplit:
    """Decomposition of -(K(f,g), g) into its positive and cancellation parts."""

    positive_part: float
    cancellation_part: float
    bound_constant: float  # cancellation = bound_constant * ||f||_L1 * ||g||_L2^2


def _physical_on(state: SpectralState, v: np.ndarray) -> np.ndarray:
    return to_physical(state, v).values


def coercivity_split(f: SpectralState, g: SpectralState, spec: KernelSpec,
                     rule: QuadratureRule, neg_threshold: float = 1e-3) -> CoercivitySplit:
    """Brute-force physical-space split of the collision quadratic form.

    positive_part = 1/2 * int beta f(v*) (g(v') - g(v))^2; the cancellation
    part collapses, by the rotation change of variables, to
    1/2 * int beta (sec t - 1) * ||f||_L1 * ||g||_L2^2.  Intended for small
    grids only (cost is n_v^2 * n_theta).
    """
    if f.grid != g.grid:
        raise DomainError("states must share a grid")
    grid = f.grid
    v = grid.v_points()
    fv = _physical_on(f, v)
    neg = PhysicalState(v, fv, f.time).clamped_negative_fraction()
    if neg > neg_threshold:
        raise DomainError(
            f"f has a significant negative part ({neg:.2e}) in physical space"
        )
    fv = np.maximum(fv, 0.0)
    dv = v[1] - v[0]

    # g on an extended uniform grid covering the rotated points, then a
    # cheap cubic gather per (v, v*, theta) triple
    vmax_ext = math.sqrt(2.0) * grid.v_max + 4 * dv
    n_ext = 4097
    v_ext = np.linspace(0.0, vmax_ext, n_ext)
    g_ext = _physical_on(g, v_ext)  # even in v: evaluate on [0, vmax_ext]
    dve = v_ext[1] - v_ext[0]

    theta = rule.theta
    w_beta = rule.weights * beta_values(spec, theta)
    sin_t, cos_t = np.sin(theta), np.cos(theta)

    gv = _physical_on(g, v)
    quad = np.zeros(v.size)

    def gather(points):
        idx, wgt = lagrange_stencil(n_ext, dve, np.abs(points).ravel(), 4)
        return np.einsum("mp,mp->m", g_ext[idx], wgt).reshape(points.shape)

    def work(lo, hi):
        # vp[i, j, q] = v_i cos t_q -/+ v*_j sin t_q ; both theta signs
        vp_m = v[lo:hi, None, None] * cos_t - v[None, :, None] * sin_t
        vp_p = v[lo:hi, None, None] * cos_t + v[None, :, None] * sin_t
        diff_sq = (gather(vp_m) - gv[lo:hi, None, None]) ** 2
        diff_sq += (gather(vp_p) - gv[lo:hi, None, None]) ** 2
        inner = diff_sq @ w_beta  # (hi-lo, n_v*)
        quad[lo:hi] = inner @ fv
        return None

    parallel.map_blocks(work, v.size, block=16)
    positive = 0.5 * float(quad @ np.full(v.size, dv)) * dv

    mass_f = float(np.trapezoid(fv, dx=dv))
    g_l2_sq = float(np.trapezoid(gv * gv, dx=dv))
    sec_moment = integrate_singular(rule, spec, lambda t: 1.0 / np.cos(t) - 1.0)
    constant = 0.5 * sec_moment
    cancellation = constant * mass_f * g_l2_sq
    return CoercivitySplit(positive, cancellation, constant)
