"""Time integration of the Fourier-space Kac equation with monitors.

Explicit integrators only: on a fixed frequency grid the combined
Bobylev bracket is bounded, so stiffness stays moderate and the adaptive
Bogacki-Shampine 3(2) pair is the default.  Momentum is not monitored;
evenness forces it to zero structurally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .collision import get_evaluator
from .errors import DegenerateFit, DomainError, StiffnessError
from .kernel import KernelSpec, QuadratureRule, kernel_moment
from .spectral import (
    GridSpec,
    SpectralState,
    entropy,
    fourth_derivative_at_zero,
    norm_l2,
    second_derivative_at_zero,
)

DEFAULT_RELTOL = 1e-8
DEFAULT_ABSTOL = 1e-12
MAX_REJECTIONS = 20

SCHEMES = ("rk4", "rk23_adaptive")


@dataclass
class Trajectory:
    """Time-ordered snapshots plus monitor series."""

    grid: GridSpec
    kernel_spec: KernelSpec
    times: np.ndarray
    states: list
    monitors: dict

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise DomainError("output times must be strictly increasing")
        self.times = t

    def state_at(self, t: float) -> SpectralState:
        i = int(np.argmin(np.abs(self.times - t)))
        return self.states[i]


def _monitor_row(state: SpectralState):
    g = state.grid
    vals = state.values
    mass = float(vals[0])
    energy = -second_derivative_at_zero(vals, g.dxi)
    m4 = fourth_derivative_at_zero(vals, g.dxi)
    ent = entropy(state)
    temp = energy / mass if mass > 0 else 1.0
    maxwellian = mass * np.exp(-0.5 * temp * g.xi() ** 2)
    dist_eq = float(np.max(np.abs(vals - maxwellian)))
    return {
        "mass": mass,
        "energy": energy,
        "m4": m4,
        "entropy": ent,
        "l2": norm_l2(state),
        "dist_to_equilibrium": dist_eq,
    }


def _rk4_step(rhs, y, dt):
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _BS23:
    """Bogacki-Shampine 3(2) pair with FSAL and a deadbeat controller."""

    def __init__(self, rhs, reltol, abstol):
        self.rhs = rhs
        self.reltol = reltol
        self.abstol = abstol
        self.k1 = None

    def attempt(self, y, dt):
        if self.k1 is None:
            self.k1 = self.rhs(y)
        k1 = self.k1
        k2 = self.rhs(y + 0.5 * dt * k1)
        k3 = self.rhs(y + 0.75 * dt * k2)
        y_new = y + dt * (2.0 * k1 + 3.0 * k2 + 4.0 * k3) / 9.0
        k4 = self.rhs(y_new)
        err = dt * (-5.0 * k1 / 72.0 + k2 / 12.0 + k3 / 9.0 - k4 / 8.0)
        scale = self.abstol + self.reltol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.max(np.abs(err) / scale))
        return y_new, k4, err_norm

    def step(self, y, dt_target):
        """One accepted step of size <= dt_target; returns (y_new, dt_used, dt_next)."""
        dt = dt_target
        for _ in range(MAX_REJECTIONS + 1):
            y_new, k4, err = self.attempt(y, dt)
            if err <= 1.0 or dt <= 1e-15:
                factor = 0.9 * err ** (-1.0 / 3.0) if err > 0 else 5.0
                dt_next = dt * min(5.0, max(0.2, factor))
                self.k1 = k4
                return y_new, dt, dt_next
            dt *= max(0.2, 0.9 * err ** (-1.0 / 3.0))
        raise StiffnessError(
            f"more than {MAX_REJECTIONS} step rejections (last dt={dt:.3e})"
        )


def step(state: SpectralState, dt: float, spec: KernelSpec, rule: QuadratureRule,
         scheme: str = "rk23_adaptive", reltol: float = DEFAULT_RELTOL,
         abstol: float = DEFAULT_ABSTOL) -> SpectralState:
    """One explicit step of d fhat/dt = K(f, f) in Fourier form."""
    if dt < 0:
        raise DomainError("dt must be nonnegative")
    if scheme not in SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}")
    if dt == 0.0:
        return state
    ev = get_evaluator(state.grid, spec, rule)
    rhs = lambda y: ev.k_of(y, y)
    if scheme == "rk4":
        y = _rk4_step(rhs, state.values, dt)
        return state.with_values(y, time=state.time + dt)
    ctl = _BS23(rhs, reltol, abstol)
    y, used, _ = ctl.step(state.values, dt)
    return state.with_values(y, time=state.time + used)


def simulate(init: SpectralState, spec: KernelSpec, rule: QuadratureRule,
             T: float, output_times: Optional[Sequence[float]] = None,
             scheme: str = "rk23_adaptive", dt: Optional[float] = None,
             reltol: float = DEFAULT_RELTOL, abstol: float = DEFAULT_ABSTOL,
             check_quadrature: bool = True) -> Trajectory:
    """Integrate to horizon T, landing exactly on every output time."""
    if T <= 0:
        raise DomainError("horizon T must be positive")
    if scheme not in SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}")
    init.validate_density()
    if output_times is None:
        output_times = np.linspace(0.0, T, 21)
    out_t = np.asarray(sorted(set(float(t) for t in output_times)))
    if out_t[0] < 0 or out_t[-1] > T * (1 + 1e-12):
        raise DomainError("output times must lie inside [0, T]")

    ev = get_evaluator(init.grid, spec, rule)
    rhs = lambda y: ev.k_of(y, y)

    times = []
    states = []
    rows = []

    t = init.time
    y = init.values.copy()
    if check_quadrature:
        ev.k_of(y, y, estimate_error=True)

    def record(tt, yy):
        st = SpectralState(init.grid, yy, tt)
        times.append(tt)
        states.append(st)
        rows.append(_monitor_row(st))

    if out_t[0] <= t + 1e-14:
        record(out_t[0], y)
        out_t = out_t[1:]

    if scheme == "rk4":
        h0 = dt if dt is not None else 1e-3
        for target in out_t:
            try:
                span = target - t
                nsteps = max(1, int(math.ceil(span / h0 - 1e-12)))
                h = span / nsteps
                for _ in range(nsteps):
                    y = _rk4_step(rhs, y, h)
                t = target
                record(t, y)
            except FloatingPointError as exc:  # pragma: no cover
                raise StiffnessError(f"rk4 failed near t={t}: {exc}") from exc
    else:
        ctl = _BS23(rhs, reltol, abstol)
        h = dt if dt is not None else min(1e-2, T / 50.0)
        for target in out_t:
            while t < target - 1e-14:
                try:
                    y_new, used, h_next = ctl.step(y, min(h, target - t))
                except StiffnessError as exc:
                    raise StiffnessError(f"{exc} at t={t:.6f}") from exc
                y = y_new
                t += used
                h = h_next
            t = target
            record(t, y)

    monitors = {k: np.array([r[k] for r in rows]) for k in rows[0]}
    return Trajectory(init.grid, spec, np.array(times), states, monitors)


@dataclass(frozen=True)
class MomentFit:
    """Exponential-relaxation fit of the excess fourth moment."""

    rate: float
    amplitude: float
    asymptote: float
    r_squared: float
    n_points: int


def moment_track(traj: Trajectory) -> MomentFit:
    """Fit log|M4(t) - 3 M2(t)^2| against t.

    The excess fourth moment of the Kac equation relaxes exponentially at
    the kernel rate 2*int beta sin^2 cos^2 (see kernel_moment('relax4')),
    independent of the datum.
    """
    t = traj.times
    if t.size < 5:
        raise DegenerateFit("need at least 5 output times")
    m2 = traj.monitors["energy"] / traj.monitors["mass"]
    m4 = traj.monitors["m4"] / traj.monitors["mass"]
    excess = traj.monitors["mass"] * (m4 - 3.0 * m2**2)
    scale = max(traj.monitors["m4"].max(), 1e-30)
    if abs(excess[0]) < 1e-8 * scale:
        raise DegenerateFit("fourth moment already at its Gaussian value")
    usable = np.abs(excess) > 1e-10 * scale
    if usable.sum() < 5:
        raise DegenerateFit("excess fourth moment decayed below fit floor")
    tt = t[usable]
    yy = np.log(np.abs(excess[usable]))
    slope, intercept = np.polyfit(tt, yy, 1)
    pred = slope * tt + intercept
    ss_res = float(np.sum((yy - pred) ** 2))
    ss_tot = float(np.sum((yy - yy.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    asym = float(3.0 * traj.monitors["mass"][-1] * m2[-1] ** 2)
    return MomentFit(
        rate=-float(slope),
        amplitude=float(math.copysign(math.exp(intercept), excess[0])),
        asymptote=asym,
        r_squared=r2,
        n_points=int(usable.sum()),
    )


def expected_relaxation_rate(spec: KernelSpec) -> float:
    """Independent quadrature value of the fourth-moment relaxation rate."""
    return kernel_moment(spec, "relax4")
