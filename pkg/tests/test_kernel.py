import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kaclab.errors import AccuracyNotReached, DivergentMoment, DomainError, SingularPoint
from kaclab.kernel import (
    KernelSpec,
    build_rule,
    eval_beta,
    integrate_singular,
    kernel_moment,
)

# frozen values from an independent high-precision quadrature run
# (mpmath, 30 digits) for the power-law kernel at C0=1, s=0.25
THETA_SQ_S025 = 1.683531339941064
ABS_THETA_S025 = 4.2050449099888927
RELAX4_S025 = 32.0 / 21.0  # closed form
SEC_MOMENT_S025 = 1.6037195305288156
DEBYE_THETA_SQ_M1 = 0.45702807419971727


def test_eval_beta_vanishes_at_right_angle():
    assert eval_beta(KernelSpec(s=0.25), math.pi / 2) < 1e-15


def test_eval_beta_quarter_angle_value():
    # cos/sin^(3/2) at pi/4 reduces to 2^(1/4)
    val = eval_beta(KernelSpec(C0=1.0, s=0.25), math.pi / 4)
    assert val == pytest.approx(2.0 ** 0.25, rel=1e-14)


def test_eval_beta_singular_point():
    with pytest.raises(SingularPoint):
        eval_beta(KernelSpec(), 0.0)


def test_eval_beta_domain():
    with pytest.raises(DomainError):
        eval_beta(KernelSpec(), 2.0)
    with pytest.raises(DomainError):
        eval_beta(KernelSpec(), float("nan"))


@given(st.floats(min_value=1e-8, max_value=math.pi / 2),
       st.sampled_from(["power_law", "debye_yukawa", "truncated_power_law"]))
def test_eval_beta_even(theta, family):
    spec = KernelSpec(family=family, s=0.3, m=1.5, theta_cut=0.2)
    assert eval_beta(spec, theta) == eval_beta(spec, -theta)
    assert eval_beta(spec, theta) >= 0.0


@given(st.floats(min_value=1e-6, max_value=math.pi / 4 - 1e-9),
       st.floats(min_value=0.05, max_value=0.45),
       st.floats(min_value=0.01, max_value=0.45))
def test_eval_beta_monotone_in_s(theta, s_lo, ds):
    # |sin theta| < 1 on (0, pi/4), so a larger exponent increases beta
    lo = eval_beta(KernelSpec(s=s_lo), theta)
    hi = eval_beta(KernelSpec(s=min(s_lo + ds, 0.99)), theta)
    assert hi >= lo


def test_spec_validation():
    with pytest.raises(DomainError):
        KernelSpec(s=0.0)
    with pytest.raises(DomainError):
        KernelSpec(s=1.0)
    with pytest.raises(DomainError):
        KernelSpec(family="nope")
    with pytest.raises(DomainError):
        KernelSpec(family="debye_yukawa", m=0.0)


class TestMoments:
    def test_theta_sq(self):
        spec = KernelSpec(C0=1.0, s=0.25)
        assert kernel_moment(spec, "theta_sq") == pytest.approx(
            THETA_SQ_S025, abs=1e-10)

    def test_abs_theta(self):
        spec = KernelSpec(C0=1.0, s=0.25)
        assert kernel_moment(spec, "abs_theta") == pytest.approx(
            ABS_THETA_S025, abs=1e-9)

    def test_relax4_closed_form(self):
        spec = KernelSpec(C0=1.0, s=0.25)
        assert kernel_moment(spec, "relax4") == pytest.approx(
            RELAX4_S025, abs=1e-9)

    def test_amplitude_scales_linearly(self):
        # both values carry the 1e-10 moment tolerance independently
        one = kernel_moment(KernelSpec(C0=1.0, s=0.3), "theta_sq")
        two = kernel_moment(KernelSpec(C0=2.0, s=0.3), "theta_sq")
        assert two == pytest.approx(2.0 * one, abs=3e-10)

    def test_abs_theta_divergent_above_half(self):
        with pytest.raises(DivergentMoment):
            kernel_moment(KernelSpec(s=0.75), "abs_theta")
        with pytest.raises(DivergentMoment):
            kernel_moment(KernelSpec(s=0.5), "abs_theta")

    def test_truncated_at_right_angle_all_zero(self):
        spec = KernelSpec(family="truncated_power_law", theta_cut=math.pi / 2)
        for kind in ("abs_theta", "theta_sq", "relax4"):
            assert kernel_moment(spec, kind) == 0.0

    def test_truncated_interior_cut(self):
        spec = KernelSpec(family="truncated_power_law", theta_cut=0.3, s=0.25)
        # independent oracle: scipy adaptive quadrature on the regular region
        from scipy.integrate import quad

        ref, _ = quad(lambda t: np.cos(t) * t * t / np.sin(t) ** 1.5,
                      0.3, math.pi / 2, epsabs=1e-13)
        assert kernel_moment(spec, "theta_sq") == pytest.approx(2 * ref, abs=1e-9)

    def test_debye_yukawa_theta_sq(self):
        spec = KernelSpec(family="debye_yukawa", C0=1.0, m=1.0)
        assert kernel_moment(spec, "theta_sq") == pytest.approx(
            DEBYE_THETA_SQ_M1, abs=1e-9)

    def test_debye_yukawa_abs_theta_finite(self):
        # the logarithmic kernel has an integrable |theta| moment
        spec = KernelSpec(family="debye_yukawa", C0=1.0, m=1.0)
        val = kernel_moment(spec, "abs_theta")
        assert 0.0 < val < 10.0

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            kernel_moment(KernelSpec(), "theta_cubed")


class TestIntegrateSingular:
    def test_zero_integrand(self, spec, rule):
        assert integrate_singular(rule, spec, lambda t: 0.0 * t) == 0.0

    def test_theta_sq_matches_moment(self, spec, rule):
        val = integrate_singular(rule, spec, lambda t: t * t)
        assert val == pytest.approx(kernel_moment(spec, "theta_sq"), abs=2e-9)

    def test_nonintegrable_integrand_raises(self):
        spec = KernelSpec(s=0.75)
        rule = build_rule(spec, tol=1e-9)
        with pytest.raises((AccuracyNotReached, DivergentMoment)):
            integrate_singular(rule, spec, np.abs)

    def test_refinement_convergence(self, spec):
        # halving theta_min and doubling nodes moves results < 2*tol
        tol = 1e-9
        r1 = build_rule(spec, tol=tol)
        r2 = build_rule(spec, tol=tol, theta_min=r1.theta_min / 2,
                        nodes_per_panel=2 * r1.nodes_per_panel)
        for g in (lambda t: t * t, lambda t: np.sin(t) ** 2 * np.cos(t) ** 2):
            assert abs(integrate_singular(r1, spec, g)
                       - integrate_singular(r2, spec, g)) < 2 * tol

    def test_sec_moment(self, spec, rule):
        val = integrate_singular(rule, spec, lambda t: 1.0 / np.cos(t) - 1.0)
        assert val == pytest.approx(SEC_MOMENT_S025, abs=1e-8)

    def test_deterministic(self, spec, rule):
        a = integrate_singular(rule, spec, lambda t: t * t)
        b = integrate_singular(rule, spec, lambda t: t * t)
        assert a == b


def test_rule_panels_cover_without_overlap(spec, rule):
    edges = rule.edges
    assert edges[0] == rule.theta_min
    assert edges[-1] == pytest.approx(math.pi / 2)
    assert np.all(np.diff(edges) > 0)
    # nodes stay interior: the singular endpoint is never evaluated
    assert rule.theta.min() > rule.theta_min
    assert rule.theta.max() < math.pi / 2
