import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kaclab.errors import DomainError, ResolutionError, UnreliableEntropyWarning
from kaclab.spectral import (
    Gaussian,
    GridSpec,
    Indicator,
    PhysicalState,
    SpectralState,
    TwoBump,
    entropy,
    fourth_derivative_at_zero,
    init_from_profile,
    norm,
    norm_gevrey,
    norm_hs,
    norm_l1k,
    norm_l2,
    profile_moments,
    second_derivative_at_zero,
    to_physical,
    to_spectral,
)

GAUSS_ENTROPY = -0.5 * (1.0 + math.log(2.0 * math.pi))  # unit mass and temperature


@pytest.fixture(scope="module")
def gauss(grid):
    return init_from_profile(Gaussian(1.0, 1.0), grid)


class TestProfiles:
    def test_gaussian_samples(self, grid, gauss):
        xi = grid.xi()
        assert np.allclose(gauss.values, np.exp(-0.5 * xi**2), atol=1e-15)
        assert gauss.values[0] == 1.0

    def test_indicator_zero_frequency_is_mass(self, grid):
        st_ = init_from_profile(Indicator(2.5, 1.0), grid)
        assert st_.values[0] == pytest.approx(2.5)

    def test_indicator_at_pi(self, grid):
        st_ = init_from_profile(Indicator(1.0, 1.0), grid)
        # sin(pi)/pi = 0, via interpolation at an off-grid point
        assert abs(st_.interpolate(math.pi)) < 1e-12

    def test_two_bump_mass(self, grid):
        st_ = init_from_profile(TwoBump(1.5, centers=(1.0, 2.0), widths=(0.5, 0.4)), grid)
        assert st_.values[0] == pytest.approx(1.5)

    def test_invalid_profiles(self, grid):
        with pytest.raises(DomainError):
            init_from_profile(Gaussian(-1.0, 1.0), grid)
        with pytest.raises(DomainError):
            init_from_profile(Indicator(1.0, 0.0), grid)
        with pytest.raises(DomainError):
            init_from_profile(TwoBump(1.0, centers=(1.0,), widths=(0.5, 0.4)), grid)

    def test_profile_moments_indicator(self):
        m, e, m4 = profile_moments(Indicator(1.0, math.sqrt(3.0)))
        assert (m, e) == (1.0, pytest.approx(1.0))
        assert m4 == pytest.approx(9.0 / 5.0)


class TestTransforms:
    def test_gaussian_pair(self, gauss):
        phys = to_physical(gauss)
        exact = np.exp(-0.5 * phys.v**2) / math.sqrt(2 * math.pi)
        assert np.max(np.abs(phys.values - exact)) < 1e-8

    def test_round_trip(self, grid, gauss):
        back = to_spectral(to_physical(gauss), grid)
        assert np.max(np.abs(back.values - gauss.values)) < 1e-8

    def test_zero_maps_to_zero(self, grid):
        zero = SpectralState(grid, np.zeros(grid.n))
        assert np.all(to_physical(zero).values == 0.0)

    def test_resolution_guard(self, gauss):
        with pytest.raises(ResolutionError):
            to_physical(gauss, np.linspace(-100, 100, 51))

    def test_evenness_preserved(self, gauss):
        v = np.linspace(-6, 6, 241)
        phys = to_physical(gauss, v)
        assert np.allclose(phys.values, phys.values[::-1], atol=1e-14)


class TestInterpolation:
    def test_exact_at_nodes(self, grid, gauss):
        xi = grid.xi()
        for j in (0, 1, 17, grid.n - 1):
            assert gauss.interpolate(xi[j]) == gauss.values[j]

    def test_endpoint(self, grid, gauss):
        assert gauss.interpolate(grid.xi_max) == gauss.values[-1]

    def test_near_zero_even_reflection(self, grid, gauss):
        x = grid.dxi / 2
        exact = math.exp(-0.5 * x * x)
        # the documented floor is the cubic O(dxi^4) error; the default
        # high-order window does much better
        assert abs(gauss.interpolate(x, order=4) - exact) < grid.dxi**4
        assert abs(gauss.interpolate(x) - exact) < 1e-12

    def test_out_of_range(self, grid, gauss):
        with pytest.raises(DomainError):
            gauss.interpolate(grid.xi_max * 1.01)

    @given(st.integers(min_value=0, max_value=255))
    def test_node_exactness_everywhere(self, j):
        g = GridSpec()
        state = init_from_profile(Gaussian(1.0, 1.0), g)
        assert state.interpolate(g.xi()[j]) == state.values[j]


class TestNorms:
    def test_plancherel(self, gauss):
        phys = to_physical(gauss)
        physical_l2 = math.sqrt(np.trapezoid(phys.values**2, dx=phys.dv))
        assert norm_l2(gauss) == pytest.approx(physical_l2, abs=1e-8)

    def test_l1k_mass(self, gauss):
        assert norm_l1k(gauss, 0) == pytest.approx(1.0, abs=1e-10)

    def test_l1k_second_moment(self, gauss):
        # int (1 + v^2) f = mass + energy = 2 for the unit gaussian
        assert norm_l1k(gauss, 2) == pytest.approx(2.0, abs=1e-10)

    def test_entropy_gaussian(self, gauss):
        assert entropy(gauss) == pytest.approx(GAUSS_ENTROPY, abs=1e-8)

    def test_entropy_warning_on_ringing(self, grid):
        rough = init_from_profile(Indicator(1.0, math.sqrt(3.0)), grid)
        with pytest.warns(UnreliableEntropyWarning):
            entropy(rough)

    def test_gevrey_norm_identity_at_t0(self, gauss):
        phys = to_physical(gauss)
        l21 = math.sqrt(np.trapezoid((1 + phys.v**2) * phys.values**2, dx=phys.dv))
        assert norm_gevrey(gauss, c0=1.0, t=0.0, s_prime=0.2) == pytest.approx(l21)

    def test_hs_weight_settings(self, gauss):
        # weight 1 dominates weight 0; sigma growth increases the norm
        assert norm_hs(gauss, 0.25, weight=1) > norm_hs(gauss, 0.25)
        assert norm_hs(gauss, 0.5) > norm_hs(gauss, 0.25)

    def test_hs_weight2_stencil_vs_physical(self, gauss):
        # second-difference route against the fractional (physical) route
        a = norm_hs(gauss, 0.3, weight=2)
        b = norm_hs(gauss, 0.3, weight=2.0 + 1e-12)  # forces physical route
        assert a == pytest.approx(b, rel=1e-5)

    def test_dispatcher(self, gauss):
        assert norm(gauss, "L2") == norm_l2(gauss)
        assert norm(gauss, "L1k", k=2) == norm_l1k(gauss, 2)
        with pytest.raises(DomainError):
            norm(gauss, "unknown")


class TestMomentStencils:
    def test_energy_indicator(self, grid):
        st_ = init_from_profile(Indicator(1.0, math.sqrt(3.0)), grid)
        energy = -second_derivative_at_zero(st_.values, grid.dxi)
        assert energy == pytest.approx(1.0, abs=1e-7)

    def test_fourth_moment_indicator(self, grid):
        st_ = init_from_profile(Indicator(1.0, math.sqrt(3.0)), grid)
        m4 = fourth_derivative_at_zero(st_.values, grid.dxi)
        assert m4 == pytest.approx(9.0 / 5.0, abs=2e-4)


def test_density_validation(grid):
    vals = np.ones(grid.n)
    vals[3] = 2.0  # exceeds fhat(0)
    with pytest.raises(DomainError):
        SpectralState(grid, vals).validate_density()
    vals = -np.ones(grid.n)
    with pytest.raises(DomainError):
        SpectralState(grid, vals).validate_density()


def test_grid_validation():
    with pytest.raises(DomainError):
        GridSpec(n=8)
    with pytest.raises(DomainError):
        GridSpec(interp_order=5)


def test_clamped_fraction():
    v = np.linspace(-1, 1, 101)
    vals = np.ones(101)
    vals[:10] = -0.01
    frac = PhysicalState(v, vals).clamped_negative_fraction()
    assert 0.0 < frac < 0.01
