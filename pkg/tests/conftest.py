import math
import sys
import time
import warnings
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kaclab.errors import UnreliableEntropyWarning
from kaclab.evolve import simulate
from kaclab.kernel import KernelSpec, build_rule
from kaclab.spectral import GridSpec, Indicator, TwoBump, init_from_profile

settings.register_profile(
    "kaclab",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("kaclab")

warnings.filterwarnings("ignore", category=UnreliableEntropyWarning)


@pytest.fixture(scope="session")
def spec():
    return KernelSpec(family="power_law", C0=1.0, s=0.25)


@pytest.fixture(scope="session")
def rule(spec):
    return build_rule(spec, tol=1e-9)


@pytest.fixture(scope="session")
def grid():
    return GridSpec(xi_max=20.0, n=256, v_max=8.0)


@pytest.fixture(scope="session")
def small_grid():
    # small enough for brute-force physical-space oracles
    return GridSpec(xi_max=8.0, n=48, v_max=6.0, n_v=121)


class TimedTrajectory:
    def __init__(self, traj, elapsed):
        self.traj = traj
        self.elapsed = elapsed


@pytest.fixture(scope="session")
def indicator_run(spec, rule, grid):
    """Indicator datum evolved to T=1 with 21 outputs (shared by many tests)."""
    state = init_from_profile(Indicator(1.0, math.sqrt(3.0)), grid)
    t0 = time.perf_counter()
    traj = simulate(state, spec, rule, T=1.0, output_times=np.linspace(0, 1, 21))
    return TimedTrajectory(traj, time.perf_counter() - t0)


@pytest.fixture(scope="session")
def twobump_run(spec, rule, grid):
    state = init_from_profile(TwoBump(1.0, centers=(1.2,), widths=(0.45,)), grid)
    t0 = time.perf_counter()
    traj = simulate(state, spec, rule, T=1.0, output_times=np.linspace(0, 1, 21))
    return TimedTrajectory(traj, time.perf_counter() - t0)


@pytest.fixture(scope="session")
def indicator_run_fine(spec, rule):
    """Same scenario on the doubled grid, to T=0.5 (grid-stability check)."""
    g = GridSpec(xi_max=20.0, n=512, v_max=8.0)
    state = init_from_profile(Indicator(1.0, math.sqrt(3.0)), g)
    t0 = time.perf_counter()
    traj = simulate(state, spec, rule, T=0.5,
                    output_times=np.linspace(0, 0.5, 11))
    return TimedTrajectory(traj, time.perf_counter() - t0)
