"""Shared fixtures: one default scenario and a noiseless reference pass.

Session scope keeps the expensive pass synthesis to a single run; tests
that perturb observables must copy before mutating.
"""

import math

import numpy as np
import pytest

from leoloc.montecarlo import Scenario
from leoloc.orbitsim import observe_pass, orbit_above_station
from leoloc.pipeline import synthesize_observables


@pytest.fixture(scope="session")
def scenario():
    return Scenario()


@pytest.fixture(scope="session")
def gs10(scenario):
    return scenario.ground_station(k=10)


@pytest.fixture(scope="session")
def pass_factory(scenario):
    def make(gs, height=550e3, inclination=math.radians(53.0),
             peak_elevation=math.radians(84.0), side=+1, direction=+1,
             elevation_mask=None):
        mask = scenario.elevation_mask if elevation_mask is None else elevation_mask
        spec = orbit_above_station(scenario.station(), height, inclination,
                                   peak_elevation, side=side,
                                   direction=direction)
        return observe_pass(spec, gs, scenario.dt, mask,
                            duration=scenario.duration)
    return make


@pytest.fixture(scope="session")
def oracle_truth(pass_factory, gs10):
    return pass_factory(gs10)


@pytest.fixture(scope="session")
def oracle_obs(scenario, gs10, oracle_truth):
    # no noise, no offsets: the loopback reference
    return synthesize_observables(oracle_truth, gs10)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


# acceptance tests append one "criterion N ... PASS/FAIL" line each; the
# summary hook replays them after the run so they survive output capture
_criterion_lines: list[str] = []


@pytest.fixture(scope="session")
def criterion_log():
    return _criterion_lines


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criterion_lines):
            terminalreporter.write_line(line)
