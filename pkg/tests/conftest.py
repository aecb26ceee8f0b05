from pathlib import Path

import numpy as np
import pytest

from scenario import load_scenario
from sim_harness import run
from schema import NoiseConfig, PolarCoefficients, SoarConfig

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def polar():
    return PolarCoefficients(c_d0=0.027, b=0.031, k=25.6)


@pytest.fixture
def config():
    return SoarConfig()


@pytest.fixture
def noise():
    return NoiseConfig(q1=0.001, q2=0.03, r=0.45)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def still_air_scenario():
    return load_scenario(SCENARIOS / "still_air.yaml")


@pytest.fixture
def single_thermal_scenario():
    return load_scenario(SCENARIOS / "single_thermal.yaml")


@pytest.fixture
def windy_scenario():
    return load_scenario(SCENARIOS / "windy_geofence.yaml")


@pytest.fixture(scope="session")
def still_air_result():
    return run(load_scenario(SCENARIOS / "still_air.yaml"))


@pytest.fixture(scope="session")
def single_thermal_result():
    return run(load_scenario(SCENARIOS / "single_thermal.yaml"))
