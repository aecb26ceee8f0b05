import pytest

from schema import SoarConfig
from sweep import centered_loiter_climb, predicted_climb_rate, radius_sweep

pytestmark = pytest.mark.slow

THERMAL_RADII = [10, 20, 30, 50, 80, 100]
LOITER_RADII = [15, 30, 60]


@pytest.fixture(scope="module")
def sweep_result():
    return radius_sweep(THERMAL_RADII, LOITER_RADII, strength=2.5)


def test_predicted_climb_rate(config):
    # 2.5 * exp(-0.09) - K_sink
    assert predicted_climb_rate(2.5, 50.0, 15.0, config.polar, 9.0) == pytest.approx(
        2.5 * 0.913931 - 0.883781, abs=1e-4
    )


@pytest.mark.parametrize("thermal_radius, loiter_radius", [(50.0, 15.0), (80.0, 30.0), (30.0, 60.0)])
def test_simulated_orbit_matches_steady_state(config, thermal_radius, loiter_radius):
    simulated = centered_loiter_climb(thermal_radius, loiter_radius, 2.5, config)
    expected = predicted_climb_rate(2.5, thermal_radius, loiter_radius, config.polar, config.trim_airspeed)
    assert simulated == pytest.approx(expected, abs=0.05)


def test_small_radius_wins_on_average(sweep_result):
    assert sweep_result.best_fixed_radius() == 15.0
    means = sweep_result.mean_climb()
    assert means["loiter_15"] > means["loiter_30"] > means["loiter_60"]


def test_optimum_dominates_fixed_radii(sweep_result):
    table = sweep_result.table()
    assert list(table.index) == THERMAL_RADII
    for r_th in THERMAL_RADII:
        for r in LOITER_RADII:
            assert table.loc[r_th, "optimal_climb"] >= table.loc[r_th, f"loiter_{r}"]


def test_wider_thermals_prefer_wider_orbits(sweep_result):
    narrow, _ = sweep_result.optimal(10.0)
    wide, _ = sweep_result.optimal(100.0)
    assert narrow <= wide


def test_rejects_empty_inputs():
    with pytest.raises(ValueError):
        radius_sweep([], [15.0], config=SoarConfig())
