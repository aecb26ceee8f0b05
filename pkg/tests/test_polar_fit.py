import math

import numpy as np
import pytest

from data_processing import load_glide_samples
from glider import sink_rate
from polar_fit import PolarFitError, compute_k, fit_polar
from schema import GlideSample, PolarCoefficients


def _samples(polar, speeds, banks=None, noise=None):
    banks = banks if banks is not None else np.zeros(len(speeds))
    noise = noise if noise is not None else np.zeros(len(speeds))
    return [
        GlideSample(airspeed=v, sink=sink_rate(polar, v, b) + n, bank=b)
        for v, b, n in zip(speeds, banks, noise)
    ]


def test_compute_k():
    assert compute_k(1.0, 2 * 9.80665 / 1.225) == pytest.approx(1.0)
    assert compute_k(1.2, 0.3) == pytest.approx(2 * 1.2 * 9.80665 / (1.225 * 0.3))
    with pytest.raises(ValueError):
        compute_k(0.0, 0.3)


def test_noiseless_recovery(polar):
    samples = _samples(polar, np.linspace(6.0, 16.0, 20))
    fit = fit_polar(samples, polar.k)
    assert fit.c_d0 == pytest.approx(polar.c_d0, rel=1e-6)
    assert fit.b == pytest.approx(polar.b, rel=1e-6)
    assert fit.residual == pytest.approx(0.0, abs=1e-9)
    assert fit.n_samples == 20
    assert not fit.suspect


def test_noiseless_recovery_with_bank(polar):
    speeds = np.linspace(7.0, 14.0, 12)
    banks = np.radians(np.tile([0.0, 20.0, 35.0, 45.0], 3))
    fit = fit_polar(_samples(polar, speeds, banks), polar.k)
    assert fit.c_d0 == pytest.approx(polar.c_d0, rel=1e-6)
    assert fit.b == pytest.approx(polar.b, rel=1e-6)


def test_two_samples_fit_exactly(polar):
    fit = fit_polar(_samples(polar, [8.0, 12.0]), polar.k)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert fit.c_d0 == pytest.approx(polar.c_d0, rel=1e-9)


def test_noisy_recovery():
    # A velocidades de crucero B apenas se observa (su columna K/v varía poco); para
    # fijarlo al 2 % se usa una mitad lenta y muy alabeada (informa B) y otra rápida
    # y nivelada (informa C_D0).
    truth = PolarCoefficients(c_d0=0.027, b=0.05, k=60.0)
    speeds = np.concatenate([np.linspace(4.0, 5.0, 10), np.linspace(18.0, 22.0, 10)])
    banks = np.concatenate([np.full(10, math.radians(65)), np.zeros(10)])
    noise = np.random.default_rng(7).normal(0.0, 0.05, 20)
    fit = fit_polar(_samples(truth, speeds, banks, noise), truth.k)
    assert fit.c_d0 == pytest.approx(truth.c_d0, rel=0.02)
    assert fit.b == pytest.approx(truth.b, rel=0.02)
    assert fit.residual == pytest.approx(0.05, abs=0.03)


def test_noisy_recovery_cruise_speeds(polar):
    # Planeos nivelados de 6 a 16 m/s: error típico ~0.3 % en C_D0 y ~8 % en B
    speeds = np.linspace(6.0, 16.0, 100)
    noise = np.random.default_rng(11).normal(0.0, 0.05, 100)
    fit = fit_polar(_samples(polar, speeds, noise=noise), polar.k)
    assert fit.c_d0 == pytest.approx(polar.c_d0, rel=0.02)
    assert fit.b == pytest.approx(polar.b, rel=0.3)
    assert not fit.suspect


def test_k_scale_consistency():
    truth = PolarCoefficients(c_d0=0.027, b=0.031, k=25.6)
    speeds = np.linspace(6.0, 16.0, 10)
    scaled = truth.model_copy(update={"k": 51.2})
    a = fit_polar(_samples(truth, speeds), truth.k)
    b = fit_polar(_samples(scaled, speeds), scaled.k)
    assert (a.c_d0, a.b) == pytest.approx((b.c_d0, b.b), rel=1e-9)


def test_degenerate_designs_rejected(polar):
    with pytest.raises(PolarFitError):
        fit_polar(_samples(polar, [9.0]), polar.k)
    with pytest.raises(PolarFitError):
        fit_polar(_samples(polar, [9.0, 9.0, 9.0]), polar.k)
    with pytest.raises(ValueError):
        fit_polar(_samples(polar, [8.0, 10.0]), 0.0)


def test_negative_coefficients_flagged(caplog):
    samples = [GlideSample(airspeed=v, sink=s) for v, s in [(6.0, 2.0), (10.0, 0.5), (14.0, 0.1)]]
    fit = fit_polar(samples, 25.6)
    assert fit.suspect
    assert "sospechosos" in caplog.text


def test_scenario_lines(polar):
    fit = fit_polar(_samples(polar, [8.0, 10.0, 12.0]), polar.k)
    lines = fit.scenario_lines().splitlines()
    assert [line.split(":")[0] for line in lines] == ["SOAR_POLAR_CD0", "SOAR_POLAR_B", "SOAR_POLAR_K"]
    assert float(lines[0].split(":")[1]) == pytest.approx(polar.c_d0, rel=1e-5)


def test_load_glide_samples(tmp_path):
    path = tmp_path / "glides.csv"
    path.write_text("airspeed,sink,bank_deg\n8.0,0.9,0\n12.0,1.2,30\n")
    samples = load_glide_samples(path)
    assert [s.airspeed for s in samples] == [8.0, 12.0]
    assert samples[1].bank == pytest.approx(math.radians(30))

    missing = tmp_path / "bad.csv"
    missing.write_text("speed,sink\n8.0,0.9\n9.0,1.0\n")
    with pytest.raises(ValueError):
        load_glide_samples(missing)
