import math

import numpy as np
import pytest

from ekf_estimator import (
    EstimatorResetError,
    core_position,
    initialize,
    observation_jacobian,
    predict,
    predicted_lift,
    process_noise,
    update,
    update_with_trace,
    wind_corrected_displacement,
)
from schema import EstimatorState, NoiseConfig, SoarConfig, ThermalParams, WindVector
from thermal_env import lift_at

TRUTH = ThermalParams(strength=2.5, radius=50.0)


def _circle_track(center, radius, n, airspeed=9.0, dt=0.2, theta0=-math.pi / 2):
    """Posiciones (norte, este) de una órbita; con theta0 = -pi/2 el rumbo inicial es norte"""
    omega = airspeed / radius
    theta = theta0 + omega * dt * np.arange(n + 1)
    return np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])


def _run_filter(state, track, observations, noise):
    innovations = []
    for k in range(1, len(track)):
        dx, dy = track[k] - track[k - 1]
        state = predict(state, dx, dy, noise)
        state, innovation, _ = update_with_trace(state, observations[k - 1], noise)
        innovations.append(innovation)
    return state, np.array(innovations)


def test_jacobian_matches_finite_differences(rng):
    for _ in range(100):
        mean = np.array(
            [rng.uniform(0.5, 5), rng.uniform(10, 200), rng.uniform(-200, 200), rng.uniform(-200, 200)]
        )
        analytic = observation_jacobian(mean)
        numeric = np.empty(4)
        for i in range(4):
            step = 1e-6 * max(1.0, abs(mean[i]))
            up, down = mean.copy(), mean.copy()
            up[i] += step
            down[i] -= step
            numeric[i] = (predicted_lift(up) - predicted_lift(down)) / (2 * step)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-6, atol=1e-8)


def test_jacobian_sign_convention():
    # Núcleo al norte: si la aeronave se acerca (x disminuye) la sustentación sube
    h = observation_jacobian(np.array([2.5, 50.0, 20.0, 0.0]))
    assert h[0] > 0
    assert h[1] > 0
    assert h[2] < 0
    assert h[3] == 0.0


def test_predict_adds_process_noise(noise):
    state = EstimatorState(mean=[2.0, 60.0, 10.0, -5.0], cov=np.eye(4) * 4.0)
    predicted = predict(state, 3.0, -1.0, noise)
    np.testing.assert_array_equal(predicted.cov, state.cov + process_noise(noise))
    np.testing.assert_allclose(predicted.mean, [2.0, 60.0, 7.0, -4.0])


def test_wind_corrected_displacement():
    dn, de = wind_corrected_displacement(10.0, 0.0, WindVector(v_north=2.0), 5.0)
    assert (dn, de) == pytest.approx((0.0, 0.0))
    state = EstimatorState(mean=[2.0, 60.0, 12.0, 3.0], cov=np.eye(4))
    moved = predict(state, dn, de, NoiseConfig(q1=0.001, q2=0.03, r=0.45))
    assert (moved.x, moved.y) == pytest.approx((12.0, 3.0))
    with pytest.raises(ValueError):
        wind_corrected_displacement(1.0, 1.0, WindVector(), 0.0)


def test_scalar_update_matches_generic_ekf(rng, noise):
    q = process_noise(noise)
    for _ in range(10_000):
        mean = np.array([rng.uniform(0.5, 4), rng.uniform(20, 150), rng.uniform(-100, 100), rng.uniform(-100, 100)])
        a = rng.normal(0.0, 5.0, (4, 4))
        cov = a @ a.T + 1e-3 * np.eye(4)
        dx, dy = rng.normal(0.0, 2.0, 2)
        z = rng.normal(1.0, 1.0)

        predicted = predict(EstimatorState(mean=mean, cov=cov), dx, dy, noise)
        ours, _, gain_norm = update_with_trace(predicted, z, noise)

        # Forma matricial general con F = I y R como matriz 1x1
        f = np.eye(4)
        m_pred = f @ mean - np.array([0.0, 0.0, dx, dy])
        p_pred = f @ cov @ f.T + q
        h = observation_jacobian(m_pred).reshape(1, 4)
        s = h @ p_pred @ h.T + np.array([[noise.r**2]])
        k = p_pred @ h.T @ np.linalg.inv(s)
        m_new = m_pred + (k * (z - predicted_lift(m_pred))).ravel()
        m_new[1] = max(m_new[1], 5.0)
        p_new = (np.eye(4) - k @ h) @ p_pred

        scale = np.abs(p_pred).max()
        np.testing.assert_allclose(ours.cov, p_new, rtol=1e-12, atol=1e-12 * scale)
        np.testing.assert_allclose(ours.mean, m_new, rtol=1e-12, atol=1e-12 * np.abs(m_pred).max())
        assert gain_norm == pytest.approx(np.linalg.norm(k), rel=1e-12)


def test_covariance_stays_symmetric_psd(rng, config, noise):
    state = initialize(1.0, 0.3, config)
    position = np.zeros(2)
    for _ in range(10_000):
        new_position = rng.uniform(-80, 80, 2)
        dx, dy = new_position - position
        position = new_position
        state = predict(state, dx, dy, noise)
        z = lift_at(TRUTH, *position) + rng.normal(0.0, 0.2)
        state = update(state, z, noise)
        assert np.array_equal(state.cov, state.cov.T)
        assert np.all(np.diag(state.cov) >= 0)
        eig = np.linalg.eigvalsh(state.cov)
        assert eig.min() >= -1e-9 * max(1.0, eig.max())
        assert state.radius >= 5.0


def test_radius_floor():
    state = EstimatorState(mean=[2.0, 6.0, 3.0, 0.0], cov=np.diag([0.1, 400.0, 1.0, 1.0]))
    updated = update(state, 0.0, NoiseConfig(q1=0.001, q2=0.03, r=0.05))
    assert updated.radius == 5.0


def test_corrupt_covariance_raises(noise):
    with pytest.raises(EstimatorResetError):
        update(EstimatorState(mean=[2.0, 50.0, 0.0, 0.0], cov=np.full((4, 4), np.nan)), 1.0, noise)
    with pytest.raises(EstimatorResetError):
        update(EstimatorState(mean=[2.0, 50.0, 0.0, 0.0], cov=-100.0 * np.eye(4)), 1.0, noise)


def test_initialize(config):
    state = initialize(1.0, 0.0, config)
    assert state.strength == pytest.approx(1.1510, abs=1e-4)
    assert state.strength == pytest.approx(1.0 / math.exp(-900 / 6400), rel=1e-12)
    assert state.radius == 80.0
    assert (state.x, state.y) == pytest.approx((30.0, 0.0))
    assert predicted_lift(state.mean) == pytest.approx(1.0)
    np.testing.assert_allclose(np.diag(state.cov), [1.0, 1600.0, 900.0, 900.0])

    east = initialize(1.0, math.pi / 2, config)
    assert (east.x, east.y) == pytest.approx((0.0, 30.0), abs=1e-12)


def test_core_position():
    state = EstimatorState(mean=[2.0, 50.0, 12.0, -3.0], cov=np.eye(4))
    assert core_position(state, 100.0, 50.0) == (112.0, 47.0)


def test_innovation_shrinks_on_stationary_thermal(noise):
    track = _circle_track((-5.0, 5.0), 15.0, 150)
    observations = [lift_at(TRUTH, *p) for p in track[1:]]
    start = EstimatorState(mean=[1.5, 80.0, 30.0, 0.0], cov=np.diag([1.0, 1600.0, 900.0, 900.0]))
    _, innovations = _run_filter(start, track, observations, noise)
    first = np.abs(innovations[:20]).mean()
    last = np.abs(innovations[-20:]).mean()
    assert last < 0.25 * first


def test_translation_equivariance(noise):
    offset = np.array([137.0, -42.0])
    track = _circle_track((-5.0, 5.0), 15.0, 50)
    shifted_truth = TRUTH.model_copy(update={"core_north": offset[0], "core_east": offset[1]})
    start = EstimatorState(mean=[2.0, 60.0, 30.0, 0.0], cov=np.diag([1.0, 400.0, 900.0, 900.0]))

    base, _ = _run_filter(start, track, [lift_at(TRUTH, *p) for p in track[1:]], noise)
    moved, _ = _run_filter(
        start, track + offset, [lift_at(shifted_truth, *p) for p in track[1:] + offset], noise
    )
    np.testing.assert_allclose(moved.mean, base.mean, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(
        core_position(moved, *(track[-1] + offset)),
        np.array(core_position(base, *track[-1])) + offset,
        atol=1e-9,
    )


def test_agrees_with_particle_posterior():
    """
    Con q ~ 0 la térmica es estática y la posterior exacta se obtiene por muestreo de
    importancia sobre la prior gaussiana del filtro.

    La prior de W y R es estrecha: con la de `initial_covariance` (sigma_R = 40 m) la
    posterior en cuatro dimensiones deja a 10⁶ partículas con un tamaño efectivo de
    muestra demasiado pequeño y la comparación pierde sentido.
    """
    rng = np.random.default_rng(2024)
    obs_std = 0.2
    noise = NoiseConfig(q1=1e-6, q2=1e-6, r=obs_std)
    track = _circle_track((-5.0, 5.0), 15.0, 50)
    observations = np.array([lift_at(TRUTH, *p) for p in track[1:]]) + rng.normal(0.0, obs_std, 50)

    # Núcleo inicial 30 m por delante (rumbo norte); W y R casi conocidos
    prior_mean = np.array([2.5, 50.0, 30.0, 0.0])
    prior_cov = np.diag([0.1**2, 2.0**2, 30.0**2, 30.0**2])
    final, _ = _run_filter(EstimatorState(mean=prior_mean, cov=prior_cov), track, observations, noise)
    ekf_core = np.array(core_position(final, *track[-1]))

    n = 1_000_000
    particles = prior_mean + rng.normal(size=(n, 4)) * np.sqrt(np.diag(prior_cov))
    w, r = particles[:, 0], particles[:, 1]
    core_n = track[0][0] + particles[:, 2]
    core_e = track[0][1] + particles[:, 3]
    log_w = np.zeros(n)
    for (pn, pe), z in zip(track[1:], observations):
        predicted = w * np.exp(-((pn - core_n) ** 2 + (pe - core_e) ** 2) / r**2)
        log_w -= (z - predicted) ** 2 / (2 * obs_std**2)
    log_w[r <= 5.0] = -np.inf
    weights = np.exp(log_w - log_w.max())
    weights /= weights.sum()
    posterior_core = np.array([weights @ core_n, weights @ core_e])

    assert 1.0 / np.sum(weights**2) > 50
    assert np.linalg.norm(ekf_core - posterior_core) < 5.0


def test_estimator_state_accepts_sequences():
    state = EstimatorState(mean=[2.0, 60.0, 10.0, -5.0], cov=np.eye(4).tolist())
    assert isinstance(state.mean, np.ndarray) and state.mean.dtype == float
    assert isinstance(state.cov, np.ndarray) and state.cov.shape == (4, 4)
    with pytest.raises(ValueError):
        EstimatorState(mean=[2.0, 60.0, 10.0], cov=np.eye(4))
    with pytest.raises(ValueError):
        EstimatorState(mean=[2.0, 60.0, 10.0, -5.0], cov=np.eye(3))
