"""
Filtro de Kalman extendido de 4 estados sobre la térmica: [W, R, x, y].

(x, y) es la posición del núcleo relativa a la aeronave (norte, este). El estado no
tiene dinámica propia (F = I): la predicción solo desplaza el núcleo por el movimiento
de la aeronave respecto a la masa de aire y suma Q. La observación es escalar, así que
la ganancia se calcula con una única división.
"""

from typing import Tuple
import logging
import math

import numpy as np

from schema import EstimatorState, NoiseConfig, SoarConfig, WindVector

logger = logging.getLogger(__name__)

R_FLOOR = 5.0


class EstimatorResetError(RuntimeError):
    """Covarianza corrupta: la varianza de la innovación no es positiva"""


def wind_corrected_displacement(
    d_north_abs: float, d_east_abs: float, wind: WindVector, dt: float
) -> Tuple[float, float]:
    """Desplazamiento de la aeronave respecto a la masa de aire (y por tanto a la térmica)"""
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    return d_north_abs - wind.v_north * dt, d_east_abs - wind.v_east * dt


def process_noise(noise: NoiseConfig) -> np.ndarray:
    return np.diag([noise.q1**2, noise.q2**2, noise.q2**2, noise.q2**2])


def predict(state: EstimatorState, dx: float, dy: float, noise: NoiseConfig) -> EstimatorState:
    mean = state.mean + np.array([0.0, 0.0, -dx, -dy])
    # F = I: F P Fᵀ + Q se reduce a P + Q
    cov = state.cov + process_noise(noise)
    return EstimatorState(mean=mean, cov=cov)


def predicted_lift(mean: np.ndarray) -> float:
    w, r, x, y = mean
    return float(w * math.exp(-(x * x + y * y) / (r * r)))


def observation_jacobian(mean: np.ndarray) -> np.ndarray:
    """Gradiente de predicted_lift respecto a [W, R, x, y] (vector fila 1x4)"""
    w, r, x, y = mean
    d2 = x * x + y * y
    e = math.exp(-d2 / (r * r))
    return np.array(
        [
            e,
            2.0 * w * d2 / r**3 * e,
            -2.0 * w * x / r**2 * e,
            -2.0 * w * y / r**2 * e,
        ]
    )


def update(
    state: EstimatorState,
    observed_vario: float,
    noise: NoiseConfig,
    r_floor: float = R_FLOOR,
) -> EstimatorState:
    """Actualización de medida con innovación escalar"""
    return update_with_trace(state, observed_vario, noise, r_floor)[0]


def update_with_trace(
    state: EstimatorState,
    observed_vario: float,
    noise: NoiseConfig,
    r_floor: float = R_FLOOR,
) -> Tuple[EstimatorState, float, float]:
    """Como update, devolviendo además la innovación y la norma de la ganancia"""
    p = state.cov
    h = observation_jacobian(state.mean)
    ph = p @ h
    s = float(h @ ph) + noise.r**2
    if not math.isfinite(s) or s <= 0:
        raise EstimatorResetError(f"innovation variance is {s}")

    gain = ph / s
    innovation = observed_vario - predicted_lift(state.mean)
    mean = state.mean + gain * innovation
    mean[1] = max(mean[1], r_floor)

    cov = (np.eye(4) - np.outer(gain, h)) @ p
    cov = 0.5 * (cov + cov.T)
    return EstimatorState(mean=mean, cov=cov), innovation, float(np.linalg.norm(gain))


def initial_covariance(config: SoarConfig) -> np.ndarray:
    sigma_xy = max(config.d_ahead, 1.0)
    return np.diag([config.p_init_w**2, config.p_init_r**2, sigma_xy**2, sigma_xy**2])


def initialize(filtered_vario: float, heading: float, config: SoarConfig) -> EstimatorState:
    """
    Estado inicial al detectar una térmica: núcleo SOAR_DIST_AHEAD metros por delante
    en la dirección de vuelo, intensidad tal que la sustentación predicha en la
    aeronave coincida con el vario filtrado.
    """
    d = config.d_ahead
    strength = filtered_vario / math.exp(-(d * d) / config.r_init**2)
    mean = np.array(
        [strength, config.r_init, d * math.cos(heading), d * math.sin(heading)]
    )
    logger.debug("EKF inicializado: %s", np.round(mean, 3))
    return EstimatorState(mean=mean, cov=initial_covariance(config))


def core_position(state: EstimatorState, north: float, east: float) -> Tuple[float, float]:
    """Núcleo estimado en el marco terrestre dada la posición de la aeronave"""
    return north + state.x, east + state.y
