"""
Estimación de la polar: C_D0 y B por mínimos cuadrados a partir de planeos de prueba,
K directamente de la masa y la superficie alar.
"""

from typing import Sequence
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from glider import GRAVITY, RHO_SEA_LEVEL
from schema import GlideSample, PolarCoefficients

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e12


class PolarFitError(ValueError):
    """Diseño de mínimos cuadrados degenerado"""


class PolarFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    c_d0: float
    b: float
    k: float
    residual: float
    n_samples: int
    suspect: bool = False

    @property
    def polar(self) -> PolarCoefficients:
        return PolarCoefficients(c_d0=self.c_d0, b=self.b, k=self.k)

    def scenario_lines(self) -> str:
        """Líneas listas para pegar en el fichero de escenario"""
        return (
            f"SOAR_POLAR_CD0: {self.c_d0:.6g}\n"
            f"SOAR_POLAR_B: {self.b:.6g}\n"
            f"SOAR_POLAR_K: {self.k:.6g}\n"
        )


def compute_k(
    mass: float, wing_area: float, rho: float = RHO_SEA_LEVEL, g: float = GRAVITY
) -> float:
    """K = 2 m g / (rho A)"""
    for name, value in (("mass", mass), ("wing_area", wing_area), ("rho", rho), ("g", g)):
        if value <= 0:
            raise ValueError(f"{name} must be > 0, got {value}")
    return 2 * mass * g / (rho * wing_area)


def design_matrix(samples: Sequence[GlideSample], k: float) -> np.ndarray:
    """Columnas del modelo lineal en (C_D0, B): v³/K y K / (v cos²φ)"""
    v = np.array([s.airspeed for s in samples])
    bank = np.array([s.bank for s in samples])
    return np.column_stack([v**3 / k, k / (v * np.cos(bank) ** 2)])


def fit_polar(samples: Sequence[GlideSample], k: float) -> PolarFit:
    """
    Ajuste por ecuaciones normales del modelo de dos parámetros.

    Usa el alabeo registrado en cada muestra. Devuelve los coeficientes y el
    residuo RMS; coeficientes negativos marcan el ajuste como sospechoso.
    """
    if k <= 0:
        raise ValueError(f"k must be > 0, got {k}")
    if len(samples) < 2:
        raise PolarFitError(f"at least 2 samples are required, got {len(samples)}")
    if len({round(s.airspeed, 9) for s in samples}) < 2:
        raise PolarFitError("samples need at least 2 distinct airspeeds")

    a = design_matrix(samples, k)
    sink = np.array([s.sink for s in samples])
    normal = a.T @ a
    cond = np.linalg.cond(normal)
    if not math.isfinite(cond) or cond > MAX_CONDITION:
        raise PolarFitError(f"ill-conditioned design (condition number {cond:.3g})")

    c_d0, b = np.linalg.solve(normal, a.T @ sink)
    residual = float(np.sqrt(np.mean((sink - a @ np.array([c_d0, b])) ** 2)))
    suspect = bool(c_d0 <= 0 or b <= 0)
    if suspect:
        logger.warning("Coeficientes de polar sospechosos: C_D0=%.4g B=%.4g", c_d0, b)
    logger.info("Polar ajustada: C_D0=%.5g B=%.5g RMS=%.3g m/s", c_d0, b, residual)
    return PolarFit(
        c_d0=float(c_d0), b=float(b), k=k, residual=residual,
        n_samples=len(samples), suspect=suspect,
    )
