"""
Tipos de valor compartidos por el entorno, el planeador, el estimador y el controlador.

Todos los modelos son inmutables (frozen): cada operación devuelve una instancia nueva.
Unidades SI, marco local plano norte/este en metros.
"""

from enum import Enum
from typing import Optional
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class _Value(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)


class FlightMode(str, Enum):
    """Modo de vuelo activo del controlador"""

    CLIMB_POWERED = "CLIMB_POWERED"
    GLIDE_CRUISE = "GLIDE_CRUISE"
    THERMAL_LOITER = "THERMAL_LOITER"


class LoiterDirection(str, Enum):
    # CW = alabeo positivo (giro a la derecha)
    CW = "CW"
    CCW = "CCW"

    @property
    def sign(self) -> float:
        return 1.0 if self is LoiterDirection.CW else -1.0


class ThermalParams(_Value):
    """Térmica gaussiana de referencia (verdad del simulador)"""

    strength: float
    radius: float = Field(gt=0)
    core_north: float = 0.0
    core_east: float = 0.0
    spawn_time: float = 0.0


class WindVector(_Value):
    v_north: float = 0.0
    v_east: float = 0.0


class PolarCoefficients(_Value):
    """Constantes de la polar: C_D0, B y K (escala del coeficiente de sustentación, m²/s²)"""

    c_d0: float = Field(gt=0)
    b: float = Field(gt=0)
    k: float = Field(gt=0)


class GliderState(_Value):
    """Estado verdadero del velero simulado"""

    north: float = 0.0
    east: float = 0.0
    altitude: float = Field(default=0.0, ge=0)
    airspeed: float = Field(gt=0)
    heading: float = 0.0
    bank: float = 0.0
    motor_on: bool = False
    time: float = 0.0

    @field_validator("bank")
    @classmethod
    def validate_bank(cls, v):
        if abs(v) >= math.pi / 2:
            raise ValueError(f"bank must satisfy |bank| < pi/2, got {v}")
        return v


class VarioSample(_Value):
    e_dot: float
    e_dot_net: float
    e_dot_filt: float
    time: float


class Commands(_Value):
    """Consignas del controlador al modelo de vuelo"""

    target_bank: float
    target_airspeed: float = Field(gt=0)
    motor: bool = False


class LoiterCommand(_Value):
    center_north: float
    center_east: float
    radius: float = Field(gt=0)
    direction: LoiterDirection = LoiterDirection.CCW


class NoiseConfig(_Value):
    """Desviaciones típicas del ruido de proceso (q1, q2) y de observación (r)"""

    q1: float = Field(gt=0)
    q2: float = Field(gt=0)
    r: float = Field(gt=0)


class GlideSample(_Value):
    airspeed: float = Field(gt=0)
    sink: float
    bank: float = 0.0


class EstimatorState(BaseModel):
    """Creencia gaussiana del EKF: media [W, R, x, y] y covarianza P (4x4)"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mean: np.ndarray
    cov: np.ndarray

    @field_validator("mean", mode="before")
    @classmethod
    def validate_mean(cls, v):
        v = np.array(v, dtype=float).reshape(-1)
        if v.shape != (4,):
            raise ValueError(f"mean must have 4 components, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("mean must be finite")
        return v

    @field_validator("cov", mode="before")
    @classmethod
    def validate_cov(cls, v):
        v = np.array(v, dtype=float)
        if v.shape != (4, 4):
            raise ValueError(f"cov must be 4x4, got shape {v.shape}")
        return v

    @property
    def strength(self) -> float:
        return float(self.mean[0])

    @property
    def radius(self) -> float:
        return float(self.mean[1])

    @property
    def x(self) -> float:
        return float(self.mean[2])

    @property
    def y(self) -> float:
        return float(self.mean[3])


class SoarConfig(BaseModel):
    """
    Parámetros del controlador de planeo térmico.

    Los alias coinciden con las claves del fichero de escenario (SOAR_*, WP_LOITER_RAD);
    también se aceptan los nombres de campo.
    """

    model_config = ConfigDict(
        frozen=True, populate_by_name=True, allow_inf_nan=False, extra="forbid"
    )

    enable: bool = Field(default=True, alias="SOAR_ENABLE")
    vspeed_trigger: float = Field(default=0.7, alias="SOAR_VSPEED")
    alt_min: float = Field(default=50.0, alias="SOAR_ALT_MIN")
    alt_cutoff: float = Field(default=250.0, alias="SOAR_ALT_CUTOFF")
    alt_max: float = Field(default=350.0, alias="SOAR_ALT_MAX")
    loiter_radius: float = Field(default=15.0, gt=0, alias="WP_LOITER_RAD")
    min_thermal_s: float = Field(default=20.0, ge=0, alias="SOAR_MIN_THML_S")
    min_cruise_s: float = Field(default=10.0, ge=0, alias="SOAR_MIN_CRSE_S")
    polar_cd0: float = Field(default=0.027, gt=0, alias="SOAR_POLAR_CD0")
    polar_b: float = Field(default=0.031, gt=0, alias="SOAR_POLAR_B")
    polar_k: float = Field(default=25.6, gt=0, alias="SOAR_POLAR_K")
    d_ahead: float = Field(default=30.0, ge=0, alias="SOAR_DIST_AHEAD")
    q1: float = Field(default=0.001, gt=0, alias="SOAR_Q1")
    q2: float = Field(default=0.03, gt=0, alias="SOAR_Q2")
    r: float = Field(default=0.45, gt=0, alias="SOAR_R")

    # Extensiones fuera de la tabla de parámetros
    k_sink: Optional[float] = Field(default=None, alias="SOAR_K_SINK")
    t_c: float = Field(default=0.03, gt=0, le=1, alias="SOAR_TC")
    r_init: float = Field(default=80.0, gt=0, alias="SOAR_R_INIT")
    p_init_w: float = Field(default=1.0, gt=0, alias="SOAR_P_INIT_W")
    p_init_r: float = Field(default=40.0, gt=0, alias="SOAR_P_INIT_R")
    r_floor: float = Field(default=5.0, gt=0, alias="SOAR_R_FLOOR")
    trim_airspeed: float = Field(default=9.0, gt=0, alias="TRIM_ARSPD")
    motor_climb_rate: float = Field(default=3.0, ge=0, alias="MOTOR_CLIMB_RATE")
    max_bank_cruise_deg: float = Field(default=40.0, gt=0, lt=90, alias="MAX_BANK_CRUISE")
    max_bank_loiter_deg: float = Field(default=45.0, gt=0, lt=90, alias="MAX_BANK_LOITER")
    wp_radius: float = Field(default=20.0, gt=0, alias="WP_RADIUS")
    gravity: float = Field(default=9.80665, gt=0, alias="GRAVITY")
    bank_tau: float = Field(default=0.5, gt=0, alias="BANK_TAU")
    airspeed_tau: float = Field(default=0.5, gt=0, alias="ARSPD_TAU")

    @model_validator(mode="after")
    def validate_altitude_band(self):
        if not (self.alt_min < self.alt_cutoff < self.alt_max):
            raise ValueError(
                "altitudes must satisfy SOAR_ALT_MIN < SOAR_ALT_CUTOFF < SOAR_ALT_MAX, got "
                f"{self.alt_min}, {self.alt_cutoff}, {self.alt_max}"
            )
        return self

    @property
    def polar(self) -> PolarCoefficients:
        return PolarCoefficients(c_d0=self.polar_cd0, b=self.polar_b, k=self.polar_k)

    @property
    def noise(self) -> NoiseConfig:
        return NoiseConfig(q1=self.q1, q2=self.q2, r=self.r)

    @property
    def max_bank_cruise(self) -> float:
        return math.radians(self.max_bank_cruise_deg)

    @property
    def max_bank_loiter(self) -> float:
        return math.radians(self.max_bank_loiter_deg)

    @property
    def bank_limit(self) -> float:
        """Límite de alabeo del actuador: el mayor de crucero y loiter"""
        return max(self.max_bank_cruise, self.max_bank_loiter)

    def to_scenario_keys(self) -> dict:
        """Volcado con las claves del fichero de escenario"""
        return self.model_dump(by_alias=True, exclude_none=True)
