"""
Escenarios de simulación: fichero YAML validado con pydantic.

Ejemplo mínimo:

    duration: 600
    wind: {v_north: 0.0, v_east: 2.0}
    thermals:
      - {strength: 2.5, radius: 50, core_north: 600, core_east: 0}
    waypoints: [[0, 0], [1500, 0]]
    geofence: [[-300, -300], [1800, -300], [1800, 300], [-300, 300]]
    initial_state: {altitude: 240, airspeed: 9, heading: 0}
    soar:
      SOAR_VSPEED: 0.7
      WP_LOITER_RAD: 15
"""

from pathlib import Path
from typing import List, Optional, Tuple, Union
import logging

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from navigation import Geofence
from polar_fit import compute_k
from glider import RHO_SEA_LEVEL
from schema import FlightMode, GliderState, SoarConfig, ThermalParams, WindVector

logger = logging.getLogger(__name__)


class Airframe(BaseModel):
    """Masa y superficie alar; permiten derivar SOAR_POLAR_K si no se da"""

    mass: float = Field(gt=0)
    wing_area: float = Field(gt=0)
    rho: float = Field(default=RHO_SEA_LEVEL, gt=0)


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    name: str = "scenario"
    duration: float = Field(gt=0)
    tick_rate: float = Field(default=5.0, gt=0)
    seed: int = 0
    vario_noise_std: float = Field(default=0.0, ge=0)
    wind: WindVector = WindVector()
    drift_factor: float = 1.0
    taper_per_m: float = Field(default=0.0, ge=0)
    thermals: List[ThermalParams] = []
    waypoints: List[Tuple[float, float]] = Field(min_length=1)
    geofence: Optional[List[Tuple[float, float]]] = None
    airframe: Optional[Airframe] = None
    soar: SoarConfig = SoarConfig()
    initial_state: GliderState = GliderState(altitude=100.0, airspeed=9.0)

    @model_validator(mode="before")
    @classmethod
    def derive_polar_k(cls, data):
        if not isinstance(data, dict) or not data.get("airframe"):
            return data
        soar = dict(data.get("soar") or {})
        if "SOAR_POLAR_K" not in soar and "polar_k" not in soar:
            airframe = Airframe.model_validate(data["airframe"])
            soar["SOAR_POLAR_K"] = compute_k(airframe.mass, airframe.wing_area, airframe.rho)
            data = {**data, "soar": soar}
        return data

    @model_validator(mode="after")
    def validate_geofence(self):
        if self.geofence is not None:
            fence = Geofence(self.geofence)
            outside = [wp for wp in self.waypoints if not fence.contains(*wp)]
            if outside:
                raise ValueError(f"geofence must contain all waypoints, outside: {outside}")
        return self

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration * self.tick_rate))

    @property
    def initial_mode(self) -> FlightMode:
        if self.initial_state.altitude <= self.soar.alt_min:
            return FlightMode.CLIMB_POWERED
        return FlightMode.GLIDE_CRUISE

    def fence(self) -> Optional[Geofence]:
        return Geofence(self.geofence) if self.geofence is not None else None

    def with_soar(self, **updates) -> "Scenario":
        """Copia con parámetros del controlador modificados (nombres de campo o alias)"""
        fields = SoarConfig.model_fields
        aliased = {
            (fields[key].alias if key in fields and fields[key].alias else key): value
            for key, value in updates.items()
        }
        soar = SoarConfig.model_validate({**self.soar.model_dump(by_alias=True), **aliased})
        return self.model_copy(update={"soar": soar})


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Carga y valida un escenario YAML"""
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        raw = yaml.safe_load(f) or {}
    raw.setdefault("name", path.stem)
    scenario = Scenario.model_validate(raw)
    logger.info(
        "Escenario '%s' cargado: %.0f s, %d térmicas, %d waypoints",
        scenario.name, scenario.duration, len(scenario.thermals), len(scenario.waypoints),
    )
    return scenario


def format_validation_error(error: ValidationError) -> List[str]:
    """Una línea por campo inválido: ruta del campo y mensaje"""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<scenario>"
        lines.append(f"{location}: {item['msg']}")
    return lines
