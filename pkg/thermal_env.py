"""
Atmósfera de referencia: térmicas gaussianas que derivan con un viento uniforme.
"""

from typing import Iterable, List, Optional
import math

from schema import ThermalParams, WindVector


def lift_at(thermal: ThermalParams, north: float, east: float) -> float:
    """Velocidad vertical del aire (m/s) de una térmica en un punto del plano"""
    d2 = (north - thermal.core_north) ** 2 + (east - thermal.core_east) ** 2
    return thermal.strength * math.exp(-d2 / thermal.radius**2)


def advect(
    thermal: ThermalParams, wind: WindVector, dt: float, drift_factor: float = 1.0
) -> ThermalParams:
    """Desplaza el núcleo con el viento; intensidad y radio no cambian"""
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    return thermal.model_copy(
        update={
            "core_north": thermal.core_north + drift_factor * wind.v_north * dt,
            "core_east": thermal.core_east + drift_factor * wind.v_east * dt,
        }
    )


def is_active(thermal: ThermalParams, time: Optional[float]) -> bool:
    return time is None or time >= thermal.spawn_time


def field_lift(
    thermals: Iterable[ThermalParams],
    north: float,
    east: float,
    time: Optional[float] = None,
    altitude: Optional[float] = None,
    taper_per_m: float = 0.0,
) -> float:
    """
    Suma de la sustentación de todas las térmicas activas.

    Si se da `time`, solo cuentan las térmicas con spawn_time <= time.
    `taper_per_m` reduce linealmente la intensidad con la altitud (desactivado por defecto).
    """
    total = sum(lift_at(th, north, east) for th in thermals if is_active(th, time))
    if taper_per_m and altitude is not None:
        total *= max(0.0, 1.0 - taper_per_m * altitude)
    return total


class ThermalField:
    """Conjunto de térmicas que evoluciona con el reloj del simulador"""

    def __init__(
        self,
        thermals: List[ThermalParams],
        wind: WindVector,
        drift_factor: float = 1.0,
        taper_per_m: float = 0.0,
    ):
        self.thermals = list(thermals)
        self.wind = wind
        self.drift_factor = drift_factor
        self.taper_per_m = taper_per_m
        self.time = 0.0

    def step(self, dt: float) -> None:
        # El núcleo se da en el instante de aparición; antes no deriva
        self.thermals = [
            advect(th, self.wind, dt, self.drift_factor) if is_active(th, self.time) else th
            for th in self.thermals
        ]
        self.time += dt

    def lift(self, north: float, east: float, altitude: Optional[float] = None) -> float:
        return field_lift(
            self.thermals, north, east, self.time, altitude, self.taper_per_m
        )

    def active(self) -> List[ThermalParams]:
        return [th for th in self.thermals if is_active(th, self.time)]
