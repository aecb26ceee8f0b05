"""
Barrido de radios de loiter: tasa de ascenso neta de una órbita centrada en la térmica
para cada par (radio de térmica, radio de loiter), y radio óptimo por radio de térmica.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import settings
from glider import GRAVITY, coordinated_turn_bank, sink_rate, step_dynamics
from navigation import loiter_tracking
from schema import (
    Commands,
    GliderState,
    LoiterCommand,
    LoiterDirection,
    PolarCoefficients,
    SoarConfig,
    ThermalParams,
    WindVector,
)
from thermal_env import lift_at

logger = logging.getLogger(__name__)

DEFAULT_SCAN_RADII = tuple(float(r) for r in range(10, 105, 5))
START_ALTITUDE = 1000.0


def predicted_climb_rate(
    strength: float,
    thermal_radius: float,
    loiter_radius: float,
    polar: PolarCoefficients,
    airspeed: float,
    g: float = GRAVITY,
) -> float:
    """Ascenso de una órbita estacionaria centrada: sustentación a esa distancia menos caída en giro"""
    bank = coordinated_turn_bank(airspeed, loiter_radius, g)
    return strength * math.exp(-(loiter_radius**2) / thermal_radius**2) - sink_rate(polar, airspeed, bank)


def centered_loiter_climb(
    thermal_radius: float,
    loiter_radius: float,
    strength: float,
    config: SoarConfig,
    duration: Optional[float] = None,
    tick_rate: float = 5.0,
    substeps: Optional[int] = None,
) -> float:
    """
    Tasa de ascenso medida en simulación orbitando el núcleo a loiter_radius.

    Se descarta el primer periodo de órbita (transitorio) y se mide la pendiente de
    altitud en el resto.
    """
    duration = duration or settings.sweep.duration_s
    substeps = substeps or settings.simulation.physics_substeps
    v = config.trim_airspeed
    period = 2 * math.pi * loiter_radius / v
    duration = max(duration, 3 * period)
    dt = 1.0 / tick_rate
    h = dt / substeps

    thermal = ThermalParams(strength=strength, radius=thermal_radius)
    command = LoiterCommand(
        center_north=0.0, center_east=0.0, radius=loiter_radius, direction=LoiterDirection.CW
    )
    bank = coordinated_turn_bank(v, loiter_radius, config.gravity)
    state = GliderState(
        north=loiter_radius, east=0.0, altitude=START_ALTITUDE,
        airspeed=v, heading=math.pi / 2, bank=bank,
    )
    wind = WindVector()

    n_ticks = int(round(duration * tick_rate))
    settle_tick = int(math.ceil(period * tick_rate))
    times, altitudes = [], []
    for tick in range(n_ticks):
        if tick >= settle_tick:
            times.append(state.time)
            altitudes.append(state.altitude)
        target_bank = loiter_tracking(state, command, wind, config.max_bank_loiter, config.gravity)
        commands = Commands(target_bank=target_bank, target_airspeed=v)
        for _ in range(substeps):
            lift = lift_at(thermal, state.north, state.east)
            state = step_dynamics(
                state, commands, lift, wind, config.polar, h,
                g=config.gravity, bank_tau=config.bank_tau, airspeed_tau=config.airspeed_tau,
                bank_limit=config.bank_limit,
            )
    times.append(state.time)
    altitudes.append(state.altitude)
    return (altitudes[-1] - altitudes[0]) / (times[-1] - times[0])


def _job(args: Tuple[float, float, float, SoarConfig, Optional[float]]) -> Tuple[float, float, float]:
    thermal_radius, loiter_radius, strength, config, duration = args
    climb = centered_loiter_climb(thermal_radius, loiter_radius, strength, config, duration)
    return thermal_radius, loiter_radius, climb


class SweepResult:
    """Tabla de tasas de ascenso: filas = radio de térmica, columnas = radio de loiter"""

    def __init__(self, climb: Dict[Tuple[float, float], float], thermal_radii: Sequence[float],
                 loiter_radii: Sequence[float], scan_radii: Sequence[float]):
        self.climb = climb
        self.thermal_radii = list(thermal_radii)
        self.loiter_radii = list(loiter_radii)
        self.scan_radii = list(scan_radii)

    def optimal(self, thermal_radius: float) -> Tuple[float, float]:
        """(radio óptimo, ascenso) para un radio de térmica"""
        best = max(self.scan_radii, key=lambda r: self.climb[(thermal_radius, r)])
        return best, self.climb[(thermal_radius, best)]

    def table(self) -> pd.DataFrame:
        rows = []
        for r_th in self.thermal_radii:
            row = {"thermal_radius": r_th}
            for r in self.loiter_radii:
                row[f"loiter_{r:g}"] = self.climb[(r_th, r)]
            row["optimal_radius"], row["optimal_climb"] = self.optimal(r_th)
            rows.append(row)
        return pd.DataFrame(rows).set_index("thermal_radius")

    def mean_climb(self) -> pd.Series:
        """Ascenso medio de cada radio fijo sobre todos los radios de térmica"""
        table = self.table()
        return table[[f"loiter_{r:g}" for r in self.loiter_radii]].mean()

    def best_fixed_radius(self) -> float:
        means = self.mean_climb()
        return self.loiter_radii[int(np.argmax(means.to_numpy()))]


def radius_sweep(
    thermal_radii: Iterable[float],
    loiter_radii: Iterable[float],
    strength: float = 2.5,
    config: Optional[SoarConfig] = None,
    scan_radii: Sequence[float] = DEFAULT_SCAN_RADII,
    duration: Optional[float] = None,
    workers: Optional[int] = None,
    progress: bool = False,
) -> SweepResult:
    """
    Ejecuta el barrido. El radio óptimo se busca sobre `scan_radii` más los radios
    fijos, todos medidos con la misma simulación.
    """
    thermal_radii = [float(r) for r in thermal_radii]
    loiter_radii = [float(r) for r in loiter_radii]
    if not thermal_radii or not loiter_radii:
        raise ValueError("thermal_radii and loiter_radii must be non-empty")
    config = config or SoarConfig()
    workers = workers or settings.sweep.workers
    scan = sorted(set(scan_radii) | set(loiter_radii))

    jobs = [(r_th, r, strength, config, duration) for r_th in thermal_radii for r in scan]
    logger.info("Barrido: %d simulaciones (%d workers)", len(jobs), workers)

    climb: Dict[Tuple[float, float], float] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results: List = list(tqdm(pool.map(_job, jobs), total=len(jobs), disable=not progress))
    else:
        results = [_job(job) for job in tqdm(jobs, disable=not progress)]
    for r_th, r, value in results:
        climb[(r_th, r)] = value

    return SweepResult(climb, thermal_radii, loiter_radii, scan)
