"""
Bucle de simulación determinista: entorno -> planeador -> variómetro -> controlador.

Paso fijo a la frecuencia de control con `physics_substeps` subpasos de física por tick.
Una fila de telemetría por tick.
"""

from pathlib import Path
from typing import List, Optional, Union
import logging
import math

import numpy as np

from analytics import RunAnalytics, RunMetrics
from config import settings
from data_processing import TelemetryLog
from ekf_estimator import core_position
from glider import Variometer, sink_rate, step_dynamics
from scenario import Scenario
from schema import Commands, FlightMode
from soar_controller import ControllerInputs, Route, SoarController, Transition
from thermal_env import ThermalField

logger = logging.getLogger(__name__)


class SimulationResult:
    def __init__(self, telemetry: TelemetryLog, metrics: RunMetrics, transitions: List[Transition]):
        self.telemetry = telemetry
        self.metrics = metrics
        self.transitions = transitions

    @property
    def frame(self):
        return self.telemetry.to_frame()

    def mode_sequence(self) -> List[FlightMode]:
        """Secuencia de modos visitados (sin repeticiones consecutivas)"""
        if not self.transitions:
            return []
        return [self.transitions[0].from_mode] + [t.to_mode for t in self.transitions]


def _center_error(field: ThermalField, north: float, east: float) -> float:
    thermals = field.active()
    if not thermals:
        return math.nan
    return min(math.hypot(th.core_north - north, th.core_east - east) for th in thermals)


def run(
    scenario: Scenario,
    log_path: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    substeps: Optional[int] = None,
) -> SimulationResult:
    """
    Ejecuta un escenario completo.

    Con la misma semilla la telemetría es idéntica byte a byte. El ruido del
    variómetro es gaussiano aditivo sobre el netto con desviación `vario_noise_std`.
    """
    config = scenario.soar
    polar = config.polar
    rng = np.random.default_rng(scenario.seed if seed is None else seed)
    dt = scenario.dt
    substeps = substeps or settings.simulation.physics_substeps
    h = dt / substeps

    field = ThermalField(scenario.thermals, scenario.wind, scenario.drift_factor, scenario.taper_per_m)
    route = Route(waypoints=tuple(scenario.waypoints), geofence=scenario.fence())
    controller = SoarController(config, route, scenario.initial_mode)
    variometer = Variometer(polar, config.t_c, config.gravity)
    telemetry = TelemetryLog()
    transitions: List[Transition] = []

    state = scenario.initial_state.model_copy(
        update={"motor_on": scenario.initial_mode is FlightMode.CLIMB_POWERED}
    )
    logger.info("Simulando '%s' (%d ticks a %.1f Hz)", scenario.name, scenario.n_ticks, scenario.tick_rate)

    for _ in range(scenario.n_ticks):
        noise = rng.normal(0.0, scenario.vario_noise_std) if scenario.vario_noise_std > 0 else 0.0
        vario = variometer.update(state, noise)
        output = controller.tick(ControllerInputs(state=state, vario=vario, wind=scenario.wind))
        if output.transition is not None:
            transitions.append(output.transition)
        if state.motor_on and not output.commands.motor:
            variometer.reset()

        row = {
            "time": state.time,
            "north": state.north,
            "east": state.east,
            "altitude": state.altitude,
            "airspeed": state.airspeed,
            "bank": state.bank,
            "heading": state.heading,
            "mode": output.mode.value,
            "motor": int(output.commands.motor),
            "e_dot": vario.e_dot,
            "e_dot_net": vario.e_dot_net,
            "e_dot_filt": vario.e_dot_filt,
            "lift_truth": field.lift(state.north, state.east, state.altitude),
            "sink": sink_rate(polar, state.airspeed, state.bank),
            "innovation": output.innovation,
            "gain_norm": output.gain_norm,
            "waypoint_index": output.internal.waypoint_index,
        }
        if output.estimator is not None:
            est = output.estimator
            p = np.diag(est.cov)
            center = core_position(est, state.north, state.east)
            row.update(
                ekf_w=est.strength, ekf_r=est.radius, ekf_x=est.x, ekf_y=est.y,
                p_w=p[0], p_r=p[1], p_x=p[2], p_y=p[3],
                center_error=_center_error(field, *center),
            )
        if output.loiter is not None:
            row.update(loiter_north=output.loiter.center_north, loiter_east=output.loiter.center_east)
        telemetry.append(row)

        state = _advance(state, output.commands, field, scenario, h, substeps)

    result = SimulationResult(
        telemetry,
        RunAnalytics(telemetry.to_frame(), dt, transitions).compute_metrics(),
        transitions,
    )
    if log_path is not None:
        telemetry.write_csv(log_path)
        logger.info("Telemetría escrita en %s", log_path)
    return result


def _advance(state, commands: Commands, field: ThermalField, scenario: Scenario, h: float, substeps: int):
    config = scenario.soar
    for _ in range(substeps):
        lift = field.lift(state.north, state.east, state.altitude)
        state = step_dynamics(
            state,
            commands,
            lift,
            scenario.wind,
            config.polar,
            h,
            g=config.gravity,
            bank_tau=config.bank_tau,
            airspeed_tau=config.airspeed_tau,
            motor_climb_rate=config.motor_climb_rate,
            bank_limit=config.bank_limit,
        )
        field.step(h)
    return state
