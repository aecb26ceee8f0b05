"""
Máquina de modos del controlador de planeo térmico.

CLIMB_POWERED y GLIDE_CRUISE siguen el circuito de waypoints (con y sin motor);
THERMAL_LOITER orbita la media del núcleo estimado por el EKF. Los límites de
altitud tienen prioridad sobre cualquier otra transición.
"""

from typing import Optional, Tuple
import logging
import math

from pydantic import BaseModel, ConfigDict

from ekf_estimator import (
    EstimatorResetError,
    core_position,
    initialize,
    predict,
    update_with_trace,
    wind_corrected_displacement,
)
from glider import coordinated_turn_bank, sink_rate
from navigation import Geofence, Waypoint, cruise_navigation, loiter_tracking
from schema import (
    Commands,
    EstimatorState,
    FlightMode,
    GliderState,
    LoiterCommand,
    LoiterDirection,
    SoarConfig,
    VarioSample,
    WindVector,
)

logger = logging.getLogger(__name__)

DIRECTION_BANK_THRESHOLD = math.radians(5)


class ExitReason:
    ALT_MAX = "alt_max"
    ALT_MIN = "alt_min"
    ALT_CUTOFF = "alt_cutoff"
    WEAK_THERMAL = "weak_thermal"
    GEOFENCE = "geofence"
    ESTIMATOR_RESET = "estimator_reset"
    THERMAL_DETECTED = "thermal_detected"


class ControllerInputs(BaseModel):
    model_config = ConfigDict(frozen=True)

    state: GliderState
    vario: VarioSample
    wind: WindVector = WindVector()


class ControllerState(BaseModel):
    """Estado interno del controlador entre ticks"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mode: FlightMode = FlightMode.GLIDE_CRUISE
    estimator: Optional[EstimatorState] = None
    loiter: Optional[LoiterCommand] = None
    thermal_entry_time: Optional[float] = None
    last_exit_time: float = -math.inf
    waypoint_index: int = 0
    prev_north: Optional[float] = None
    prev_east: Optional[float] = None
    prev_time: Optional[float] = None


class Transition(BaseModel):
    model_config = ConfigDict(frozen=True)

    time: float
    from_mode: FlightMode
    to_mode: FlightMode
    reason: str


class ControllerOutput(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mode: FlightMode
    commands: Commands
    estimator: Optional[EstimatorState]
    loiter: Optional[LoiterCommand]
    internal: ControllerState
    transition: Optional[Transition] = None
    innovation: float = 0.0
    gain_norm: float = 0.0


class Route(BaseModel):
    """Circuito de waypoints y geocerca opcional"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    waypoints: Tuple[Waypoint, ...] = ()
    geofence: Optional[Geofence] = None


def default_k_sink(config: SoarConfig) -> float:
    """
    K_sink: caída de la polar a la velocidad de crucero con el alabeo de la órbita.
    SOAR_K_SINK, si se da, tiene prioridad.
    """
    if config.k_sink is not None:
        return config.k_sink
    bank = coordinated_turn_bank(config.trim_airspeed, config.loiter_radius, config.gravity)
    return sink_rate(config.polar, config.trim_airspeed, bank)


def detect(
    e_dot_filt: float,
    mode: FlightMode,
    time_since_exit: float,
    config: SoarConfig,
    altitude: Optional[float] = None,
) -> bool:
    """Disparo de entrada en térmica (comparación estricta con SOAR_VSPEED)"""
    if not config.enable or mode is not FlightMode.GLIDE_CRUISE:
        return False
    if altitude is not None and not config.alt_min < altitude < config.alt_max:
        return False
    return e_dot_filt > config.vspeed_trigger and time_since_exit >= config.min_cruise_s


def predicted_exit_lift(state: EstimatorState, loiter_radius: float, k_sink: float) -> float:
    """Ascenso esperado orbitando a loiter_radius del núcleo, según el modelo"""
    return state.strength * math.exp(-(loiter_radius**2) / state.radius**2) - k_sink


def exit_check(
    state: EstimatorState,
    loiter_radius: float,
    config: SoarConfig,
    time_in_thermal: float,
    k_sink: Optional[float] = None,
) -> bool:
    """
    Salida de la térmica: solo usa la sustentación predicha por el modelo,
    nunca el vario instantáneo.
    """
    if time_in_thermal < config.min_thermal_s:
        return False
    if k_sink is None:
        k_sink = default_k_sink(config)
    return predicted_exit_lift(state, loiter_radius, k_sink) < config.vspeed_trigger


def loiter_direction(bank: float) -> LoiterDirection:
    """Sentido de giro al entrar: se mantiene el del alabeo actual si es apreciable"""
    if bank > DIRECTION_BANK_THRESHOLD:
        return LoiterDirection.CW
    return LoiterDirection.CCW


def loiter_target(
    state: EstimatorState,
    aircraft: GliderState,
    config: SoarConfig,
    direction: LoiterDirection = LoiterDirection.CCW,
) -> LoiterCommand:
    center_north, center_east = core_position(state, aircraft.north, aircraft.east)
    return LoiterCommand(
        center_north=center_north,
        center_east=center_east,
        radius=config.loiter_radius,
        direction=direction,
    )


def altitude_mode_step(mode: FlightMode, altitude: float, config: SoarConfig) -> FlightMode:
    if mode is FlightMode.GLIDE_CRUISE and altitude <= config.alt_min:
        return FlightMode.CLIMB_POWERED
    if mode is FlightMode.CLIMB_POWERED and altitude >= config.alt_cutoff:
        return FlightMode.GLIDE_CRUISE
    if mode is FlightMode.THERMAL_LOITER:
        if altitude >= config.alt_max:
            return FlightMode.GLIDE_CRUISE
        if altitude <= config.alt_min:
            return FlightMode.CLIMB_POWERED
    return mode


def _altitude_reason(mode: FlightMode, new_mode: FlightMode) -> str:
    if new_mode is FlightMode.CLIMB_POWERED:
        return ExitReason.ALT_MIN
    if mode is FlightMode.CLIMB_POWERED:
        return ExitReason.ALT_CUTOFF
    return ExitReason.ALT_MAX


def next_mode(
    mode: FlightMode,
    altitude: float,
    triggered: bool,
    exit_flag: bool,
    inside_fence: bool,
    config: SoarConfig,
) -> Tuple[FlightMode, Optional[str]]:
    """
    Grafo de transiciones completo, sin efectos: devuelve (modo, motivo).
    Los límites de altitud dominan; luego geocerca, salida y detección.
    """
    after_altitude = altitude_mode_step(mode, altitude, config)
    if after_altitude is not mode:
        return after_altitude, _altitude_reason(mode, after_altitude)
    if mode is FlightMode.THERMAL_LOITER:
        if not inside_fence:
            return FlightMode.GLIDE_CRUISE, ExitReason.GEOFENCE
        if exit_flag:
            return FlightMode.GLIDE_CRUISE, ExitReason.WEAK_THERMAL
    elif (
        mode is FlightMode.GLIDE_CRUISE
        and triggered
        and inside_fence
        and altitude < config.alt_max
    ):
        return FlightMode.THERMAL_LOITER, ExitReason.THERMAL_DETECTED
    return mode, None


def _displacement(internal: ControllerState, inputs: ControllerInputs) -> Optional[Tuple[float, float]]:
    if internal.prev_time is None:
        return None
    dt = inputs.state.time - internal.prev_time
    if dt <= 0:
        return None
    return wind_corrected_displacement(
        inputs.state.north - internal.prev_north,
        inputs.state.east - internal.prev_east,
        inputs.wind,
        dt,
    )


def controller_tick(
    inputs: ControllerInputs,
    internal: ControllerState,
    config: SoarConfig,
    route: Optional[Route] = None,
    k_sink: Optional[float] = None,
) -> ControllerOutput:
    """
    Un tick del controlador a frecuencia fija.

    k_sink se calcula una vez por vuelo; si no se da, se deriva de la configuración.

    Orden: límites de altitud, geocerca, predicción+actualización del EKF y prueba de
    salida en loiter, detección en crucero. Después se generan las consignas.
    """
    route = route or Route()
    if k_sink is None:
        k_sink = default_k_sink(config)
    state = inputs.state
    mode = internal.mode
    estimator = internal.estimator
    loiter = internal.loiter
    innovation, gain_norm = 0.0, 0.0
    inside_fence = route.geofence is None or route.geofence.contains(state.north, state.east)
    waypoint_index = internal.waypoint_index

    triggered = False
    exit_flag = False
    reset = False
    if altitude_mode_step(mode, state.altitude, config) is mode:
        if mode is FlightMode.THERMAL_LOITER and inside_fence and estimator is not None:
            displacement = _displacement(internal, inputs)
            try:
                if displacement is not None:
                    estimator = predict(estimator, *displacement, config.noise)
                estimator, innovation, gain_norm = update_with_trace(
                    estimator, inputs.vario.e_dot_net, config.noise, config.r_floor
                )
            except EstimatorResetError as e:
                logger.warning("t=%.1f reinicio del estimador: %s", state.time, e)
                reset = True
            if not reset:
                entry = internal.thermal_entry_time
                time_in_thermal = state.time - (entry if entry is not None else state.time)
                exit_flag = exit_check(
                    estimator, config.loiter_radius, config, time_in_thermal, k_sink
                )
        elif mode is FlightMode.GLIDE_CRUISE:
            triggered = detect(
                inputs.vario.e_dot_filt,
                mode,
                state.time - internal.last_exit_time,
                config,
                state.altitude,
            )

    new_mode, reason = next_mode(
        mode, state.altitude, triggered, exit_flag or reset, inside_fence, config
    )
    if reset and new_mode is FlightMode.GLIDE_CRUISE and reason == ExitReason.WEAK_THERMAL:
        reason = ExitReason.ESTIMATOR_RESET

    thermal_entry_time = internal.thermal_entry_time
    last_exit_time = internal.last_exit_time
    transition = None
    if new_mode is not mode:
        transition = Transition(time=state.time, from_mode=mode, to_mode=new_mode, reason=reason)
        logger.info(
            "t=%.1f %s -> %s (%s) alt=%.1f",
            state.time, mode.value, new_mode.value, reason, state.altitude,
        )
        if new_mode is FlightMode.THERMAL_LOITER:
            estimator = initialize(inputs.vario.e_dot_filt, state.heading, config)
            thermal_entry_time = state.time
            direction = loiter_direction(state.bank)
            loiter = loiter_target(estimator, state, config, direction)
        elif mode is FlightMode.THERMAL_LOITER:
            estimator, loiter, thermal_entry_time = None, None, None
            last_exit_time = state.time
            if reason == ExitReason.GEOFENCE and route.waypoints:
                waypoint_index = route.geofence.nearest_waypoint(
                    route.waypoints, state.north, state.east
                )
    elif new_mode is FlightMode.THERMAL_LOITER:
        loiter = loiter_target(estimator, state, config, loiter.direction)

    if new_mode is FlightMode.THERMAL_LOITER:
        target_bank = loiter_tracking(
            state, loiter, inputs.wind, config.max_bank_loiter, config.gravity
        )
    elif route.waypoints:
        target_bank, waypoint_index = cruise_navigation(
            state,
            route.waypoints,
            waypoint_index,
            inputs.wind,
            config.wp_radius,
            config.max_bank_cruise,
        )
    else:
        target_bank = 0.0

    commands = Commands(
        target_bank=target_bank,
        target_airspeed=config.trim_airspeed,
        motor=new_mode is FlightMode.CLIMB_POWERED,
    )
    new_internal = ControllerState(
        mode=new_mode,
        estimator=estimator,
        loiter=loiter,
        thermal_entry_time=thermal_entry_time,
        last_exit_time=last_exit_time,
        waypoint_index=waypoint_index,
        prev_north=state.north,
        prev_east=state.east,
        prev_time=state.time,
    )
    return ControllerOutput(
        mode=new_mode,
        commands=commands,
        estimator=estimator,
        loiter=loiter,
        internal=new_internal,
        transition=transition,
        innovation=innovation,
        gain_norm=gain_norm,
    )


class SoarController:
    """Envoltorio con estado para el bucle del simulador"""

    def __init__(self, config: SoarConfig, route: Optional[Route] = None, initial_mode: FlightMode = FlightMode.GLIDE_CRUISE):
        self.config = config
        self.route = route or Route()
        self.internal = ControllerState(mode=initial_mode)
        self.k_sink = default_k_sink(config)

    @property
    def mode(self) -> FlightMode:
        return self.internal.mode

    def tick(self, inputs: ControllerInputs) -> ControllerOutput:
        output = controller_tick(inputs, self.internal, self.config, self.route, self.k_sink)
        self.internal = output.internal
        return output
