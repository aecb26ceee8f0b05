"""
Modelo de masa puntual del velero, polar de resistencia y síntesis del variómetro
(energía específica total, netto y filtrado paso-bajo).
"""

from typing import Optional
import math

from schema import Commands, GliderState, PolarCoefficients, VarioSample, WindVector

GRAVITY = 9.80665
RHO_SEA_LEVEL = 1.225


def _check_flight_condition(v: float, bank: float) -> None:
    if v <= 0:
        raise ValueError(f"airspeed must be > 0, got {v}")
    if abs(bank) >= math.pi / 2:
        raise ValueError(f"bank must satisfy |bank| < pi/2, got {bank}")


def sink_rate(polar: PolarCoefficients, v: float, bank: float = 0.0) -> float:
    """Tasa de caída en aire en calma (m/s, positiva hacia abajo) para airspeed y alabeo dados"""
    _check_flight_condition(v, bank)
    c_l = polar.k / v**2
    return v * (polar.c_d0 / c_l + polar.b * c_l / math.cos(bank) ** 2)


def specific_energy_rate(
    h_prev: float, h_now: float, v_prev: float, v_now: float, dt: float, g: float = GRAVITY
) -> float:
    """Derivada por diferencias finitas de la energía específica h + v²/2g"""
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    e_prev = h_prev + v_prev**2 / (2 * g)
    e_now = h_now + v_now**2 / (2 * g)
    return (e_now - e_prev) / dt


def netto(e_dot: float, polar: PolarCoefficients, v: float, bank: float = 0.0) -> float:
    """Variómetro netto: velocidad vertical de la masa de aire"""
    return e_dot + sink_rate(polar, v, bank)


def lowpass_step(prev_filt: float, e_dot_net: float, t_c: float = 0.03) -> float:
    if not 0 < t_c <= 1:
        raise ValueError(f"t_c must be in (0, 1], got {t_c}")
    return t_c * e_dot_net + (1 - t_c) * prev_filt


def coordinated_turn_bank(v: float, radius: float, g: float = GRAVITY) -> float:
    """Alabeo de un giro coordinado estacionario de radio dado"""
    return math.atan(v**2 / (g * radius))


def wrap_angle(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


def _lag(current: float, target: float, dt: float, tau: float) -> float:
    # Discretización exacta de un sistema de primer orden
    return target + (current - target) * math.exp(-dt / tau)


def step_dynamics(
    state: GliderState,
    commands: Commands,
    env_lift: float,
    wind: WindVector,
    polar: PolarCoefficients,
    dt: float,
    g: float = GRAVITY,
    bank_tau: float = 0.5,
    airspeed_tau: float = 0.5,
    motor_climb_rate: float = 3.0,
    bank_limit: float = math.radians(60),
) -> GliderState:
    """
    Un paso de integración cinemático.

    El alabeo y la velocidad siguen a sus consignas con retardo de primer orden.
    La velocidad de tierra es la del aire más el viento. La altitud cambia con la
    sustentación del entorno menos la caída de la polar (más el ascenso del motor si
    está encendido) y además intercambia energía cinética: con el motor apagado
    h + v²/2g varía exactamente en (env_lift - sink) * dt.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if abs(commands.target_bank) > bank_limit:
        raise ValueError(
            f"target_bank {commands.target_bank:.3f} rad exceeds actuator limit {bank_limit:.3f}"
        )

    bank = _lag(state.bank, commands.target_bank, dt, bank_tau)
    airspeed = _lag(state.airspeed, commands.target_airspeed, dt, airspeed_tau)

    heading_rate = g * math.tan(bank) / airspeed
    heading = state.heading + heading_rate * dt
    heading_mid = state.heading + 0.5 * heading_rate * dt

    north = state.north + (airspeed * math.cos(heading_mid) + wind.v_north) * dt
    east = state.east + (airspeed * math.sin(heading_mid) + wind.v_east) * dt

    climb = env_lift - sink_rate(polar, airspeed, bank)
    if commands.motor:
        climb += motor_climb_rate
    exchange = (airspeed**2 - state.airspeed**2) / (2 * g)
    altitude = max(0.0, state.altitude + climb * dt - exchange)

    return GliderState(
        north=north,
        east=east,
        altitude=altitude,
        airspeed=airspeed,
        heading=wrap_angle(heading),
        bank=bank,
        motor_on=commands.motor,
        time=state.time + dt,
    )


class Variometer:
    """
    Variómetro de energía total compensado por la polar.

    Se alimenta con muestras sucesivas del estado a la frecuencia del controlador.
    """

    def __init__(self, polar: PolarCoefficients, t_c: float = 0.03, g: float = GRAVITY):
        self.polar = polar
        self.t_c = t_c
        self.g = g
        self.filtered = 0.0
        self._prev: Optional[GliderState] = None

    def reset(self, value: float = 0.0) -> None:
        """Reinicia el filtro (p. ej. al apagar el motor: el ascenso propulsado no es térmica)"""
        self.filtered = value

    def update(self, state: GliderState, noise: float = 0.0) -> VarioSample:
        sink = sink_rate(self.polar, state.airspeed, state.bank)
        if self._prev is None or state.time <= self._prev.time:
            e_dot = -sink
        else:
            e_dot = specific_energy_rate(
                self._prev.altitude,
                state.altitude,
                self._prev.airspeed,
                state.airspeed,
                state.time - self._prev.time,
                self.g,
            )
        self._prev = state

        e_dot_net = netto(e_dot, self.polar, state.airspeed, state.bank) + noise
        self.filtered = lowpass_step(self.filtered, e_dot_net, self.t_c)
        return VarioSample(
            e_dot=e_dot, e_dot_net=e_dot_net, e_dot_filt=self.filtered, time=state.time
        )
