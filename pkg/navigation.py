"""
Guiado lateral: seguimiento de waypoints en crucero, órbita de loiter y geocerca.
"""

from typing import List, Optional, Sequence, Tuple
import logging
import math

from shapely.geometry import Point, Polygon

from glider import GRAVITY, coordinated_turn_bank, wrap_angle
from schema import GliderState, LoiterCommand, WindVector

logger = logging.getLogger(__name__)

Waypoint = Tuple[float, float]

COURSE_GAIN = 1.0
ORBIT_GAIN = 2.0


def ground_course(state: GliderState, wind: Optional[WindVector] = None) -> float:
    """Rumbo sobre el terreno; sin viento coincide con el heading"""
    if wind is None:
        return state.heading
    v_n = state.airspeed * math.cos(state.heading) + wind.v_north
    v_e = state.airspeed * math.sin(state.heading) + wind.v_east
    if math.hypot(v_n, v_e) < 1e-6:
        return state.heading
    return math.atan2(v_e, v_n)


def _clamp(value: float, limit: float) -> float:
    return max(-limit, min(limit, value))


def cruise_navigation(
    state: GliderState,
    waypoints: Sequence[Waypoint],
    current_index: int,
    wind: Optional[WindVector] = None,
    acceptance_radius: float = 20.0,
    max_bank: float = math.radians(40),
    gain: float = COURSE_GAIN,
) -> Tuple[float, int]:
    """
    Guiado proporcional al error de rumbo hacia el waypoint activo.

    Devuelve (alabeo consigna, índice de waypoint). El circuito es cerrado: tras el
    último waypoint se vuelve al primero.
    """
    if not waypoints:
        raise ValueError("at least one waypoint is required")
    if not 0 <= current_index < len(waypoints):
        raise ValueError(f"waypoint index {current_index} out of range")

    index = current_index
    wp_n, wp_e = waypoints[index]
    if math.hypot(wp_n - state.north, wp_e - state.east) < acceptance_radius:
        index = (index + 1) % len(waypoints)
        wp_n, wp_e = waypoints[index]
        logger.debug("Waypoint alcanzado, siguiente: %d", index)

    bearing = math.atan2(wp_e - state.east, wp_n - state.north)
    error = wrap_angle(bearing - ground_course(state, wind))
    return _clamp(gain * error, max_bank), index


def loiter_tracking(
    state: GliderState,
    cmd: LoiterCommand,
    wind: Optional[WindVector] = None,
    max_bank: float = math.radians(45),
    g: float = GRAVITY,
    orbit_gain: float = ORBIT_GAIN,
    course_gain: float = COURSE_GAIN,
) -> float:
    """
    Alabeo consigna para orbitar el círculo comandado.

    Campo vectorial de órbita: rumbo deseado tangente al círculo corregido por el error
    radial, más el alabeo de giro coordinado como prealimentación.
    """
    direction = cmd.direction.sign
    rel_n = state.north - cmd.center_north
    rel_e = state.east - cmd.center_east
    dist = math.hypot(rel_n, rel_e)

    if dist < 1e-6:
        # En el centro: se toma el heading actual como tangente y se abre hacia fuera
        angle = state.heading - direction * math.pi / 2
    else:
        angle = math.atan2(rel_e, rel_n)

    desired = angle + direction * (
        math.pi / 2 + math.atan(orbit_gain * (dist - cmd.radius) / cmd.radius)
    )
    error = wrap_angle(desired - ground_course(state, wind))
    feedforward = direction * coordinated_turn_bank(state.airspeed, cmd.radius, g)
    return _clamp(feedforward + course_gain * error, max_bank)


class Geofence:
    """Polígono que delimita el vuelo permitido"""

    def __init__(self, vertices: Sequence[Waypoint]):
        if len(vertices) < 3:
            raise ValueError("geofence needs at least 3 vertices")
        self.vertices = [tuple(v) for v in vertices]
        self.polygon = Polygon(self.vertices)
        if not self.polygon.is_valid:
            raise ValueError("geofence polygon is not a valid simple polygon")
        if not self.polygon.convex_hull.equals(self.polygon):
            logger.warning("La geocerca no es convexa")

    def contains(self, north: float, east: float) -> bool:
        return self.polygon.contains(Point(north, east))

    def contains_all(self, points: Sequence[Waypoint]) -> bool:
        return all(self.contains(n, e) for n, e in points)

    def nearest_waypoint(self, waypoints: Sequence[Waypoint], north: float, east: float) -> int:
        """Índice del waypoint interior más cercano a la posición dada"""
        inside: List[int] = [i for i, (n, e) in enumerate(waypoints) if self.contains(n, e)]
        candidates = inside or list(range(len(waypoints)))
        return min(
            candidates,
            key=lambda i: math.hypot(waypoints[i][0] - north, waypoints[i][1] - east),
        )
