import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats
from pydantic import BaseModel, ConfigDict, computed_field

from schema import FlightMode


class LoiterSegment(BaseModel):
    """Un encuentro con una térmica (tramo continuo en THERMAL_LOITER)"""

    model_config = ConfigDict(frozen=True)

    start_time: float
    end_time: float
    start_altitude: float
    end_altitude: float
    exit_reason: Optional[str] = None
    climb_rate: float = 0.0

    @computed_field
    @property
    def duration(self) -> float:
        return self.end_time - self.start_time

    @computed_field
    @property
    def altitude_gain(self) -> float:
        return self.end_altitude - self.start_altitude


class RunMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    duration: float
    time_per_mode: Dict[str, float]
    motor_on_time: float
    total_loiter_climb: float
    mean_thermalling_climb_rate: float
    thermal_encounters: int
    loiter_segments: List[LoiterSegment]
    center_error: List[float]


class RunAnalytics:
    """Métricas de una simulación a partir del log de telemetría"""

    def __init__(self, data: pd.DataFrame, dt: float, transitions: Sequence = ()):
        self.data = data.reset_index(drop=True)
        self.dt = dt
        self.transitions = list(transitions)

    def compute_metrics(self) -> RunMetrics:
        segments = self._loiter_segments()
        loiter_time = sum(s.duration for s in segments)
        total_climb = sum(s.altitude_gain for s in segments)
        loiter_rows = self.data[self.data["mode"] == FlightMode.THERMAL_LOITER.value]

        return RunMetrics(
            duration=len(self.data) * self.dt,
            time_per_mode=self._time_per_mode(),
            motor_on_time=float(self.data["motor"].astype(bool).sum()) * self.dt,
            total_loiter_climb=total_climb,
            mean_thermalling_climb_rate=total_climb / loiter_time if loiter_time > 0 else 0.0,
            thermal_encounters=len(segments),
            loiter_segments=segments,
            center_error=loiter_rows["center_error"].dropna().round(6).tolist(),
        )

    def _time_per_mode(self) -> Dict[str, float]:
        counts = self.data["mode"].value_counts()
        return {mode.value: float(counts.get(mode.value, 0)) * self.dt for mode in FlightMode}

    def _loiter_segments(self) -> List[LoiterSegment]:
        """Tramos contiguos en loiter; la altitud final es la del primer tick tras el tramo"""
        in_loiter = (self.data["mode"] == FlightMode.THERMAL_LOITER.value).to_numpy()
        if not in_loiter.any():
            return []

        edges = np.diff(np.concatenate([[0], in_loiter.astype(int), [0]]))
        starts = np.flatnonzero(edges == 1)
        ends = np.flatnonzero(edges == -1)
        exits = [t for t in self.transitions if t.from_mode is FlightMode.THERMAL_LOITER]

        segments = []
        for start, end in zip(starts, ends):
            last = min(end, len(self.data) - 1)
            end_time = float(self.data["time"].iloc[last]) if end < len(self.data) else (
                float(self.data["time"].iloc[-1]) + self.dt
            )
            reason = next(
                (t.reason for t in exits if math.isclose(t.time, end_time, abs_tol=1e-9)), None
            )
            rows = self.data.iloc[start:last + 1]
            climb_rate = (
                float(stats.linregress(rows["time"], rows["altitude"]).slope) if len(rows) > 2 else 0.0
            )
            segments.append(
                LoiterSegment(
                    start_time=float(self.data["time"].iloc[start]),
                    end_time=end_time,
                    start_altitude=float(self.data["altitude"].iloc[start]),
                    end_altitude=float(self.data["altitude"].iloc[last]),
                    exit_reason=reason,
                    climb_rate=climb_rate,
                )
            )
        return segments

    def center_error_trend(self, window: int = 25) -> pd.Series:
        """Mediana móvil del error de centro durante el loiter"""
        errors = self.data["center_error"].dropna()
        return errors.rolling(window, min_periods=1).median()

    def energy_residual(self) -> Dict[str, float]:
        """
        Balance de energía en los tramos sin motor: cambio de altitud frente a la
        integral trapezoidal de (sustentación - caída de la polar).
        """
        data = self.data
        motor_off = ~data["motor"].astype(bool).to_numpy()
        climb = (data["lift_truth"] - data["sink"]).to_numpy()
        altitude = data["altitude"].to_numpy()

        measured, integrated, magnitude = 0.0, 0.0, 0.0
        for i in range(len(data) - 1):
            if not (motor_off[i] and motor_off[i + 1]):
                continue
            measured += altitude[i + 1] - altitude[i]
            step = 0.5 * (climb[i] + climb[i + 1]) * self.dt
            integrated += step
            magnitude += abs(step)
        return {"measured": measured, "integrated": integrated, "magnitude": magnitude}


def generate_summary(metrics: RunMetrics, name: str = "") -> str:
    """Resumen legible de la simulación"""
    modes = "\n".join(
        f"        • {mode}: {seconds:.1f} s" for mode, seconds in metrics.time_per_mode.items()
    )
    summary = f"""
        RESUMEN DE LA SIMULACIÓN {name}:

        ⏱️  TIEMPO POR MODO:
{modes}
        • Motor encendido: {metrics.motor_on_time:.1f} s

        🌀 TÉRMICAS:
        • Encuentros: {metrics.thermal_encounters}
        • Ascenso total en loiter: {metrics.total_loiter_climb:+.1f} m
        • Tasa media de ascenso en térmica: {metrics.mean_thermalling_climb_rate:+.2f} m/s"""

    for i, segment in enumerate(metrics.loiter_segments, start=1):
        summary += (
            f"\n        • #{i}: t={segment.start_time:.1f}-{segment.end_time:.1f} s, "
            f"{segment.altitude_gain:+.1f} m ({segment.climb_rate:+.2f} m/s), "
            f"salida: {segment.exit_reason or '-'}"
        )
    return "\n".join(line.strip() for line in summary.strip().splitlines())


def metrics_to_dict(metrics: RunMetrics) -> Dict[str, Any]:
    data = metrics.model_dump()
    data["center_error"] = {
        "samples": len(metrics.center_error),
        "final": metrics.center_error[-1] if metrics.center_error else None,
        "median": float(np.median(metrics.center_error)) if metrics.center_error else None,
    }
    return data
