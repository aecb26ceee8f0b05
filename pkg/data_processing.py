import math
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd

from config import settings
from schema import GlideSample

# Orden fijo de columnas del log de telemetría (una fila por tick de control)
TELEMETRY_COLUMNS = [
    "time",
    "north",
    "east",
    "altitude",
    "airspeed",
    "bank",
    "heading",
    "mode",
    "motor",
    "e_dot",
    "e_dot_net",
    "e_dot_filt",
    "lift_truth",
    "sink",
    "ekf_w",
    "ekf_r",
    "ekf_x",
    "ekf_y",
    "p_w",
    "p_r",
    "p_x",
    "p_y",
    "innovation",
    "gain_norm",
    "loiter_north",
    "loiter_east",
    "center_error",
    "waypoint_index",
]


class TelemetryLog:
    """Acumulador de filas de telemetría"""

    def __init__(self):
        self.rows: List[Dict] = []

    def append(self, row: Dict) -> None:
        self.rows.append({column: row.get(column, math.nan) for column in TELEMETRY_COLUMNS})

    def __len__(self) -> int:
        return len(self.rows)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=TELEMETRY_COLUMNS)

    def write_csv(self, path: Union[str, Path], float_format: Optional[str] = None) -> Path:
        """Escribe el log con formato numérico fijo (determinista byte a byte)"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(
            path,
            index=False,
            float_format=float_format or settings.simulation.telemetry_float_format,
            lineterminator="\n",
        )
        return path


def load_telemetry(path: Union[str, Path]) -> pd.DataFrame:
    """Carga un log de telemetría escrito por TelemetryLog"""
    data = pd.read_csv(path)
    missing = [c for c in TELEMETRY_COLUMNS if c not in data.columns]
    if missing:
        raise ValueError(f"Telemetry file {path} is missing columns: {missing}")
    return data


def load_glide_samples(path: Union[str, Path]) -> List[GlideSample]:
    """
    Lee muestras de planeo (airspeed, sink, bank) de un fichero delimitado.

    El alabeo es opcional: columna `bank` en radianes o `bank_deg` en grados.
    """
    data = pd.read_csv(path, sep=None, engine="python")
    data.columns = [c.strip().lower() for c in data.columns]
    for column in ("airspeed", "sink"):
        if column not in data.columns:
            raise ValueError(f"Samples file {path} has no '{column}' column")
    if "bank" in data.columns:
        bank = data["bank"]
    elif "bank_deg" in data.columns:
        bank = data["bank_deg"].map(math.radians)
    else:
        bank = pd.Series(0.0, index=data.index)

    return [
        GlideSample(airspeed=float(v), sink=float(s), bank=float(b))
        for v, s, b in zip(data["airspeed"], data["sink"], bank)
    ]
