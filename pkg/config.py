from pathlib import Path
from typing import Tuple, Type
import logging

from pydantic import BaseModel, field_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    YamlConfigSettingsSource,
)

CONFIG_YAML = Path(__file__).parent / "config.yaml"


class SimulationSettings(BaseModel):
    """Parámetros del bucle de simulación"""

    physics_substeps: int = 4
    telemetry_float_format: str = "%.6f"
    output_dir: str = "runs"

    @field_validator("physics_substeps")
    @classmethod
    def validate_substeps(cls, v):
        if v < 1:
            raise ValueError(f"physics_substeps must be >= 1, got {v}")
        return v


class SweepSettings(BaseModel):
    """Parámetros del barrido de radios de loiter"""

    workers: int = 1
    duration_s: float = 60.0


class LoggingSettings(BaseModel):
    level: str = "INFO"
    format: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"

    @field_validator("level")
    @classmethod
    def validate_level(cls, v):
        v = v.upper()
        if not isinstance(logging.getLevelName(v), int):
            raise ValueError(f"Unknown log level: {v}")
        return v


class SoarSimSettings(BaseSettings):
    """Configuración de la aplicación (no incluye los parámetros SOAR_* del controlador)"""

    simulation: SimulationSettings = SimulationSettings()
    sweep: SweepSettings = SweepSettings()
    logging: LoggingSettings = LoggingSettings()

    model_config = SettingsConfigDict(
        env_prefix="SOARSIM_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        yaml_file=CONFIG_YAML,
        extra="ignore",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        # El entorno tiene prioridad sobre config.yaml
        return (
            init_settings,
            env_settings,
            dotenv_settings,
            YamlConfigSettingsSource(settings_cls),
        )


def configure_logging(level: str = None) -> None:
    """Configura el logging raíz a partir de los settings"""
    logging.basicConfig(
        level=(level or settings.logging.level).upper(),
        format=settings.logging.format,
    )


# Instancia global de configuración
settings = SoarSimSettings()
