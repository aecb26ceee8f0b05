"""
Línea de comandos del simulador de planeo térmico.

    python soar_cli.py run scenarios/single_thermal.yaml --log runs/single.csv --seed 1
    python soar_cli.py sweep --thermal-radii 10 20 30 50 80 100 --loiter-radii 15 30 60 --out sweep.csv
    python soar_cli.py fit-polar glides.csv --mass 1.2 --wing-area 0.34
"""

from pathlib import Path
from typing import List, Optional
import argparse
import sys
import traceback

import yaml
from pydantic import ValidationError

from analytics import generate_summary, metrics_to_dict
from config import configure_logging, settings
from data_processing import load_glide_samples
from polar_fit import PolarFitError, compute_k, fit_polar
from scenario import format_validation_error, load_scenario
from sim_harness import run
from sweep import radius_sweep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Simulador de controlador de planeo térmico")
    parser.add_argument("--log-level", default=None, help="Nivel de logging (por defecto config.yaml)")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="Ejecuta un escenario")
    run_p.add_argument("scenario", type=Path)
    run_p.add_argument("--log", type=Path, default=None, help="CSV de telemetría")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--metrics", type=Path, default=None, help="Resumen YAML de métricas")

    sweep_p = sub.add_parser("sweep", help="Barrido de radios de loiter")
    sweep_p.add_argument("--thermal-radii", type=float, nargs="+", default=[10, 20, 30, 50, 80, 100])
    sweep_p.add_argument("--loiter-radii", type=float, nargs="+", default=[15, 30, 60])
    sweep_p.add_argument("--strength", type=float, default=2.5)
    sweep_p.add_argument("--scenario", type=Path, default=None, help="Toma los parámetros SOAR_* de un escenario")
    sweep_p.add_argument("--workers", type=int, default=None)
    sweep_p.add_argument("--out", type=Path, default=None)

    fit_p = sub.add_parser("fit-polar", help="Ajusta C_D0 y B a partir de planeos de prueba")
    fit_p.add_argument("samples", type=Path)
    fit_p.add_argument("--k", type=float, default=None)
    fit_p.add_argument("--mass", type=float, default=None)
    fit_p.add_argument("--wing-area", type=float, default=None)
    fit_p.add_argument("--rho", type=float, default=1.225)
    return parser


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    log_path = args.log or Path(settings.simulation.output_dir) / f"{scenario.name}.csv"
    print(f"🚀 Ejecutando escenario '{scenario.name}'...")
    result = run(scenario, log_path=log_path, seed=args.seed)

    print(generate_summary(result.metrics, scenario.name))
    metrics_path = args.metrics or log_path.with_suffix(".metrics.yaml")
    with open(metrics_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(metrics_to_dict(result.metrics), f, sort_keys=False)
    print(f"✅ Telemetría: {log_path}")
    print(f"✅ Métricas: {metrics_path}")
    return 0


def cmd_sweep(args) -> int:
    config = load_scenario(args.scenario).soar if args.scenario else None
    print(f"🔍 Barrido W={args.strength} m/s, radios de loiter {args.loiter_radii}...")
    result = radius_sweep(
        args.thermal_radii, args.loiter_radii, args.strength,
        config=config, workers=args.workers, progress=True,
    )
    table = result.table()
    print(table.to_string(float_format=lambda x: f"{x:.3f}"))
    print(f"🏆 Mejor radio fijo: {result.best_fixed_radius():g} m")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(args.out, float_format="%.6f", lineterminator="\n")
        print(f"✅ Tabla: {args.out}")
    return 0


def cmd_fit_polar(args) -> int:
    if args.k is not None:
        k = args.k
    elif args.mass is not None and args.wing_area is not None:
        k = compute_k(args.mass, args.wing_area, args.rho)
    else:
        print("❌ Indica --k o bien --mass y --wing-area")
        return 2
    fit = fit_polar(load_glide_samples(args.samples), k)
    if fit.suspect:
        print("⚠️  Coeficientes negativos: revisa los datos de planeo")
    print(f"# {fit.n_samples} muestras, residuo RMS {fit.residual:.4f} m/s")
    print(fit.scenario_lines(), end="")
    return 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "fit-polar": cmd_fit_polar}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as e:
        print("❌ Escenario inválido:")
        for line in format_validation_error(e):
            print(f"   • {line}")
        return 2
    except (PolarFitError, ValueError, FileNotFoundError) as e:
        print(f"❌ Error: {e}")
        return 1
    except Exception as e:
        print(f"❌ Error inesperado: {str(e)}")
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
