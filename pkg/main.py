"""
Main - CrackSense
CrackSense - Compósitos Autossensíveis

Ponto de entrada da linha de comando.

    python main.py simulate --config configs/smoke.yaml --out runs/smoke
    python main.py sweep --plan configs/desk_plan.yaml --out runs/desk --threads 4
    python main.py dataset --runs runs/desk --out data/dataset.csv
    python main.py train --dataset data/dataset.csv --out models/ann.json --holdout "0_60_*"
    python main.py predict --model models/ann.json --rows data/dataset.csv --out data/pred.csv
    python main.py evaluate --model models/ann.json --dataset data/dataset.csv --out reports/
    python main.py polar --out data/polar.csv
"""

import argparse
import sys
from typing import List, Optional

# Configuração
from core.config import Config

# Core
from core import pipeline
from adapters.config_loader import load_train_config

# Common
from common.exceptions import (
    ConfigurationError,
    ConvergenceError,
    CrackSenseError,
    IngestionError,
    SimulationError,
    TrainingError,
    ValidationError,
)
from common.logging import get_logger, setup_logging
from common.types import InputsMode

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_TRAINING = 4
EXIT_INGESTION = 5
EXIT_INTERRUPTED = 130


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cracksense",
        description="Fratura phase-field, sensoriamento EIT e SHM com ANN para compósitos autossensíveis.",
    )
    parser.add_argument("--env-file", default=None, help="Arquivo .env opcional")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Executa uma simulação")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="Executa um plano de varredura")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--plan", help="YAML do plano")
    group.add_argument("--preset", choices=["desk", "full"])
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("dataset", help="Monta dataset.csv a partir das execuções")
    p.add_argument("--runs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--filter-threshold", type=float, default=1.0)

    p = sub.add_parser("train", help="Treina a rede com Levenberg-Marquardt")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None, help="YAML de TrainConfig")
    p.add_argument("--holdout", action="append", default=[], help="Padrão de caso reservado (repetível)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--inputs-mode", type=int, choices=[31, 32], default=None)

    p = sub.add_parser("predict", help="Prevê (ã, C̃) para linhas de um CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--rows", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("evaluate", help="R²/RMSE e paridade por partição")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("polar", help="Varredura polar de relaxação em um ponto material")
    p.add_argument("--out", required=True)
    p.add_argument("--preset", default="pm45_70_30")
    p.add_argument("--vf", type=float, default=0.5)
    p.add_argument("--theta", type=float, default=296.0)
    p.add_argument("--strain", type=float, default=0.01)

    return parser


def run_command(args: argparse.Namespace, config: Config) -> int:
    if args.command == "simulate":
        result = pipeline.cmd_simulate(args.config, args.out)
        print(f"✅ {len(result.records)} registros, término: {result.termination}")
        return EXIT_OK

    if args.command == "sweep":
        threads = args.threads or config.threads
        summary = pipeline.cmd_sweep(args.out, plan_path=args.plan, preset=args.preset, threads=threads)
        if summary.failed:
            print(f"❌ {len(summary.failed)} caso(s) falharam: {', '.join(summary.failed)}")
            return EXIT_SIMULATION
        print(f"✅ {len(summary.results)} casos concluídos")
        return EXIT_OK

    if args.command == "dataset":
        frame = pipeline.cmd_dataset(args.runs, args.out, args.filter_threshold)
        print(f"✅ {len(frame)} linhas em {args.out}")
        return EXIT_OK

    if args.command == "train":
        train_config = load_train_config(
            args.config,
            seed=args.seed if args.seed is not None else config.seed,
            inputs_mode=InputsMode(args.inputs_mode) if args.inputs_mode else None,
        )
        doc = pipeline.cmd_train(args.dataset, args.out, train_config, holdout=args.holdout)
        meta = doc.metadata
        print(f"✅ Modelo salvo em {args.out} (época {meta.best_epoch}/{meta.epochs_run}, {meta.stop_reason.value})")
        return EXIT_OK

    if args.command == "predict":
        frame = pipeline.cmd_predict(args.model, args.rows, args.out)
        if not args.out:
            print(frame[pipeline.PREDICTION_COLUMNS].to_csv(index=False))
        return EXIT_OK

    if args.command == "evaluate":
        reports = pipeline.cmd_evaluate(args.model, args.dataset, args.out)
        for split, report in reports.items():
            r2 = ", ".join(f"R²[{k}]={v:.4f}" for k, v in report.r2.items())
            rmse = ", ".join(f"RMSE[{k}]={v:.4g}" for k, v in report.rmse.items())
            print(f"   • {split.value}: {r2}; {rmse}")
        return EXIT_OK

    if args.command == "polar":
        frame = pipeline.cmd_polar(args.out, args.preset, args.vf, args.theta, args.strain)
        print(f"✅ {len(frame)} linhas em {args.out}")
        return EXIT_OK

    raise ConfigurationError(f"Comando desconhecido: {args.command}")


def main(argv: Optional[List[str]] = None) -> int:
    """Função principal da aplicação."""
    args = build_parser().parse_args(argv)

    try:
        config = Config.from_env(args.env_file)
        setup_logging(config.log_level, json_format=config.log_json, log_file=config.log_file)
        return run_command(args, config)

    except ConfigurationError as e:
        print(f"\n❌ Erro de Configuração: {e}")
        return EXIT_CONFIG

    except (SimulationError, ConvergenceError) as e:
        print(f"\n❌ Erro de Simulação: {e}")
        return EXIT_SIMULATION

    except (TrainingError, ValidationError) as e:
        print(f"\n❌ Erro de Treinamento: {e}")
        return EXIT_TRAINING

    except IngestionError as e:
        print(f"\n❌ Erro de Leitura: {e}")
        return EXIT_INGESTION

    except CrackSenseError as e:
        print(f"\n❌ Erro: {e}")
        if e.details:
            print(f"Detalhes: {e.details}")
        return EXIT_SIMULATION if args.command in ("simulate", "sweep") else EXIT_UNEXPECTED

    except KeyboardInterrupt:
        print("\n\n⚠️  Execução interrompida pelo usuário.")
        return EXIT_INTERRUPTED

    except Exception as e:
        logger.error("Unexpected error", extra_data={"error": str(e), "command": args.command})
        print(f"\n❌ Erro Inesperado: {e}")
        import traceback
        traceback.print_exc()
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
