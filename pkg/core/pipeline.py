"""
Pipeline
CrackSense - Compósitos Autossensíveis

Comandos do fluxo offline/online: simulação, varredura, montagem do conjunto
de dados, treinamento, predição, avaliação e varredura polar de um ponto
material. Cada comando retorna seu artefato principal e levanta exceções da
hierarquia CrackSenseError; o mapeamento para códigos de saída fica no main.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from adapters.config_loader import load_sim_config, load_sweep_plan, resolve_case
from adapters.model_store import load_model, save_model, to_document
from adapters.run_store import (
    RunWriter,
    discover_runs,
    load_run,
    read_dataset,
    read_manifest,
    write_dataset,
)
from common.exceptions import ConfigurationError, CrackSenseError, IngestionError, TrainingError
from common.logging import LogContext, clear_context, get_logger, set_context
from common.metrics import metrics
from common.types import TARGET_COLUMNS, CaseRole, DataSplit, Result
from core.material import polar_sweep
from core.microstructure import decompose_families
from core.shm import (
    RegressionReport,
    assemble_dataset,
    dataset_frame,
    regression_metrics,
    row_keys,
    select_holdout,
    train_network,
)
from core.simulation import SimulationResult, run_simulation
from domain.parameters import MaterialParams
from domain.presets import ORIENTATION_PRESETS
from domain.run_schema import ModelDocument, OrientationConfig, SimConfig, TrainConfig

logger = get_logger(__name__)

PREDICTION_COLUMNS = [f"{c}_pred" for c in TARGET_COLUMNS]
REPORT_FILE = "report.csv"


# ============================================================================
# SIMULAÇÃO
# ============================================================================

def run_case(config: SimConfig, run_dir: str, role: CaseRole = CaseRole.TRAINING) -> SimulationResult:
    """Executa e persiste uma simulação; o manifesto registra falhas antes de propagá-las."""
    metrics.reset()
    set_context(LogContext(case=config.name, role=role.value, command="simulate"))
    writer = RunWriter(run_dir, config, role)
    try:
        result = run_simulation(config, on_step=writer.append_step)
    except Exception as e:
        writer.fail(e)
        raise
    finally:
        clear_context()
    writer.finalize(result)
    return result


def cmd_simulate(config_path: str, out_dir: str) -> SimulationResult:
    config = load_sim_config(config_path)
    return run_case(config, out_dir)


def _sweep_worker(payload: Tuple[Dict[str, Any], str, str]) -> Result[str]:
    data, role, run_dir = payload
    config = SimConfig.model_validate(data)
    try:
        result = run_case(config, run_dir, CaseRole(role))
    except CrackSenseError as e:
        return Result.fail(str(e), {"case": config.name, **e.details})
    return Result.ok(result.termination)


@dataclass
class SweepSummary:
    results: Dict[str, Result] = field(default_factory=dict)

    @property
    def failed(self) -> List[str]:
        return [name for name, r in self.results.items() if not r.success]


def cmd_sweep(
    out_root: str,
    plan_path: Optional[str] = None,
    preset: Optional[str] = None,
    threads: int = 1,
) -> SweepSummary:
    """
    Executa todos os casos do plano, um diretório por caso.

    Falhas individuais são registradas e a varredura continua; o chamador
    decide o código de saída a partir de SweepSummary.failed.
    """
    plan = load_sweep_plan(plan_path, preset=preset if plan_path is None else None)
    root = Path(out_root)
    payloads = [
        (resolve_case(plan, case).model_dump(mode="json"), case.role.value, str(root / case.name))
        for case in plan.cases
    ]

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_sweep_worker, payloads))
    else:
        outcomes = [_sweep_worker(p) for p in payloads]

    summary = SweepSummary(results={case.name: r for case, r in zip(plan.cases, outcomes)})
    for name in summary.failed:
        logger.error("Sweep case failed", extra_data={"case": name, "error": summary.results[name].error})
    logger.info(
        "Sweep finished",
        extra_data={"cases": len(plan.cases), "failed": len(summary.failed), "threads": threads}
    )
    return summary


# ============================================================================
# CONJUNTO DE DADOS E TREINAMENTO
# ============================================================================

def cmd_dataset(run_root: str, out_csv: str, filter_threshold: float = 1.0) -> pd.DataFrame:
    """
    Raises:
        IngestionError: Nenhuma execução utilizável sob run_root
    """
    runs = []
    for run_dir in discover_runs(run_root):
        if read_manifest(run_dir).get("status") == "failed":
            logger.warning("Skipping failed run", extra_data={"dir": str(run_dir)})
            continue
        runs.append(load_run(str(run_dir)))
    if not runs:
        raise IngestionError(f"No usable runs under {run_root}", {"root": run_root})

    frame = dataset_frame(assemble_dataset(runs, filter_threshold))
    write_dataset(frame, out_csv)
    logger.info(
        "Dataset written",
        extra_data={"path": out_csv, "rows": len(frame), "runs": len(runs)}
    )
    return frame


def cmd_train(
    dataset_path: str,
    model_out: str,
    config: TrainConfig,
    holdout: Sequence[str] = (),
) -> ModelDocument:
    frame = read_dataset(dataset_path)
    set_context(LogContext(command="train"))
    try:
        trained = train_network(frame, holdout, config)
    finally:
        clear_context()
    doc = to_document(trained, config.seed)
    save_model(doc, model_out)
    return doc


def _inputs(frame: pd.DataFrame, doc: ModelDocument, source: str) -> np.ndarray:
    missing = [c for c in doc.input_columns if c not in frame.columns]
    if missing:
        raise IngestionError(f"Missing input columns in {source}", {"file": source, "missing": missing})
    return frame[doc.input_columns].to_numpy(dtype=float)


def cmd_predict(model_path: str, rows_csv: str, out_csv: Optional[str] = None) -> pd.DataFrame:
    """Anexa (ã, C̃) previstos às linhas de entrada."""
    network, doc = load_model(model_path)
    if not Path(rows_csv).exists():
        raise IngestionError(f"File not found: {rows_csv}", {"file": rows_csv})
    frame = pd.read_csv(rows_csv)
    prediction = network.predict(_inputs(frame, doc, rows_csv))
    out = frame.copy()
    for k, name in enumerate(PREDICTION_COLUMNS):
        out[name] = prediction[:, k]
    if out_csv:
        Path(out_csv).parent.mkdir(parents=True, exist_ok=True)
        out.to_csv(out_csv, index=False, float_format="%.12g")
    return out


def split_frames(frame: pd.DataFrame, doc: ModelDocument) -> Dict[DataSplit, pd.DataFrame]:
    """Reconstrói as partições a partir dos metadados do modelo."""
    keys = pd.Series(row_keys(frame), index=frame.index)
    test_mask = select_holdout(frame, doc.metadata.holdout)
    return {
        DataSplit.TRAIN: frame[keys.isin(doc.metadata.train_rows)],
        DataSplit.VAL: frame[keys.isin(doc.metadata.val_rows)],
        DataSplit.TEST: frame[test_mask],
    }


def cmd_evaluate(model_path: str, dataset_path: str, report_dir: str) -> Dict[DataSplit, RegressionReport]:
    """
    R² e RMSE por saída em treino/validação/teste e CSVs de paridade.

    Partições com menos de duas linhas são omitidas com aviso.
    """
    network, doc = load_model(model_path)
    frame = read_dataset(dataset_path)
    out = Path(report_dir)
    out.mkdir(parents=True, exist_ok=True)

    reports: Dict[DataSplit, RegressionReport] = {}
    rows: List[Dict[str, Any]] = []
    for split, part in split_frames(frame, doc).items():
        if len(part) < 2:
            logger.warning("Split too small to evaluate", extra_data={"split": split.value, "rows": len(part)})
            continue
        prediction = network.predict(_inputs(part, doc, dataset_path))
        report = regression_metrics(prediction, part[TARGET_COLUMNS].to_numpy(dtype=float))
        reports[split] = report
        parity = report.parity.copy()
        parity.insert(0, "case", part["case"].to_numpy())
        parity.insert(1, "step", part["step"].to_numpy())
        parity.to_csv(out / f"parity_{split.value}.csv", index=False, float_format="%.12g")
        for name in TARGET_COLUMNS:
            rows.append({
                "split": split.value, "output": name, "rows": len(part),
                "r2": report.r2[name], "rmse": report.rmse[name],
            })
        logger.info("Split evaluated", extra_data={"split": split.value, "r2": report.r2, "rmse": report.rmse})

    if not reports:
        raise TrainingError("No split large enough to evaluate", {"dataset": dataset_path})
    pd.DataFrame(rows).to_csv(out / REPORT_FILE, index=False, float_format="%.12g")
    return reports


# ============================================================================
# PONTO MATERIAL
# ============================================================================

def cmd_polar(
    out_csv: str,
    preset: str = "pm45_70_30",
    vf: float = 0.5,
    theta: float = 296.0,
    strain: float = 0.01,
    n_directions: int = 72,
    times: Sequence[float] = (0.01, 0.03, 0.1, 0.3, 1.0),
) -> pd.DataFrame:
    """Força motriz da trinca por direção de carregamento durante relaxação."""
    if preset not in ORIENTATION_PRESETS:
        raise ConfigurationError(f"Unknown orientation preset: {preset}", {"available": sorted(ORIENTATION_PRESETS)})
    A = OrientationConfig.model_validate(ORIENTATION_PRESETS[preset].as_config()).tensor()
    directions = np.linspace(0.0, np.pi, n_directions, endpoint=False)
    rows = polar_sweep(strain, directions, times, decompose_families(A, vf), MaterialParams(), theta=theta)
    frame = pd.DataFrame(rows)
    Path(out_csv).parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out_csv, index=False, float_format="%.12g")
    return frame
