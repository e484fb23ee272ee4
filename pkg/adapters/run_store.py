"""
Run Store
CrackSense - Compósitos Autossensíveis

Persistência de execuções: cada diretório é autodescritivo (manifesto com a
configuração resolvida e os descritores) e pode ser reingerido sem o YAML
original.

    <run>/manifest.yaml     configuração, papel, descritores, status
    <run>/steps.csv         STEP_COLUMNS, um registro por passo
    <run>/diagnostics.csv   DIAGNOSTIC_COLUMNS
    <run>/metrics.json      contadores e timers da execução
    <run>/snapshots/        campos nodais em texto puro
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import yaml

from common.exceptions import IngestionError
from common.logging import get_logger
from common.metrics import metrics
from common.types import (
    DATASET_COLUMNS,
    DIAGNOSTIC_COLUMNS,
    DIAGNOSTICS_FILE,
    MANIFEST_FILE,
    METRICS_FILE,
    SNAPSHOT_DIR,
    STEP_COLUMNS,
    STEPS_FILE,
    CaseRole,
)
from core.mesh import Mesh
from core.shm import RunData
from core.simulation import SimulationResult, Snapshot
from core.solver import StepDiagnostics, StepRecord
from domain.run_schema import SimConfig

logger = get_logger(__name__)

FLOAT_FORMAT = "%.12g"


class RunWriter:
    """
    Escritor único de um diretório de execução.

    Os registros de passo são anexados ao CSV à medida que convergem, de modo
    que uma execução interrompida ainda deixa dados reingeríveis.
    """

    def __init__(self, run_dir: str, config: SimConfig, role: CaseRole = CaseRole.TRAINING) -> None:
        self._dir = Path(run_dir)
        self._config = config
        self._role = role
        self._dir.mkdir(parents=True, exist_ok=True)
        for name in (STEPS_FILE, DIAGNOSTICS_FILE):
            (self._dir / name).unlink(missing_ok=True)
        self._steps_written = 0
        self.write_manifest(status="running")
        logger.info("RunWriter initialized", extra_data={"dir": str(self._dir), "role": role.value})

    @property
    def directory(self) -> Path:
        return self._dir

    def _append(self, name: str, row: Dict[str, Any], columns: List[str]) -> None:
        path = self._dir / name
        pd.DataFrame([row], columns=columns).to_csv(
            path, mode="a", header=not path.exists(), index=False, float_format=FLOAT_FORMAT
        )

    def append_step(self, record: StepRecord, diagnostics: StepDiagnostics) -> None:
        self._append(STEPS_FILE, record.as_row(), STEP_COLUMNS)
        self._append(DIAGNOSTICS_FILE, diagnostics.as_row(), DIAGNOSTIC_COLUMNS)
        self._steps_written += 1

    def write_manifest(self, status: str, extra: Optional[Dict[str, Any]] = None) -> None:
        manifest = {
            "name": self._config.name,
            "role": self._role.value,
            "status": status,
            "descriptors": self._config.descriptors(),
            "width": self._config.geometry.width,
            "config": self._config.model_dump(mode="json"),
        }
        manifest.update(extra or {})
        with open(self._dir / MANIFEST_FILE, "w", encoding="utf-8") as f:
            yaml.safe_dump(manifest, f, default_flow_style=False, sort_keys=False)

    def finalize(self, result: SimulationResult) -> None:
        for snapshot in result.snapshots:
            write_snapshot(self._dir / SNAPSHOT_DIR, result.mesh, snapshot)
        self.write_manifest(
            status="completed",
            extra={
                "termination": result.termination,
                "peak_force_N": float(result.peak_force),
                "steps": self._steps_written,
            },
        )
        self.write_metrics()
        logger.info("Run persisted", extra_data={"dir": str(self._dir), "steps": self._steps_written})

    def fail(self, error: Exception) -> None:
        self.write_manifest(status="failed", extra={"error": str(error), "steps": self._steps_written})
        self.write_metrics()

    def write_metrics(self) -> None:
        with open(self._dir / METRICS_FILE, "w", encoding="utf-8") as f:
            json.dump(metrics.get_all_metrics(), f, indent=2, default=float)


def write_snapshot(directory: Path, mesh: Mesh, snapshot: Snapshot) -> Path:
    """
    Dump em texto: tabela de nós com u, φ, φ_e e tabela de elementos.

    O nome do arquivo codifica o passo e o deslocamento do topo.
    """
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"step_{snapshot.step:05d}_u{snapshot.disp_mm:.6f}.txt"
    u = snapshot.u.reshape(-1, 2)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# step {snapshot.step} disp_mm {snapshot.disp_mm:.12g} G_15 {snapshot.G_15:.12g}\n")
        f.write(f"NODES {mesh.n_nodes}\n")
        f.write("# id x y ux uy phi phi_e\n")
        for i in range(mesh.n_nodes):
            x, y = mesh.nodes[i]
            f.write(
                f"{i} {x:.12g} {y:.12g} {u[i, 0]:.12g} {u[i, 1]:.12g} "
                f"{snapshot.phi[i]:.12g} {snapshot.phi_e[i]:.12g}\n"
            )
        f.write(f"ELEMENTS {mesh.n_elements}\n")
        f.write("# id n1 n2 n3 n4\n")
        for e, conn in enumerate(mesh.elements):
            f.write(f"{e} {' '.join(str(int(n)) for n in conn)}\n")
    return path


def read_snapshot(path: str) -> Dict[str, np.ndarray]:
    """Lê um dump de snapshot: nodes, elements, u, phi, phi_e."""
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln for ln in f.read().splitlines() if ln and not ln.startswith("#")]
    n_nodes = int(lines[0].split()[1])
    node_rows = np.array([ln.split() for ln in lines[1:1 + n_nodes]], dtype=float)
    n_elem = int(lines[1 + n_nodes].split()[1])
    elem_rows = np.array([ln.split() for ln in lines[2 + n_nodes:2 + n_nodes + n_elem]], dtype=int)
    return {
        "nodes": node_rows[:, 1:3],
        "u": node_rows[:, 3:5],
        "phi": node_rows[:, 5],
        "phi_e": node_rows[:, 6],
        "elements": elem_rows[:, 1:],
    }


# ============================================================================
# LEITURA
# ============================================================================

def read_manifest(run_dir: Path) -> Dict[str, Any]:
    path = Path(run_dir) / MANIFEST_FILE
    if not path.exists():
        raise IngestionError(f"Manifest not found: {path}", {"file": str(path)})
    try:
        with open(path, "r", encoding="utf-8") as f:
            manifest = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise IngestionError(f"Invalid manifest: {path}", {"error": str(e)}) from e
    for key in ("name", "role", "descriptors", "width"):
        if key not in manifest:
            raise IngestionError(f"Manifest missing key '{key}': {path}", {"file": str(path)})
    return manifest


def _read_csv(path: Path, columns: List[str]) -> pd.DataFrame:
    if not path.exists():
        raise IngestionError(f"File not found: {path}", {"file": str(path)})
    frame = pd.read_csv(path)
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise IngestionError(f"Missing columns in {path}", {"file": str(path), "missing": missing})
    return frame


def load_run(run_dir: str) -> RunData:
    """
    Reconstrói uma execução a partir do disco.

    Raises:
        IngestionError: Arquivo ausente ou colunas faltando (nomeando o arquivo)
    """
    run_dir = Path(run_dir)
    manifest = read_manifest(run_dir)
    return RunData(
        name=manifest["name"],
        role=CaseRole(manifest["role"]),
        descriptors={k: float(v) for k, v in manifest["descriptors"].items()},
        steps=_read_csv(run_dir / STEPS_FILE, STEP_COLUMNS),
        diagnostics=_read_csv(run_dir / DIAGNOSTICS_FILE, DIAGNOSTIC_COLUMNS),
        width=float(manifest["width"]),
        source=str(run_dir),
    )


def discover_runs(root: str) -> List[Path]:
    """Diretórios com manifesto sob root, em ordem lexicográfica."""
    root_path = Path(root)
    if not root_path.is_dir():
        raise IngestionError(f"Run root not found: {root}", {"root": root})
    return sorted(p.parent for p in root_path.rglob(MANIFEST_FILE))


def write_dataset(frame: pd.DataFrame, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    frame[DATASET_COLUMNS].to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_dataset(path: str) -> pd.DataFrame:
    return _read_csv(Path(path), DATASET_COLUMNS)
