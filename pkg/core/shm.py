"""
Monitoramento de Integridade Estrutural (SHM)
CrackSense - Compósitos Autossensíveis

Montagem do conjunto de dados a partir das execuções, normalização z-score,
rede feedforward tanh-tanh-linear, treinamento Levenberg-Marquardt com
early stopping e métricas de regressão.
"""

import fnmatch
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg

from common.exceptions import IngestionError, TrainingError, ValidationError
from common.logging import get_logger
from common.metrics import SimulationMetrics
from common.types import (
    DATASET_COLUMNS,
    DESCRIPTOR_COLUMNS,
    DIAGNOSTIC_COLUMNS,
    HIDDEN_LAYERS,
    N_OUTPUTS,
    RATIO_COLUMNS,
    STD_FLOOR,
    STEP_COLUMNS,
    TARGET_COLUMNS,
    CaseRole,
    InputsMode,
    LeastSquaresModel,
    StopReason,
)
from domain.run_schema import EpochRecord, TrainConfig

logger = get_logger(__name__)


# ============================================================================
# CONJUNTO DE DADOS
# ============================================================================

@dataclass
class RunData:
    """Execução carregada do disco: descritores, passos e diagnósticos."""
    name: str
    role: CaseRole
    descriptors: Dict[str, float]
    steps: pd.DataFrame
    diagnostics: pd.DataFrame
    width: float
    source: str = ""


@dataclass
class ShmRecord:
    case: str
    role: CaseRole
    step: int
    A11: float
    A12: float
    vf: float
    theta: float
    g_ratios: np.ndarray
    a_tilde: float
    C_tilde: float

    def as_row(self) -> Dict[str, object]:
        row = {
            "case": self.case, "role": self.role.value, "step": self.step,
            "A11": self.A11, "A12": self.A12, "vf": self.vf, "theta": self.theta,
            "a_tilde": self.a_tilde, "C_tilde": self.C_tilde,
        }
        row.update(zip(RATIO_COLUMNS, self.g_ratios.tolist()))
        return {k: row[k] for k in DATASET_COLUMNS}


def _require(frame: pd.DataFrame, columns: Sequence[str], source: str) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise IngestionError(f"Missing columns in {source}", {"file": source, "missing": missing})


def assemble_dataset(runs: Iterable[RunData], filter_threshold: float = 1.0) -> List[ShmRecord]:
    """
    Uma linha por passo retido: x_tip/W < filter_threshold.

    O passo 0 entra como linha de referência com ã = 0, C̃ = 1 e razões 1.
    Linhas com valores não finitos são descartadas com aviso.

    Raises:
        IngestionError: Colunas ausentes, nomeando o arquivo
    """
    records: List[ShmRecord] = []
    for run in runs:
        _require(run.steps, STEP_COLUMNS, f"{run.source or run.name}/steps.csv")
        _require(run.diagnostics, DIAGNOSTIC_COLUMNS, f"{run.source or run.name}/diagnostics.csv")
        missing = [k for k in DESCRIPTOR_COLUMNS if k not in run.descriptors]
        if missing:
            raise IngestionError(f"Missing descriptors in {run.source or run.name}/manifest", {"missing": missing})

        merged = run.steps.merge(run.diagnostics[["step", "x_tip_mm"]], on="step", how="left")
        d = run.descriptors
        kept, dropped = 0, 0
        for row in merged.to_dict("records"):
            step = int(row["step"])
            if step == 0:
                ratios = np.ones(len(RATIO_COLUMNS))
                a_tilde, C_tilde = 0.0, 1.0
            else:
                x_tip = row["x_tip_mm"]
                if pd.isna(x_tip) or x_tip / run.width >= filter_threshold:
                    dropped += 1
                    continue
                ratios = np.array([row[c] for c in RATIO_COLUMNS], dtype=float)
                a_tilde, C_tilde = float(row["a_tilde"]), float(row["C_tilde"])
                if not (np.all(np.isfinite(ratios)) and np.isfinite(a_tilde) and np.isfinite(C_tilde)):
                    logger.warning("Dropping non-finite row", extra_data={"case": run.name, "step": step})
                    dropped += 1
                    continue
            records.append(ShmRecord(
                case=run.name, role=run.role, step=step,
                A11=float(d["A11"]), A12=float(d["A12"]), vf=float(d["vf"]), theta=float(d["theta"]),
                g_ratios=ratios, a_tilde=a_tilde, C_tilde=C_tilde,
            ))
            kept += 1
        logger.info("Run ingested", extra_data={"case": run.name, "kept": kept, "dropped": dropped})
    return records


def dataset_frame(records: Sequence[ShmRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.as_row() for r in records], columns=DATASET_COLUMNS)


def input_columns(mode: InputsMode) -> List[str]:
    descriptors = ["A11", "A12", "vf"] + (["theta"] if mode == InputsMode.WITH_TEMPERATURE else [])
    return descriptors + RATIO_COLUMNS


# ============================================================================
# NORMALIZAÇÃO
# ============================================================================

@dataclass
class ZScoreStats:
    mean: np.ndarray
    std: np.ndarray
    provenance: str = "train"

    def invert(self, rows: np.ndarray) -> np.ndarray:
        return np.asarray(rows, dtype=float) * self.std + self.mean


def zscore_fit(rows: np.ndarray, provenance: str = "train") -> ZScoreStats:
    """
    Média e desvio padrão por coluna.

    Raises:
        ValidationError: Conjunto vazio
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise ValidationError("Cannot fit normalization on empty rows")
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)
    constant = std < STD_FLOOR
    if np.any(constant):
        logger.warning(
            "Constant features get floored std",
            extra_data={"columns": np.where(constant)[0].tolist(), "provenance": provenance}
        )
        std = np.where(constant, STD_FLOOR, std)
    return ZScoreStats(mean=mean, std=std, provenance=provenance)


def zscore_apply(stats: ZScoreStats, rows: np.ndarray) -> np.ndarray:
    """Normaliza linhas com as estatísticas de treino (nunca reajustadas)."""
    return (np.asarray(rows, dtype=float) - stats.mean) / stats.std


# ============================================================================
# REDE NEURAL
# ============================================================================

def parameter_count(n_in: int, hidden: Sequence[int] = HIDDEN_LAYERS, n_out: int = N_OUTPUTS) -> int:
    sizes = [n_in, *hidden, n_out]
    return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))


@dataclass
class Network:
    """Perceptron com camadas ocultas tanh e saída linear; pesos com shape (saída, entrada)."""
    layer_sizes: List[int]
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    input_stats: Optional[ZScoreStats] = None
    output_stats: Optional[ZScoreStats] = None

    @property
    def n_in(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_params(self) -> int:
        return sum(W.size + b.size for W, b in zip(self.weights, self.biases))

    @property
    def activations(self) -> List[str]:
        return ["tanh"] * (len(self.weights) - 1) + ["linear"]

    def get_params(self) -> np.ndarray:
        return np.concatenate([p.ravel() for W, b in zip(self.weights, self.biases) for p in (W, b)])

    def set_params(self, params: np.ndarray) -> None:
        params = np.asarray(params, dtype=float)
        if params.size != self.n_params:
            raise ValidationError("Parameter vector size mismatch", {"expected": self.n_params, "got": params.size})
        offset = 0
        for k, (W, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[k] = params[offset:offset + W.size].reshape(W.shape).copy()
            offset += W.size
            self.biases[k] = params[offset:offset + b.size].copy()
            offset += b.size

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.n_in:
            raise ValidationError("Input dimension mismatch", {"expected": self.n_in, "got": x.shape[1]})
        return x

    def _activations(self, x: np.ndarray) -> List[np.ndarray]:
        outputs = [x]
        for k, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = outputs[-1] @ W.T + b
            outputs.append(z if k == len(self.weights) - 1 else np.tanh(z))
        return outputs

    def predict_normalized(self, x: np.ndarray) -> np.ndarray:
        return self._activations(self._check(x))[-1]

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """∂y/∂θ por retropropagação, shape (n·n_out, n_params), linhas amostra-major."""
        x = self._check(x)
        acts = self._activations(x)
        n, n_out = x.shape[0], self.layer_sizes[-1]
        blocks: List[np.ndarray] = []
        # delta[n, o, j] = ∂y_o/∂z_j da camada corrente
        delta = np.broadcast_to(np.eye(n_out), (n, n_out, n_out))
        for k in range(len(self.weights) - 1, -1, -1):
            a_prev = acts[k]
            dW = np.einsum('noj,ni->noji', delta, a_prev).reshape(n, n_out, -1)
            blocks.insert(0, delta.reshape(n, n_out, -1))
            blocks.insert(0, dW)
            if k > 0:
                delta = np.einsum('noj,ji->noi', delta, self.weights[k]) * (1.0 - a_prev ** 2)[:, None, :]
        return np.concatenate(blocks, axis=2).reshape(n * n_out, -1)

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Saídas desnormalizadas a partir de entradas brutas."""
        x = self._check(x)
        xn = zscore_apply(self.input_stats, x) if self.input_stats else x
        yn = self.predict_normalized(xn)
        return self.output_stats.invert(yn) if self.output_stats else yn


def network_init(
    n_in: int,
    seed: int,
    hidden: Sequence[int] = HIDDEN_LAYERS,
    n_out: int = N_OUTPUTS,
) -> Network:
    """Pesos uniformes em ±1/√fan_in, vieses nulos."""
    if n_in < 1:
        raise ValidationError("Network needs at least one input", {"n_in": n_in})
    rng = np.random.default_rng(seed)
    sizes = [n_in, *hidden, n_out]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Network(layer_sizes=sizes, weights=weights, biases=biases)


def forward(network: Network, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(â, Ĉ) desnormalizados."""
    y = network.predict(x)
    return y[:, 0], y[:, 1]


# ============================================================================
# LEVENBERG-MARQUARDT
# ============================================================================

@dataclass
class TrainingHistory:
    epochs: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    stop_reason: StopReason = StopReason.MAX_EPOCHS

    @property
    def epochs_run(self) -> int:
        return len(self.epochs)


class LevenbergMarquardt:
    """
    Levenberg-Marquardt em época completa: (JᵀJ + λI)δ = Jᵀr.

    λ ÷ fator em passo aceito; em passo rejeitado λ × fator e nova tentativa
    na mesma época. λ > lambda_max encerra o treinamento preservando os
    melhores pesos de validação.
    """

    def __init__(self, config: TrainConfig):
        self.config = config

    @staticmethod
    def _mse(model: LeastSquaresModel, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean((y - model.predict_normalized(x)) ** 2))

    def fit(
        self,
        model: LeastSquaresModel,
        x_train: np.ndarray,
        y_train: np.ndarray,
        x_val: Optional[np.ndarray] = None,
        y_val: Optional[np.ndarray] = None,
    ) -> TrainingHistory:
        cfg = self.config
        if x_val is None or len(x_val) == 0:
            x_val, y_val = x_train, y_train

        history = TrainingHistory()
        params = model.get_params()
        train_mse = self._mse(model, x_train, y_train)
        best_val = self._mse(model, x_val, y_val)
        best_params = params.copy()
        lam = cfg.lambda0
        wait = 0

        for epoch in range(1, cfg.max_epochs + 1):
            start = time.perf_counter()
            J = model.jacobian(x_train)
            r = (y_train - model.predict_normalized(x_train)).ravel()
            JtJ = J.T @ J
            g = J.T @ r
            eye = np.eye(JtJ.shape[0])

            rejected = 0
            accepted = False
            while lam <= cfg.lambda_max:
                try:
                    delta = linalg.solve(JtJ + lam * eye, g, assume_a='pos')
                except linalg.LinAlgError:
                    lam *= cfg.lambda_factor
                    rejected += 1
                    continue
                model.set_params(params + delta)
                candidate = self._mse(model, x_train, y_train)
                if candidate < train_mse:
                    params = params + delta
                    train_mse = candidate
                    lam /= cfg.lambda_factor
                    accepted = True
                    break
                model.set_params(params)
                lam *= cfg.lambda_factor
                rejected += 1

            SimulationMetrics.record_lm_epoch(lam, rejected, time.perf_counter() - start)
            if not accepted:
                model.set_params(params)
                history.stop_reason = StopReason.DAMPING_OVERFLOW
                logger.warning("LM damping overflow; stopping", extra_data={"epoch": epoch, "lambda": lam})
                break

            val_mse = self._mse(model, x_val, y_val)
            history.epochs.append(EpochRecord(epoch=epoch, train_mse=train_mse, val_mse=val_mse, damping=lam))
            if val_mse < best_val:
                best_val, best_params, history.best_epoch, wait = val_mse, params.copy(), epoch, 0
            else:
                wait += 1
            if wait >= cfg.patience:
                history.stop_reason = StopReason.EARLY_STOPPING
                break

        model.set_params(best_params)
        logger.info(
            "LM training finished",
            extra_data={
                "epochs": history.epochs_run,
                "best_epoch": history.best_epoch,
                "stop_reason": history.stop_reason.value,
                "best_val_mse": best_val,
            }
        )
        return history


def lm_train(
    network: LeastSquaresModel,
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_val: np.ndarray,
    y_val: np.ndarray,
    config: TrainConfig,
) -> Tuple[LeastSquaresModel, TrainingHistory]:
    """Treina in-place em dados já normalizados; retorna a rede com os pesos da melhor época."""
    history = LevenbergMarquardt(config).fit(network, x_train, y_train, x_val, y_val)
    return network, history


def split_train_val(n: int, val_fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Particiona índices com embaralhamento semeado; ao menos uma linha em cada lado se n ≥ 2."""
    order = np.random.default_rng(seed).permutation(n)
    n_val = int(round(n * val_fraction))
    if n >= 2:
        n_val = min(max(n_val, 1), n - 1)
    else:
        n_val = 0
    return np.sort(order[n_val:]), np.sort(order[:n_val])


@dataclass
class TrainedModel:
    network: Network
    history: TrainingHistory
    inputs_mode: InputsMode
    holdout: List[str]
    train_keys: List[str]
    val_keys: List[str]


def row_keys(frame: pd.DataFrame) -> List[str]:
    return [f"{c}:{int(s)}" for c, s in zip(frame["case"], frame["step"])]


def select_holdout(frame: pd.DataFrame, holdout: Sequence[str]) -> np.ndarray:
    """
    Máscara das linhas excluídas do ajuste: papel Test ou caso casando algum padrão.

    Raises:
        ValidationError: Padrão que não casa nenhum caso
    """
    cases = sorted(frame["case"].unique())
    mask = (frame["role"] == CaseRole.TEST.value).to_numpy()
    for tag in holdout:
        matched = [c for c in cases if fnmatch.fnmatchcase(c, tag)]
        if not matched:
            raise ValidationError(f"Holdout tag matches no run: {tag}", {"tag": tag})
        mask |= frame["case"].isin(matched).to_numpy()
    return mask


def train_network(frame: pd.DataFrame, holdout: Sequence[str], config: TrainConfig) -> TrainedModel:
    """
    Treina a rede nas linhas não reservadas.

    Estatísticas de normalização vêm apenas da partição de treino.

    Raises:
        TrainingError: Nenhuma linha disponível para treino
    """
    test_mask = select_holdout(frame, holdout)
    pool = frame.loc[~test_mask].reset_index(drop=True)
    if len(pool) < 2:
        raise TrainingError("Not enough training rows", {"rows": len(pool)})

    columns = input_columns(config.inputs_mode)
    train_idx, val_idx = split_train_val(len(pool), config.val_fraction, config.seed)
    train, val = pool.iloc[train_idx], pool.iloc[val_idx]

    x_stats = zscore_fit(train[columns].to_numpy(), provenance="train")
    y_stats = zscore_fit(train[TARGET_COLUMNS].to_numpy(), provenance="train")

    network = network_init(len(columns), config.seed, hidden=config.hidden_layers)
    network.input_stats, network.output_stats = x_stats, y_stats

    _, history = lm_train(
        network,
        zscore_apply(x_stats, train[columns].to_numpy()), zscore_apply(y_stats, train[TARGET_COLUMNS].to_numpy()),
        zscore_apply(x_stats, val[columns].to_numpy()), zscore_apply(y_stats, val[TARGET_COLUMNS].to_numpy()),
        config,
    )
    return TrainedModel(
        network=network,
        history=history,
        inputs_mode=config.inputs_mode,
        holdout=list(holdout),
        train_keys=row_keys(train),
        val_keys=row_keys(val),
    )


# ============================================================================
# MÉTRICAS
# ============================================================================

@dataclass
class RegressionReport:
    r2: Dict[str, float]
    rmse: Dict[str, float]
    parity: pd.DataFrame


def regression_metrics(pred: np.ndarray, truth: np.ndarray, names: Sequence[str] = TARGET_COLUMNS) -> RegressionReport:
    """
    R² e RMSE por saída e tabela de paridade.

    R² é NaN quando a variância da verdade é nula.

    Raises:
        ValidationError: Tamanhos diferentes ou menos de duas linhas
    """
    pred = np.atleast_2d(np.asarray(pred, dtype=float))
    truth = np.atleast_2d(np.asarray(truth, dtype=float))
    if pred.shape != truth.shape or pred.shape[0] < 2:
        raise ValidationError("Prediction and truth must match with at least two rows",
                              {"pred": pred.shape, "truth": truth.shape})
    r2, rmse = {}, {}
    parity = {}
    for k, name in enumerate(names):
        residual = truth[:, k] - pred[:, k]
        ss_res = float(np.sum(residual ** 2))
        ss_tot = float(np.sum((truth[:, k] - truth[:, k].mean()) ** 2))
        if ss_tot == 0.0:
            logger.warning("Zero variance in truth; R² undefined", extra_data={"output": name})
            r2[name] = float("nan")
        else:
            r2[name] = 1.0 - ss_res / ss_tot
        rmse[name] = float(np.sqrt(np.mean(residual ** 2)))
        parity[f"{name}_true"] = truth[:, k]
        parity[f"{name}_pred"] = pred[:, k]
    return RegressionReport(r2=r2, rmse=rmse, parity=pd.DataFrame(parity))
