"""
Model Store
CrackSense - Compósitos Autossensíveis

Serialização do modelo treinado em JSON autodescritivo (camadas, estatísticas
de normalização e metadados de treinamento).
"""

from pathlib import Path
from typing import Tuple

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from common.exceptions import IngestionError
from common.logging import get_logger
from common.types import TARGET_COLUMNS
from core.shm import Network, TrainedModel, ZScoreStats, input_columns
from domain.run_schema import (
    LayerDocument,
    ModelDocument,
    NormalizationDocument,
    TrainingMetadata,
)

logger = get_logger(__name__)


def _stats_document(stats: ZScoreStats) -> NormalizationDocument:
    return NormalizationDocument(mean=stats.mean.tolist(), std=stats.std.tolist(), provenance=stats.provenance)


def _stats_from(doc: NormalizationDocument) -> ZScoreStats:
    return ZScoreStats(mean=np.asarray(doc.mean, dtype=float), std=np.asarray(doc.std, dtype=float),
                       provenance=doc.provenance)


def to_document(trained: TrainedModel, seed: int) -> ModelDocument:
    network = trained.network
    history = trained.history
    return ModelDocument(
        layer_sizes=list(network.layer_sizes),
        inputs_mode=trained.inputs_mode,
        input_columns=input_columns(trained.inputs_mode),
        output_columns=list(TARGET_COLUMNS),
        layers=[
            LayerDocument(weights=W.tolist(), biases=b.tolist(), activation=act)
            for W, b, act in zip(network.weights, network.biases, network.activations)
        ],
        input_stats=_stats_document(network.input_stats),
        output_stats=_stats_document(network.output_stats),
        metadata=TrainingMetadata(
            seed=seed,
            epochs_run=history.epochs_run,
            best_epoch=history.best_epoch,
            stop_reason=history.stop_reason,
            holdout=trained.holdout,
            train_rows=trained.train_keys,
            val_rows=trained.val_keys,
            history=history.epochs,
        ),
    )


def from_document(doc: ModelDocument) -> Network:
    return Network(
        layer_sizes=list(doc.layer_sizes),
        weights=[np.asarray(layer.weights, dtype=float) for layer in doc.layers],
        biases=[np.asarray(layer.biases, dtype=float) for layer in doc.layers],
        input_stats=_stats_from(doc.input_stats),
        output_stats=_stats_from(doc.output_stats),
    )


def save_model(doc: ModelDocument, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(doc.model_dump_json(indent=2), encoding="utf-8")
    logger.info("Model saved", extra_data={"path": path, "layers": doc.layer_sizes})


def load_model(path: str) -> Tuple[Network, ModelDocument]:
    """
    Raises:
        IngestionError: Arquivo ausente ou documento inválido
    """
    file_path = Path(path)
    if not file_path.exists():
        raise IngestionError(f"Model file not found: {path}", {"file": path})
    try:
        doc = ModelDocument.model_validate_json(file_path.read_text(encoding="utf-8"))
    except PydanticValidationError as e:
        raise IngestionError(f"Invalid model document: {path}", {"errors": len(e.errors())}) from e
    return from_document(doc), doc
