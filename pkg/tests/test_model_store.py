"""
Testes para Model Store
CrackSense - Compósitos Autossensíveis
"""

import json

import numpy as np
import pandas as pd
import pytest

from adapters.model_store import load_model, save_model, to_document
from common.exceptions import IngestionError
from common.types import DATASET_COLUMNS, RATIO_COLUMNS, CaseRole
from core.shm import input_columns, train_network
from domain.run_schema import TrainConfig


def _frame(seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for case, role in (("a", CaseRole.TRAINING), ("b", CaseRole.TRAINING), ("c", CaseRole.TEST)):
        for step in range(8):
            ratios = rng.uniform(0.5, 1.0, len(RATIO_COLUMNS))
            row = {"case": case, "role": role.value, "step": step, "A11": 0.5, "A12": 0.1,
                   "vf": 0.3, "theta": 298.0, "a_tilde": 1.0 - ratios[0], "C_tilde": 1.0 + ratios[1]}
            row.update(zip(RATIO_COLUMNS, ratios))
            rows.append(row)
    return pd.DataFrame(rows, columns=DATASET_COLUMNS)


@pytest.fixture
def trained():
    config = TrainConfig(max_epochs=4, patience=2, seed=13)
    return train_network(_frame(), ["b"], config), config


def test_round_trip_predictions_identical(trained, tmp_path):
    """Testa previsões idênticas após salvar e recarregar."""
    model, config = trained
    doc = to_document(model, config.seed)
    path = tmp_path / "models" / "ann.json"
    save_model(doc, str(path))

    network, loaded = load_model(str(path))
    x = _frame(seed=1)[input_columns(config.inputs_mode)].to_numpy()
    np.testing.assert_array_equal(network.predict(x), model.network.predict(x))
    assert loaded.metadata.holdout == ["b"]
    assert loaded.metadata.seed == 13


def test_document_contents(trained):
    """Testa documento autodescritivo."""
    model, config = trained
    doc = to_document(model, config.seed)

    assert doc.layer_sizes == [32, 16, 16, 2]
    assert doc.input_columns == input_columns(config.inputs_mode)
    assert [layer.activation for layer in doc.layers] == ["tanh", "tanh", "linear"]
    assert doc.input_stats.provenance == "train"
    assert doc.metadata.epochs_run == len(doc.metadata.history)
    assert not any(k.startswith(("b:", "c:")) for k in doc.metadata.train_rows + doc.metadata.val_rows)


def test_load_missing_file(tmp_path):
    """Testa arquivo de modelo inexistente."""
    with pytest.raises(IngestionError):
        load_model(str(tmp_path / "nope.json"))


def test_load_invalid_document(trained, tmp_path):
    """Testa documento com camadas inconsistentes."""
    model, config = trained
    data = json.loads(to_document(model, config.seed).model_dump_json())
    data["layer_sizes"] = [31, 16, 16, 2]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data), encoding="utf-8")

    with pytest.raises(IngestionError):
        load_model(str(path))
