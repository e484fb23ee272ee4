"""
Testes para Logging Estruturado
CrackSense - Compósitos Autossensíveis
"""

import io
import json
import logging

import numpy as np
import pytest

from common.logging import (
    JSONFormatter,
    LogContext,
    PrettyFormatter,
    StructuredLogger,
    clear_context,
    get_logger,
    log_execution_time,
    set_context,
)


@pytest.fixture
def capture():
    """Logger isolado com saída em memória; retorna (logger, stream, handler)."""
    logger = get_logger("cracksense.tests.logging")
    stream = io.StringIO()
    handler = logging.StreamHandler(stream)
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False
    yield logger, stream, handler
    logger.removeHandler(handler)
    clear_context()


def test_logger_class():
    """Testa que get_logger devolve StructuredLogger."""
    assert isinstance(get_logger("cracksense.tests.class"), StructuredLogger)


def test_json_line_with_context(capture):
    """Testa linha JSON com contexto e dados numpy."""
    logger, stream, handler = capture
    handler.setFormatter(JSONFormatter())
    set_context(LogContext(case="0_60_50_50_vf30_T298", role="Test", command="simulate"))

    logger.info("Reducing load increment", extra_data={"du": np.float64(2.5e-4), "level": np.int64(1),
                                                       "ratios": np.array([1.0, 0.5])})

    entry = json.loads(stream.getvalue())
    assert entry["message"] == "Reducing load increment"
    assert entry["level"] == "INFO"
    assert entry["context"] == {"case": "0_60_50_50_vf30_T298", "role": "Test", "command": "simulate"}
    assert entry["extra_data"] == {"du": 2.5e-4, "level": 1, "ratios": [1.0, 0.5]}


def test_pretty_compacts_floats(capture):
    """Testa floats com seis algarismos significativos no console."""
    logger, stream, handler = capture
    handler.setFormatter(PrettyFormatter())

    logger.warning("Phase field left [0, 1] before projection", extra_data={"max": 1.0000123456789})

    line = stream.getvalue()
    assert "max=1.00001" in line
    assert "1.0000123456789" not in line


def test_context_omits_empty_fields():
    """Testa contexto apenas com campos definidos."""
    assert LogContext(command="train").to_dict() == {"command": "train"}


def test_log_execution_time(capture):
    """Testa registro de duração em sucesso e em falha."""
    logger, stream, handler = capture
    handler.setFormatter(JSONFormatter())

    @log_execution_time(logger)
    def work(fail: bool):
        if fail:
            raise RuntimeError("diverged")
        return 42

    assert work(False) == 42
    with pytest.raises(RuntimeError):
        work(True)

    lines = [json.loads(line) for line in stream.getvalue().splitlines()]
    assert [line["level"] for line in lines] == ["INFO", "ERROR"]
    assert lines[0]["extra_data"]["duration_s"] >= 0.0
    assert lines[1]["extra_data"]["error"] == "diverged"
