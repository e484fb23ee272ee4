"""
Logging Estruturado
CrackSense - Compósitos Autossensíveis

Logs estruturados (JSON ou console colorido) com o contexto do caso em
execução. Mensagens em inglês; campos numéricos vão em `extra_data`.
"""

import json
import logging
import sys
import time
from contextvars import ContextVar
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from functools import wraps
from typing import Any, Dict, Optional

import numpy as np

# Caso/comando corrente; cada processo da varredura tem o seu
run_context: ContextVar[Dict[str, Any]] = ContextVar("run_context", default={})


@dataclass
class LogContext:
    """Identifica a execução a que uma linha de log pertence."""
    run_id: Optional[str] = None
    case: Optional[str] = None
    role: Optional[str] = None
    command: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _jsonable(value: Any) -> Any:
    """Converte escalares e arrays numpy em tipos nativos."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


def _compact(data: Dict[str, Any]) -> str:
    parts = []
    for key, value in data.items():
        if isinstance(value, (float, np.floating)):
            parts.append(f"{key}={float(value):.6g}")
        else:
            parts.append(f"{key}={value}")
    return " ".join(parts)


class JSONFormatter(logging.Formatter):
    """Uma linha JSON por registro."""

    def format(self, record: logging.LogRecord) -> str:
        entry = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "where": f"{record.module}:{record.lineno}",
        }
        ctx = run_context.get()
        if ctx:
            entry["context"] = ctx
        extra_data = getattr(record, "extra_data", None)
        if extra_data:
            entry["extra_data"] = extra_data
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry, ensure_ascii=False, default=_jsonable)


class PrettyFormatter(logging.Formatter):
    """Console colorido; floats em 6 algarismos significativos."""

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[35m",
    }
    RESET = "\033[0m"

    def format(self, record: logging.LogRecord) -> str:
        color = self.COLORS.get(record.levelname, self.RESET)
        stamp = datetime.fromtimestamp(record.created).strftime("%H:%M:%S")
        line = f"{color}{stamp} {record.levelname:8}{self.RESET} {record.name} | {record.getMessage()}"

        extra_data = getattr(record, "extra_data", None)
        if extra_data:
            line += f" | {_compact(extra_data)}"
        ctx = run_context.get()
        if ctx:
            line += f" [{_compact(ctx)}]"
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        return line


class StructuredLogger(logging.Logger):
    """Logger que aceita `extra_data={...}` em qualquer nível."""

    def _log(self, level, msg, args, exc_info=None, extra=None, stack_info=False,
             stacklevel=1, extra_data: Optional[Dict[str, Any]] = None) -> None:
        extra = dict(extra or {})
        extra["extra_data"] = extra_data or {}
        super()._log(level, msg, args, exc_info=exc_info, extra=extra,
                     stack_info=stack_info, stacklevel=stacklevel + 1)


logging.setLoggerClass(StructuredLogger)


def setup_logging(
    level: str = "INFO",
    json_format: bool = False,
    log_file: Optional[str] = None
) -> None:
    """
    Configura o logger raiz.

    Args:
        level: Nível de log (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        json_format: JSON no console em vez do formato colorido
        log_file: Arquivo opcional, sempre em JSON
    """
    root = logging.getLogger()
    root.setLevel(level.upper())
    root.handlers.clear()

    # stderr mantém stdout livre para saídas tabulares
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(JSONFormatter() if json_format else PrettyFormatter())
    root.addHandler(console)

    if log_file:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(JSONFormatter())
        root.addHandler(file_handler)

    # RuntimeWarnings do numpy (overflow, divisão por zero) entram no log
    logging.captureWarnings(True)


def get_logger(name: str) -> StructuredLogger:
    return logging.getLogger(name)  # type: ignore


def set_context(context: LogContext) -> None:
    run_context.set(context.to_dict())


def clear_context() -> None:
    run_context.set({})


def log_execution_time(logger: Optional[StructuredLogger] = None):
    """Decorator que registra a duração (s) de operações longas."""
    def decorator(func):
        log = logger or get_logger(func.__module__)

        @wraps(func)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                log.error(
                    f"{func.__name__} failed",
                    extra_data={"duration_s": time.perf_counter() - start, "error": str(e)}
                )
                raise
            log.info(f"{func.__name__} finished", extra_data={"duration_s": time.perf_counter() - start})
            return result

        return wrapper

    return decorator
