"""
Sistema de Métricas
CrackSense - Compósitos Autossensíveis

Contadores, gauges e distribuições de uma execução: iterações de Newton e
escalonadas, reduções de carga, solves EIT e épocas do Levenberg-Marquardt.
Cada execução zera o coletor e grava o resultado em metrics.json.
"""

import time
from collections import defaultdict
from contextlib import contextmanager
from datetime import datetime, timezone
from functools import wraps
from threading import Lock
from typing import Any, Callable, Dict, List, Optional

import numpy as np


def _series_key(labels: Optional[Dict[str, str]]) -> str:
    if not labels:
        return ""
    return ",".join(f"{k}={labels[k]}" for k in sorted(labels))


def summarize(values: List[float]) -> Dict[str, float]:
    """Resumo de uma série de observações (vazia → contagem zero)."""
    if not values:
        return {"count": 0, "min": 0.0, "max": 0.0, "avg": 0.0, "sum": 0.0}
    arr = np.asarray(values, dtype=float)
    return {
        "count": int(arr.size),
        "min": float(arr.min()),
        "max": float(arr.max()),
        "avg": float(arr.mean()),
        "sum": float(arr.sum()),
        "p50": float(np.percentile(arr, 50)),
        "p95": float(np.percentile(arr, 95)),
    }


class MetricsCollector:
    """
    Coletor de métricas singleton, seguro entre threads.

    - counters: totais acumulados, opcionalmente por rótulos (ex.: nível de redução)
    - gauges: último valor observado (φ_max, amortecimento do LM)
    - distributions: observações brutas (iterações escalonadas por passo)
    - timers: durações em segundos
    """

    _instance: Optional["MetricsCollector"] = None
    _instance_lock = Lock()

    def __new__(cls) -> "MetricsCollector":
        with cls._instance_lock:
            if cls._instance is None:
                instance = super().__new__(cls)
                instance._lock = Lock()
                instance._clear()
                cls._instance = instance
        return cls._instance

    def _clear(self) -> None:
        self._counters: Dict[str, Dict[str, float]] = defaultdict(lambda: defaultdict(float))
        self._gauges: Dict[str, float] = {}
        self._distributions: Dict[str, List[float]] = defaultdict(list)
        self._timers: Dict[str, List[float]] = defaultdict(list)

    # ========================
    # REGISTRO
    # ========================

    def increment(self, name: str, value: float = 1.0, labels: Optional[Dict[str, str]] = None) -> None:
        with self._lock:
            self._counters[name][_series_key(labels)] += value

    def set_gauge(self, name: str, value: float) -> None:
        with self._lock:
            self._gauges[name] = float(value)

    def observe(self, name: str, value: float) -> None:
        with self._lock:
            self._distributions[name].append(float(value))

    def record_time(self, name: str, duration_seconds: float) -> None:
        with self._lock:
            self._timers[name].append(duration_seconds)

    @contextmanager
    def timer(self, name: str):
        """Mede o bloco e registra a duração mesmo quando ele falha."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.record_time(name, time.perf_counter() - start)

    # ========================
    # CONSULTA
    # ========================

    def get_counter(self, name: str, labels: Optional[Dict[str, str]] = None) -> float:
        return self._counters[name][_series_key(labels)] if name in self._counters else 0.0

    def get_gauge(self, name: str) -> Optional[float]:
        return self._gauges.get(name)

    def get_distribution(self, name: str) -> Dict[str, float]:
        return summarize(self._distributions.get(name, []))

    def get_timer_stats(self, name: str) -> Dict[str, float]:
        return summarize(self._timers.get(name, []))

    def get_all_metrics(self) -> Dict[str, Any]:
        """Exporta tudo em um dicionário serializável em JSON."""
        with self._lock:
            return {
                "timestamp": datetime.now(timezone.utc).isoformat(),
                "counters": {name: dict(series) for name, series in self._counters.items()},
                "gauges": dict(self._gauges),
                "distributions": {name: summarize(v) for name, v in self._distributions.items()},
                "timers": {name: summarize(v) for name, v in self._timers.items()},
            }

    def reset(self) -> None:
        with self._lock:
            self._clear()


# Instância global
metrics = MetricsCollector()


# ========================
# MÉTRICAS DO SIMULADOR
# ========================

class SimulationMetrics:
    """Nomes de métricas e atalhos de registro do simulador e do treinamento."""

    # Counters
    STEPS_CONVERGED = "cracksense_steps_converged_total"
    LOAD_REDUCTIONS = "cracksense_load_reductions_total"
    NEWTON_ITERATIONS = "cracksense_newton_iterations_total"
    INTERNAL_ITERATIONS = "cracksense_internal_iterations_total"
    LOCAL_NEWTON_ITERATIONS = "cracksense_local_newton_iterations_total"
    INTERNAL_SUBDIVISIONS = "cracksense_internal_subdivisions_total"
    TANGENT_BUILDS = "cracksense_tangent_builds_total"
    EIT_SOLVES = "cracksense_eit_solves_total"
    RUNS_FAILED = "cracksense_runs_failed_total"
    LM_REJECTED = "cracksense_lm_rejected_steps_total"

    # Gauges
    PHI_MAX = "cracksense_phi_max"
    LM_DAMPING = "cracksense_lm_damping"

    # Distribuições e tempos
    STAGGER_ITERATIONS = "cracksense_stagger_iterations"
    STEP_DURATION = "cracksense_step_duration_seconds"
    EIT_DURATION = "cracksense_eit_sweep_seconds"
    EPOCH_DURATION = "cracksense_lm_epoch_seconds"

    @staticmethod
    def record_step(stagger_iterations: int, newton_iterations: int, phi_max: float) -> None:
        metrics.increment(SimulationMetrics.STEPS_CONVERGED)
        metrics.increment(SimulationMetrics.NEWTON_ITERATIONS, value=newton_iterations)
        metrics.observe(SimulationMetrics.STAGGER_ITERATIONS, stagger_iterations)
        metrics.set_gauge(SimulationMetrics.PHI_MAX, phi_max)

    @staticmethod
    def record_reduction(level: int) -> None:
        metrics.increment(SimulationMetrics.LOAD_REDUCTIONS, labels={"level": str(level)})

    @staticmethod
    def record_lm_epoch(damping: float, rejected: int, duration_seconds: float) -> None:
        metrics.set_gauge(SimulationMetrics.LM_DAMPING, damping)
        if rejected:
            metrics.increment(SimulationMetrics.LM_REJECTED, value=rejected)
        metrics.record_time(SimulationMetrics.EPOCH_DURATION, duration_seconds)


def track_metrics(metric_name: str) -> Callable:
    """
    Decorator que cronometra a função e conta sucessos e falhas.

    Registra `metric_name` (timer), `{metric_name}_success_total` e
    `{metric_name}_error_total`.
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            with metrics.timer(metric_name):
                try:
                    result = func(*args, **kwargs)
                except Exception:
                    metrics.increment(f"{metric_name}_error_total")
                    raise
            metrics.increment(f"{metric_name}_success_total")
            return result

        return wrapper

    return decorator
