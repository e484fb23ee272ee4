"""
Exceções Customizadas
CrackSense - Compósitos Autossensíveis

Define hierarquia de exceções para melhor tratamento de erros.
"""


class CrackSenseError(Exception):
    """Exceção base para todas as exceções do CrackSense."""

    def __init__(self, message: str, details: dict = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if self.details:
            details_str = ", ".join(f"{k}={v}" for k, v in self.details.items())
            return f"{self.message} ({details_str})"
        return self.message


class ConfigurationError(CrackSenseError):
    """Erro de configuração (arquivo YAML, variáveis de ambiente, schema)."""
    pass


class DomainError(CrackSenseError):
    """Argumento fora do domínio matemático de uma operação."""
    pass


class IntegrationError(CrackSenseError):
    """Iteração de ponto fixo das variáveis internas não convergiu."""

    def __init__(self, message: str, residual: float, details: dict = None):
        details = dict(details or {})
        details.setdefault("residual", residual)
        super().__init__(message, details)
        self.residual = residual


class MeshError(CrackSenseError):
    """Malha degenerada ou inconsistente."""
    pass


class ConvergenceError(CrackSenseError):
    """Newton-Raphson ou iteração escalonada sem convergência."""
    pass


class SimulationError(CrackSenseError):
    """Falha irrecuperável durante uma simulação."""
    pass


class SolverError(CrackSenseError):
    """Sistema linear singular ou mal condicionado."""
    pass


class IngestionError(CrackSenseError):
    """Erro ao ler artefatos de execução (CSV, manifesto, modelo)."""
    pass


class TrainingError(CrackSenseError):
    """Erro durante o treinamento da rede neural."""
    pass


class ValidationError(CrackSenseError):
    """Erro de validação de dados."""
    pass
