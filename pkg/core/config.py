"""
Configuration
CrackSense - Compósitos Autossensíveis

Configuração de ambiente centralizada (logging, paralelismo, semente).
Os parâmetros físicos de cada execução vêm dos arquivos YAML.
"""

import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

from common.exceptions import ConfigurationError
from common.types import DEFAULT_SEED

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class Config:
    """
    Configuração da aplicação.

    Carrega configurações de variáveis de ambiente e fornece valores padrão.
    """

    # Logging
    log_level: str = "INFO"
    log_json: bool = False
    log_file: Optional[str] = None

    # Execução
    threads: int = 1
    seed: int = DEFAULT_SEED
    output_dir: str = "runs"

    @classmethod
    def from_env(cls, env_file: Optional[str] = None) -> "Config":
        """
        Cria configuração a partir de variáveis de ambiente.

        Args:
            env_file: Caminho para arquivo .env (opcional)

        Returns:
            Instância de Config

        Raises:
            ConfigurationError: Se algum valor numérico for inválido
        """
        if env_file:
            load_dotenv(env_file)
        else:
            load_dotenv()

        try:
            config = cls(
                log_level=os.getenv("CRACKSENSE_LOG_LEVEL", "INFO").upper(),
                log_json=os.getenv("CRACKSENSE_LOG_JSON", "false").lower() == "true",
                log_file=os.getenv("CRACKSENSE_LOG_FILE") or None,
                threads=int(os.getenv("CRACKSENSE_THREADS", 1)),
                seed=int(os.getenv("CRACKSENSE_SEED", DEFAULT_SEED)),
                output_dir=os.getenv("CRACKSENSE_OUTPUT_DIR", "runs"),
            )
        except ValueError as e:
            raise ConfigurationError(f"Variável de ambiente inválida: {e}") from e
        config.validate()
        return config

    def validate(self) -> None:
        """
        Valida configurações.

        Raises:
            ConfigurationError: Se alguma configuração for inválida
        """
        if self.log_level not in LOG_LEVELS:
            raise ConfigurationError(
                f"log_level deve ser um de {LOG_LEVELS}. Valor: {self.log_level}"
            )

        if self.threads < 1:
            raise ConfigurationError(f"threads deve ser >= 1. Valor: {self.threads}")

    def __str__(self) -> str:
        return f"""
Config:
  Logging:
    Level: {self.log_level}
    JSON: {self.log_json}
    File: {self.log_file or '-'}

  Execução:
    Threads: {self.threads}
    Seed: {self.seed}
    Output Dir: {self.output_dir}
        """.strip()
