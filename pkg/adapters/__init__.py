"""
Adapters Layer - Persistência e Configuração
CrackSense - Compósitos Autossensíveis

Este módulo contém adapters para o sistema de arquivos:
- Carregamento de YAML validado
- Diretórios de execução (CSV, manifesto, snapshots)
- Serialização do modelo treinado
"""

from .config_loader import load_sim_config, load_sweep_plan, load_train_config
from .model_store import load_model, save_model
from .run_store import RunWriter, load_run

__all__ = [
    "load_sim_config",
    "load_sweep_plan",
    "load_train_config",
    "load_model",
    "save_model",
    "RunWriter",
    "load_run",
]
