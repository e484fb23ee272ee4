"""
Core Layer - Lógica Principal
CrackSense - Compósitos Autossensíveis

Este módulo contém a lógica principal da aplicação:
- tensorlab, microstructure: kernels tensoriais e orientação de fibras
- material, fracture: modelo constitutivo e fratura phase-field
- mesh, solver, simulation: malha Q4 e solver acoplado escalonado
- sensing: condutividade piezoresistiva e varredura EIT
- shm, pipeline: rede neural e comandos do fluxo
- config: configurações de ambiente

Os submódulos são importados explicitamente (ex.: `from core.solver import CoupledSolver`);
domain.run_schema depende de core.microstructure.
"""

from .config import Config

__all__ = [
    "Config",
]
