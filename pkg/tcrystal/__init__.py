"""
tcrystal - emergent time periodicity in few-qubit open systems
==============================================================

Collision-model and GKSL dynamics of small spin models coupled to a bath
through one qubit, certification of dynamical symmetries, and the frequency
and melting analysis built on top of them.

Usage:
    tcrystal run --config configs/fig2a.yaml
    python -m tcrystal validate --config configs/fig4c.yaml

Version: 1.0.0
"""

__version__ = "1.0.0"
__description__ = "Time-crystalline oscillations in collisional and GKSL open qubit systems"

from . import config
from .features import (
    BathConfig,
    ModelKind,
    SpinModel,
    certify,
    evolve,
    gksl_spec,
    run_trajectory,
)

__all__ = [
    "config",
    "BathConfig",
    "ModelKind",
    "SpinModel",
    "certify",
    "evolve",
    "gksl_spec",
    "run_trajectory",
    "__version__",
    "__description__",
]
