#!/usr/bin/env python3
"""
Features package for tcrystal
Contains the numerical modules: linear algebra, models, both dynamics engines,
symmetry certification, analysis and result persistence
"""

from .errors import ConfigError, DimensionError, InvalidStateError, NotHermitianError, NumericalError, TCrystalError
from .models import BathConfig, ModelKind, SpinModel
from .collision import CollisionChannel, TrajectoryRecord, kraus_set, run_trajectory
from .lindblad import LindbladSpec, build_liouvillian, evolve, gksl_spec, steady_space
from .symmetry import DynamicalSymmetry, SymmetryReport, certify, search_symmetries
from .analysis import Periodogram, dominant_frequency, periodogram
from .storage import ResultStore

__all__ = [
    'TCrystalError',
    'ConfigError',
    'DimensionError',
    'InvalidStateError',
    'NotHermitianError',
    'NumericalError',
    'BathConfig',
    'ModelKind',
    'SpinModel',
    'CollisionChannel',
    'TrajectoryRecord',
    'kraus_set',
    'run_trajectory',
    'LindbladSpec',
    'build_liouvillian',
    'evolve',
    'gksl_spec',
    'steady_space',
    'DynamicalSymmetry',
    'SymmetryReport',
    'certify',
    'search_symmetries',
    'Periodogram',
    'dominant_frequency',
    'periodogram',
    'ResultStore',
]
