#!/usr/bin/env python3
"""
Exception hierarchy for tcrystal
Library code raises these; the command line maps them to exit codes
"""


class TCrystalError(Exception):
    """Base class for every error raised by tcrystal"""


class DimensionError(TCrystalError, ValueError):
    """Operator or state shapes do not compose"""


class NotHermitianError(TCrystalError, ValueError):
    """A Hermitian operator was required"""


class InvalidStateError(TCrystalError, ValueError):
    """A state, label or bath parameter is outside its physical range"""


class ConfigError(TCrystalError, ValueError):
    """An experiment configuration failed validation (exit code 2)"""


class NumericalError(TCrystalError, ArithmeticError):
    """A numerical procedure failed in a way that is not physics (exit code 3)"""
