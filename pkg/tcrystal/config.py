"""
Configuration file for tcrystal
===============================
Contains all configuration constants and environment variable mappings.
"""

import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Output Configuration
OUT_DIR = os.getenv('TCRYSTAL_OUT_DIR', 'results')
WORKERS = int(os.getenv('TCRYSTAL_WORKERS', '1'))

# Numerical Guards
HERMITIAN_TOL = float(os.getenv('HERMITIAN_TOL', '1e-10'))
KRAUS_TOL = float(os.getenv('KRAUS_TOL', '1e-9'))
SUPEROP_MAX_DIM = int(os.getenv('SUPEROP_MAX_DIM', '32'))
SEARCH_MAX_DIM = int(os.getenv('SEARCH_MAX_DIM', '64'))

# Simulation Defaults
DEFAULT_RECORD_SUBSTEPS = int(os.getenv('DEFAULT_RECORD_SUBSTEPS', '4'))
DEFAULT_GAMMA_DAMPING = float(os.getenv('DEFAULT_GAMMA_DAMPING', '1.0'))

# Logging Configuration
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
