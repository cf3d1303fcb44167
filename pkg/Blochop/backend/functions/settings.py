"""
Runtime settings for Blochop
Read once from the environment at import time
"""

import os

VERSION = "0.3.0"

# Config lookup
CONFIG_DIR = os.environ.get('BLOCHOP_CONFIG_DIR', os.path.join(os.getcwd(), 'configs'))

# Logging
LOG_LEVEL = os.environ.get('BLOCHOP_LOG_LEVEL', 'INFO')

# Differentiation
MAX_DERIVATIVE_ORDER = int(os.environ.get('BLOCHOP_MAX_DERIVATIVE_ORDER', 12))
SERIES_TAIL_TOL = float(os.environ.get('BLOCHOP_SERIES_TAIL_TOL', 1e-8))

# Grids
GRID_M = int(os.environ.get('BLOCHOP_GRID_M', 24))
GRID_M_CAP = int(os.environ.get('BLOCHOP_GRID_M_CAP', 48))
ANGLE_CAP = int(os.environ.get('BLOCHOP_ANGLE_CAP', 4096))
LEVELS_J = int(os.environ.get('BLOCHOP_LEVELS_J', 12))
XI_GRID_M = int(os.environ.get('BLOCHOP_XI_GRID_M', 6))
MAX_REFINEMENTS = int(os.environ.get('BLOCHOP_MAX_REFINEMENTS', 3))

# Quadrature for the Q_K area integral
QK_PANELS_PER_END = int(os.environ.get('BLOCHOP_QK_PANELS_PER_END', 12))
QK_GAUSS_POINTS = int(os.environ.get('BLOCHOP_QK_GAUSS_POINTS', 8))
QK_ANGLES = int(os.environ.get('BLOCHOP_QK_ANGLES', 128))

# Verdicts
COMPACT_TOL = float(os.environ.get('BLOCHOP_COMPACT_TOL', 1e-3))

# Thread pool used by the orchestrator and the xi sweep
WORKERS = int(os.environ.get('BLOCHOP_WORKERS', 4))
