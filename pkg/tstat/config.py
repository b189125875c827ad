import math
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Logging settings shared with utils.setup_logging
LOG_DIR = os.getenv('TSTAT_LOG_DIR', 'logs')
LOG_LEVEL = os.getenv('TSTAT_LOG_LEVEL', 'INFO')
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class Config:
    """Configuration class for the application"""

    def __init__(self):
        # Parallelism
        self.THREADS = int(os.getenv('TSTAT_THREADS', os.cpu_count() or 1))
        self.CHUNK_SIZE = int(os.getenv('TSTAT_CHUNK_SIZE', 4096))

        # Logging
        self.LOG_LEVEL = os.getenv('TSTAT_LOG_LEVEL', LOG_LEVEL)
        self.LOG_DIR = os.getenv('TSTAT_LOG_DIR', LOG_DIR)
        self.LOG_TO_FILE = os.getenv('TSTAT_LOG_TO_FILE', 'False').lower() == 'true'

        # Outputs
        self.OUTPUT_DIR = os.getenv('TSTAT_OUTPUT_DIR', 'results')

        # Experiment defaults
        self.DEFAULT_ALPHA = float(os.getenv('TSTAT_ALPHA', 0.25))
        self.DEFAULT_X0 = float(os.getenv('TSTAT_X0', 2.0))
        self.DEFAULT_X1 = float(os.getenv('TSTAT_X1', 0.0))

        # Evaluation grid
        self.GRID_MIN = float(os.getenv('TSTAT_GRID_MIN', -10.0))
        self.GRID_MAX = float(os.getenv('TSTAT_GRID_MAX', 10.0))
        self.GRID_STEP = float(os.getenv('TSTAT_GRID_STEP', 0.005))

        # Curve error target, as a multiple of delta_n
        self.CURVE_TOL = float(os.getenv('TSTAT_CURVE_TOL', 1e-3))

    def validate(self):
        """Validate configuration"""
        errors = []

        if self.THREADS < 1:
            errors.append(f"TSTAT_THREADS must be at least 1: {self.THREADS}")

        if self.CHUNK_SIZE < 1:
            errors.append(f"TSTAT_CHUNK_SIZE must be at least 1: {self.CHUNK_SIZE}")

        if not 0.0 < self.DEFAULT_ALPHA <= 1.0:
            errors.append(f"TSTAT_ALPHA must lie in (0, 1]: {self.DEFAULT_ALPHA}")

        if not self.DEFAULT_X0 > math.sqrt(3.0):
            errors.append(f"TSTAT_X0 must exceed sqrt(3): {self.DEFAULT_X0}")

        if abs(self.DEFAULT_X1) == self.DEFAULT_X0:
            errors.append(f"TSTAT_X1 must differ from +/-TSTAT_X0: {self.DEFAULT_X1}")

        if not self.GRID_MIN < self.GRID_MAX:
            errors.append(f"TSTAT_GRID_MIN must be below TSTAT_GRID_MAX: {self.GRID_MIN} >= {self.GRID_MAX}")

        if not self.GRID_STEP > 0:
            errors.append(f"TSTAT_GRID_STEP must be positive: {self.GRID_STEP}")

        if not 0.0 < self.CURVE_TOL < 1.0:
            errors.append(f"TSTAT_CURVE_TOL must lie in (0, 1): {self.CURVE_TOL}")

        return errors

    def __str__(self):
        """String representation of config"""
        return f"""
Parallelism:
- Threads: {self.THREADS}
- Chunk Size: {self.CHUNK_SIZE}

Experiment Defaults:
- Alpha: {self.DEFAULT_ALPHA}
- x0: {self.DEFAULT_X0}
- x1: {self.DEFAULT_X1}
- Grid: [{self.GRID_MIN}, {self.GRID_MAX}] step {self.GRID_STEP}
- Curve Tolerance: {self.CURVE_TOL} * delta_n

Output Configuration:
- Output Dir: {self.OUTPUT_DIR}
- Log Level: {self.LOG_LEVEL}
- Log To File: {self.LOG_TO_FILE}
"""
