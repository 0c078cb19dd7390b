"""
Global Configuration for the Laboratory

Every setting can be overridden from the environment (or a .env file).
"""
import os

# Instance size guards
MAX_SECTOR_DIM = int(os.getenv("MAX_SECTOR_DIM", "20000"))
PATH_BUDGET = int(os.getenv("PATH_BUDGET", str(10**7)))

# Linear algebra tolerances
HERMITIAN_TOL = float(os.getenv("HERMITIAN_TOL", "1e-10"))
COEFF_HERMITIAN_TOL = float(os.getenv("COEFF_HERMITIAN_TOL", "1e-12"))
SUPPORT_TOL = float(os.getenv("SUPPORT_TOL", "1e-14"))
NOISE_FLOOR = float(os.getenv("NOISE_FLOOR", "1e-13"))

# Eigensolver: "lapack" or "jacobi"
EIGEN_SOLVER = os.getenv("EIGEN_SOLVER", "lapack")
JACOBI_THRESHOLD = float(os.getenv("JACOBI_THRESHOLD", "1e-12"))
JACOBI_MAX_SWEEPS = int(os.getenv("JACOBI_MAX_SWEEPS", "64"))

# Numerical radius search
RADIUS_GRID = int(os.getenv("RADIUS_GRID", "64"))
RADIUS_REFINE = int(os.getenv("RADIUS_REFINE", "40"))

# Experiment defaults
JOBS = int(os.getenv("JOBS", str(os.cpu_count() or 1)))
SEED = int(os.getenv("SEED", "0"))

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = os.getenv("LOG_FORMAT", "[%(asctime)s] [%(levelname)s] [%(module)s] %(message)s")
