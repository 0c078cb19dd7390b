"""
Models for the Trotter Laboratory

All of the value objects shared between modules are stored in this module

Models
------
CoefficientPair - the coefficient matrices of H = T + V
NucleusSpec - a nucleus of the plane-wave electronic-structure Hamiltonian
ExperimentConfig - a validated command configuration

Attributes (CoefficientPair):
-----------
n        (integer) - number of spin orbitals (modes)
tau      (complex) - Hermitian n x n hopping matrix
nu       (real)    - symmetric n x n interaction matrix, stored as (nu + nu^T)/2
"""
import hashlib
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from trotterlab import app, linalg
from trotterlab.common.errors import (  # noqa: F401
    BudgetExceededError,
    DataValidationError,
    NumericalError,
)

logger = logging.getLogger("flask.app")

SOLVERS = ("lapack", "jacobi")
FORMATS = ("csv", "json")


def check_settings(config) -> None:
    """Rejects a configuration the library cannot run with"""
    if config["EIGEN_SOLVER"] not in SOLVERS:
        raise DataValidationError(f"Unknown EIGEN_SOLVER {config['EIGEN_SOLVER']!r}")
    for key in ("MAX_SECTOR_DIM", "PATH_BUDGET", "JACOBI_MAX_SWEEPS", "RADIUS_REFINE", "JOBS"):
        if config[key] < 1:
            raise DataValidationError(f"{key} must be positive, got {config[key]}")
    if config["RADIUS_GRID"] < 2:
        raise DataValidationError("RADIUS_GRID needs at least 2 points")
    for key in ("HERMITIAN_TOL", "COEFF_HERMITIAN_TOL", "SUPPORT_TOL", "NOISE_FLOOR", "JACOBI_THRESHOLD"):
        if not config[key] > 0:
            raise DataValidationError(f"{key} must be positive, got {config[key]}")


def _complex_from_parts(real, imag) -> np.ndarray:
    real = np.asarray(real, dtype=float)
    imag = np.asarray(imag, dtype=float)
    if real.shape != imag.shape:
        raise DataValidationError("Invalid CoefficientPair: tau_re and tau_im differ in shape")
    values = np.empty(real.shape, dtype=complex)
    values.real = real
    values.imag = imag
    return values


class CoefficientPair:
    """
    Class that represents the coefficient matrices (tau, nu) of
    H = sum tau_jk A_j^dagger A_k + sum nu_lm N_l N_m
    """

    def __init__(self, tau, nu):
        try:
            tau = np.array(tau, dtype=complex)
            nu = np.array(nu)
        except (TypeError, ValueError) as error:
            raise DataValidationError("Invalid CoefficientPair: " + str(error)) from error
        if tau.ndim != 2 or tau.shape[0] != tau.shape[1]:
            raise DataValidationError(f"Invalid CoefficientPair: tau has shape {tau.shape}")
        if nu.shape != tau.shape:
            raise DataValidationError(
                f"Invalid CoefficientPair: nu has shape {nu.shape}, expected {tau.shape}"
            )
        if np.iscomplexobj(nu):
            if np.any(nu.imag != 0):
                raise DataValidationError("Invalid CoefficientPair: nu must be real")
            nu = nu.real
        try:
            nu = nu.astype(float)
        except (TypeError, ValueError) as error:
            raise DataValidationError("Invalid CoefficientPair: " + str(error)) from error
        if not (np.all(np.isfinite(tau)) and np.all(np.isfinite(nu))):
            raise DataValidationError("Invalid CoefficientPair: non-finite coefficient")
        tolerance = app.config["COEFF_HERMITIAN_TOL"] * max(1.0, np.max(np.abs(tau), initial=0.0))
        if np.max(np.abs(tau - tau.conj().T), initial=0.0) > tolerance:
            raise DataValidationError("Invalid CoefficientPair: tau is not Hermitian")
        nu = (nu + nu.T) / 2
        tau.setflags(write=False)
        nu.setflags(write=False)
        self.tau = tau
        self.nu = nu

    def __repr__(self):
        return f"<CoefficientPair n=[{self.n}]>"

    @property
    def n(self) -> int:
        """Number of modes"""
        return self.tau.shape[0]

    ##################################################
    # CACHED NORMS
    ##################################################

    @cached_property
    def spectral_tau(self) -> float:
        """Spectral norm of tau"""
        return linalg.spectral_norm(self.tau)

    @cached_property
    def max_tau(self) -> float:
        """Largest |tau_jk|"""
        return float(np.max(np.abs(self.tau), initial=0.0))

    @cached_property
    def max_nu(self) -> float:
        """Largest |nu_lm|"""
        return float(np.max(np.abs(self.nu), initial=0.0))

    @cached_property
    def sparsity(self) -> int:
        """Largest number of supported entries in any row or column of tau or nu"""
        threshold = app.config["SUPPORT_TOL"]
        counts = [0]
        for matrix in (self.tau, self.nu):
            support = np.abs(matrix) > threshold
            counts.extend(support.sum(axis=0).tolist())
            counts.extend(support.sum(axis=1).tolist())
        return int(max(counts))

    def support(self, gamma_bit: int) -> Tuple[Tuple[int, int], ...]:
        """Index pairs (j, k) with a nonzero tau (gamma_bit=1) or nu (gamma_bit=0) entry"""
        matrix = self.tau if gamma_bit == 1 else self.nu
        rows, cols = np.nonzero(np.abs(matrix) > app.config["SUPPORT_TOL"])
        return tuple(zip(rows.tolist(), cols.tolist()))

    ##################################################
    # SERIALIZATION
    ##################################################

    def serialize(self) -> dict:
        """Serializes a CoefficientPair into a dictionary of row-major arrays"""
        return {
            "n": self.n,
            "tau_re": self.tau.real.tolist(),
            "tau_im": self.tau.imag.tolist(),
            "nu": self.nu.tolist(),
        }

    @classmethod
    def deserialize(cls, data: dict) -> "CoefficientPair":
        """
        Deserializes a CoefficientPair from a dictionary

        Args:
            data (dict): A dictionary with keys n, tau_re, tau_im and nu
        """
        try:
            size = data["n"]
            tau = _complex_from_parts(data["tau_re"], data["tau_im"])
            nu = np.asarray(data["nu"], dtype=float)
        except KeyError as error:
            raise DataValidationError("Invalid CoefficientPair: missing " + error.args[0]) from error
        except (TypeError, ValueError) as error:
            raise DataValidationError(
                "Invalid CoefficientPair: document contained bad or no data; " + str(error)
            ) from error
        if not isinstance(size, int) or isinstance(size, bool) or tau.shape != (size, size):
            raise DataValidationError(f"Invalid CoefficientPair: n={size!r} does not match tau")
        return cls(tau, nu)


@dataclass(frozen=True)
class NucleusSpec:
    """A nucleus with charge zeta at a fractional position of the cell"""

    charge: float
    position: Tuple[float, float, float]

    def __post_init__(self):
        if not np.isfinite(self.charge) or self.charge <= 0:
            raise DataValidationError(f"Invalid NucleusSpec: charge {self.charge} must be positive")
        if len(self.position) != 3:
            raise DataValidationError("Invalid NucleusSpec: position needs 3 coordinates")
        if not all(0.0 <= coordinate < 1.0 for coordinate in self.position):
            raise DataValidationError(
                f"Invalid NucleusSpec: position {self.position} is outside the cell"
            )

    def serialize(self) -> dict:
        """Serializes a NucleusSpec into a dictionary"""
        return {"charge": self.charge, "position": list(self.position)}

    @classmethod
    def deserialize(cls, data: dict) -> "NucleusSpec":
        """Deserializes a NucleusSpec from a dictionary"""
        try:
            return cls(float(data["charge"]), tuple(float(x) for x in data["position"]))
        except KeyError as error:
            raise DataValidationError("Invalid NucleusSpec: missing " + error.args[0]) from error
        except (TypeError, ValueError) as error:
            raise DataValidationError("Invalid NucleusSpec: " + str(error)) from error


def _matches(default, value) -> bool:
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if default is None:
        return True
    return isinstance(value, type(default))


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Class that represents the resolved configuration of one command run

    Only command, params, seed and fmt take part in the provenance hash,
    so changing the output path or the parallelism keeps artifacts identical.
    """

    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    fmt: str = "csv"
    jobs: int = 1
    out: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2**64:
            raise DataValidationError(f"Invalid ExperimentConfig: seed {self.seed!r} is not a u64")
        if self.fmt not in FORMATS:
            raise DataValidationError(f"Invalid ExperimentConfig: unknown format {self.fmt!r}")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise DataValidationError(f"Invalid ExperimentConfig: jobs must be >= 1, got {self.jobs!r}")

    def serialize(self) -> dict:
        """Serializes the hashed part of the config into a dictionary"""
        return {"command": self.command, "params": self.params, "seed": self.seed, "format": self.fmt}

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of the resolved config"""
        canonical = json.dumps(self.serialize(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def deserialize(cls, command: str, data: dict, defaults: dict, **overrides) -> "ExperimentConfig":
        """
        Validates a config document against the command defaults

        Args:
            command (str): the subcommand name
            data (dict): the parsed config document (may be empty)
            defaults (dict): parameter names and default values of the command
            overrides: seed, fmt, jobs and out given on the command line (None = unset)
        """
        if not isinstance(data, dict):
            raise DataValidationError("Invalid ExperimentConfig: document must be a JSON object")
        document = dict(data)
        settings = {
            "seed": document.pop("seed", app.config["SEED"]),
            "fmt": document.pop("format", "csv"),
            "jobs": document.pop("jobs", app.config["JOBS"]),
            "out": document.pop("out", None),
        }
        for key, value in overrides.items():
            if value is not None:
                settings[key] = value
        params = dict(defaults)
        for key, value in document.items():
            if key not in defaults:
                raise DataValidationError(f"Invalid ExperimentConfig: unknown field {key!r} for {command}")
            if not _matches(defaults[key], value):
                raise DataValidationError(
                    f"Invalid ExperimentConfig: field {key!r} has type {type(value).__name__}"
                )
            params[key] = value
        logger.debug("Resolved %s config with %d parameters", command, len(params))
        return cls(command=command, params=params, **settings)
