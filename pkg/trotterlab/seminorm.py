"""
Fermionic eta-seminorm and its metric relatives

For a number-preserving operator the seminorm is the spectral norm of its
sector matrix, and the largest expectation is its numerical radius.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from trotterlab.common.errors import DataValidationError
from trotterlab.fock import SectorOperator, identity
from trotterlab.linalg import numerical_radius, random_unitary, spectral_norm

logger = logging.getLogger("flask.app")


def _require_number_preserving(X: SectorOperator) -> None:
    if not X.number_preserving:
        raise DataValidationError(f"The seminorm is only defined for number-preserving operators, got {X!r}")


def fermionic_seminorm(X: SectorOperator) -> float:
    """||X||_eta"""
    _require_number_preserving(X)
    return spectral_norm(X.matrix)


def max_expectation(X: SectorOperator) -> float:
    """max |<psi|X|psi>| over eta-electron states"""
    _require_number_preserving(X)
    return numerical_radius(X.matrix)


def transition_amplitude(X: SectorOperator, bra: np.ndarray, ket: np.ndarray) -> complex:
    """<bra|X|ket>"""
    bra = np.asarray(bra, dtype=complex)
    if bra.shape != (X.codomain.dim,):
        raise DataValidationError(f"Bra of shape {bra.shape} does not fit {X!r}")
    return complex(np.vdot(bra, X.apply(ket)))


def expectation(X: SectorOperator, state: np.ndarray) -> complex:
    """<state|X|state>"""
    _require_number_preserving(X)
    return transition_amplitude(X, state, state)


def variational_seminorm(X: SectorOperator, iterations: int = 500, seed: int = 0, tol: float = 1e-13) -> float:
    """
    Two-sided maximization of |<phi|X|psi>| by alternating power steps

    The ket is improved for a fixed bra and the bra for a fixed ket, which
    never forms X^dagger X explicitly.
    """
    _require_number_preserving(X)
    dim = X.domain.dim
    if dim == 0 or not np.any(X.matrix):
        return 0.0
    rng = np.random.default_rng(seed)
    ket = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    ket /= np.linalg.norm(ket)
    value = 0.0
    for _ in range(iterations):
        bra = X.matrix @ ket
        bra /= np.linalg.norm(bra)
        ket = X.matrix.conj().T @ bra
        previous, value = value, float(np.linalg.norm(ket))
        ket /= value
        if abs(value - previous) <= tol * max(1.0, value):
            break
    return float(abs(np.vdot(bra, X.matrix @ ket)))


@dataclass
class AxiomReport:
    """Per-axiom (passed, residual) outcomes of a seminorm check"""

    results: Dict[str, Tuple[bool, float]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """True when every axiom holds"""
        return all(ok for ok, _ in self.results.values())

    def record(self, name: str, residual: float, scale: float, tol: float) -> None:
        """Stores a residual, passing when it is within tol relative to scale"""
        self.results[name] = (bool(residual <= tol * max(1.0, scale)), float(residual))

    def serialize(self) -> dict:
        """Serializes an AxiomReport into a dictionary"""
        return {name: {"passed": ok, "residual": residual} for name, (ok, residual) in self.results.items()}


def seminorm_axiom_check(X: SectorOperator, Y: SectorOperator, lam: complex,
                         seed: int = 0, tol: float = 1e-9) -> AxiomReport:
    """Checks the six seminorm axioms and the C*-identity on X and Y"""
    _require_number_preserving(X)
    _require_number_preserving(Y)
    if X.domain != Y.domain:
        raise DataValidationError(f"Sector mismatch: {X!r} and {Y!r}")
    report = AxiomReport()
    norm_x = fermionic_seminorm(X)
    norm_y = fermionic_seminorm(Y)

    scaled = fermionic_seminorm(lam * X)
    report.record("homogeneity", abs(scaled - abs(lam) * norm_x), abs(lam) * norm_x, tol)
    report.record("triangle", max(0.0, fermionic_seminorm(X + Y) - norm_x - norm_y), norm_x + norm_y, tol)
    report.record("submultiplicativity", max(0.0, fermionic_seminorm(X @ Y) - norm_x * norm_y),
                  norm_x * norm_y, tol)
    report.record("identity", abs(fermionic_seminorm(identity(X.domain)) - 1.0), 1.0, tol)

    dim = X.domain.dim
    left = SectorOperator(X.domain, X.domain, random_unitary(dim, seed))
    right = SectorOperator(X.domain, X.domain, random_unitary(dim, seed + 1))
    report.record("unitary_invariance", abs(fermionic_seminorm(left @ X @ right) - norm_x), norm_x, tol)
    report.record("adjoint_invariance", abs(fermionic_seminorm(X.adjoint()) - norm_x), norm_x, tol)
    report.record("c_star", abs(fermionic_seminorm(X.adjoint() @ X) - norm_x ** 2), norm_x ** 2, tol)
    logger.debug("Seminorm axioms on %r: %s", X.domain, report.results)
    return report
