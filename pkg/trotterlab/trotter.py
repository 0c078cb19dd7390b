"""
Product formulas and Trotter-error measurement

Formulas are lists of stages exp(-i weight t X) with X in {T, V}; the
product is taken in list order, so the last stage acts first on a state.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np

from trotterlab import app
from trotterlab.common.errors import DataValidationError
from trotterlab.fock import SectorOperator, enumerate_sector
from trotterlab.hamiltonian import assemble
from trotterlab.linalg import hermitian_eig, spectral_norm, unitary_from_hermitian
from trotterlab.models import CoefficientPair

logger = logging.getLogger("flask.app")

MAX_ORDER = 10


class Generator(Enum):
    """Term of H exponentiated by a stage; values match gamma bits"""
    T = 1
    V = 0


@dataclass(frozen=True)
class FormulaStage:
    """exp(-i weight t X) for X = generator"""

    generator: Generator
    weight: float

    def __post_init__(self):
        if not np.isfinite(self.weight):
            raise DataValidationError(f"Stage weight {self.weight} is not finite")


@dataclass(frozen=True)
class ProductFormula:
    """An order-p product formula"""

    order: int
    stages: Tuple[FormulaStage, ...]

    def __post_init__(self):
        if not self.stages:
            raise DataValidationError("A product formula needs at least one stage")

    @property
    def exponential_count(self) -> int:
        """Number of exponentials per step"""
        return len(self.stages)

    def weight_sum(self, generator: Generator) -> float:
        """Total weight of the stages of one generator"""
        return sum(stage.weight for stage in self.stages if stage.generator is generator)

    def serialize(self) -> dict:
        """Serializes a ProductFormula into a dictionary"""
        return {
            "order": self.order,
            "stages": [{"generator": stage.generator.name, "weight": stage.weight} for stage in self.stages],
        }


def suzuki_coefficient(k: int) -> float:
    """u_k = 1/(4 - 4^{1/(2k-1)})"""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * k - 1)))


def _symmetric(order: int, scale: float) -> List[FormulaStage]:
    if order == 2:
        return [
            FormulaStage(Generator.V, scale / 2),
            FormulaStage(Generator.T, scale),
            FormulaStage(Generator.V, scale / 2),
        ]
    coefficient = suzuki_coefficient(order // 2)
    outer = _symmetric(order - 2, coefficient * scale)
    inner = _symmetric(order - 2, (1 - 4 * coefficient) * scale)
    return 2 * outer + inner + 2 * outer


def _merge(stages: Sequence[FormulaStage]) -> List[FormulaStage]:
    merged: List[FormulaStage] = []
    for stage in stages:
        if merged and merged[-1].generator is stage.generator:
            merged[-1] = FormulaStage(stage.generator, merged[-1].weight + stage.weight)
        else:
            merged.append(stage)
    return merged


def build_formula(p: int) -> ProductFormula:
    """Lie-Trotter (p=1) or Suzuki (even p <= 10) formula with merged stages"""
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)):
        raise DataValidationError(f"Product-formula order must be an integer, got {p!r}")
    if p != 1 and (p < 2 or p % 2 or p > MAX_ORDER):
        raise DataValidationError(f"Unsupported product-formula order {p}")
    if p == 1:
        stages = [FormulaStage(Generator.T, 1.0), FormulaStage(Generator.V, 1.0)]
    else:
        stages = _merge(_symmetric(int(p), 1.0))
    return ProductFormula(int(p), tuple(stages))


######################################################################
#  E V O L U T I O N
######################################################################


def _check_pair(T: SectorOperator, V: SectorOperator) -> None:
    if not (T.number_preserving and V.number_preserving) or T.domain != V.domain:
        raise DataValidationError(f"T and V must act on one sector, got {T!r} and {V!r}")


def _exponential(eig, angle: float) -> np.ndarray:
    eigenvalues, eigenvectors = eig
    return (eigenvectors * np.exp(-1j * angle * eigenvalues)) @ eigenvectors.conj().T


def apply_formula(f: ProductFormula, T: SectorOperator, V: SectorOperator, t: float) -> SectorOperator:
    """Sector unitary of one step of f for time t"""
    _check_pair(T, V)
    hopping = hermitian_eig(T.matrix)
    off_diagonal = V.matrix - np.diag(np.diag(V.matrix))
    diagonal = np.real(np.diag(V.matrix)) if not np.any(off_diagonal) else None
    interaction = hermitian_eig(V.matrix) if diagonal is None else None
    result = np.eye(T.domain.dim, dtype=complex)
    for stage in f.stages:
        angle = stage.weight * t
        if stage.generator is Generator.T:
            result = result @ _exponential(hopping, angle)
        elif diagonal is not None:
            result = result * np.exp(-1j * angle * diagonal)[np.newaxis, :]
        else:
            result = result @ _exponential(interaction, angle)
    return SectorOperator(T.domain, T.domain, result)


def formula_error(f: ProductFormula, T: SectorOperator, V: SectorOperator, t: float, r: int = 1) -> float:
    """|| S(t/r)^r - exp(-itH) || on the sector of T and V"""
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)) or r < 1:
        raise DataValidationError(f"Step count must be a positive integer, got {r!r}")
    step = apply_formula(f, T, V, t / r)
    evolved = np.linalg.matrix_power(step.matrix, int(r))
    exact = unitary_from_hermitian((T + V).matrix, t)
    return spectral_norm(evolved - exact)


def trotter_error(p: int, coeff: CoefficientPair, eta: int, t: float, r: int = 1) -> float:
    """Trotter error of the order-p formula in the fermionic eta-seminorm"""
    sector = enumerate_sector(coeff.n, eta)
    hopping, interaction, _ = assemble(coeff, sector)
    error = formula_error(build_formula(p), hopping, interaction, t, r)
    logger.debug("Trotter error p=%d eta=%d t=%s r=%d: %s", p, eta, t, r, error)
    return error


def fit_error_order(ts: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(t)"""
    ts = np.asarray(ts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if ts.ndim != 1 or ts.shape != errors.shape or ts.size < 4:
        raise DataValidationError("Order fit needs at least 4 matching (t, error) points")
    if np.any(ts <= 0) or not np.all(np.isfinite(ts)):
        raise DataValidationError("Order fit needs positive finite times")
    if len(np.unique(ts)) < 2:
        raise DataValidationError("Order fit needs distinct times")
    floor = app.config["NOISE_FLOOR"]
    if np.any(errors <= floor) or not np.all(np.isfinite(errors)):
        raise DataValidationError(f"Order fit needs finite errors above the noise floor {floor}")
    slope, _ = np.polyfit(np.log(ts), np.log(errors), 1)
    return float(slope)
