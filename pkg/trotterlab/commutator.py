"""
Nested commutators over the gamma alphabet

A GammaWord lists its bits outermost first: (g_{p+1}, ..., g_2, g_1)
stands for [H_{g_{p+1}}, ... [H_{g_2}, H_{g_1}]] with H_1 = T, H_0 = V.
The module also materializes the six-term expansion of [T, V] and
checks the three operator inequalities behind the seminorm bounds.
"""
import logging
from dataclasses import dataclass
from itertools import product
from math import factorial
from typing import List, Sequence, Tuple

import numpy as np

from trotterlab import app
from trotterlab.common.errors import DataValidationError, NumericalError
from trotterlab.fock import OpKind, SectorBasis, SectorOperator, elementary_operator, enumerate_sector, \
    one_body_operator
from trotterlab.linalg import psd_order_holds, spectral_norm
from trotterlab.models import CoefficientPair
from trotterlab.seminorm import fermionic_seminorm

logger = logging.getLogger("flask.app")

SINGLE_LAYER_SIGNS = (1, 1, 1, -1, -1, -1)
LABELS = {1: "T", 0: "V"}


@dataclass(frozen=True)
class GammaWord:
    """Binary word selecting T (1) or V (0) at each commutator layer, outermost first"""

    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(bit) for bit in self.bits)
        if len(bits) < 2 or any(bit not in (0, 1) for bit in bits):
            raise DataValidationError(f"Invalid GammaWord {self.bits!r}: need at least two 0/1 bits")
        if bits[-1] == bits[-2]:
            raise DataValidationError(f"Invalid GammaWord {self.bits!r}: [T,T] and [V,V] vanish")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def parse(cls, text: str) -> "GammaWord":
        """Reads "110" or "1,1,0" as (1, 1, 0)"""
        digits = [digit for digit in str(text) if digit not in ", ()"]
        if not digits or set(digits) - {"0", "1"}:
            raise DataValidationError(f"Invalid GammaWord {text!r}")
        return cls(tuple(int(digit) for digit in digits))

    @property
    def order(self) -> int:
        """Number of commutators p"""
        return len(self.bits) - 1

    @property
    def weight(self) -> int:
        """|gamma|, the number of T layers"""
        return sum(self.bits)

    def __str__(self):
        text = LABELS[self.bits[-1]]
        for bit in reversed(self.bits[:-1]):
            text = f"[{LABELS[bit]},{text}]"
        return text


def gamma_enumeration(p: int) -> List[GammaWord]:
    """All 2^p words of length p+1 whose innermost bits differ"""
    if p < 1:
        raise DataValidationError(f"Commutator depth must be at least 1, got {p}")
    return [GammaWord(bits) for bits in product((0, 1), repeat=p + 1) if bits[-1] != bits[-2]]


def commutator(X: SectorOperator, Y: SectorOperator) -> SectorOperator:
    """XY - YX"""
    return X @ Y - Y @ X


def _check_hermitian_pair(T: SectorOperator, V: SectorOperator) -> None:
    if not (T.number_preserving and V.number_preserving) or T.domain != V.domain:
        raise DataValidationError(f"T and V must act on one sector, got {T!r} and {V!r}")
    for name, operator in (("T", T), ("V", V)):
        scale = max(1.0, float(np.max(np.abs(operator.matrix), initial=0.0)))
        if np.max(np.abs(operator.matrix - operator.matrix.conj().T), initial=0.0) > \
                app.config["HERMITIAN_TOL"] * scale:
            raise DataValidationError(f"{name} is not Hermitian")


def nested_commutator(gamma: GammaWord, T: SectorOperator, V: SectorOperator) -> SectorOperator:
    """Right fold of commutators over gamma"""
    _check_hermitian_pair(T, V)
    operators = {1: T, 0: V}
    result = operators[gamma.bits[-1]]
    for bit in reversed(gamma.bits[:-1]):
        result = commutator(operators[bit], result)
    # p commutators of Hermitian operators: X^dagger = (-1)^p X
    sign = -1 if gamma.order % 2 else 1
    matrix = result.matrix
    drift = float(np.max(np.abs(matrix.conj().T - sign * matrix), initial=0.0))
    if drift > app.config["HERMITIAN_TOL"] * max(1.0, float(np.max(np.abs(matrix), initial=0.0))):
        raise NumericalError(f"Nested commutator {gamma} lost its (anti)hermiticity ({drift:.3e})")
    return result


######################################################################
#  S I N G L E - L A Y E R   E X P A N S I O N
######################################################################


def _dressed_hopping(tau: np.ndarray, sector: SectorBasis, dressing) -> SectorOperator:
    """sum_jk tau_jk A_j^dagger D_jk A_k with D_jk diagonal on the (eta-1)-sector"""
    lower = enumerate_sector(sector.n, sector.eta - 1)
    creators = [elementary_operator(OpKind.CREATION, j, lower).matrix for j in range(sector.n)]
    annihilators = [elementary_operator(OpKind.ANNIHILATION, k, sector).matrix for k in range(sector.n)]
    occupations = lower.occupations
    total = np.zeros((sector.dim, sector.dim), dtype=complex)
    for j, k in zip(*np.nonzero(tau)):
        weights = occupations @ dressing(j, k)
        total += tau[j, k] * creators[j] @ (weights[:, np.newaxis] * annihilators[k])
    return SectorOperator(sector, sector, total)


def single_layer_terms(coeff: CoefficientPair, sector: SectorBasis) -> List[SectorOperator]:
    """
    The six sums whose signed combination (+,+,+,-,-,-) equals [T, V]

    1: tau_jk nu_km A_j^dagger N_m A_k     2: tau_jk nu_kk A_j^dagger A_k
    3: tau_jk nu_lk A_j^dagger N_l A_k     4: tau_jk nu_jm A_j^dagger N_m A_k
    5: tau_jk nu_jj A_j^dagger A_k         6: tau_jk nu_lj A_j^dagger N_l A_k
    """
    if coeff.n != sector.n:
        raise DataValidationError(f"{coeff!r} does not fit {sector!r}")
    if sector.eta == 0:
        return [SectorOperator.zeros(sector) for _ in range(6)]
    tau, nu = coeff.tau, coeff.nu
    diagonal = np.diag(nu)
    return [
        _dressed_hopping(tau, sector, lambda j, k: nu[k, :]),
        one_body_operator(tau * diagonal[np.newaxis, :], sector),
        _dressed_hopping(tau, sector, lambda j, k: nu[:, k]),
        _dressed_hopping(tau, sector, lambda j, k: nu[j, :]),
        one_body_operator(tau * diagonal[:, np.newaxis], sector),
        _dressed_hopping(tau, sector, lambda j, k: nu[:, j]),
    ]


def single_layer_bounds(coeff: CoefficientPair, eta: int) -> Tuple[float, ...]:
    """Seminorm bounds of the six single-layer terms"""
    base = coeff.spectral_tau * coeff.max_nu
    return (base * eta ** 2, base * eta, base * eta ** 2, base * eta ** 2, base * eta, base * eta ** 2)


def chain_count_bound(gamma: GammaWord, coeff: CoefficientPair, eta: int) -> float:
    """6^p p! ||tau||^|gamma| (eta ||nu||_max)^(p+1-|gamma|) eta"""
    p = gamma.order
    return float(
        6 ** p * factorial(p) * coeff.spectral_tau ** gamma.weight
        * (eta * coeff.max_nu) ** (p + 1 - gamma.weight) * eta
    )


######################################################################
#  O P E R A T O R   I N E Q U A L I T I E S
######################################################################


def _total(operators: Sequence[SectorOperator]) -> SectorOperator:
    result = operators[0]
    for operator in operators[1:]:
        result = result + operator
    return result


def _check_lists(Bs: Sequence[SectorOperator], Cs: Sequence[SectorOperator]) -> None:
    if not Bs or len(Bs) != len(Cs):
        raise DataValidationError(f"Operator lists need equal nonzero length, got {len(Bs)} and {len(Cs)}")
    for B in Bs:
        if B.domain != Bs[0].domain or B.codomain != Bs[0].codomain:
            raise DataValidationError("The B operators must share domain and codomain")
    for C in Cs:
        if C.domain != Bs[0].codomain or C.codomain != Cs[0].codomain:
            raise DataValidationError("Every C operator must act on the codomain of the B operators")


def lemma_cauchy_check(Bs: Sequence[SectorOperator], Cs: Sequence[SectorOperator], tol: float = 1e-9) -> bool:
    """-sum B_j^+ C_k^+ C_k B_j <= sum B_j^+ C_k^+ C_j B_k <= sum B_j^+ C_k^+ C_k B_j"""
    _check_lists(Bs, Cs)
    size = len(Bs)
    middle = _total([Bs[j].adjoint() @ Cs[k].adjoint() @ Cs[j] @ Bs[k] for j in range(size) for k in range(size)])
    outer = _total([Bs[j].adjoint() @ Cs[k].adjoint() @ Cs[k] @ Bs[j] for j in range(size) for k in range(size)])
    return psd_order_holds(-outer.matrix, middle.matrix, tol) and psd_order_holds(middle.matrix, outer.matrix, tol)


def lemma_diagonalization_check(mu, Bs: Sequence[SectorOperator], tol: float = 1e-9) -> bool:
    """-||mu|| sum B_j^+ B_j <= sum mu_jk B_j^+ B_k <= ||mu|| sum B_j^+ B_j"""
    mu = np.asarray(mu, dtype=complex)
    if mu.ndim != 2 or mu.shape != (len(Bs), len(Bs)) or not Bs:
        raise DataValidationError(f"Coefficient matrix of shape {mu.shape} does not fit {len(Bs)} operators")
    _check_lists(Bs, Bs)
    size = len(Bs)
    mixed = _total([mu[j, k] * (Bs[j].adjoint() @ Bs[k]) for j in range(size) for k in range(size)])
    base = spectral_norm(mu) * _total([B.adjoint() @ B for B in Bs]).matrix
    return psd_order_holds(-base, mixed.matrix, tol) and psd_order_holds(mixed.matrix, base, tol)


def lemma_holder_check(Bs: Sequence[SectorOperator], Cs: Sequence[SectorOperator], tol: float = 1e-9) -> bool:
    """||sum B_j^+ C_j^+ C_j B_j||_eta <= ||sum B_j^+ B_j||_eta max_k ||C_k^+ C_k||_xi"""
    _check_lists(Bs, Cs)
    if not all(C.number_preserving for C in Cs):
        raise DataValidationError("The C operators must preserve the electron number")
    lhs = fermionic_seminorm(_total([B.adjoint() @ C.adjoint() @ C @ B for B, C in zip(Bs, Cs)]))
    rhs = fermionic_seminorm(_total([B.adjoint() @ B for B in Bs])) * \
        max(fermionic_seminorm(C.adjoint() @ C) for C in Cs)
    return bool(lhs <= rhs + tol)
