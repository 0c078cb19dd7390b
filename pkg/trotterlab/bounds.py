"""
Closed-form Trotter error bounds, step counts and gate complexity

Scaling families are evaluated with unit constants and reported as
"scaling values". Only rigorous_bound_low_order is a certified upper bound.
"""
import logging
from dataclasses import dataclass, field
from math import ceil, log
from typing import Tuple

from trotterlab.common.errors import DataValidationError
from trotterlab.commutator import GammaWord, commutator, gamma_enumeration, nested_commutator
from trotterlab.fock import SectorOperator
from trotterlab.seminorm import fermionic_seminorm

logger = logging.getLogger("flask.app")

FAMILIES = ("general", "sparse", "path_dense", "plane_wave", "hubbard")


def _check_order(p: int) -> None:
    if p < 1:
        raise DataValidationError(f"Order must be at least 1, got {p}")


def scaling_bound_general(p: int, spec_tau: float, max_nu: float, eta: float, t: float) -> float:
    """(||tau|| + ||nu||_max eta)^(p-1) ||tau|| ||nu||_max eta^2 t^(p+1)"""
    _check_order(p)
    return (spec_tau + max_nu * eta) ** (p - 1) * spec_tau * max_nu * eta ** 2 * t ** (p + 1)


def scaling_bound_sparse(p: int, max_tau: float, max_nu: float, d: float, eta: float, t: float) -> float:
    """(||tau||_max + ||nu||_max)^(p-1) ||tau||_max ||nu||_max d^(p+1) eta t^(p+1)"""
    _check_order(p)
    return (max_tau + max_nu) ** (p - 1) * max_tau * max_nu * d ** (p + 1) * eta * t ** (p + 1)


def scaling_bound_path_dense(p: int, max_tau: float, max_nu: float, n: float, eta: float, t: float) -> float:
    """(n ||tau||_max + ||nu||_max eta)^(p-1) ||tau||_max ||nu||_max n eta^2 t^(p+1)"""
    _check_order(p)
    return (n * max_tau + max_nu * eta) ** (p - 1) * max_tau * max_nu * n * eta ** 2 * t ** (p + 1)


def scaling_bound_manifold_only(p: int, spec_tau: float, max_nu: float, eta: float, t: float) -> float:
    """Earlier manifold-restricted scaling: (||tau|| + ||nu||_max eta)^(p-1) ||tau|| ||nu||_max eta^(p+2) t^(p+1)"""
    _check_order(p)
    return (spec_tau + max_nu * eta) ** (p - 1) * spec_tau * max_nu * eta ** (p + 2) * t ** (p + 1)


def scaling_bound_commutator_only(p: int, max_tau: float, max_nu: float, n: float, t: float) -> float:
    """Earlier full-Fock commutator scaling: (||tau||_max + ||nu||_max)^(p-1) ||tau||_max ||nu||_max n^(p+2) t^(p+1)"""
    _check_order(p)
    return (max_tau + max_nu) ** (p - 1) * max_tau * max_nu * n ** (p + 2) * t ** (p + 1)


def rigorous_bound_low_order(p: int, T: SectorOperator, V: SectorOperator, t: float) -> float:
    """
    Certified error bound of one step of the p = 1 or p = 2 formula

    p=1: (t^2/2) ||[T,V]||
    p=2: (t^3/6) (||[T,[T,V]]||/2 + ||[V,[V,T]]||/4)
    """
    if t < 0:
        raise DataValidationError(f"Time must be nonnegative, got {t}")
    if p == 1:
        return t ** 2 / 2 * fermionic_seminorm(commutator(T, V))
    if p == 2:
        outer_t = fermionic_seminorm(nested_commutator(GammaWord((1, 1, 0)), T, V))
        outer_v = fermionic_seminorm(nested_commutator(GammaWord((0, 0, 1)), T, V))
        return t ** 3 / 6 * (outer_t / 2 + outer_v / 4)
    raise DataValidationError(f"Certified bounds exist for p in (1, 2), got {p}")


def commutator_scaling_value(p: int, T: SectorOperator, V: SectorOperator, t: float) -> float:
    """max over gamma of ||[H_g(p+1), ... [H_g2, H_g1]]||_eta t^(p+1)"""
    _check_order(p)
    return max(fermionic_seminorm(nested_commutator(gamma, T, V)) for gamma in gamma_enumeration(p)) \
        * t ** (p + 1)


######################################################################
#  S T E P   C O U N T S
######################################################################


def _family_constant(family: str, p: int, params: dict) -> float:
    """Prefactor C of C t^(p+1) for the error-based families"""
    try:
        if family == "general":
            return scaling_bound_general(p, params["spec_tau"], params["max_nu"], params["eta"], 1.0)
        if family == "sparse":
            return scaling_bound_sparse(p, params["max_tau"], params["max_nu"], params["d"], params["eta"], 1.0)
        if family == "path_dense":
            return scaling_bound_path_dense(p, params["max_tau"], params["max_nu"], params["n"],
                                            params["eta"], 1.0)
    except KeyError as error:
        raise DataValidationError(f"Step count for {family} needs parameter {error.args[0]}") from error
    raise DataValidationError(f"Unknown bound family {family!r}")


def step_count(p: int, family: str, params: dict, t: float, eps: float) -> int:
    """
    Trotter steps r for accuracy eps, unit constants

    Error families use r = C^(1/p) t^(1+1/p) / eps^(1/p) with C their
    value at t = 1; plane_wave and hubbard use their specialized forms.
    """
    _check_order(p)
    if not eps > 0:
        raise DataValidationError(f"Accuracy must be positive, got {eps}")
    if family not in FAMILIES:
        raise DataValidationError(f"Unknown bound family {family!r}")
    time_factor = t ** (1 + 1 / p) / eps ** (1 / p)
    try:
        if family == "plane_wave":
            n, eta = params["n"], params["eta"]
            prefactor = (n ** (2 / 3) / eta ** (2 / 3) + n ** (1 / 3) * eta ** (2 / 3)) \
                * (n ** (2 / 3) * eta ** (1 / 3)) ** (1 / p)
        elif family == "hubbard":
            prefactor = params["eta"] ** (1 / p)
        else:
            prefactor = _family_constant(family, p, params) ** (1 / p)
    except KeyError as error:
        raise DataValidationError(f"Step count for {family} needs parameter {error.args[0]}") from error
    return max(1, ceil(prefactor * time_factor - 1e-12))


def gate_complexity_planewave(n: float, eta: float, p: int) -> Tuple[float, float]:
    """(r, g) for the plane-wave Hamiltonian at t = eps = 1, polylog reported as log n"""
    _check_order(p)
    steps = (n ** (2 / 3) / eta ** (2 / 3) + n ** (1 / 3) * eta ** (2 / 3)) * n ** (1 / p)
    gates = (n ** (5 / 3) / eta ** (2 / 3) + n ** (4 / 3) * eta ** (2 / 3)) * n ** (1 / p) * log(n)
    return steps, gates


def gate_complexity_hubbard(n: float, eta: float, p: int) -> float:
    """n eta^(1/p)"""
    _check_order(p)
    return n * eta ** (1 / p)


@dataclass
class BoundReport:
    """One evaluated bound"""

    family: str
    value: float
    certified: bool = False
    params: dict = field(default_factory=dict)

    def serialize(self) -> dict:
        """Serializes a BoundReport into a dictionary"""
        return {"family": self.family, "params": self.params, "value": self.value, "certified": self.certified}
