"""
Lower-bound constructions

Expectation values of nested commutators on two-configuration states for
the dense and the d-sparse tightness Hamiltonians, and the ratio of each
value to its predicted leading term.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from itertools import product
from typing import Iterable, List, Optional, Tuple

import numpy as np

from trotterlab.common.errors import DataValidationError
from trotterlab.commutator import GammaWord, nested_commutator
from trotterlab.fock import (
    FermionConfig,
    OpKind,
    SectorBasis,
    SectorOperator,
    elementary_operator,
    enumerate_sector,
    hopping_operator,
    state_vector,
)
from trotterlab.hamiltonian import assemble, ffft_conjugate, tightness_instance
from trotterlab.pathcount import ElementaryOp, FermionicPath, apply_path
from trotterlab.seminorm import expectation

logger = logging.getLogger("flask.app")

VARIANTS = ("psi_tilde", "phi_tilde", "psi", "phi", "psi_tilde_d", "phi_tilde_d", "psi_d", "phi_d")
FAMILIES = ("T_first", "V_first", "sparse_T", "sparse_V")


@dataclass(frozen=True)
class TightnessState:
    """(|c0> + phase |c1>)/sqrt(2) on one sector"""

    sector: SectorBasis
    amplitudes: np.ndarray
    variant: str
    configs: Tuple[FermionConfig, FermionConfig]


def _word(n: int, modes: Iterable[int]) -> FermionConfig:
    return FermionConfig(sum(1 << mode for mode in set(modes)), n)


def _state_configs(variant: str, n: int, eta: int, d: Optional[int]):
    """(c0, c1, phase on c1) of a variant"""
    if variant in ("psi_tilde", "phi_tilde"):
        trailing = range(n - eta + 1, n)
        return _word(n, [1, *trailing]), _word(n, [0, *trailing]), 1 if variant == "psi_tilde" else 1j
    if variant in ("psi", "phi"):
        return _word(n, [*range(1, eta), n // 2]), _word(n, range(eta)), 1j if variant == "psi" else 1
    if d is None or d < 2 or d % 2 or d > eta:
        raise DataValidationError(f"Variant {variant} needs even d with 2 <= d <= eta, got d={d}")
    if variant in ("psi_tilde_d", "phi_tilde_d"):
        trailing = range(n - (eta - d + 1), n)
        return (_word(n, [*range(1, d), *trailing]), _word(n, [0, *range(2, d), *trailing]),
                1 if variant == "psi_tilde_d" else 1j)
    trailing = range(n - (eta - d // 2), n)
    half = d // 2
    return (_word(n, [*range(1, half), half, *trailing]), _word(n, [*range(half), *trailing]),
            1j if variant == "psi_d" else 1)


def build_states(variant: str, n: int, eta: int, d: Optional[int] = None) -> TightnessState:
    """Normalized two-configuration state of a variant"""
    if variant not in VARIANTS:
        raise DataValidationError(f"Unknown state variant {variant!r}")
    if n < 2 or n % 2:
        raise DataValidationError(f"Tightness states need an even mode count, got {n}")
    if not 1 <= eta <= n // 2:
        raise DataValidationError(f"Tightness states need 1 <= eta <= n/2, got eta={eta}")
    first, second, phase = _state_configs(variant, n, eta, d)
    if first.weight != eta or second.weight != eta or first == second:
        raise DataValidationError(f"Variant {variant} degenerates at n={n} eta={eta} d={d}")
    sector = enumerate_sector(n, eta)
    amplitudes = state_vector(sector, {first: 1 / np.sqrt(2), second: phase / np.sqrt(2)})
    return TightnessState(sector, amplitudes, variant, (first, second))


def _word_for(layers: int, outer_bit: int) -> GammaWord:
    return GammaWord((outer_bit,) * layers + (1 - outer_bit,))


def _family_state(family: str, n: int, eta: int, p: int, d: Optional[int]) -> TightnessState:
    """State a family is evaluated on: psi for odd depth, phi for even depth"""
    if p < 1:
        raise DataValidationError(f"Commutator depth must be at least 1, got {p}")
    if family not in FAMILIES:
        raise DataValidationError(f"Unknown tightness family {family!r}")
    sparse_family = family in ("sparse_T", "sparse_V")
    if sparse_family and d is None:
        raise DataValidationError(f"Family {family} needs the sparsity d")
    stem = {"T_first": "tilde", "V_first": "", "sparse_T": "tilde_d", "sparse_V": "d"}[family]
    variant = ("psi" if p % 2 else "phi") + (f"_{stem}" if stem else "")
    return build_states(variant, n, eta, d if sparse_family else None)


def _nested_value(family: str, n: int, eta: int, p: int, s: float, w: float, u: float,
                  d: Optional[int]) -> complex:
    state = _family_state(family, n, eta, p, d)
    sparse_family = family in ("sparse_T", "sparse_V")
    coeff = tightness_instance("sparse", n, w=w, u=u, d=d) if sparse_family \
        else tightness_instance("dense", n, s=s, w=w)
    hopping, interaction, _ = assemble(coeff, state.sector)
    if family in ("T_first", "sparse_T"):
        width = d if sparse_family else n
        hopping = ffft_conjugate(hopping, width)
        interaction = ffft_conjugate(interaction, width)
        gamma = _word_for(p, 1)
    else:
        gamma = _word_for(p, 0)
    return expectation(nested_commutator(gamma, hopping, interaction), state.amplitudes)


######################################################################
#  E F F E C T I V E   C O M M U T A T O R S
######################################################################


def _effective_v_first(state: TightnessState, half: int, scale: float, w: float):
    """
    P[V, T]P = scale (M X + X M) with M = sum_{x < half} N_x and
    X = A_0^dagger A_half - A_half^dagger A_0; V = w M^2 is diagonal
    """
    sector = state.sector
    M = SectorOperator.zeros(sector)
    for x in range(half):
        M = M + elementary_operator(OpKind.NUMBER, x, sector)
    X = hopping_operator(0, half, sector) - hopping_operator(half, 0, sector)
    positions = [sector.position(config) for config in state.configs]
    block = ((M @ X + X @ M) * scale).matrix[np.ix_(positions, positions)]
    outer = np.array([w * sum(config.occupied(x) for x in range(half)) ** 2 for config in state.configs])
    return block, outer


def _effective_t_first(state: TightnessState, width: int, coupling: float, w: float):
    """
    P[T~, V~]P from the four-index form of the transformed interaction

    T~ = coupling N_0 and V~ = (w/width^2) sum tau_jkqm A_j^dagger A_k A_q^dagger A_m
    with tau_jkqm = S(k - j) S(m - q), S(a) = sum_{x < width/2} exp(2 pi i x a / width).
    Only the two configurations of the state are ever touched.
    """
    phase = np.exp(2j * np.pi * np.outer(np.arange(width // 2), np.arange(width)) / width).sum(axis=0)
    configs = state.configs
    block = np.zeros((2, 2), dtype=complex)
    for j, k, q, m in product(range(width), repeat=4):
        factor = (j == 0) - (k == 0) + (q == 0) - (m == 0)
        if not factor:
            continue
        path = FermionicPath(1, (ElementaryOp(OpKind.CREATION, j), ElementaryOp(OpKind.ANNIHILATION, k),
                                 ElementaryOp(OpKind.CREATION, q), ElementaryOp(OpKind.ANNIHILATION, m)))
        coefficient = factor * phase[(k - j) % width] * phase[(m - q) % width]
        for column, config in enumerate(configs):
            outcome = apply_path(path, config)
            if outcome is not None and outcome[0] in configs:
                block[configs.index(outcome[0]), column] += outcome[1] * coefficient
    block *= coupling * w / width ** 2
    outer = np.array([coupling * config.occupied(0) for config in configs])
    return block, outer


def effective_value(family: str, n: int, eta: int, p: int, d: Optional[int] = None,
                    s: Optional[float] = None, w: float = 1.0, u: float = 1.0) -> complex:
    """
    Nested-commutator expectation through the effective two-configuration commutator

    The outer generator is diagonal on the two configurations, so every outer
    layer acts on the 2 x 2 block of the innermost effective commutator.
    """
    s = n if s is None else s
    state = _family_state(family, n, eta, p, d)
    if family == "V_first":
        block, outer = _effective_v_first(state, n // 2, w * s / n, w)
    elif family == "sparse_V":
        block, outer = _effective_v_first(state, d // 2, u * w, w)
    elif family == "T_first":
        block, outer = _effective_t_first(state, n, s, w)
    else:
        block, outer = _effective_t_first(state, d, u * d, w)
    for _ in range(p - 1):
        block = outer[:, np.newaxis] * block - block * outer[np.newaxis, :]
    positions = [state.sector.position(config) for config in state.configs]
    vector = state.amplitudes[positions]
    return complex(np.vdot(vector, block @ vector))


def expectation_nested_T_first(n: int, eta: int, p: int, s: Optional[float] = None, w: float = 1.0) -> complex:
    """<state|[T~, ... [T~, V~]]|state> with p layers of T~ on the dense instance"""
    return _nested_value("T_first", n, eta, p, n if s is None else s, w, 1.0, None)


def expectation_nested_V_first(n: int, eta: int, p: int, s: Optional[float] = None, w: float = 1.0) -> complex:
    """<state|[V, ... [V, T]]|state> with p layers of V on the dense instance"""
    return _nested_value("V_first", n, eta, p, n if s is None else s, w, 1.0, None)


def expectation_sparse_T_first(n: int, eta: int, d: int, p: int, u: float = 1.0, w: float = 1.0) -> complex:
    """T-first expectation on the d-sparse instance with the width-d transform"""
    return _nested_value("sparse_T", n, eta, p, 1.0, w, u, d)


def expectation_sparse_V_first(n: int, eta: int, d: int, p: int, u: float = 1.0, w: float = 1.0) -> complex:
    """V-first expectation on the d-sparse instance"""
    return _nested_value("sparse_V", n, eta, p, 1.0, w, u, d)


def effective_expectation(family: str, n: int, eta: int, p: int, d: Optional[int] = None,
                          s: Optional[float] = None, w: float = 1.0, u: float = 1.0) -> Tuple[complex, complex]:
    """(effective two-configuration value, full-sector value) of one family"""
    s = n if s is None else s
    return effective_value(family, n, eta, p, d, s, w, u), _nested_value(family, n, eta, p, s, w, u, d)


def leading_term(family: str, n: int, eta: int, p: int, d: Optional[int] = None,
                 s: Optional[float] = None, w: float = 1.0, u: float = 1.0) -> float:
    """Predicted leading magnitude of a family"""
    s = n if s is None else s
    if family == "T_first":
        return s ** p * w * eta / np.pi
    if family == "V_first":
        return (2 * w * eta) ** p * s / n
    if d is None:
        raise DataValidationError(f"Family {family} needs the sparsity d")
    if family == "sparse_T":
        return (u * d) ** p * w * d / np.pi
    if family == "sparse_V":
        return (w * d) ** p * u
    raise DataValidationError(f"Unknown tightness family {family!r}")


@dataclass(frozen=True)
class TightnessRow:
    """One grid point of a ratio report"""

    family: str
    n: int
    eta: int
    d: Optional[int]
    p: int
    value: complex
    leading: float

    @property
    def ratio(self) -> Optional[float]:
        """|value| / leading, None when the leading term vanishes"""
        return abs(self.value) / self.leading if self.leading else None

    def serialize(self) -> dict:
        """Serializes a TightnessRow into a dictionary"""
        return {
            "family": self.family,
            "n": self.n,
            "eta": self.eta,
            "d": self.d,
            "p": self.p,
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "leading": self.leading,
            "ratio": self.ratio,
        }


def _evaluate(family: str, point: dict) -> TightnessRow:
    try:
        n, eta, p = int(point["n"]), int(point["eta"]), int(point["p"])
    except KeyError as error:
        raise DataValidationError("Invalid grid point: missing " + error.args[0]) from error
    d = point.get("d")
    s = point.get("s", n)
    w = point.get("w", 1.0)
    u = point.get("u", 1.0)
    value = _nested_value(family, n, eta, p, s, w, u, d)
    leading = leading_term(family, n, eta, p, d, s, w, u)
    logger.info("Tightness %s n=%d eta=%d p=%d: |value|=%.6g leading=%.6g", family, n, eta, p, abs(value), leading)
    return TightnessRow(family, n, eta, d, p, value, leading)


def tightness_ratio_report(family: str, grid: List[dict], jobs: int = 1) -> List[TightnessRow]:
    """Evaluates a family on every grid point, in grid order"""
    if family not in FAMILIES:
        raise DataValidationError(f"Unknown tightness family {family!r}")
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
        return list(executor.map(partial(_evaluate, family), grid))
