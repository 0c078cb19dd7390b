"""
Occupation-number basis and elementary fermionic operators

Configurations are machine integers: bit j of the word is the occupation
c_j of mode j, and kets are printed with mode 0 leftmost. A sector is the
ascending list of all words with a fixed Hamming weight eta, and every
operator is a dense matrix between two sectors.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from itertools import combinations
from math import comb
from typing import Mapping, Optional, Tuple, Union

import numpy as np
from scipy import sparse

from trotterlab import app
from trotterlab.common.errors import BudgetExceededError, DataValidationError

logger = logging.getLogger("flask.app")

MAX_MODES = 62


class OpKind(Enum):
    """Enumeration of elementary fermionic operators"""
    CREATION = "creation"
    ANNIHILATION = "annihilation"
    NUMBER = "number"

    def adjoint(self) -> "OpKind":
        """Kind of the Hermitian conjugate"""
        if self is OpKind.CREATION:
            return OpKind.ANNIHILATION
        if self is OpKind.ANNIHILATION:
            return OpKind.CREATION
        return self

    @property
    def shift(self) -> int:
        """Change of the electron count"""
        return {OpKind.CREATION: 1, OpKind.ANNIHILATION: -1, OpKind.NUMBER: 0}[self]


def _check_mode(mode: int, n: int) -> None:
    if not 0 <= mode < n:
        raise DataValidationError(f"Mode index {mode} out of range for {n} modes")


######################################################################
#  C O N F I G U R A T I O N S
######################################################################


@dataclass(frozen=True)
class FermionConfig:
    """An occupation string |c_0 c_1 ... c_{n-1}> stored as an integer word"""

    bits: int
    n: int

    def __post_init__(self):
        if not 0 <= self.n <= MAX_MODES or not 0 <= self.bits < (1 << self.n):
            raise DataValidationError(f"Invalid FermionConfig: {self.bits} does not fit {self.n} modes")

    @classmethod
    def from_ket(cls, ket: str) -> "FermionConfig":
        """Parses "0110" or "|0110>" with mode 0 leftmost"""
        digits = ket.strip().lstrip("|").rstrip(">⟩")
        if not digits or set(digits) - {"0", "1"}:
            raise DataValidationError(f"Invalid ket {ket!r}")
        return cls(sum(1 << j for j, digit in enumerate(digits) if digit == "1"), len(digits))

    def ket(self) -> str:
        """Occupation string with mode 0 leftmost"""
        return "".join("1" if self.bits >> j & 1 else "0" for j in range(self.n))

    def __str__(self):
        return f"|{self.ket()}>"

    @property
    def weight(self) -> int:
        """Hamming weight, the electron count"""
        return self.bits.bit_count()

    def occupied(self, j: int) -> bool:
        """True when mode j holds an electron"""
        _check_mode(j, self.n)
        return bool(self.bits >> j & 1)

    def parity_below(self, j: int) -> int:
        """Parity of the electrons on modes 0..j-1"""
        _check_mode(j, self.n)
        return (self.bits & ((1 << j) - 1)).bit_count() & 1


def apply_creation(j: int, c: FermionConfig) -> Optional[Tuple[FermionConfig, int]]:
    """A_j^dagger |c>, or None when mode j is already occupied"""
    if c.occupied(j):
        return None
    return FermionConfig(c.bits | (1 << j), c.n), -1 if c.parity_below(j) else 1


def apply_annihilation(j: int, c: FermionConfig) -> Optional[Tuple[FermionConfig, int]]:
    """A_j |c>, or None when mode j is empty"""
    if not c.occupied(j):
        return None
    return FermionConfig(c.bits & ~(1 << j), c.n), -1 if c.parity_below(j) else 1


######################################################################
#  S E C T O R S
######################################################################


class SectorBasis:
    """Canonical ordered basis of the eta-electron sector of n modes"""

    def __init__(self, n: int, eta: int, configs: np.ndarray):
        self.n = n
        self.eta = eta
        self.configs = configs
        self.index = {int(word): position for position, word in enumerate(configs)}

    def __repr__(self):
        return f"<SectorBasis n=[{self.n}] eta=[{self.eta}] dim=[{self.dim}]>"

    def __eq__(self, other):
        return isinstance(other, SectorBasis) and (self.n, self.eta) == (other.n, other.eta)

    def __hash__(self):
        return hash((self.n, self.eta))

    def __len__(self):
        return self.dim

    @property
    def dim(self) -> int:
        """Number of configurations"""
        return len(self.configs)

    def config(self, position: int) -> FermionConfig:
        """Configuration at a basis position"""
        return FermionConfig(int(self.configs[position]), self.n)

    def position(self, config: Union[FermionConfig, int]) -> int:
        """Basis position of a configuration in this sector"""
        word = config.bits if isinstance(config, FermionConfig) else int(config)
        try:
            return self.index[word]
        except KeyError as error:
            raise DataValidationError(f"Configuration {word} is not in {self!r}") from error

    def positions(self, words: np.ndarray) -> np.ndarray:
        """Vectorized position lookup for words known to lie in the sector"""
        return np.searchsorted(self.configs, words)

    @cached_property
    def occupations(self) -> np.ndarray:
        """(dim x n) 0/1 matrix of the configurations"""
        table = ((self.configs[:, np.newaxis] >> np.arange(self.n)) & 1).astype(float)
        table.setflags(write=False)
        return table


def enumerate_sector(n: int, eta: int) -> SectorBasis:
    """Returns the canonical basis of the eta-electron sector of n modes"""
    if not 0 <= n <= MAX_MODES:
        raise DataValidationError(f"Mode count {n} out of range")
    if not 0 <= eta <= n:
        raise DataValidationError(f"Electron count {eta} out of range for {n} modes")
    dim = comb(n, eta)
    limit = app.config["MAX_SECTOR_DIM"]
    if dim > limit:
        raise BudgetExceededError(f"Sector n={n} eta={eta} has dimension {dim} above the limit {limit}")
    return _build_sector(n, eta)


@lru_cache(maxsize=256)
def _build_sector(n: int, eta: int) -> SectorBasis:
    logger.debug("Enumerating sector n=%d eta=%d", n, eta)
    words = sorted(sum(1 << j for j in modes) for modes in combinations(range(n), eta))
    configs = np.array(words, dtype=np.int64)
    configs.setflags(write=False)
    return SectorBasis(n, eta, configs)


def _parity_signs(words: np.ndarray, mode: int) -> np.ndarray:
    """(-1)^(number of electrons below mode) for every word"""
    below = np.bitwise_count(words & np.int64((1 << mode) - 1)) & 1
    return 1.0 - 2.0 * below


######################################################################
#  S E C T O R   O P E R A T O R S
######################################################################


class SectorOperator:
    """A fermionic operator as a dense matrix from one sector into another"""

    def __init__(self, domain: SectorBasis, codomain: SectorBasis, matrix):
        matrix = np.array(matrix, dtype=complex)
        if domain.n != codomain.n:
            raise DataValidationError("Domain and codomain have different mode counts")
        if matrix.shape != (codomain.dim, domain.dim):
            raise DataValidationError(
                f"Matrix shape {matrix.shape} does not match sectors ({codomain.dim}, {domain.dim})"
            )
        if not np.all(np.isfinite(matrix)):
            raise DataValidationError("Operator matrix has non-finite entries")
        matrix.setflags(write=False)
        self.domain = domain
        self.codomain = codomain
        self.matrix = matrix

    def __repr__(self):
        return f"<SectorOperator eta=[{self.domain.eta}->{self.codomain.eta}] n=[{self.domain.n}]>"

    @classmethod
    def zeros(cls, domain: SectorBasis, codomain: Optional[SectorBasis] = None) -> "SectorOperator":
        """The zero map"""
        codomain = domain if codomain is None else codomain
        return cls(domain, codomain, np.zeros((codomain.dim, domain.dim), dtype=complex))

    @property
    def number_preserving(self) -> bool:
        """True when domain and codomain are the same sector"""
        return self.domain == self.codomain

    def _check_same(self, other: "SectorOperator") -> None:
        if self.domain != other.domain or self.codomain != other.codomain:
            raise DataValidationError(f"Sector mismatch: {self!r} and {other!r}")

    def __add__(self, other: "SectorOperator") -> "SectorOperator":
        self._check_same(other)
        return SectorOperator(self.domain, self.codomain, self.matrix + other.matrix)

    def __sub__(self, other: "SectorOperator") -> "SectorOperator":
        self._check_same(other)
        return SectorOperator(self.domain, self.codomain, self.matrix - other.matrix)

    def __neg__(self) -> "SectorOperator":
        return SectorOperator(self.domain, self.codomain, -self.matrix)

    def __mul__(self, scalar: complex) -> "SectorOperator":
        return SectorOperator(self.domain, self.codomain, scalar * self.matrix)

    __rmul__ = __mul__

    def __matmul__(self, other: "SectorOperator") -> "SectorOperator":
        if other.codomain != self.domain:
            raise DataValidationError(f"Cannot compose {self!r} after {other!r}")
        return SectorOperator(other.domain, self.codomain, self.matrix @ other.matrix)

    def adjoint(self) -> "SectorOperator":
        """Hermitian conjugate"""
        return SectorOperator(self.codomain, self.domain, self.matrix.conj().T)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """Image of a domain vector"""
        vector = np.asarray(vector, dtype=complex)
        if vector.shape != (self.domain.dim,):
            raise DataValidationError(f"Vector of shape {vector.shape} does not fit {self!r}")
        return self.matrix @ vector


def _from_column_map(domain, codomain, rows, columns, values) -> SectorOperator:
    """Densifies a map given as (row, column, value) triples, summing duplicates"""
    matrix = sparse.coo_matrix(
        (np.asarray(values, dtype=complex), (rows, columns)), shape=(codomain.dim, domain.dim)
    )
    return SectorOperator(domain, codomain, matrix.toarray())


def elementary_operator(kind: OpKind, mode: int, domain: SectorBasis) -> SectorOperator:
    """Sector matrix of A_j^dagger, A_j or N_j acting on domain"""
    _check_mode(mode, domain.n)
    words = domain.configs
    occupied = (words >> mode) & 1
    if kind is OpKind.NUMBER:
        return SectorOperator(domain, domain, np.diag(occupied.astype(complex)))
    if kind is OpKind.CREATION:
        if domain.eta == domain.n:
            raise DataValidationError(f"Creation on the full sector {domain!r} has no codomain")
        codomain = enumerate_sector(domain.n, domain.eta + 1)
        columns = np.flatnonzero(occupied == 0)
        targets = words[columns] | np.int64(1 << mode)
    else:
        if domain.eta == 0:
            raise DataValidationError(f"Annihilation on the vacuum sector {domain!r} has no codomain")
        codomain = enumerate_sector(domain.n, domain.eta - 1)
        columns = np.flatnonzero(occupied == 1)
        targets = words[columns] & ~np.int64(1 << mode)
    signs = _parity_signs(words[columns], mode)
    return _from_column_map(domain, codomain, codomain.positions(targets), columns, signs)


def _hopping_map(j: int, k: int, sector: SectorBasis):
    """(rows, columns, signs) of A_j^dagger A_k within a sector"""
    words = sector.configs
    if j == k:
        columns = np.flatnonzero((words >> j) & 1)
        return columns, columns, np.ones(len(columns))
    has_k = ((words >> k) & 1) == 1
    free_j = ((words >> j) & 1) == 0
    columns = np.flatnonzero(has_k & free_j)
    lowered = words[columns] & ~np.int64(1 << k)
    signs = _parity_signs(words[columns], k) * _parity_signs(lowered, j)
    rows = sector.positions(lowered | np.int64(1 << j))
    return rows, columns, signs


def hopping_operator(j: int, k: int, sector: SectorBasis) -> SectorOperator:
    """Sector matrix of A_j^dagger A_k"""
    _check_mode(j, sector.n)
    _check_mode(k, sector.n)
    rows, columns, signs = _hopping_map(j, k, sector)
    return _from_column_map(sector, sector, rows, columns, signs)


def one_body_operator(matrix, sector: SectorBasis) -> SectorOperator:
    """Sector matrix of sum_jk m_jk A_j^dagger A_k"""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (sector.n, sector.n):
        raise DataValidationError(f"One-body matrix of shape {matrix.shape} does not fit {sector!r}")
    rows, columns, values = [np.zeros(0, dtype=np.int64)], [np.zeros(0, dtype=np.int64)], [np.zeros(0)]
    for j, k in zip(*np.nonzero(matrix)):
        pair_rows, pair_columns, signs = _hopping_map(int(j), int(k), sector)
        rows.append(pair_rows)
        columns.append(pair_columns)
        values.append(matrix[j, k] * signs)
    return _from_column_map(
        sector, sector, np.concatenate(rows), np.concatenate(columns), np.concatenate(values)
    )


def number_operator(sector: SectorBasis) -> SectorOperator:
    """Total number operator N, equal to eta times the identity"""
    return SectorOperator(sector, sector, sector.eta * np.eye(sector.dim))


def identity(sector: SectorBasis) -> SectorOperator:
    """Identity on the sector"""
    return SectorOperator(sector, sector, np.eye(sector.dim))


def state_vector(sector: SectorBasis, amplitudes: Mapping[Union[FermionConfig, int], complex]) -> np.ndarray:
    """Sector vector with the given amplitudes on configurations"""
    vector = np.zeros(sector.dim, dtype=complex)
    for config, amplitude in amplitudes.items():
        if isinstance(config, FermionConfig) and config.n != sector.n:
            raise DataValidationError(f"{config} does not have {sector.n} modes")
        vector[sector.position(config)] += amplitude
    return vector
