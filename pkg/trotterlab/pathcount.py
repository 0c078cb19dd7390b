"""
Fermionic path counting

Nested commutators of indexed terms H^1_jk = A_j^dagger A_k and
H^0_lm = N_l N_m expand into signed products of elementary operators
(paths). Every path maps a configuration to a signed configuration or to
zero, so the seminorm of the nested commutator is bounded by counting the
paths that survive on each configuration.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from math import factorial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from trotterlab import app
from trotterlab.common.errors import BudgetExceededError, DataValidationError
from trotterlab.commutator import GammaWord
from trotterlab.fock import (
    FermionConfig,
    OpKind,
    SectorBasis,
    SectorOperator,
    apply_annihilation,
    apply_creation,
    elementary_operator,
    enumerate_sector,
)
from trotterlab.models import CoefficientPair

logger = logging.getLogger("flask.app")

SYMBOLS = {OpKind.CREATION: "A+", OpKind.ANNIHILATION: "A", OpKind.NUMBER: "N"}


class Ruleset(Enum):
    """Commutation rules used to expand [H_jk, P]"""
    STANDARD = "standard"
    NORMAL_ORDERED = "normal_ordered"


def _ruleset(value) -> Ruleset:
    try:
        return Ruleset(value)
    except ValueError as error:
        raise DataValidationError(f"Unknown ruleset {value!r}") from error


@dataclass(frozen=True)
class ElementaryOp:
    """A_j^dagger, A_j or N_j"""

    kind: OpKind
    mode: int

    def __post_init__(self):
        if self.mode < 0:
            raise DataValidationError(f"Negative mode index {self.mode}")

    def adjoint(self) -> "ElementaryOp":
        """Hermitian conjugate"""
        return ElementaryOp(self.kind.adjoint(), self.mode)

    def __str__(self):
        return f"{SYMBOLS[self.kind]}_{self.mode}"


def _op(kind: OpKind, mode: int) -> ElementaryOp:
    return ElementaryOp(kind, int(mode))


@dataclass(frozen=True)
class FermionicPath:
    """sign * ops[0] ops[1] ... ops[-1]; the rightmost op acts first"""

    sign: int
    ops: Tuple[ElementaryOp, ...]

    def __len__(self):
        return len(self.ops)

    def __str__(self):
        return ("+" if self.sign > 0 else "-") + " ".join(str(op) for op in self.ops)

    def adjoint(self) -> "FermionicPath":
        """Reversed ops with creation and annihilation exchanged"""
        return FermionicPath(self.sign, tuple(op.adjoint() for op in reversed(self.ops)))

    def modes(self) -> frozenset:
        """Modes touched by the path"""
        return frozenset(op.mode for op in self.ops)

    def matrix(self, domain: SectorBasis) -> SectorOperator:
        """Sector matrix of the path acting on domain"""
        shift = sum(op.kind.shift for op in self.ops)
        codomain = enumerate_sector(domain.n, domain.eta + shift) if 0 <= domain.eta + shift <= domain.n \
            else None
        if codomain is None:
            raise DataValidationError(f"Path {self} maps {domain!r} outside the Fock space")
        result = np.eye(domain.dim, dtype=complex)
        current = domain
        for op in reversed(self.ops):
            eta = current.eta + op.kind.shift
            if not 0 <= eta <= domain.n:
                return SectorOperator.zeros(domain, codomain)
            step = elementary_operator(op.kind, op.mode, current)
            result = step.matrix @ result
            current = step.codomain
        return SectorOperator(domain, codomain, self.sign * result)

    def serialize(self) -> dict:
        """Serializes a FermionicPath into a dictionary"""
        return {"sign": self.sign, "ops": [[op.kind.value, op.mode] for op in self.ops]}


@dataclass(frozen=True)
class IndexedTerm:
    """H^gamma_jk: A_j^dagger A_k for gamma = 1, N_j N_k for gamma = 0"""

    gamma: int
    j: int
    k: int

    def __post_init__(self):
        if self.gamma not in (0, 1):
            raise DataValidationError(f"Invalid IndexedTerm: gamma bit {self.gamma!r}")
        if self.j < 0 or self.k < 0:
            raise DataValidationError(f"Invalid IndexedTerm: negative index in ({self.j}, {self.k})")

    def initial_path(self) -> FermionicPath:
        """The term itself as a path"""
        if self.gamma == 1:
            return FermionicPath(1, (_op(OpKind.CREATION, self.j), _op(OpKind.ANNIHILATION, self.k)))
        return FermionicPath(1, (_op(OpKind.NUMBER, self.j), _op(OpKind.NUMBER, self.k)))

    def matrix(self, sector: SectorBasis) -> SectorOperator:
        """Sector matrix of the term"""
        return self.initial_path().matrix(sector)


######################################################################
#  E X P A N S I O N   R U L E S
######################################################################


def _hopping_rule(term: IndexedTerm, op: ElementaryOp):
    """[A_j^dagger A_k, op] as (sign, replacement) pairs"""
    j, k, x = term.j, term.k, op.mode
    if op.kind is OpKind.CREATION:
        return [(1, (_op(OpKind.CREATION, j),))] if k == x else []
    if op.kind is OpKind.ANNIHILATION:
        return [(-1, (_op(OpKind.ANNIHILATION, k),))] if j == x else []
    if j == k:
        return []
    hop = (_op(OpKind.CREATION, j), _op(OpKind.ANNIHILATION, k))
    rules = []
    if k == x:
        rules.append((1, hop))
    if j == x:
        rules.append((-1, hop))
    return rules


def _interaction_rule(term: IndexedTerm, op: ElementaryOp, ruleset: Ruleset):
    """[N_l N_m, op] as (sign, replacement) pairs"""
    l, m, x = term.j, term.k, op.mode
    if op.kind is OpKind.NUMBER:
        return []
    rules = []
    if op.kind is OpKind.CREATION:
        if ruleset is Ruleset.STANDARD:
            if m == x:
                rules.append((1, (_op(OpKind.NUMBER, l), op)))
            if l == x:
                rules.append((1, (op, _op(OpKind.NUMBER, m))))
        else:
            if m == x:
                rules.append((1, (_op(OpKind.NUMBER, l), op)))
            if l == x:
                rules.append((1, (_op(OpKind.NUMBER, m), op)))
            if l == x and m == x:
                rules.append((-1, (op,)))
        return rules
    if ruleset is Ruleset.STANDARD:
        if m == x:
            rules.append((-1, (_op(OpKind.NUMBER, l), op)))
        if l == x:
            rules.append((-1, (op, _op(OpKind.NUMBER, m))))
    else:
        if m == x:
            rules.append((-1, (op, _op(OpKind.NUMBER, l))))
        if l == x:
            rules.append((-1, (op, _op(OpKind.NUMBER, m))))
        if l == x and m == x:
            rules.append((1, (op,)))
    return rules


def _commute_path(term: IndexedTerm, path: FermionicPath, ruleset: Ruleset) -> List[FermionicPath]:
    """[term, path] = sum over positions of ops[:i] [term, ops[i]] ops[i+1:]"""
    children = []
    for position, op in enumerate(path.ops):
        rules = _hopping_rule(term, op) if term.gamma == 1 else _interaction_rule(term, op, ruleset)
        for sign, replacement in rules:
            ops = path.ops[:position] + replacement + path.ops[position + 1:]
            children.append(FermionicPath(path.sign * sign, ops))
    return children


def expand_paths(terms: Sequence[IndexedTerm], ruleset="standard", n: Optional[int] = None) -> List[FermionicPath]:
    """
    Signed paths of [terms[0], [terms[1], ... [terms[-2], terms[-1]]]]

    The signed sum of the path matrices equals the nested commutator;
    an empty list means the commutator vanishes.
    """
    ruleset = _ruleset(ruleset)
    if len(terms) < 2:
        raise DataValidationError("Path expansion needs at least two indexed terms")
    if n is not None:
        for term in terms:
            if term.j >= n or term.k >= n:
                raise DataValidationError(f"Index out of range in {term} for {n} modes")
    paths = [terms[-1].initial_path()]
    for term in reversed(terms[:-1]):
        paths = [child for path in paths for child in _commute_path(term, path, ruleset)]
    return paths


def apply_path(path: FermionicPath, c: FermionConfig) -> Optional[Tuple[FermionConfig, int]]:
    """P|c> as (configuration, sign), or None for the zero vector"""
    sign = path.sign
    current = c
    for op in reversed(path.ops):
        if op.kind is OpKind.NUMBER:
            if not current.occupied(op.mode):
                return None
            continue
        outcome = apply_creation(op.mode, current) if op.kind is OpKind.CREATION \
            else apply_annihilation(op.mode, current)
        if outcome is None:
            return None
        current, step_sign = outcome
        sign *= step_sign
    return current, sign


######################################################################
#  D E G R E E S
######################################################################


def _survivors(ops: Sequence[ElementaryOp], words: np.ndarray) -> np.ndarray:
    """Boolean mask of words on which the product of ops is nonzero"""
    alive = np.ones(len(words), dtype=bool)
    current = words.copy()
    for op in reversed(ops):
        bit = np.int64(1 << op.mode)
        occupied = (current & bit) != 0
        if op.kind is OpKind.CREATION:
            alive &= ~occupied
            current = current | bit
        elif op.kind is OpKind.ANNIHILATION:
            alive &= occupied
            current = current & ~bit
        else:
            alive &= occupied
    return alive


class _Layers:
    """Support pairs of tau and nu indexed by the modes they touch"""

    def __init__(self, coeff: CoefficientPair):
        self.support = {1: coeff.support(1), 0: coeff.support(0)}
        self.by_mode: Dict[int, Dict[int, list]] = {}
        for bit, pairs in self.support.items():
            table: Dict[int, list] = {}
            for pair in pairs:
                for mode in set(pair):
                    table.setdefault(mode, []).append(pair)
            self.by_mode[bit] = table

    def touching(self, bit: int, modes: Iterable[int]) -> List[Tuple[int, int]]:
        """Support pairs of one layer sharing a mode with the path"""
        table = self.by_mode[bit]
        return sorted({pair for mode in modes for pair in table.get(mode, ())})


def _leaves(root: Tuple[int, int], gamma: GammaWord, layers: _Layers, ruleset: Ruleset,
            budget: int) -> Tuple[List[FermionicPath], int]:
    """All paths grown from one innermost support pair, with the visit count"""
    bits = gamma.bits
    paths = [IndexedTerm(bits[-1], *root).initial_path()]
    visits = 1
    for bit in reversed(bits[:-1]):
        children = []
        for path in paths:
            for pair in layers.touching(bit, path.modes()):
                visits += 1
                children.extend(_commute_path(IndexedTerm(bit, *pair), path, ruleset))
        paths = children
        visits += len(paths)
        if visits > budget:
            raise BudgetExceededError(f"Path enumeration for {gamma} exceeded the budget of {budget} visits")
    return paths, visits


def _walk(gamma: GammaWord, coeff: CoefficientPair, ruleset: Ruleset, visit, jobs: int):
    """Runs visit(leaves) for every innermost support pair, in support order"""
    layers = _Layers(coeff)
    budget = app.config["PATH_BUDGET"]
    roots = layers.support[gamma.bits[-1]]

    def task(root):
        paths, visits = _leaves(root, gamma, layers, ruleset, budget)
        return visit(paths), visits

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
        outcomes = list(executor.map(task, roots))
    total = 0
    for _, visits in outcomes:
        total += visits
        if total > budget:
            raise BudgetExceededError(f"Path enumeration for {gamma} exceeded the budget of {budget} visits")
    logger.debug("Enumerated %s from %d roots in %d visits", gamma, len(roots), total)
    return [result for result, _ in outcomes]


def _degrees(words: np.ndarray, gamma: GammaWord, coeff: CoefficientPair, ruleset: Ruleset,
             jobs: int) -> np.ndarray:
    def visit(paths):
        degrees = np.zeros(len(words))
        for path in paths:
            degrees += 0.5 * _survivors(path.ops, words)
            degrees += 0.5 * _survivors(path.adjoint().ops, words)
        return degrees

    partial = _walk(gamma, coeff, ruleset, visit, jobs)
    return np.sum(partial, axis=0) if partial else np.zeros(len(words))


def degree_table(gamma: GammaWord, coeff: CoefficientPair, sector: SectorBasis,
                 ruleset="standard", jobs: int = 1) -> np.ndarray:
    """deg(c) for every configuration of the sector, in basis order"""
    if coeff.n != sector.n:
        raise DataValidationError(f"{coeff!r} does not fit {sector!r}")
    return _degrees(sector.configs, gamma, coeff, _ruleset(ruleset), jobs)


def degree(c: FermionConfig, gamma: GammaWord, coeff: CoefficientPair, ruleset="standard", jobs: int = 1) -> float:
    """Sum over index tuples and paths of (||P|c>|| + ||P^dagger|c>||)/2"""
    if c.n != coeff.n:
        raise DataValidationError(f"{c} does not have {coeff.n} modes")
    words = np.array([c.bits], dtype=np.int64)
    return float(_degrees(words, gamma, coeff, _ruleset(ruleset), jobs)[0])


def path_bound(gamma: GammaWord, coeff: CoefficientPair, eta: int, ruleset="standard", jobs: int = 1) -> float:
    """||tau||_max^|gamma| ||nu||_max^(p+1-|gamma|) max_c deg(c)"""
    sector = enumerate_sector(coeff.n, eta)
    table = degree_table(gamma, coeff, sector, ruleset, jobs)
    largest = float(np.max(table, initial=0.0))
    return coeff.max_tau ** gamma.weight * coeff.max_nu ** (gamma.order + 1 - gamma.weight) * largest


def path_count_per_site(gamma: GammaWord, coeff: CoefficientPair, ruleset="standard",
                        jobs: int = 1) -> Dict[int, int]:
    """Number of paths whose rightmost operator acts on each mode"""
    def visit(paths):
        counts: Dict[int, int] = {}
        for path in paths:
            mode = path.ops[-1].mode
            counts[mode] = counts.get(mode, 0) + 1
        return counts

    totals = {mode: 0 for mode in range(coeff.n)}
    for counts in _walk(gamma, coeff, _ruleset(ruleset), visit, jobs):
        for mode, count in counts.items():
            totals[mode] += count
    return totals


def enumerate_all_paths(gamma: GammaWord, coeff: CoefficientPair, ruleset="standard",
                        jobs: int = 1) -> List[FermionicPath]:
    """Every path over every supported index tuple"""
    return [path for paths in _walk(gamma, coeff, _ruleset(ruleset), list, jobs) for path in paths]


def closed_form_counts(p: int, regime: str, eta: int, d: int = 0, n: int = 0, weight: int = 0) -> float:
    """
    Closed-form path counts

    sparse: eta (2d)^(p+1) (p+1)!/2
    dense: eta 3^p (p+1)! n^|gamma| eta^(p+1-|gamma|)
    """
    if p < 1:
        raise DataValidationError(f"Commutator depth must be at least 1, got {p}")
    if regime == "sparse":
        return float(eta * (2 * d) ** (p + 1) * factorial(p + 1) / 2)
    if regime == "dense":
        return float(eta * 3 ** p * factorial(p + 1) * n ** weight * eta ** (p + 1 - weight))
    raise DataValidationError(f"Unknown counting regime {regime!r}")


def symmetric_weight_bound(w, v) -> Tuple[float, float]:
    """(sum_ij w_ij v_i v_j, max_i sum_j w_ij) for nonnegative symmetric w and unit v"""
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1] or v.shape != (w.shape[0],):
        raise DataValidationError("Weight matrix and vector shapes do not match")
    if np.any(w < 0) or not np.allclose(w, w.T):
        raise DataValidationError("Weight matrix must be nonnegative and symmetric")
    return float(v @ w @ v), float(np.max(w.sum(axis=1), initial=0.0))
