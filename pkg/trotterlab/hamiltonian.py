"""
Hamiltonian families of interacting electrons

H = T + V = sum_jk tau_jk A_j^dagger A_k + sum_lm nu_lm N_l N_m

Builders return CoefficientPair objects; assemble() turns a pair into
sector operators. The fermionic Fourier transform is available on both
representations through ffft_conjugate().
"""
import logging
from functools import singledispatch
from itertools import product
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import linalg as sla

from trotterlab import linalg
from trotterlab.common.errors import DataValidationError
from trotterlab.fock import SectorBasis, SectorOperator, enumerate_sector, one_body_operator
from trotterlab.models import CoefficientPair, NucleusSpec

logger = logging.getLogger("flask.app")


class Assembly(NamedTuple):
    """Sector operators of one Hamiltonian"""
    T: SectorOperator
    V: SectorOperator
    H: SectorOperator


def interaction_diagonal(coeff: CoefficientPair, sector: SectorBasis) -> np.ndarray:
    """Entries sum_lm nu_lm c_l c_m of the diagonal operator V"""
    occupations = sector.occupations
    return np.einsum("cl,lm,cm->c", occupations, coeff.nu, occupations)


def assemble(coeff: CoefficientPair, sector: SectorBasis) -> Assembly:
    """Builds T, V and H = T + V on a sector"""
    if coeff.n != sector.n:
        raise DataValidationError(f"{coeff!r} does not fit {sector!r}")
    logger.info("Assembling H for n=%d eta=%d (dim %d)", sector.n, sector.eta, sector.dim)
    hopping = one_body_operator(coeff.tau, sector)
    interaction = SectorOperator(sector, sector, np.diag(interaction_diagonal(coeff, sector)))
    return Assembly(hopping, interaction, hopping + interaction)


def interaction_sparsity(coeff: CoefficientPair) -> int:
    """Largest count of supported entries in a row or column of tau or nu"""
    return coeff.sparsity


######################################################################
#  F A M I L I E S
######################################################################


def _frequency_window(side: int) -> range:
    """Integer frequencies -ceil(side/2) .. floor(side/2)-1 along one axis"""
    return range(-((side + 1) // 2), side // 2)


def plane_wave(n: int, omega: float, eta: int, nuclei: Sequence[NucleusSpec] = ()) -> CoefficientPair:
    """
    Plane-wave dual-basis Hamiltonian of a cubic cell of volume omega

    The external potential of the nuclei is folded into nu through
    division by eta, so the pair is only valid on the eta-electron sector.
    """
    side = round(n ** (1 / 3)) if n > 0 else 0
    if n < 1 or side ** 3 != n:
        raise DataValidationError(f"Plane-wave basis needs a perfect cube mode count, got {n}")
    if not omega > 0:
        raise DataValidationError(f"Cell volume must be positive, got {omega}")
    if eta < 1:
        raise DataValidationError(f"Electron count must be at least 1, got {eta}")
    nuclei = [item if isinstance(item, NucleusSpec) else NucleusSpec.deserialize(item) for item in nuclei]
    logger.info("Building plane-wave Hamiltonian n=%d omega=%s eta=%d nuclei=%d", n, omega, eta, len(nuclei))

    cell = omega ** (1 / 3)
    grid = np.array(list(product(range(side), repeat=3)), dtype=float)
    positions = grid * (omega / n) ** (1 / 3)
    frequencies = np.array(list(product(_frequency_window(side), repeat=3)), dtype=float)
    kappa = 2 * np.pi * frequencies / cell
    kappa_sq = np.sum(kappa ** 2, axis=1)
    nonzero = kappa_sq > 0

    displacement = positions[np.newaxis, :, :] - positions[:, np.newaxis, :]
    cosines = np.cos(np.einsum("jkd,md->jkm", displacement, kappa))
    tau = np.einsum("m,jkm->jk", kappa_sq, cosines) / (2 * n)

    pair = (2 * np.pi / omega) * np.einsum("m,lkm->lk", 1 / kappa_sq[nonzero], cosines[:, :, nonzero])
    np.fill_diagonal(pair, 0.0)

    external = np.zeros(n)
    for nucleus in nuclei:
        offsets = np.asarray(nucleus.position) * cell - positions
        phases = np.cos(offsets @ kappa[nonzero].T)
        external += nucleus.charge * phases @ (1 / kappa_sq[nonzero])
    external *= -4 * np.pi / (omega * eta)

    return CoefficientPair(tau, pair + external[:, np.newaxis])


def fermi_hubbard(extents: Sequence[int], s: float, v: float, periodic: bool = False) -> CoefficientPair:
    """
    Fermi-Hubbard model on a rectangular lattice

    Mode 2*site + spin; sites are numbered row-major. Hopping -s links
    same-spin nearest neighbours and nu carries v/2 between the two spins
    of every site.
    """
    extents = tuple(int(extent) for extent in extents)
    if not extents or any(extent < 2 for extent in extents):
        raise DataValidationError(f"Every lattice extent must be at least 2, got {extents}")
    sites = int(np.prod(extents))
    n = 2 * sites
    tau = np.zeros((n, n))
    nu = np.zeros((n, n))
    for site, coordinate in enumerate(np.ndindex(*extents)):
        for axis, extent in enumerate(extents):
            step = list(coordinate)
            if coordinate[axis] + 1 < extent:
                step[axis] += 1
            elif periodic and extent > 2:
                step[axis] = 0
            else:
                continue
            neighbour = int(np.ravel_multi_index(step, extents))
            for spin in (0, 1):
                tau[2 * site + spin, 2 * neighbour + spin] = -s
                tau[2 * neighbour + spin, 2 * site + spin] = -s
        nu[2 * site, 2 * site + 1] = nu[2 * site + 1, 2 * site] = v / 2
    logger.info("Built Fermi-Hubbard lattice %s with %d modes", extents, n)
    return CoefficientPair(tau, nu)


def tightness_instance(kind: str, n: int, s: float = 1.0, w: float = 1.0,
                       u: float = 1.0, d: int = 2) -> CoefficientPair:
    """
    Hamiltonians of the lower-bound constructions

    dense: tau = (s/n) all-ones, nu = w on the top-left (n/2) x (n/2) block
    sparse: tau = u on the top-left d x d block, nu = w on the top-left (d/2) x (d/2) block
    """
    if n < 2 or n % 2:
        raise DataValidationError(f"Tightness instances need an even mode count, got {n}")
    tau = np.zeros((n, n))
    nu = np.zeros((n, n))
    if kind == "dense":
        tau[:, :] = s / n
        nu[: n // 2, : n // 2] = w
    elif kind == "sparse":
        if d < 2 or d % 2 or d > n // 2:
            raise DataValidationError(f"Sparse instance needs even d with 2 <= d <= n/2, got d={d}")
        tau[:d, :d] = u
        nu[: d // 2, : d // 2] = w
    else:
        raise DataValidationError(f"Unknown tightness instance kind {kind!r}")
    return CoefficientPair(tau, nu)


def random_pair(n: int, rng: np.random.Generator, sparsity: Optional[int] = None,
                scale: float = 1.0) -> CoefficientPair:
    """
    Random Hermitian tau and symmetric nu with Gaussian entries

    With sparsity d the support is the circular band of offsets
    +-1 .. +-d//2, plus the diagonal when d is odd.
    """
    if n < 1:
        raise DataValidationError(f"Mode count must be positive, got {n}")
    tau = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    tau = (tau + tau.conj().T) / 2
    nu = rng.normal(size=(n, n))
    nu = (nu + nu.T) / 2
    if sparsity is not None:
        if sparsity < 1:
            raise DataValidationError(f"Sparsity must be positive, got {sparsity}")
        offsets = np.subtract.outer(np.arange(n), np.arange(n)) % n
        distance = np.minimum(offsets, n - offsets)
        mask = (distance >= 1) & (distance <= sparsity // 2)
        if sparsity % 2:
            mask |= distance == 0
        tau = np.where(mask, tau, 0)
        nu = np.where(mask, nu, 0)
    return CoefficientPair(scale * tau, scale * nu)


######################################################################
#  F E R M I O N I C   F O U R I E R   T R A N S F O R M
######################################################################


def fourier_unitary(n: int, width: Optional[int] = None) -> np.ndarray:
    """Single-particle transform F_w on the first w modes, identity elsewhere"""
    width = n if width is None else width
    if not 1 <= width <= n:
        raise DataValidationError(f"Fourier width {width} out of range for {n} modes")
    unitary = np.eye(n, dtype=complex)
    indices = np.arange(width)
    unitary[:width, :width] = np.exp(2j * np.pi * np.outer(indices, indices) / width) / np.sqrt(width)
    return unitary


def fock_unitary(unitary: np.ndarray, sector: SectorBasis) -> np.ndarray:
    """
    Sector matrix of the many-body unitary induced by a single-particle unitary

    u = exp(-iK) with K from the complex Schur form of u; the many-body
    operator is exp(-i sum_jk K_jk A_j^dagger A_k).
    """
    unitary = np.asarray(unitary, dtype=complex)
    if unitary.shape != (sector.n, sector.n):
        raise DataValidationError(f"Single-particle unitary of shape {unitary.shape} does not fit {sector!r}")
    if not np.allclose(unitary.conj().T @ unitary, np.eye(sector.n), atol=1e-10):
        raise DataValidationError("Single-particle matrix is not unitary")
    triangular, basis = sla.schur(unitary, output="complex")
    angles = -np.angle(np.diag(triangular))
    generator = (basis * angles) @ basis.conj().T
    generator = (generator + generator.conj().T) / 2
    return linalg.unitary_from_hermitian(one_body_operator(generator, sector).matrix, 1.0)


@singledispatch
def ffft_conjugate(target, width: Optional[int] = None):
    """FFFT^dagger X FFFT for a sector operator, or tau -> F^dagger tau F for a pair"""
    raise DataValidationError(f"Cannot Fourier-transform a {type(target).__name__}")


@ffft_conjugate.register
def _conjugate_operator(target: SectorOperator, width: Optional[int] = None) -> SectorOperator:
    if not target.number_preserving:
        raise DataValidationError(f"FFFT conjugation needs a number-preserving operator, got {target!r}")
    sector = target.domain
    unitary = fock_unitary(fourier_unitary(sector.n, width), sector)
    return SectorOperator(sector, sector, unitary.conj().T @ target.matrix @ unitary)


@ffft_conjugate.register
def _conjugate_coefficients(target: CoefficientPair, width: Optional[int] = None) -> CoefficientPair:
    if np.any(target.nu != 0):
        raise DataValidationError(
            "The interaction has no coefficient form in the Fourier frame; conjugate the assembled V instead"
        )
    unitary = fourier_unitary(target.n, width)
    return CoefficientPair(unitary.conj().T @ target.tau @ unitary, target.nu)


def build_instance(spec: dict, rng: Optional[np.random.Generator] = None) -> CoefficientPair:
    """
    Builds a CoefficientPair from an instance document

    {"family": "random" | "hubbard" | "plane_wave" | "dense" | "sparse", ...}
    """
    try:
        family = spec["family"]
        if family == "random":
            rng = np.random.default_rng(spec.get("seed", 0)) if rng is None else rng
            return random_pair(int(spec["n"]), rng, spec.get("sparsity"), float(spec.get("scale", 1.0)))
        if family == "hubbard":
            return fermi_hubbard(spec["extents"], float(spec.get("s", 1.0)), float(spec.get("v", 1.0)),
                                 bool(spec.get("periodic", False)))
        if family == "plane_wave":
            return plane_wave(int(spec["n"]), float(spec["omega"]), int(spec["eta"]), spec.get("nuclei", ()))
        if family in ("dense", "sparse"):
            return tightness_instance(family, int(spec["n"]), float(spec.get("s", 1.0)),
                                      float(spec.get("w", 1.0)), float(spec.get("u", 1.0)),
                                      int(spec.get("d", 2)))
        if family == "pair":
            return CoefficientPair.deserialize(spec["pair"])
    except KeyError as error:
        raise DataValidationError("Invalid instance: missing " + error.args[0]) from error
    except (TypeError, ValueError, AttributeError) as error:
        raise DataValidationError("Invalid instance: " + str(error)) from error
    raise DataValidationError(f"Unknown instance family {family!r}")
