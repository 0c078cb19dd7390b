"""
Dense complex linear algebra kernel

Hermitian eigendecomposition, spectral norm, numerical radius,
Hermitian-generated unitaries and positive-semidefinite order checks.
Matrices are 2-D numpy arrays; the eigensolver is selected by the
EIGEN_SOLVER setting.
"""
import logging
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import unitary_group

from trotterlab import app
from trotterlab.common.errors import DataValidationError, NumericalError

logger = logging.getLogger("flask.app")


class HermitianEig(NamedTuple):
    """Ascending eigenvalues and the unitary of eigenvector columns"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_matrix(matrix) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2:
        raise DataValidationError(f"Expected a matrix, got an array of shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DataValidationError("Matrix has non-finite entries")
    return matrix


def _as_hermitian(matrix) -> np.ndarray:
    matrix = _as_matrix(matrix)
    if matrix.shape[0] != matrix.shape[1]:
        raise DataValidationError(f"Matrix of shape {matrix.shape} is not square")
    scale = max(1.0, float(np.max(np.abs(matrix), initial=0.0)))
    drift = float(np.max(np.abs(matrix - matrix.conj().T), initial=0.0))
    if drift > app.config["HERMITIAN_TOL"] * scale:
        raise DataValidationError(f"Matrix is not Hermitian (deviation {drift:.3e})")
    return (matrix + matrix.conj().T) / 2


######################################################################
#  E I G E N S O L V E R S
######################################################################


def _rotate(work: np.ndarray, vectors: np.ndarray, p: int, q: int) -> None:
    """One complex Jacobi rotation zeroing work[p, q] in place"""
    entry = work[p, q]
    magnitude = abs(entry)
    if magnitude == 0.0:
        return
    phase = np.conj(entry / magnitude)
    theta = (work[q, q].real - work[p, p].real) / (2.0 * magnitude)
    if theta == 0.0:
        tangent = 1.0
    else:
        tangent = np.sign(theta) / (abs(theta) + np.sqrt(1.0 + theta * theta))
    cosine = 1.0 / np.sqrt(1.0 + tangent * tangent)
    sine = tangent * cosine
    rotation = np.array([[cosine, sine], [-sine * phase, cosine * phase]], dtype=complex)
    pair = [p, q]
    work[:, pair] = work[:, pair] @ rotation
    work[pair, :] = rotation.conj().T @ work[pair, :]
    work[p, q] = work[q, p] = 0.0
    vectors[:, pair] = vectors[:, pair] @ rotation


def _off_diagonal(work: np.ndarray) -> float:
    return float(np.linalg.norm(work - np.diag(np.diag(work))))


def _jacobi_eig(matrix: np.ndarray):
    """Cyclic complex Jacobi sweeps until the off-diagonal part is negligible"""
    work = np.array(matrix, dtype=complex)
    size = work.shape[0]
    vectors = np.eye(size, dtype=complex)
    threshold = app.config["JACOBI_THRESHOLD"] * float(np.linalg.norm(work))
    sweeps = app.config["JACOBI_MAX_SWEEPS"]
    for _ in range(sweeps):
        if _off_diagonal(work) <= threshold:
            break
        for p in range(size - 1):
            for q in range(p + 1, size):
                _rotate(work, vectors, p, q)
    if _off_diagonal(work) > threshold:
        raise NumericalError(f"Jacobi eigensolver did not converge in {sweeps} sweeps")
    eigenvalues = np.real(np.diag(work))
    order = np.argsort(eigenvalues, kind="stable")
    return eigenvalues[order], vectors[:, order]


def _eigh(hermitian: np.ndarray):
    if app.config["EIGEN_SOLVER"] == "jacobi":
        return _jacobi_eig(hermitian)
    try:
        return np.linalg.eigh(hermitian)
    except np.linalg.LinAlgError as error:
        raise NumericalError(f"Eigensolver failed: {error}") from error


def _eigvalsh(hermitian: np.ndarray) -> np.ndarray:
    if hermitian.size == 0:
        return np.zeros(0)
    if app.config["EIGEN_SOLVER"] == "jacobi":
        return _jacobi_eig(hermitian)[0]
    try:
        return np.linalg.eigvalsh(hermitian)
    except np.linalg.LinAlgError as error:
        raise NumericalError(f"Eigensolver failed: {error}") from error


def hermitian_eig(matrix) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix with ascending eigenvalues"""
    hermitian = _as_hermitian(matrix)
    if hermitian.size == 0:
        return HermitianEig(np.zeros(0), np.zeros((0, 0), dtype=complex))
    eigenvalues, eigenvectors = _eigh(hermitian)
    return HermitianEig(eigenvalues, eigenvectors)


def hermitian_eigvalsh(matrix) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix"""
    return _eigvalsh(_as_hermitian(matrix))


######################################################################
#  N O R M S
######################################################################


def spectral_norm(matrix) -> float:
    """Largest singular value, the square root of the top eigenvalue of the Gram matrix"""
    matrix = _as_matrix(matrix)
    if matrix.size == 0:
        return 0.0
    if matrix.shape[0] < matrix.shape[1]:
        gram = matrix @ matrix.conj().T
    else:
        gram = matrix.conj().T @ matrix
    gram = (gram + gram.conj().T) / 2
    return float(np.sqrt(max(_eigvalsh(gram)[-1], 0.0)))


def numerical_radius(matrix) -> float:
    """
    max |<psi|A|psi>| over unit vectors

    The radius is the maximum over theta of the top eigenvalue of
    (e^{i theta} A + e^{-i theta} A^dagger)/2. A theta grid brackets the
    maximum and a bounded scalar search refines it.
    """
    matrix = _as_matrix(matrix)
    if matrix.shape[0] != matrix.shape[1]:
        raise DataValidationError(f"Matrix of shape {matrix.shape} is not square")
    if matrix.size == 0:
        return 0.0
    adjoint = matrix.conj().T

    def radius_at(theta: float) -> float:
        rotated = (np.exp(1j * theta) * matrix + np.exp(-1j * theta) * adjoint) / 2
        values = _eigvalsh((rotated + rotated.conj().T) / 2)
        return max(abs(values[0]), abs(values[-1]))

    points = app.config["RADIUS_GRID"]
    step = np.pi / points
    thetas = step * np.arange(points)
    samples = [radius_at(theta) for theta in thetas]
    best = int(np.argmax(samples))
    result = minimize_scalar(
        lambda theta: -radius_at(theta),
        bounds=(thetas[best] - step, thetas[best] + step),
        method="bounded",
        options={"maxiter": app.config["RADIUS_REFINE"], "xatol": 1e-12},
    )
    return float(max(samples[best], -result.fun))


######################################################################
#  U N I T A R I E S   A N D   O R D E R
######################################################################


def unitary_from_hermitian(matrix, t: float) -> np.ndarray:
    """e^{-itH} assembled from the eigendecomposition of H"""
    eigenvalues, eigenvectors = hermitian_eig(matrix)
    phases = np.exp(-1j * t * eigenvalues)
    return (eigenvectors * phases) @ eigenvectors.conj().T


def psd_order_holds(lower, upper, tol: float = 1e-9) -> bool:
    """True when upper - lower is positive semidefinite up to tol"""
    lower = _as_hermitian(lower)
    upper = _as_hermitian(upper)
    if lower.shape != upper.shape:
        raise DataValidationError(f"Shape mismatch {lower.shape} vs {upper.shape}")
    if lower.size == 0:
        return True
    return bool(_eigvalsh(upper - lower)[0] >= -tol)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary of the given dimension"""
    if dim < 1:
        raise DataValidationError(f"Unitary dimension {dim} must be positive")
    if dim == 1:
        phase = np.random.default_rng(seed).uniform(0, 2 * np.pi)
        return np.array([[np.exp(1j * phase)]])
    return np.asarray(unitary_group.rvs(dim, random_state=seed), dtype=complex).reshape(dim, dim)
