"""Gate constructors for qudits of dimension d.

Every gate is the d-dimensional generalization of the qutrit gate of the same
name, built with the root of unity ``omega_d = exp(2 pi i / d)``; for d = 3 the
matrices coincide entrywise with the usual ternary definitions.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError

UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-10
# asymmetry below this is rounding noise and is symmetrized silently
SYMMETRIZE_WARN_TOL = 1e-13


def omega(dim):
    """Primitive d-th root of unity."""
    return np.exp(2j * np.pi / dim)


def _check_dim(dim):
    if int(dim) != dim or dim < 2:
        raise ConfigurationError(f"Qudit dimension must be an integer >= 2, got {dim}.")
    return int(dim)


def is_unitary(matrix, tol=UNITARY_TOL):
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    return np.allclose(
        matrix.conj().T @ matrix, np.eye(matrix.shape[0]), rtol=0.0, atol=tol
    )


@dataclass(frozen=True, eq=False)
class GateSpec:
    """A unitary acting on ``arity`` qudits of dimension ``dim``.

    Parameters
    ----------
    dim : int
        Qudit dimension d.
    arity : int
        Number of qudits the gate acts on.
    matrix : numpy.ndarray
        Unitary of shape (d**arity, d**arity). The first qudit of the wiring
        is the most significant digit of the row/column index.
    label : str
        Human-readable name.
    """

    dim: int
    arity: int
    matrix: np.ndarray = field(repr=False)
    label: str = "U"

    def __post_init__(self):
        _check_dim(self.dim)
        if self.arity < 1:
            raise ConfigurationError(f"Gate arity must be >= 1, got {self.arity}.")
        matrix = np.array(self.matrix, dtype=complex)
        size = self.dim**self.arity
        if matrix.shape != (size, size):
            raise ConfigurationError(
                f"Gate '{self.label}' expects a {size}x{size} matrix, got {matrix.shape}."
            )
        if not is_unitary(matrix):
            raise DomainError(f"Gate '{self.label}' is not unitary within {UNITARY_TOL}.")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    def dagger(self):
        label = self.label[:-1] if self.label.endswith("†") else self.label + "†"
        return GateSpec(self.dim, self.arity, self.matrix.conj().T, label)

    def power(self, k):
        """Integer matrix power, negative powers through the adjoint."""
        base = self.matrix if k >= 0 else self.matrix.conj().T
        return GateSpec(
            self.dim,
            self.arity,
            np.linalg.matrix_power(base, abs(int(k))),
            f"{self.label}^{k}",
        )


def unitary_gate(matrix, dim, label="U"):
    """Wraps an arbitrary unitary acting on k qudits as a GateSpec."""
    matrix = np.asarray(matrix, dtype=complex)
    dim = _check_dim(dim)
    size = matrix.shape[0]
    arity, reach = 0, 1
    while reach < size:
        arity, reach = arity + 1, reach * dim
    if arity < 1 or reach != size:
        raise ConfigurationError(
            f"Matrix of size {size} is not a power of the qudit dimension {dim}."
        )
    return GateSpec(dim, arity, matrix, label)


def x_gate(dim):
    """Cyclic increment X|k> = |k+1 mod d>."""
    dim = _check_dim(dim)
    return GateSpec(dim, 1, np.roll(np.eye(dim), shift=1, axis=0), "X")


def z_gate(dim):
    """Clock gate Z|k> = omega_d^k |k>."""
    dim = _check_dim(dim)
    return GateSpec(dim, 1, np.diag(omega(dim) ** np.arange(dim)), "Z")


def h_gate(dim):
    """Generalized Hadamard, entry (j, k) = omega_d^(jk) / sqrt(d).

    For d > 2 this gate is not self-inverse; use ``h_gate(d).dagger()``.
    """
    dim = _check_dim(dim)
    idx = np.arange(dim)
    return GateSpec(dim, 1, omega(dim) ** np.outer(idx, idx) / np.sqrt(dim), "H")


def phase_gate(dim, l):
    """P_l with diagonal entries exp(2 pi i k / d^l), k = 0..d-1."""
    dim = _check_dim(dim)
    if l < 1:
        raise ConfigurationError(f"Phase gate index l must be >= 1, got {l}.")
    phases = np.exp(2j * np.pi * np.arange(dim) / dim**l)
    return GateSpec(dim, 1, np.diag(phases), f"P{l}")


def planar_rotation(dim, i, j, theta):
    """Real rotation by theta/2 in the (i, j) plane, identity on other levels.

    Column i receives ``+sin(theta/2)`` on row j, so that
    R_ij(theta)|i> = cos(theta/2)|i> + sin(theta/2)|j>.
    """
    dim = _check_dim(dim)
    if i == j:
        raise ConfigurationError(f"Rotation plane needs two distinct levels, got ({i}, {j}).")
    if not (0 <= i < dim and 0 <= j < dim):
        raise ConfigurationError(f"Rotation levels ({i}, {j}) out of range for d={dim}.")
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    matrix = np.eye(dim, dtype=complex)
    matrix[i, i] = c
    matrix[j, j] = c
    matrix[j, i] = s
    matrix[i, j] = -s
    return GateSpec(dim, 1, matrix, f"R{i}{j}({theta:.4f})")


def controlled_gate(base, label=None):
    """Power-mode controlled gate: control digit j applies base^j to the target.

    The control is the first (most significant) qudit of the 2-qudit matrix.
    """
    if base.arity != 1:
        raise ConfigurationError("controlled_gate expects a single-qudit base gate.")
    d = base.dim
    matrix = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        matrix[j * d : (j + 1) * d, j * d : (j + 1) * d] = np.linalg.matrix_power(
            base.matrix, j
        )
    return GateSpec(d, 2, matrix, label or f"C{base.label}")


def cx_gate(dim):
    """SUM gate |j, k> -> |j, j + k mod d>."""
    return controlled_gate(x_gate(dim), "CX")


def controlled_phase(dim, l):
    """CP_l: control digit j applies P_l^j to the target."""
    return controlled_gate(phase_gate(dim, l), f"CP{l}")


def swap_gate(dim):
    """Exchange |j, k> -> |k, j>."""
    dim = _check_dim(dim)
    matrix = np.zeros((dim * dim, dim * dim))
    for j in range(dim):
        for k in range(dim):
            matrix[k * dim + j, j * dim + k] = 1.0
    return GateSpec(dim, 2, matrix, "SWAP")


def hermitian_spectrum(A, tol=HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    A : array_like
        Square matrix, Hermitian within ``tol``. It is symmetrized before use,
        with a warning if the asymmetry is above rounding noise.
    tol : float, optional
        Largest accepted entrywise deviation from ``A == A^dagger``.

    Returns
    -------
    eigenvalues : numpy.ndarray
        Ascending real eigenvalues.
    eigenvectors : numpy.ndarray
        Columns are the matching orthonormal eigenvectors.

    Raises
    ------
    DomainError
        If ``A`` is not square or not Hermitian within ``tol``.
    """
    A = np.atleast_2d(np.asarray(A))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"Expected a square matrix, got shape {A.shape}.")
    deviation = np.max(np.abs(A - A.conj().T)) if A.size else 0.0
    if deviation > tol:
        raise DomainError(f"Matrix is not Hermitian (max |A - A^dagger| = {deviation:.3e}).")
    if deviation > SYMMETRIZE_WARN_TOL:
        warnings.warn(
            f"Matrix symmetrized from a small asymmetry (max |A - A^dagger| = {deviation:.3e})."
        )
    A = 0.5 * (A + A.conj().T)
    return np.linalg.eigh(A)


def hermitian_evolution(A, t):
    """U = exp(i A t) through the eigendecomposition A = V diag(w) V^dagger.

    Parameters
    ----------
    A : array_like
        Hermitian matrix.
    t : float
        Evolution time.

    Returns
    -------
    numpy.ndarray
        The unitary exp(i A t).
    """
    w, V = hermitian_spectrum(A)
    return (V * np.exp(1j * w * t)) @ V.conj().T
