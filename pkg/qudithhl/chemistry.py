"""Correlation energies from the linearized coupled-cluster equations.

A CI Hamiltonian H in the basis {Phi_0, chi_1, ..., chi_M} gives the linear
system A t = b with A = H[1:, 1:] - H[0, 0] I and b = -H[1:, 0]; the
correlation energy is E_corr = -b^T A^-1 b. HHL solves the system and the
energy is read from the success probability and the swap-test overlap.
"""
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    IngestionError,
    InternalConsistencyError,
    ParseError,
)
from .gates import planar_rotation
from .hhl import HHLConfig, hhl_solve
from .job_run_local import job_run_local
from .statevector import apply_gate, basis_state
from .tools import parse_matrix_file

SYMMETRY_TOL = 1e-10
INGESTION_SYMMETRY_TOL = 1e-8
ENERGY_CROSS_CHECK_TOL = 1e-8


@dataclass
class CiHamiltonian:
    """CI matrix of one geometry.

    Parameters
    ----------
    R : float
        Bond length label in Bohr.
    matrix : numpy.ndarray
        Real symmetric (M+1) x (M+1) matrix in Hartree, reference first.
    e_hf : float, optional
        Reference (Hartree-Fock) energy. If None, H[0, 0] is used.
    source : str, optional
        File the matrix was read from.
    """

    R: float
    matrix: np.ndarray = field(repr=False)
    e_hf: float = None
    source: str = None

    def __post_init__(self):
        self.matrix = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        n, n2 = self.matrix.shape
        if n != n2 or n < 2:
            raise DomainError(
                f"CI matrix must be square with at least 2 rows, got {self.matrix.shape}."
            )
        asymmetry = np.max(np.abs(self.matrix - self.matrix.T))
        if asymmetry > SYMMETRY_TOL:
            raise DomainError(f"CI matrix is not symmetric (max |H - H^T| = {asymmetry:.3e}).")

    @property
    def M(self):
        return self.matrix.shape[0] - 1

    @property
    def reference_energy(self):
        return float(self.matrix[0, 0]) if self.e_hf is None else float(self.e_hf)


@dataclass
class LccSystem:
    """The linear system A t = b of one geometry (Hartree)."""

    A: np.ndarray = field(repr=False)
    b: np.ndarray
    b_norm: float
    provenance: str = None

    def __post_init__(self):
        if np.max(np.abs(self.A - self.A.T)) > SYMMETRY_TOL:
            raise DomainError("LCC matrix A is not symmetric.")
        if self.b_norm == 0.0:
            raise DomainError("LCC right-hand side b is zero.")


@dataclass
class EnergyResult:
    """Energies of one geometry, Hartree.

    ``e_corr`` is the HHL correlation energy; ``e_corr_lccsd`` and
    ``e_corr_cisd`` are the classical benchmarks. When the geometry failed,
    ``error`` holds the message and the energies are NaN.
    """

    R: float
    e_hf: float
    e_corr: float = np.nan
    k: float = np.nan
    overlap: float = np.nan
    e_corr_lccsd: float = np.nan
    e_corr_cisd: float = np.nan
    theta: float = None
    p_success: float = np.nan
    config: dict = field(default_factory=dict)
    error: str = None
    source: str = None

    @property
    def e_total(self):
        return self.e_hf + self.e_corr

    @property
    def e_lccsd(self):
        return self.e_hf + self.e_corr_lccsd

    @property
    def e_cisd(self):
        return self.e_hf + self.e_corr_cisd

    def as_record(self):
        """Flat row for report tables."""
        record = {
            "R": self.R,
            "E_HF": self.e_hf,
            "E_CISD": self.e_cisd,
            "E_LCCSD": self.e_lccsd,
            "E_HHL": self.e_total,
            "E_corr_CISD": self.e_corr_cisd,
            "E_corr_LCCSD": self.e_corr_lccsd,
            "E_corr_HHL": self.e_corr,
            "k": self.k,
            "overlap": self.overlap,
            "p_success": self.p_success,
            "theta": np.nan if self.theta is None else self.theta,
        }
        record.update({f"config/{key}": value for key, value in self.config.items()})
        record["source"] = self.source
        record["error"] = self.error
        return record


def load_ci_hamiltonian(path):
    """Reads a CI Hamiltonian file.

    Format: ``dim <M+1>``, ``R <bohr>``, optional ``ehf <hartree>``, then the
    full (M+1) x (M+1) matrix row by row. ``#`` starts a comment.

    Raises
    ------
    ParseError
        Malformed file, with the line number.
    IngestionError
        Matrix asymmetric beyond 1e-8, or fewer than 2 rows.
    """
    headers, matrix = parse_matrix_file(path)
    if "r" not in headers:
        raise ParseError(path, 0, "missing 'R' header")
    if matrix.shape[0] < 2:
        raise IngestionError(f"{path}: a CI matrix needs at least 2 rows.")
    asymmetry = np.max(np.abs(matrix - matrix.T))
    if asymmetry > INGESTION_SYMMETRY_TOL:
        raise IngestionError(f"{path}: matrix is not symmetric (max |H - H^T| = {asymmetry:.3e}).")
    return CiHamiltonian(
        R=headers["r"], matrix=0.5 * (matrix + matrix.T), e_hf=headers.get("ehf"), source=path
    )


def load_ci_directory(path):
    """Reads every CI file of a directory, sorted by file name.

    Returns
    -------
    hamiltonians : list of CiHamiltonian
        Successfully read files, sorted by R.
    failures : list of (str, str)
        File path and error message of the rejected files.
    """
    if not os.path.isdir(path):
        raise IngestionError(f"{path} is not a directory.")
    files = sorted(
        os.path.join(path, name)
        for name in os.listdir(path)
        if not name.startswith(".") and os.path.isfile(os.path.join(path, name))
    )
    if not files:
        raise ConfigurationError(f"No CI Hamiltonian files found in {path}.")
    hamiltonians, failures = [], []
    for file in files:
        try:
            hamiltonians.append(load_ci_hamiltonian(file))
        except (IngestionError, OSError, UnicodeDecodeError) as e:
            failures.append((file, str(e)))
    hamiltonians.sort(key=lambda h: h.R)
    return hamiltonians, failures


def build_lcc_system(h: CiHamiltonian, shift=True):
    """Slices the LCC linear system out of a CI matrix.

    Parameters
    ----------
    h : CiHamiltonian
        The CI matrix.
    shift : bool, optional
        Subtract H[0, 0] from the diagonal of A (normal ordering). Default True.

    Returns
    -------
    LccSystem

    Raises
    ------
    DomainError
        If b = 0 or A is not positive-definite.
    """
    H = h.matrix
    A = H[1:, 1:].copy()
    if shift:
        A -= H[0, 0] * np.eye(h.M)
    b = -H[1:, 0].copy()
    b_norm = float(np.linalg.norm(b))
    label = h.source or f"R={h.R}"
    if b_norm == 0.0:
        raise DomainError(f"{label}: b = 0, the reference does not couple to any excitation.")
    lambda_min = float(np.linalg.eigvalsh(A)[0])
    if lambda_min <= 0.0:
        raise DomainError(f"{label}: A is not positive-definite (lambda_min = {lambda_min:.6g}).")
    return LccSystem(A=A, b=b, b_norm=b_norm, provenance=label)


def isometry_prep(theta):
    """R_02(theta)|0> = cos(theta/2)|0> + sin(theta/2)|2> on one qutrit."""
    return apply_gate(basis_state(3, 1, 0), planar_rotation(3, 0, 2, theta), [0])


def isometry_angle(b):
    """Angle theta with isometry_prep(theta) = b/|b| up to a global sign.

    Raises
    ------
    DomainError
        Unless b is a nonzero real 2-vector with components of equal sign.
    """
    b = np.asarray(b)
    if b.shape != (2,) or np.iscomplexobj(b):
        raise DomainError(f"The one-qutrit isometry encodes real 2-vectors, got shape {b.shape}.")
    if not np.any(b):
        raise DomainError("Cannot encode the zero vector.")
    if b[0] * b[1] < 0:
        raise DomainError(f"Components of b = {b} have opposite signs.")
    return float(2 * np.arctan2(abs(b[1]), abs(b[0])))


def classical_benchmarks(h: CiHamiltonian, shift=True):
    """Classical correlation energies (E_corr^LCCSD, E_corr^CISD).

    LCCSD from the direct solve of A t = b; CISD as the lowest eigenvalue of
    H minus H[0, 0].
    """
    system = build_lcc_system(h, shift=shift)
    e_lccsd = -float(system.b @ np.linalg.solve(system.A, system.b))
    e_cisd = float(np.linalg.eigvalsh(h.matrix)[0] - h.matrix[0, 0])
    return e_lccsd, e_cisd


def correlation_energy(system: LccSystem, solution, R=np.nan, e_hf=0.0):
    """E_corr = -k |<b|x_tilde>| with k = |x_un| |b_un|^2, |x_un| = sqrt(P)/C_eff.

    Also evaluates -b^T x_vector and checks the two agree.

    Raises
    ------
    InternalConsistencyError
        If the two forms differ by more than 1e-8.
    """
    k = solution.k
    e_corr = -k * solution.overlap
    e_direct = -float(np.real(np.vdot(system.b, solution.x_vector)))
    if abs(e_corr - e_direct) > ENERGY_CROSS_CHECK_TOL:
        raise InternalConsistencyError(
            f"E_corr from the overlap ({e_corr:.12f}) and from b^T x ({e_direct:.12f}) disagree."
        )
    config = solution.config.to_dict() if solution.config is not None else {}
    return EnergyResult(
        R=R,
        e_hf=e_hf,
        e_corr=e_corr,
        k=k,
        overlap=solution.overlap,
        p_success=solution.p_success,
        config=config,
        source=system.provenance,
    )


def solve_geometry(h: CiHamiltonian, config: HHLConfig, shift=True, use_isometry=True):
    """HHL correlation energy and classical benchmarks of one geometry."""
    system = build_lcc_system(h, shift=shift)
    theta, initial_state, layout = None, None, None
    if use_isometry and config.dim == 3 and h.M == 2:
        try:
            theta = isometry_angle(system.b)
        except DomainError:
            theta = None
        else:
            initial_state, layout = isometry_prep(theta), [0, 2]
    solution = hhl_solve(
        system.A, system.b, config, initial_state=initial_state, layout=layout
    )
    result = correlation_energy(system, solution, R=h.R, e_hf=h.reference_energy)
    e_lccsd, e_cisd = classical_benchmarks(h, shift=shift)
    return replace(result, e_corr_lccsd=e_lccsd, e_corr_cisd=e_cisd, theta=theta)


def _geometry_worker(args):
    h, config, shift, use_isometry = args
    try:
        return solve_geometry(h, config, shift=shift, use_isometry=use_isometry)
    except (ValueError, RuntimeError) as e:
        return EnergyResult(
            R=h.R,
            e_hf=h.reference_energy,
            config=config.to_dict(),
            error=f"{type(e).__name__}: {e}",
            source=h.source,
        )


def pec_sweep(hamiltonians, config: HHLConfig, shift=True, use_isometry=True, n_concurrent_jobs=1):
    """One EnergyResult per geometry, failures isolated.

    Parameters
    ----------
    hamiltonians : list of CiHamiltonian
        Geometries of the potential energy curve.
    config : HHLConfig
        Shared run parameters.
    shift : bool, optional
        Normal-ordering shift of A, see ``build_lcc_system``.
    use_isometry : bool, optional
        Prepare b with R_02(theta) when d = 3 and M = 2. Default True.
    n_concurrent_jobs : int, optional
        Parallel workers, see ``job_run_local``. Default 1.

    Returns
    -------
    list of EnergyResult
        Same order as ``hamiltonians``; failed geometries carry ``error``.
    """
    hamiltonians = list(hamiltonians)
    if not hamiltonians:
        raise ConfigurationError("pec_sweep needs at least one geometry.")
    jobs = [(h, config, shift, use_isometry) for h in hamiltonians]
    results = job_run_local(_geometry_worker, jobs, n_concurrent_jobs, verbose=len(jobs) > 1)
    results = [
        r
        if r is not None
        else EnergyResult(R=h.R, e_hf=h.reference_energy, error="interrupted", source=h.source)
        for r, h in zip(results, hamiltonians)
    ]
    failures = [r for r in results if r.error is not None]
    print(f"Geometries solved: {len(results) - len(failures)}/{len(results)}")
    for r in failures:
        print(f"  R = {r.R}: {r.error}")
    return results
