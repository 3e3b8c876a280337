"""Closed-form register sizes and gate counts of the qudit HHL circuit.

For a target precision of p decimal digits the clock needs p log_d(10)
qudits, the state register log_d(N) qudits and the UCR one ancilla. Register
sizes are rounded up; the real-valued sizes are kept alongside.
"""
import warnings
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from .errors import ConfigurationError

CEIL_TOL = 1e-9
TABLE3_NS = tuple(range(2, 21, 2))
# published state-register sizes by N_s: (2^m_b, m_b, 3^m_t, m_t)
PUBLISHED_TABLE3 = {
    2: (16, 4, 27, 3),
    4: (256, 8, 729, 6),
    6: (2048, 11, 2187, 7),
    8: (4096, 12, 6561, 8),
    10: (16384, 14, 19683, 9),
    12: (32768, 15, 59049, 10),
    14: (65536, 16, 177147, 11),
    16: (65536, 16, 177147, 11),
    18: (131072, 17, 531441, 12),
    20: (262144, 18, 1594323, 13),
}


@dataclass(frozen=True)
class ResourceEstimate:
    """Qudit and gate counts for one (p, d, N).

    Parameters
    ----------
    d : int
        Qudit dimension.
    p : int
        Decimal digits of precision.
    N : int
        Length of the solution vector.
    N_s : int or None
        Spin-orbital count N was derived from, if any.
    n_r : int
        Clock qudits.
    m : int
        State-register qudits.
    ancilla : int
        Always 1.
    total : int
        n_r + m + ancilla.
    cu_applications : int
        Applications of the base controlled-U in QPE, (d^n_r - 1)/(d - 1).
    iqft_two_qudit : int
        Controlled-phase plus swap gates of the inverse QFT.
    iqft_two_qudit_formula : float
        (n_r^2 - 1)/2, integral only for odd n_r.
    ucr_rotations : int
        Multi-controlled rotation slots, d^n_r.
    n_r_real, m_real : float
        Register sizes before rounding up.
    decomposition_order : int
        (d^2)^m, the order of magnitude of a generic unitary decomposition
        on the state register.
    """

    d: int
    p: int
    N: int
    N_s: int
    n_r: int
    m: int
    ancilla: int
    total: int
    cu_applications: int
    iqft_two_qudit: int
    iqft_two_qudit_formula: float
    ucr_rotations: int
    n_r_real: float
    m_real: float
    decomposition_order: int

    def __post_init__(self):
        if self.total != self.n_r + self.m + self.ancilla:
            raise ConfigurationError("total must equal n_r + m + ancilla.")


def _check_dim(d):
    if int(d) != d or d < 2:
        raise ConfigurationError(f"Qudit dimension must be an integer >= 2, got {d}.")


def clock_qudits_real(p, d):
    """p log_d(10) before rounding."""
    return p * np.log(10) / np.log(d)


def clock_qudits(p, d):
    """ceil(p log_d(10))."""
    if p < 1:
        raise ConfigurationError(f"Precision p must be >= 1, got {p}.")
    _check_dim(d)
    return int(np.ceil(clock_qudits_real(p, d) - CEIL_TOL))


def state_qudits(N, d):
    """Smallest m >= 1 with d^m >= N."""
    if N < 1:
        raise ConfigurationError(f"Vector length must be >= 1, got {N}.")
    _check_dim(d)
    m, size = 1, d
    while size < N:
        m, size = m + 1, size * d
    return m


def lcc_vector_length(N_s):
    """N_s^4, the single and double excitation count bound."""
    if N_s < 2 or N_s % 2:
        raise ConfigurationError(f"N_s must be an even integer >= 2, got {N_s}.")
    return int(N_s) ** 4


def qpe_cu_applications(n_r, d):
    """sum_k d^k = (d^n_r - 1)/(d - 1)."""
    if n_r < 1:
        raise ConfigurationError(f"n_r must be >= 1, got {n_r}.")
    return (d**n_r - 1) // (d - 1)


def iqft_two_qudit_count(n_r):
    """n_r(n_r - 1)/2 controlled phases plus floor(n_r/2) swaps."""
    if n_r < 1:
        raise ConfigurationError(f"n_r must be >= 1, got {n_r}.")
    return n_r * (n_r - 1) // 2 + n_r // 2


def iqft_two_qudit_formula(n_r):
    """(n_r^2 - 1)/2, the closed form that holds for odd n_r."""
    if n_r % 2 == 0:
        warnings.warn(
            f"(n_r^2 - 1)/2 is not an integer for even n_r = {n_r}; "
            f"the circuit count is {iqft_two_qudit_count(n_r)}."
        )
    return (n_r**2 - 1) / 2


def ucr_rotation_count(n_r, d):
    """d^n_r rotation slots, v = 0 included."""
    if n_r < 1:
        raise ConfigurationError(f"n_r must be >= 1, got {n_r}.")
    return d**n_r


def estimate(p, d, N=None, N_s=None):
    """ResourceEstimate for precision ``p`` and vector length N (or N_s^4)."""
    if N is None:
        if N_s is None:
            raise ConfigurationError("Either N or N_s must be given.")
        N = lcc_vector_length(N_s)
    n_r = clock_qudits(p, d)
    m = state_qudits(N, d)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        formula = iqft_two_qudit_formula(n_r)
    return ResourceEstimate(
        d=d,
        p=p,
        N=N,
        N_s=N_s,
        n_r=n_r,
        m=m,
        ancilla=1,
        total=n_r + m + 1,
        cu_applications=qpe_cu_applications(n_r, d),
        iqft_two_qudit=iqft_two_qudit_count(n_r),
        iqft_two_qudit_formula=formula,
        ucr_rotations=ucr_rotation_count(n_r, d),
        n_r_real=float(clock_qudits_real(p, d)),
        m_real=float(np.log(N) / np.log(d)),
        decomposition_order=(d * d) ** m,
    )


def compare_table(p_list, ns_list, dims=(2, 3)):
    """All ResourceEstimate rows for every (p, N_s, d).

    The ``total_difference`` column is the total of ``dims[0]`` minus the
    total of the row, per (p, N_s); with dims (2, 3) it is the number of
    qudits saved by qutrits.
    """
    p_list, ns_list, dims = list(p_list), list(ns_list), list(dims)
    if not p_list or not ns_list or not dims:
        raise ConfigurationError("compare_table needs nonempty p, N_s and dimension lists.")
    rows = [asdict(estimate(p, d, N_s=n_s)) for p in p_list for n_s in ns_list for d in dims]
    df = pd.DataFrame(rows)
    baseline = df[df["d"] == dims[0]].set_index(["p", "N_s"])["total"]
    df["total_difference"] = [
        baseline[(p, n_s)] - total for p, n_s, total in zip(df["p"], df["N_s"], df["total"])
    ]
    return df


def table3(ns_list=TABLE3_NS):
    """State-register sizes of qubits and qutrits versus N_s^4.

    The first six columns carry the published sizes where they are recorded
    and the ceilings otherwise. ``m_b_min`` and ``m_t_min`` are always the
    ceilings ceil(log_d N_s^4); ``agrees`` is False where a published size
    differs from them (the qutrit rows N_s = 14, 18 and 20).
    """
    rows = []
    for n_s in ns_list:
        N = lcc_vector_length(n_s)
        m_b, m_t = state_qudits(N, 2), state_qudits(N, 3)
        size_b, m_b_shown, size_t, m_t_shown = PUBLISHED_TABLE3.get(
            n_s, (2**m_b, m_b, 3**m_t, m_t)
        )
        rows.append(
            {
                "N_s": n_s,
                "N_s^4": N,
                "2^m_b": size_b,
                "m_b": m_b_shown,
                "3^m_t": size_t,
                "m_t": m_t_shown,
                "m_b_min": m_b,
                "m_t_min": m_t,
                "agrees": (m_b_shown, m_t_shown) == (m_b, m_t),
            }
        )
    return pd.DataFrame(rows)
