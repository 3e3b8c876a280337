"""Dense statevectors for registers of n qudits of a common dimension d.

Qudit 0 is the most significant digit of the basis index, so the basis state
|j_1, j_2, ..., j_n> sits at index sum_k j_k d^(n-k). Gate application works on
the amplitude vector reshaped to an n-axis tensor and never builds d^n x d^n
matrices.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    InternalConsistencyError,
    PostSelectionError,
)
from .gates import GateSpec

NORM_TOL = 1e-10
CONSTRUCTION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Statevector:
    """Amplitudes of an n-qudit register.

    Parameters
    ----------
    dim : int
        Qudit dimension d (>= 2).
    n_qudits : int
        Register size n.
    amplitudes : numpy.ndarray
        Complex vector of length d**n. Stored read-only; every operation
        returns a new Statevector.
    """

    dim: int
    n_qudits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise DomainError(f"Qudit dimension must be an integer >= 2, got {self.dim}.")
        if self.n_qudits < 1:
            raise DomainError(f"A register needs at least one qudit, got {self.n_qudits}.")
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.size != self.dim**self.n_qudits:
            raise DomainError(
                f"Expected {self.dim ** self.n_qudits} amplitudes for {self.n_qudits} "
                f"qudits of dimension {self.dim}, got {amplitudes.size}."
            )
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol=NORM_TOL):
        return abs(self.norm - 1.0) <= tol

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def _replace(self, amplitudes):
        return Statevector(self.dim, self.n_qudits, amplitudes)


def basis_digits(index, dim, n):
    """Base-d digits of ``index``, most significant first."""
    if not 0 <= index < dim**n:
        raise DomainError(f"Index {index} out of range for {n} qudits of dimension {dim}.")
    digits = []
    for _ in range(n):
        index, digit = divmod(index, dim)
        digits.append(digit)
    return tuple(reversed(digits))


def basis_index(digits, dim):
    """Inverse of ``basis_digits``."""
    value = 0
    for digit in digits:
        if not 0 <= digit < dim:
            raise DomainError(f"Digit {digit} out of range for dimension {dim}.")
        value = value * dim + int(digit)
    return value


def basis_state(dim, n, index):
    """|index> on n qudits of dimension d."""
    if not 0 <= index < dim**n:
        raise DomainError(f"Index {index} out of range [0, {dim ** n}).")
    amplitudes = np.zeros(dim**n, dtype=complex)
    amplitudes[index] = 1.0
    return Statevector(dim, n, amplitudes)


def amplitude_encode(dim, vec):
    """Encodes a classical vector as normalized amplitudes.

    Parameters
    ----------
    dim : int
        Qudit dimension d.
    vec : array_like
        Real or complex vector of length N.

    Returns
    -------
    state : Statevector
        ``vec / ||vec||`` zero-padded to d**m, m = ceil(log_d N) (at least 1).
    norm : float
        The normalization constant ||vec||.

    Raises
    ------
    DomainError
        If ``vec`` is empty or zero.
    """
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(vec))
    if vec.size == 0 or norm == 0.0:
        raise DomainError("Cannot amplitude-encode a zero vector.")
    m, size = 1, dim
    while size < vec.size:
        m, size = m + 1, size * dim
    amplitudes = np.zeros(size, dtype=complex)
    amplitudes[: vec.size] = vec / norm
    amplitudes /= np.linalg.norm(amplitudes)
    if abs(np.linalg.norm(amplitudes) - 1.0) > CONSTRUCTION_TOL:
        raise InternalConsistencyError("Encoded amplitudes are not normalized.")
    return Statevector(dim, m, amplitudes), norm


def tensor(a, b):
    """a (x) b with ``a`` on the high-order qudits."""
    if a.dim != b.dim:
        raise DomainError(f"Cannot join registers of dimension {a.dim} and {b.dim}.")
    return Statevector(a.dim, a.n_qudits + b.n_qudits, np.kron(a.amplitudes, b.amplitudes))


def _check_wires(state, wires):
    wires = [int(w) for w in wires]
    if len(set(wires)) != len(wires):
        raise ConfigurationError(f"Wires {wires} overlap.")
    for w in wires:
        if not 0 <= w < state.n_qudits:
            raise ConfigurationError(
                f"Wire {w} out of range for a register of {state.n_qudits} qudits."
            )
    return wires


def _contract(psi, matrix, targets, dim):
    """Applies ``matrix`` to the ``targets`` axes of the tensor ``psi``."""
    k = len(targets)
    op = np.asarray(matrix).reshape((dim,) * (2 * k))
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), list(targets)))
    return np.moveaxis(out, list(range(k)), list(targets))


def apply_matrix(state, matrix, targets):
    """Applies a d^k x d^k matrix to the ordered ``targets`` wires."""
    targets = _check_wires(state, targets)
    matrix = np.asarray(matrix)
    if matrix.shape != (state.dim ** len(targets),) * 2:
        raise ConfigurationError(
            f"A {matrix.shape} matrix cannot act on {len(targets)} qudits of dimension {state.dim}."
        )
    psi = state.amplitudes.reshape((state.dim,) * state.n_qudits)
    return state._replace(_contract(psi, matrix, targets, state.dim).reshape(-1))


def apply_gate(state, gate: GateSpec, targets):
    """Applies ``gate`` to ``targets``, identity elsewhere.

    Raises
    ------
    ConfigurationError
        On dimension or arity mismatch, or overlapping/out-of-range targets.
    """
    if np.isscalar(targets):
        targets = [targets]
    if gate.dim != state.dim:
        raise ConfigurationError(
            f"Gate '{gate.label}' has dimension {gate.dim}, register has {state.dim}."
        )
    if gate.arity != len(targets):
        raise ConfigurationError(
            f"Gate '{gate.label}' acts on {gate.arity} qudits, {len(targets)} targets given."
        )
    return apply_matrix(state, gate.matrix, targets)


def apply_controlled(state, gate: GateSpec, control, target, mode="power", value=None):
    """Applies ``gate`` to ``target`` conditioned on the ``control`` digit.

    Parameters
    ----------
    state : Statevector
        Input register.
    gate : GateSpec
        Base gate; its arity must match the number of target wires.
    control : int
        Control wire.
    target : int or sequence of int
        Target wire(s).
    mode : str, optional
        ``"power"``: control digit j applies ``gate``^j. ``"select"``: the gate
        is applied only when the control reads ``value``. Default "power".
    value : int, optional
        Selected control digit, required for ``mode="select"``.

    Returns
    -------
    Statevector
    """
    targets = [target] if np.isscalar(target) else list(target)
    _check_wires(state, [control] + targets)
    if gate.dim != state.dim or gate.arity != len(targets):
        raise ConfigurationError(
            f"Gate '{gate.label}' (d={gate.dim}, arity {gate.arity}) does not fit "
            f"{len(targets)} targets of dimension {state.dim}."
        )
    d = state.dim
    if mode == "power":
        blocks = {
            j: np.linalg.matrix_power(gate.matrix, j) for j in range(1, d)
        }
    elif mode == "select":
        if value is None or not 0 <= value < d:
            raise ConfigurationError(f"Select mode needs a control value in [0, {d}), got {value}.")
        blocks = {int(value): gate.matrix}
    else:
        raise ConfigurationError(f"Unknown control mode '{mode}'.")
    return apply_blocks(state, blocks, control, targets)


def apply_blocks(state, blocks, control, targets):
    """Applies ``blocks[j]`` to ``targets`` on the slice where ``control`` reads j.

    Control digits absent from ``blocks`` are left untouched.
    """
    d, n = state.dim, state.n_qudits
    psi = state.amplitudes.reshape((d,) * n).copy()
    sub_targets = [t - (t > control) for t in targets]
    for j, matrix in blocks.items():
        index = [slice(None)] * n
        index[control] = j
        psi[tuple(index)] = _contract(psi[tuple(index)], matrix, sub_targets, d)
    return state._replace(psi.reshape(-1))


def controlled_swap(state, control, value, register_a, register_b):
    """Swaps two equal-length registers when ``control`` reads ``value``."""
    register_a, register_b = list(register_a), list(register_b)
    if len(register_a) != len(register_b):
        raise ConfigurationError("Swapped registers must have the same length.")
    _check_wires(state, [control] + register_a + register_b)
    d, n = state.dim, state.n_qudits
    psi = state.amplitudes.reshape((d,) * n).copy()
    index = [slice(None)] * n
    index[control] = value
    perm = list(range(n - 1))
    for a, b in zip(register_a, register_b):
        a, b = a - (a > control), b - (b > control)
        perm[a], perm[b] = b, a
    psi[tuple(index)] = np.transpose(psi[tuple(index)], perm).copy()
    return state._replace(psi.reshape(-1))


def inner_product(a, b):
    """<a|b>, conjugate-linear in ``a``."""
    if a.dim != b.dim or a.n_qudits != b.n_qudits:
        raise DomainError(
            f"Cannot take <a|b> of registers ({a.dim}, {a.n_qudits}) and ({b.dim}, {b.n_qudits})."
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def marginal_probabilities(state, qudits):
    """Born distribution of a subset of qudits.

    The returned vector is indexed by the base-d value of the listed qudits,
    the first listed qudit being the most significant.
    """
    qudits = _check_wires(state, qudits)
    d, n = state.dim, state.n_qudits
    probs = state.probabilities().reshape((d,) * n)
    rest = [q for q in range(n) if q not in qudits]
    probs = probs.sum(axis=tuple(rest)) if rest else probs
    # remaining axes are in ascending wire order
    order = sorted(qudits)
    probs = np.moveaxis(probs, [order.index(q) for q in qudits], list(range(len(qudits))))
    return probs.reshape(-1)


def slice_amplitudes(state, qudits, digits):
    """Amplitudes of the remaining qudits with ``qudits`` fixed to ``digits``."""
    qudits = _check_wires(state, qudits)
    if len(digits) != len(qudits):
        raise ConfigurationError("One digit per fixed qudit is required.")
    d, n = state.dim, state.n_qudits
    index = [slice(None)] * n
    for q, digit in zip(qudits, digits):
        if not 0 <= digit < d:
            raise DomainError(f"Outcome {digit} out of range for dimension {d}.")
        index[q] = int(digit)
    return state.amplitudes.reshape((d,) * n)[tuple(index)].reshape(-1).copy()


def project_and_renormalize(state, qudit, outcome):
    """Projects ``qudit`` on |outcome> and renormalizes.

    Returns
    -------
    probability : float
        Born probability of the outcome.
    state : Statevector
        Post-measurement state on the same register.

    Raises
    ------
    PostSelectionError
        If the outcome has zero probability.
    """
    return project_register(state, [qudit], [outcome])


def project_register(state, qudits, digits):
    """Joint projection of several qudits, see ``project_and_renormalize``."""
    qudits = _check_wires(state, qudits)
    if len(digits) != len(qudits):
        raise ConfigurationError("One digit per projected qudit is required.")
    d, n = state.dim, state.n_qudits
    for digit in digits:
        if not 0 <= digit < d:
            raise DomainError(f"Outcome {digit} out of range for dimension {d}.")
    psi = state.amplitudes.reshape((d,) * n)
    mask = np.zeros_like(psi, dtype=bool)
    index = [slice(None)] * n
    for q, digit in zip(qudits, digits):
        index[q] = int(digit)
    mask[tuple(index)] = True
    projected = np.where(mask, psi, 0.0).reshape(-1)
    probability = float(np.vdot(projected, projected).real)
    if probability <= 0.0:
        raise PostSelectionError(
            f"Outcome {tuple(digits)} on qudits {tuple(qudits)} has zero probability."
        )
    return probability, state._replace(projected / np.sqrt(probability))
