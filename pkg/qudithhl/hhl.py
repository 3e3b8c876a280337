"""HHL linear-system solver on qudits of dimension d.

The register is laid out most-significant first as
[ancilla | system (m qudits) | clock (n_r qudits)]: QPE writes the eigenphases
of U = exp(iAt) into the clock, a uniformly controlled rotation moves the
ancilla towards |j> with amplitude C/lambda, inverse QPE uncomputes the clock
and the ancilla is post-selected on |j> (plane (i, j), default (0, 1)).
"""
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import yaml

from .circuit import Circuit, UniformlyControlledRotation
from .errors import (
    ConfigurationError,
    DomainError,
    InternalConsistencyError,
    InversionConstantError,
    PostSelectionError,
)
from .gates import h_gate, hermitian_evolution, hermitian_spectrum
from .qft_qpe import build_qpe
from .statevector import (
    Statevector,
    amplitude_encode,
    apply_gate,
    basis_state,
    controlled_swap,
    inner_product,
    marginal_probabilities,
    slice_amplitudes,
    tensor,
)

# b^T x of the published qutrit runs of the built-in systems, by n_r
TOY_PUBLISHED_BX = {
    "diag": {3: 2.1051, 4: 2.5555, 5: 2.6056, 6: 2.7036},
    "nondiag": {2: 1.69272, 3: 1.70506, 4: 1.72855, 5: 1.73218},
}
C_EXPANSION_METHODS = ("none", "truncate")
RATIO_POLICIES = ("raise", "clip", "skip")
RATIO_TOL = 1e-12
SWAP_TEST_TOL = 1e-9


@dataclass
class HHLConfig:
    """Free parameters of one HHL run.

    Parameters
    ----------
    dim : int
        Qudit dimension d (2 for qubits, 3 for qutrits).
    n_r : int
        Number of clock qudits.
    C : float
        Inversion constant, in the units of the eigenvalues of A.
    t : float, optional
        Evolution time of U = exp(iAt). By default 2 pi.
    c_expansion : str, optional
        "none" uses C as given; "truncate" keeps the first n_r base-d digits
        of the grid phase C t / 2 pi. ``True``/``False`` are accepted as
        aliases. By default "none".
    rotation_plane : tuple, optional
        Ancilla levels (i, j); the ancilla starts in |i> and success is |j>.
        By default (0, 1).
    ratio_policy : str, optional
        What to do when C_eff exceeds a grid eigenvalue: "raise" an
        InversionConstantError before execution, "clip" the ratio at 1
        (rotation angle pi) or "skip" the rotation on those clock values
        (angle 0). By default "raise".
    """

    dim: int
    n_r: int
    C: float
    t: float = 2 * np.pi
    c_expansion: str = "none"
    rotation_plane: tuple = (0, 1)
    ratio_policy: str = "raise"

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ConfigurationError(f"dim must be an integer >= 2, got {self.dim}.")
        if int(self.n_r) != self.n_r or self.n_r < 1:
            raise ConfigurationError(f"n_r must be a positive integer, got {self.n_r}.")
        self.dim, self.n_r = int(self.dim), int(self.n_r)
        if self.C is None or not self.C > 0:
            raise ConfigurationError(f"C must be positive, got {self.C}.")
        if not self.t > 0:
            raise ConfigurationError(f"t must be positive, got {self.t}.")
        self.C, self.t = float(self.C), float(self.t)
        if isinstance(self.c_expansion, bool):
            self.c_expansion = "truncate" if self.c_expansion else "none"
        if self.c_expansion is None:
            self.c_expansion = "none"
        if self.c_expansion not in C_EXPANSION_METHODS:
            raise ConfigurationError(
                f"c_expansion must be one of {C_EXPANSION_METHODS}, got '{self.c_expansion}'."
            )
        self.rotation_plane = tuple(int(level) for level in self.rotation_plane)
        i, j = self.rotation_plane
        if i == j or not (0 <= i < self.dim and 0 <= j < self.dim):
            raise ConfigurationError(
                f"Invalid rotation plane {self.rotation_plane} for d={self.dim}."
            )
        if self.ratio_policy not in RATIO_POLICIES:
            raise ConfigurationError(
                f"ratio_policy must be one of {RATIO_POLICIES}, got '{self.ratio_policy}'."
            )

    @classmethod
    def from_dict(cls, dictionary):
        return cls(**dictionary)

    @classmethod
    def from_yaml(cls, yaml_path: str):
        with open(yaml_path, "r", encoding="utf-8") as f:
            dictionary = yaml.safe_load(f)
        return cls.from_dict(dictionary)

    def to_dict(self):
        snapshot = asdict(self)
        snapshot["rotation_plane"] = list(self.rotation_plane)
        return snapshot

    @property
    def grid_size(self):
        return self.dim**self.n_r

    def grid_eigenvalues(self):
        """lambda_grid(v) = 2 pi v / (d^n_r t) for every clock value v."""
        return 2 * np.pi * np.arange(self.grid_size) / (self.grid_size * self.t)

    def effective_c(self):
        """C, or its base-d truncation to n_r digits on the phase grid."""
        if self.c_expansion == "none":
            return self.C
        phase = self.C * self.t / (2 * np.pi)
        truncated = expand_constant(phase, self.dim, self.n_r)
        if truncated == 0.0:
            raise ConfigurationError(
                f"C = {self.C} truncates to zero with {self.n_r} base-{self.dim} digits."
            )
        return truncated * 2 * np.pi / self.t

    def rotation_angles(self):
        """theta_v = 2 arcsin(C_eff / lambda_grid(v)), theta_0 = 0.

        Raises
        ------
        InversionConstantError
            Under ratio_policy "raise", if C_eff > lambda_grid(v) for some v >= 1.
        """
        c_eff = self.effective_c()
        grid = self.grid_eigenvalues()
        ratios = np.zeros(self.grid_size)
        ratios[1:] = c_eff / grid[1:]
        overflow = np.flatnonzero(ratios > 1 + RATIO_TOL)
        if overflow.size and self.ratio_policy == "raise":
            v = int(overflow[0])
            raise InversionConstantError(
                f"C_eff = {c_eff:.6g} exceeds the grid eigenvalue lambda_grid({v}) = "
                f"{grid[v]:.6g} ({overflow.size} clock values affected); lower C, "
                f"increase n_r or use ratio_policy='clip'."
            )
        if self.ratio_policy == "skip":
            ratios[overflow] = 0.0
        return 2 * np.arcsin(np.clip(ratios, 0.0, 1.0))


@dataclass
class HHLSolution:
    """Result of ``hhl_solve``.

    Parameters
    ----------
    x_tilde : numpy.ndarray
        Normalized solution state over the d^m system amplitudes.
    x_vector : numpy.ndarray
        Rescaled estimate of A^-1 b, same length as b.
    p_success : float
        Probability of the ancilla in |j> and the clock in |0...0>.
    overlap : float
        |<b|x_tilde>|, read out through the swap test when enabled.
    b_norm : float
        Norm of the unnormalized b.
    c_eff : float
        Inversion constant actually used.
    p_ancilla : float
        Marginal probability of the ancilla in |j>.
    b : numpy.ndarray
        The right-hand side.
    x_classical : numpy.ndarray, optional
        Direct solve A^-1 b for comparison.
    swap_p0 : float, optional
        P(0) of the swap-test ancilla.
    clock_residual : float
        p_ancilla - p_success, the success weight left on nonzero clock values.
    counts : dict
        Instruction tallies of the executed circuit.
    config : HHLConfig, optional
        Configuration of the run.
    """

    x_tilde: np.ndarray = field(repr=False)
    x_vector: np.ndarray
    p_success: float
    overlap: float
    b_norm: float
    c_eff: float
    p_ancilla: float = None
    b: np.ndarray = field(default=None, repr=False)
    x_classical: np.ndarray = None
    swap_p0: float = None
    clock_residual: float = 0.0
    counts: dict = field(default_factory=dict, repr=False)
    config: HHLConfig = None

    def __post_init__(self):
        if not 0.0 < self.p_success <= 1.0 + 1e-12:
            raise InternalConsistencyError(f"p_success = {self.p_success} outside (0, 1].")
        if not -1e-12 <= self.overlap <= 1.0 + 1e-9:
            raise InternalConsistencyError(f"overlap = {self.overlap} outside [0, 1].")
        self.p_success = min(float(self.p_success), 1.0)
        self.overlap = float(np.clip(self.overlap, 0.0, 1.0))

    @property
    def x_norm(self):
        """Norm of A^-1 applied to the normalized b."""
        return np.sqrt(self.p_success) / self.c_eff

    @property
    def k(self):
        """Scale turning |<b|x_tilde>| into |b^dagger A^-1 b|."""
        return self.x_norm * self.b_norm**2

    @property
    def bx(self):
        """b^dagger x_vector (real part)."""
        return float(np.vdot(self.b, self.x_vector).real)


def classical_solution(A, b):
    """Direct solve of A x = b."""
    try:
        return np.linalg.solve(np.asarray(A), np.asarray(b))
    except np.linalg.LinAlgError as e:
        raise DomainError(f"Cannot solve the linear system directly: {e}") from e


def percentage_fraction_difference(value, reference):
    """|value - reference| / |reference| in percent."""
    if reference == 0:
        raise DomainError("Percentage difference against a zero reference.")
    return float(abs(value - reference) / abs(reference) * 100.0)


def toy_system(which):
    """Built-in 3x3 systems.

    "diag": A = diag(0.2, 0.5, 0.8), b = (1, 1, 1)/sqrt(3).
    "nondiag": A = [[0.5, 0.1, 0.2], [0.1, 0.6, 0.1], [0.2, 0.1, 0.7]], b = (0, 1, 0).
    """
    if which == "diag":
        return np.diag([0.2, 0.5, 0.8]), np.ones(3) / np.sqrt(3)
    if which == "nondiag":
        A = np.array([[0.5, 0.1, 0.2], [0.1, 0.6, 0.1], [0.2, 0.1, 0.7]])
        return A, np.array([0.0, 1.0, 0.0])
    raise ConfigurationError(f"Unknown toy system '{which}', expected 'diag' or 'nondiag'.")


def expand_constant(c, base, digits):
    """floor(c base^digits) / base^digits, the base-``base`` truncation of c.

    Raises
    ------
    ConfigurationError
        Unless 0 < c < 1, base >= 2 and digits >= 1.
    """
    if not 0.0 < c < 1.0:
        raise ConfigurationError(f"Only constants in (0, 1) can be expanded, got {c}.")
    if base < 2 or digits < 1:
        raise ConfigurationError(f"Need base >= 2 and digits >= 1, got {base} and {digits}.")
    scale = base**digits
    return np.floor(c * scale) / scale


def fraction_digits(c, base, digits):
    """Base-``base`` digits of ``expand_constant(c, base, digits)``."""
    value = int(round(expand_constant(c, base, digits) * base**digits))
    result = []
    for _ in range(digits):
        value, digit = divmod(value, base)
        result.append(digit)
    return result[::-1]


def choose_defaults(A, dim, n_r):
    """Configuration placing the spectrum of A on the clock grid.

    t = 2 pi g / lambda_max with g = (d^n_r - 1) / d^n_r, C = lambda_min t / 2 pi,
    ratio_policy "clip". The returned HHLConfig can be edited before use.

    Raises
    ------
    DomainError
        If A is not Hermitian positive-definite.
    """
    w, _ = hermitian_spectrum(A)
    if w[0] <= 0:
        raise DomainError(f"A is not positive-definite (lambda_min = {w[0]:.6g}).")
    grid = dim**n_r
    t = 2 * np.pi * ((grid - 1) / grid) / w[-1]
    return HHLConfig(dim=dim, n_r=n_r, C=w[0] * t / (2 * np.pi), t=t, ratio_policy="clip")


def build_ucr(dim, n_r, config: HHLConfig, clock=None, ancilla=None, n_qudits=None):
    """Eigenvalue-inversion rotation sum_v |v><v| (x) R_ij(theta_v).

    Default wiring: clock on wires 0..n_r-1 (most significant first), ancilla
    on wire n_r.
    """
    if config.dim != dim or config.n_r != n_r:
        raise ConfigurationError(
            f"Config is for d={config.dim}, n_r={config.n_r}; requested d={dim}, n_r={n_r}."
        )
    clock = list(range(n_r)) if clock is None else list(clock)
    ancilla = n_r if ancilla is None else ancilla
    n_qudits = n_r + 1 if n_qudits is None else n_qudits
    rotation = UniformlyControlledRotation(
        dim, tuple(clock), ancilla, config.rotation_angles(), config.rotation_plane
    )
    return Circuit(dim, n_qudits, [rotation], {"ucr": (0, 1)})


def _check_spectrum(A, config):
    w, _ = hermitian_spectrum(A)
    phases = w * config.t / (2 * np.pi)
    for eigenvalue, phase in zip(w, phases):
        if not 0.0 < phase < 1.0:
            raise ConfigurationError(
                f"Eigenvalue {eigenvalue:.6g} gives eigenphase {phase:.6g} outside (0, 1) "
                f"for t = {config.t:.6g}."
            )
    return w


def hhl_solve(A, b, config: HHLConfig, initial_state=None, layout=None, swap_readout=True):
    """Solves A x = b with the HHL circuit.

    Parameters
    ----------
    A : array_like
        Hermitian positive-definite N x N matrix.
    b : array_like
        Right-hand side of length N.
    config : HHLConfig
        Run parameters.
    initial_state : Statevector, optional
        Prepared system state encoding b (up to a global phase). By default
        ``amplitude_encode(config.dim, b)``.
    layout : sequence of int, optional
        Basis indices of the system register holding the N components.
        By default 0..N-1. A is embedded there, zero elsewhere.
    swap_readout : bool, optional
        Read |<b|x_tilde>| through the swap test rather than the exact inner
        product. By default True.

    Returns
    -------
    HHLSolution

    Raises
    ------
    ConfigurationError
        If an eigenphase lambda t / 2 pi falls outside (0, 1).
    InversionConstantError
        If C_eff is too large under ratio_policy "raise".
    PostSelectionError
        If the success outcome has zero probability.
    """
    d = config.dim
    A = np.atleast_2d(np.asarray(A))
    b = np.asarray(b).reshape(-1)
    if A.shape != (b.size, b.size):
        raise DomainError(f"A has shape {A.shape}, b has length {b.size}.")
    _check_spectrum(A, config)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        raise DomainError("b is the zero vector.")

    layout = list(range(b.size)) if layout is None else [int(i) for i in layout]
    if len(layout) != b.size or len(set(layout)) != len(layout):
        raise ConfigurationError(f"Layout {layout} does not place {b.size} components.")
    m, size = 1, d
    while size <= max(layout):
        m, size = m + 1, size * d
    padded_b = np.zeros(size, dtype=complex)
    padded_b[layout] = b / b_norm
    b_state = Statevector(d, m, padded_b)

    if initial_state is None:
        if layout == list(range(b.size)):
            initial_state, _ = amplitude_encode(d, b)
        else:
            initial_state = b_state
    if initial_state.dim != d:
        raise ConfigurationError(
            f"Initial state has dimension {initial_state.dim}, config has {d}."
        )
    if initial_state.n_qudits != m:
        m, size = initial_state.n_qudits, d**initial_state.n_qudits
        if size <= max(layout):
            raise ConfigurationError(f"Initial state is too small for layout {layout}.")
        padded_b = np.zeros(size, dtype=complex)
        padded_b[layout] = b / b_norm
        b_state = Statevector(d, m, padded_b)
    phase = inner_product(b_state, initial_state)
    if abs(abs(phase) - 1.0) > 1e-8:
        raise ConfigurationError(
            f"Initial state does not encode b (|<b|psi>| = {abs(phase):.6g})."
        )

    A_padded = np.zeros((size, size), dtype=complex)
    A_padded[np.ix_(layout, layout)] = A
    U = hermitian_evolution(A_padded, config.t)

    n_r = config.n_r
    ancilla, system = 0, list(range(1, m + 1))
    clock = list(range(m + 1, m + 1 + n_r))
    n_qudits = 1 + m + n_r
    qpe = build_qpe(U, n_r, d, system=system, clock=clock, n_qudits=n_qudits)
    ucr = build_ucr(d, n_r, config, clock=clock, ancilla=ancilla, n_qudits=n_qudits)
    circuit = Circuit(d, n_qudits)
    circuit.compose(qpe, stage="qpe")
    circuit.compose(ucr, stage="ucr")
    circuit.compose(qpe.inverse(), stage="inverse_qpe")

    start, success = config.rotation_plane
    state = tensor(
        basis_state(d, 1, start), tensor(initial_state, basis_state(d, n_r, 0))
    )
    state = circuit.run(state)

    p_ancilla = float(marginal_probabilities(state, [ancilla])[success])
    amplitudes = slice_amplitudes(state, [ancilla] + clock, [success] + [0] * n_r)
    p_success = float(np.vdot(amplitudes, amplitudes).real)
    if p_success <= 0.0:
        raise PostSelectionError(
            "The ancilla success outcome with the clock in |0...0> has zero probability."
        )
    # undo the global phase of the prepared state
    amplitudes = amplitudes * np.conj(phase)
    x_tilde = amplitudes / np.sqrt(p_success)
    c_eff = config.effective_c()
    x_vector = b_norm * amplitudes[layout] / c_eff
    if np.isrealobj(A) and np.isrealobj(b):
        x_vector = x_vector.real

    x_tilde_state = Statevector(d, m, x_tilde)
    swap_p0 = None
    if swap_readout:
        swap_p0, overlap = swap_test_overlap(x_tilde_state, b_state, d)
    else:
        overlap = abs(inner_product(b_state, x_tilde_state))

    return HHLSolution(
        x_tilde=x_tilde,
        x_vector=x_vector,
        p_success=p_success,
        overlap=overlap,
        b_norm=b_norm,
        c_eff=c_eff,
        p_ancilla=p_ancilla,
        b=b,
        x_classical=classical_solution(A, b),
        swap_p0=swap_p0,
        clock_residual=max(p_ancilla - p_success, 0.0),
        counts=circuit.counts(),
        config=config,
    )


def swap_test_floor(dim):
    """P(0) of the swap test for orthogonal inputs."""
    return ((dim - 1) ** 2 + 1) / dim**2


def swap_test_overlap(a, b, dim):
    """Swap-test estimate of |<a|b>|.

    The test ancilla is put in superposition with H, the registers are
    swapped when it reads |d-1>, and H^dagger is applied before reading P(0):

        P(0) = ((d-1)^2 + 1 + 2(d-1)|<a|b>|^2) / d^2,

    i.e. (5 + 4|<a|b>|^2)/9 for qutrits and (1 + |<a|b>|^2)/2 for qubits.

    Returns
    -------
    p0 : float
        Probability of the test ancilla in |0>.
    overlap : float
        |<a|b>| recovered from p0.

    Raises
    ------
    DomainError
        If the two states differ in shape or dimension.
    InternalConsistencyError
        If p0 falls below the orthogonal floor by more than 1e-9.
    """
    if a.dim != dim or b.dim != dim or a.n_qudits != b.n_qudits:
        raise DomainError(
            f"Swap test needs two d={dim} registers of equal size, got "
            f"({a.dim}, {a.n_qudits}) and ({b.dim}, {b.n_qudits})."
        )
    k = a.n_qudits
    hadamard = h_gate(dim)
    state = tensor(basis_state(dim, 1, 0), tensor(a, b))
    state = apply_gate(state, hadamard, [0])
    state = controlled_swap(state, 0, dim - 1, range(1, k + 1), range(k + 1, 2 * k + 1))
    state = apply_gate(state, hadamard.dagger(), [0])
    p0 = float(marginal_probabilities(state, [0])[0])
    floor = swap_test_floor(dim)
    if p0 < floor - SWAP_TEST_TOL:
        raise InternalConsistencyError(
            f"Swap-test P(0) = {p0:.12f} is below the orthogonal floor {floor:.12f}."
        )
    squared = (dim**2 * p0 - (dim - 1) ** 2 - 1) / (2 * (dim - 1))
    if squared > 1 + SWAP_TEST_TOL:
        warnings.warn(f"Swap-test overlap^2 = {squared:.12f} exceeds 1, clipped.")
    return p0, float(np.sqrt(np.clip(squared, 0.0, 1.0)))
