"""Base-d quantum Fourier transform and quantum phase estimation."""
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, ControlledInstruction, GateInstruction
from .errors import ConfigurationError
from .gates import GateSpec, h_gate, phase_gate, swap_gate, unitary_gate
from .statevector import basis_state, marginal_probabilities, tensor


def build_qft(dim, n):
    """QFT on ``n`` qudits, wire 0 most significant.

    Each qudit gets a Hadamard followed by controlled phases CP_l from the
    lower-order qudits, then floor(n/2) swaps reverse the digit order, so the
    circuit unitary is the d^n-point DFT with entries omega^(jk) / sqrt(d^n).

    Parameters
    ----------
    dim : int
        Qudit dimension d.
    n : int
        Number of qudits (>= 1).

    Returns
    -------
    Circuit
        Stages "fourier" and "reversal".
    """
    if n < 1:
        raise ConfigurationError(f"QFT needs at least one qudit, got {n}.")
    circuit = Circuit(dim, n)
    hadamard = h_gate(dim)
    fourier = []
    for q in range(n):
        fourier.append(GateInstruction(hadamard, (q,), "hadamard"))
        for r in range(q + 1, n):
            # CP_l: control digit j on wire r applies P_l^j to wire q
            fourier.append(
                ControlledInstruction(
                    phase_gate(dim, r - q + 1), r, (q,), "power", category="controlled_phase"
                )
            )
    circuit.extend(fourier, stage="fourier")
    circuit.extend(
        (GateInstruction(swap_gate(dim), (q, n - 1 - q), "swap") for q in range(n // 2)),
        stage="reversal",
    )
    return circuit


def build_iqft(dim, n):
    """Inverse of ``build_qft``: reversed instruction order, adjoint gates."""
    return build_qft(dim, n).inverse()


def build_qpe(U, n_r, dim, system=None, clock=None, n_qudits=None):
    """Phase estimation of ``U`` into an ``n_r``-qudit clock register.

    Parameters
    ----------
    U : GateSpec or array_like
        Unitary on the m system qudits.
    n_r : int
        Clock register size.
    dim : int
        Qudit dimension d.
    system : sequence of int, optional
        System wires. Default: the first m wires.
    clock : sequence of int, optional
        Clock wires, most significant first. Default: the n_r wires after
        the system.
    n_qudits : int, optional
        Register size of the returned circuit. Default m + n_r.

    Returns
    -------
    Circuit
        Stages "hadamard", "controlled_u" and "iqft". The clock digit of
        significance k controls U^(d^k) in power mode, recorded with weight d^k.
    """
    if n_r < 1:
        raise ConfigurationError(f"The clock register needs at least one qudit, got {n_r}.")
    gate = U if isinstance(U, GateSpec) else unitary_gate(U, dim, "U")
    if gate.dim != dim:
        raise ConfigurationError(f"U has dimension {gate.dim}, expected {dim}.")
    m = gate.arity
    system = list(range(m)) if system is None else list(system)
    clock = list(range(m, m + n_r)) if clock is None else list(clock)
    if len(system) != m or len(clock) != n_r:
        raise ConfigurationError(
            f"Expected {m} system and {n_r} clock wires, got {len(system)} and {len(clock)}."
        )
    n_qudits = m + n_r if n_qudits is None else n_qudits

    circuit = Circuit(dim, n_qudits)
    hadamard = h_gate(dim)
    circuit.extend((GateInstruction(hadamard, (c,), "hadamard") for c in clock), stage="hadamard")

    powered, controlled = gate.matrix, []
    for k in range(n_r):
        control = clock[n_r - 1 - k]
        controlled.append(
            ControlledInstruction(
                GateSpec(dim, m, powered, f"U^{dim ** k}"),
                control,
                tuple(system),
                "power",
                weight=dim**k,
                category="controlled_u",
            )
        )
        powered = np.linalg.matrix_power(powered, dim)
    circuit.extend(controlled, stage="controlled_u")
    circuit.compose(build_iqft(dim, n_r), wires=clock, stage="iqft")
    return circuit


@dataclass
class QpeResult:
    """Outcome of a phase-estimation run.

    Parameters
    ----------
    state : Statevector
        Post-QPE register, wires [system | clock].
    clock_probabilities : numpy.ndarray
        Born distribution of the clock value v in [0, d^n_r).
    resolution : float
        Grid spacing 1/d^n_r of the estimated phases.
    """

    state: object
    clock_probabilities: np.ndarray = field(repr=False)
    resolution: float

    @property
    def clock_distribution(self):
        """Clock values with nonzero probability."""
        return {
            v: float(p) for v, p in enumerate(self.clock_probabilities) if p > 0.0
        }

    def mode(self):
        return int(np.argmax(self.clock_probabilities))

    def phases(self):
        """Grid phase of every clock value."""
        return np.arange(self.clock_probabilities.size) * self.resolution


def run_qpe(system_state, U, n_r, dim):
    """Runs ``build_qpe`` on the system state with the clock in |0...0>."""
    if system_state.dim != dim:
        raise ConfigurationError(
            f"System state has dimension {system_state.dim}, expected {dim}."
        )
    m = system_state.n_qudits
    circuit = build_qpe(U, n_r, dim)
    if circuit.n_qudits != m + n_r:
        raise ConfigurationError(
            f"U acts on {circuit.n_qudits - n_r} qudits, the system state has {m}."
        )
    state = circuit.run(tensor(system_state, basis_state(dim, n_r, 0)))
    probabilities = marginal_probabilities(state, list(range(m, m + n_r)))
    return QpeResult(state, probabilities, 1.0 / dim**n_r)
