import numpy as np
import pytest

from qudithhl.circuit import Circuit, GateInstruction
from qudithhl.errors import ConfigurationError
from qudithhl.gates import h_gate, x_gate
from qudithhl.qft_qpe import build_iqft, build_qft, build_qpe, run_qpe
from qudithhl.resources import iqft_two_qudit_count, qpe_cu_applications
from qudithhl.statevector import (
    Statevector,
    amplitude_encode,
    basis_state,
    marginal_probabilities,
)


def dft(size):
    idx = np.arange(size)
    return np.exp(2j * np.pi * np.outer(idx, idx) / size) / np.sqrt(size)


@pytest.mark.parametrize(
    "dim, n", [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3)]
)
def test_qft_is_dft(dim, n):
    np.testing.assert_allclose(build_qft(dim, n).unitary(), dft(dim**n), atol=1e-9)


@pytest.mark.parametrize("dim, n", [(2, 3), (3, 2)])
def test_iqft_is_inverse(dim, n):
    np.testing.assert_allclose(
        build_iqft(dim, n).unitary(), dft(dim**n).conj().T, atol=1e-9
    )


@pytest.mark.parametrize("dim, n", [(2, 4), (3, 3), (3, 5)])
def test_qft_tallies(dim, n):
    circuit = build_qft(dim, n)
    counts = circuit.counts()
    assert counts["hadamard"] == n
    assert counts.get("controlled_phase", 0) == n * (n - 1) // 2
    assert counts.get("swap", 0) == n // 2
    assert circuit.two_qudit_count() == iqft_two_qudit_count(n)
    assert build_iqft(dim, n).two_qudit_count() == iqft_two_qudit_count(n)


def test_qft_stages():
    circuit = build_qft(3, 3)
    assert circuit.stages["fourier"] == (0, 6)
    assert circuit.stages["reversal"] == (6, 7)
    assert build_iqft(3, 3).stages["reversal"] == (0, 1)


def test_qft_needs_a_qudit():
    with pytest.raises(ConfigurationError):
        build_qft(3, 0)


@pytest.mark.parametrize("dim, n_r", [(2, 3), (3, 2), (3, 3)])
def test_qpe_exact_on_grid_phases(dim, n_r):
    grid = dim**n_r
    values = [1, grid // 2, grid - 1]
    U = np.diag(np.exp(2j * np.pi * np.array(values + [0] * (dim - 3)) / grid)[:dim])
    for k in range(min(dim, len(values))):
        result = run_qpe(basis_state(dim, 1, k), U, n_r, dim)
        assert result.mode() == values[k]
        assert result.clock_probabilities[values[k]] >= 1 - 1e-9
        assert result.phases()[values[k]] == pytest.approx(values[k] / grid)


def test_qpe_superposition_splits_clock():
    dim, n_r = 3, 2
    U = np.diag(np.exp(2j * np.pi * np.array([2, 5, 7]) / 9))
    system, _ = amplitude_encode(dim, [1, 1, 1])
    result = run_qpe(system, U, n_r, dim)
    distribution = result.clock_distribution
    for v in (2, 5, 7):
        assert distribution[v] == pytest.approx(1 / 3)
    assert sum(distribution.values()) == pytest.approx(1.0)


def test_qpe_off_grid_peaks_at_nearest_value():
    dim, n_r = 3, 3
    phase = 0.3
    U = np.diag(np.exp(2j * np.pi * np.array([phase, 0.0, 0.0])))
    result = run_qpe(basis_state(dim, 1, 0), U, n_r, dim)
    assert result.mode() == round(phase * dim**n_r)
    assert result.clock_probabilities.sum() == pytest.approx(1.0)
    assert result.clock_probabilities[result.mode()] < 1.0


def test_qpe_stages_and_weights():
    dim, n_r = 3, 3
    circuit = build_qpe(x_gate(dim), n_r, dim)
    assert set(circuit.stages) >= {"hadamard", "controlled_u", "iqft"}
    assert circuit.controlled_u_weight() == qpe_cu_applications(n_r, dim) == 13
    # after the Hadamard stage the clock is uniform
    state = circuit.run(basis_state(dim, 1 + n_r, 0), stop="hadamard")
    np.testing.assert_allclose(
        marginal_probabilities(state, [1, 2, 3]), np.full(27, 1 / 27), atol=1e-12
    )
    # running the rest from there gives the full circuit
    full = circuit.run(basis_state(dim, 1 + n_r, 0))
    split = circuit.run(state, start="controlled_u")
    np.testing.assert_allclose(split.amplitudes, full.amplitudes, atol=1e-12)


def test_qpe_wiring_errors():
    with pytest.raises(ConfigurationError):
        build_qpe(x_gate(3), 0, 3)
    with pytest.raises(ConfigurationError):
        build_qpe(x_gate(3), 2, 2)
    with pytest.raises(ConfigurationError):
        build_qpe(x_gate(3), 2, 3, system=[0], clock=[1])


def test_circuit_validation():
    circuit = Circuit(3, 2)
    with pytest.raises(ConfigurationError):
        circuit.append(GateInstruction(h_gate(3), (2,)))
    with pytest.raises(ConfigurationError):
        circuit.append(GateInstruction(h_gate(2), (0,)))
    with pytest.raises(ConfigurationError):
        circuit.run(basis_state(3, 3, 0))


def test_circuit_inverse_undoes_qpe(rng):
    dim, n_r = 2, 3
    circuit = build_qpe(h_gate(dim), n_r, dim)
    psi = rng.normal(size=dim ** (1 + n_r)) + 0j
    state = Statevector(dim, 1 + n_r, psi / np.linalg.norm(psi))
    back = circuit.inverse().run(circuit.run(state))
    np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-10)
