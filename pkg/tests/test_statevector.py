import numpy as np
import pytest

from qudithhl.errors import ConfigurationError, DomainError, PostSelectionError
from qudithhl.gates import GateSpec, cx_gate, h_gate, planar_rotation, x_gate, z_gate
from qudithhl.statevector import (
    Statevector,
    amplitude_encode,
    apply_controlled,
    apply_gate,
    basis_digits,
    basis_index,
    basis_state,
    controlled_swap,
    inner_product,
    marginal_probabilities,
    project_and_renormalize,
    project_register,
    slice_amplitudes,
    tensor,
)


def random_unitary(rng, size):
    z = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.mark.parametrize(
    "dim, n, index, expected",
    [(3, 1, 0, [1, 0, 0]), (3, 1, 2, [0, 0, 1]), (2, 2, 3, [0, 0, 0, 1])],
)
def test_basis_state(dim, n, index, expected):
    np.testing.assert_array_equal(basis_state(dim, n, index).amplitudes, expected)


def test_basis_state_out_of_range():
    with pytest.raises(DomainError):
        basis_state(3, 2, 9)


def test_basis_digits_most_significant_first():
    assert basis_digits(5, 3, 2) == (1, 2)
    assert basis_index((1, 2), 3) == 5
    for index in range(27):
        assert basis_index(basis_digits(index, 3, 3), 3) == index


def test_statevector_is_read_only():
    state = basis_state(3, 1, 0)
    with pytest.raises(ValueError):
        state.amplitudes[0] = 0.0


def test_statevector_length_checked():
    with pytest.raises(DomainError):
        Statevector(3, 2, np.ones(8))


def test_x_z_h_on_qutrit():
    w = np.exp(2j * np.pi / 3)
    np.testing.assert_allclose(
        apply_gate(basis_state(3, 1, 0), x_gate(3), [0]).amplitudes, [0, 1, 0]
    )
    np.testing.assert_allclose(
        apply_gate(basis_state(3, 1, 1), z_gate(3), [0]).amplitudes, [0, w, 0]
    )
    np.testing.assert_allclose(
        apply_gate(basis_state(3, 1, 0), h_gate(3), 0).amplitudes, np.ones(3) / np.sqrt(3)
    )


def test_apply_gate_mismatch():
    state = basis_state(3, 2, 0)
    with pytest.raises(ConfigurationError):
        apply_gate(state, x_gate(2), [0])
    with pytest.raises(ConfigurationError):
        apply_gate(state, cx_gate(3), [0])
    with pytest.raises(ConfigurationError):
        apply_gate(state, cx_gate(3), [1, 1])
    with pytest.raises(ConfigurationError):
        apply_gate(state, x_gate(3), [2])


def test_apply_gate_on_middle_qudit():
    # |0, 0, 0> -> |0, 1, 0>
    state = apply_gate(basis_state(3, 3, 0), x_gate(3), [1])
    assert np.argmax(np.abs(state.amplitudes)) == basis_index((0, 1, 0), 3)


@pytest.mark.parametrize(
    "control, target, expected", [(1, 0, (1, 1)), (2, 1, (2, 0)), (0, 2, (0, 2))]
)
def test_cx_power_mode(control, target, expected):
    state = basis_state(3, 2, basis_index((control, target), 3))
    out = apply_controlled(state, x_gate(3), 0, 1)
    assert out.amplitudes[basis_index(expected, 3)] == pytest.approx(1.0)
    np.testing.assert_allclose(
        out.amplitudes, apply_gate(state, cx_gate(3), [0, 1]).amplitudes, atol=1e-12
    )


def test_select_mode_rotation():
    control = Statevector(3, 1, np.array([1, 1, 0]) / np.sqrt(2))
    state = tensor(control, basis_state(3, 1, 0))
    rotation = planar_rotation(3, 0, 1, np.pi)
    out = apply_controlled(state, rotation, 0, 1, mode="select", value=1)
    expected = np.zeros(9)
    expected[0] = expected[4] = 1 / np.sqrt(2)
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-12)


def test_controlled_errors():
    state = basis_state(3, 2, 0)
    with pytest.raises(ConfigurationError):
        apply_controlled(state, x_gate(3), 0, 0)
    with pytest.raises(ConfigurationError):
        apply_controlled(state, x_gate(3), 0, 1, mode="select")
    with pytest.raises(ConfigurationError):
        apply_controlled(state, x_gate(3), 0, 1, mode="other")


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_power_mode_applies_matrix_powers(dim, rng):
    base = GateSpec(dim, 1, random_unitary(rng, dim), "G")
    target = Statevector(dim, 1, rng.normal(size=dim) + 0j)
    target = Statevector(dim, 1, target.amplitudes / target.norm)
    for j in range(dim):
        state = tensor(basis_state(dim, 1, j), target)
        out = apply_controlled(state, base, 0, 1)
        expected = np.kron(
            basis_state(dim, 1, j).amplitudes,
            np.linalg.matrix_power(base.matrix, j) @ target.amplitudes,
        )
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-10)


@pytest.mark.parametrize("dim", [2, 3, 5])
def test_norm_preservation_and_linearity(dim, rng, random_amplitudes):
    gate = GateSpec(dim, 2, random_unitary(rng, dim * dim), "G")
    psi_1 = Statevector(dim, 3, random_amplitudes(dim**3))
    psi_2 = Statevector(dim, 3, random_amplitudes(dim**3))
    out = apply_gate(psi_1, gate, [2, 0])
    assert out.is_normalized()
    alpha, beta = 0.3 + 0.4j, -0.7
    combined = Statevector(dim, 3, alpha * psi_1.amplitudes + beta * psi_2.amplitudes)
    np.testing.assert_allclose(
        apply_gate(combined, gate, [2, 0]).amplitudes,
        alpha * out.amplitudes + beta * apply_gate(psi_2, gate, [2, 0]).amplitudes,
        atol=1e-10,
    )


def test_inner_product():
    plus = apply_gate(basis_state(3, 1, 0), h_gate(3), [0])
    assert inner_product(basis_state(3, 1, 0), basis_state(3, 1, 0)) == pytest.approx(1.0)
    assert inner_product(basis_state(3, 1, 0), basis_state(3, 1, 1)) == pytest.approx(0.0)
    assert inner_product(plus, basis_state(3, 1, 0)) == pytest.approx(1 / np.sqrt(3))
    phased = Statevector(2, 1, [1j, 0])
    assert inner_product(phased, basis_state(2, 1, 0)) == pytest.approx(-1j)
    with pytest.raises(DomainError):
        inner_product(basis_state(3, 1, 0), basis_state(3, 2, 0))


def test_project_and_renormalize():
    plus = apply_gate(basis_state(3, 1, 0), h_gate(3), [0])
    probability, state = project_and_renormalize(plus, 0, 1)
    assert probability == pytest.approx(1 / 3)
    np.testing.assert_allclose(np.abs(state.amplitudes), [0, 1, 0], atol=1e-12)

    probability, state = project_and_renormalize(basis_state(3, 1, 2), 0, 2)
    assert probability == pytest.approx(1.0)

    with pytest.raises(PostSelectionError):
        project_and_renormalize(basis_state(3, 1, 2), 0, 0)
    with pytest.raises(DomainError):
        project_and_renormalize(basis_state(3, 1, 2), 0, 3)


def test_projection_probabilities_sum_to_one(random_amplitudes):
    state = Statevector(3, 3, random_amplitudes(27))
    total = sum(project_and_renormalize(state, 1, j)[0] for j in range(3))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_project_register_joint_outcome(random_amplitudes):
    state = Statevector(2, 3, random_amplitudes(8))
    probability, projected = project_register(state, [0, 2], [1, 0])
    assert probability == pytest.approx(
        abs(state.amplitudes[4]) ** 2 + abs(state.amplitudes[6]) ** 2
    )
    assert projected.is_normalized()


def test_project_register_needs_one_digit_per_qudit():
    state = basis_state(3, 2, 0)
    with pytest.raises(ConfigurationError):
        project_register(state, [0, 1], [0])
    with pytest.raises(ConfigurationError):
        project_register(state, [0], [0, 0])


@pytest.mark.parametrize(
    "dim, vec, expected, n_qudits",
    [
        (3, np.ones(3) / np.sqrt(3), np.ones(3) / np.sqrt(3), 1),
        (3, [0, 1, 0], [0, 1, 0], 1),
        (2, [3, 4], [0.6, 0.8], 1),
        (3, [1, 1, 1, 1], np.r_[np.ones(4) / 2, np.zeros(5)], 2),
    ],
)
def test_amplitude_encode(dim, vec, expected, n_qudits):
    state, norm = amplitude_encode(dim, vec)
    assert state.n_qudits == n_qudits
    np.testing.assert_allclose(state.amplitudes, expected, atol=1e-12)
    assert norm == pytest.approx(np.linalg.norm(vec))
    assert abs(state.norm - 1.0) < 1e-12


def test_amplitude_encode_norm():
    _, norm = amplitude_encode(2, [3, 4])
    assert norm == pytest.approx(5.0)
    with pytest.raises(DomainError):
        amplitude_encode(3, [0, 0, 0])


def test_marginal_probabilities_follow_listed_order():
    state = basis_state(3, 2, basis_index((0, 1), 3))
    np.testing.assert_allclose(marginal_probabilities(state, [0]), [1, 0, 0])
    np.testing.assert_allclose(marginal_probabilities(state, [1]), [0, 1, 0])
    swapped = marginal_probabilities(state, [1, 0])
    assert np.argmax(swapped) == basis_index((1, 0), 3)


def test_slice_amplitudes(random_amplitudes):
    state = Statevector(3, 2, random_amplitudes(9))
    np.testing.assert_allclose(slice_amplitudes(state, [1], [2]), state.amplitudes[[2, 5, 8]])
    np.testing.assert_allclose(slice_amplitudes(state, [0], [1]), state.amplitudes[3:6])


def test_controlled_swap_fires_on_value():
    a, b = basis_state(3, 1, 1), basis_state(3, 1, 2)
    for control, expected in ((2, (2, 2, 1)), (1, (1, 1, 2))):
        state = tensor(basis_state(3, 1, control), tensor(a, b))
        out = controlled_swap(state, 0, 2, [1], [2])
        assert out.amplitudes[basis_index(expected, 3)] == pytest.approx(1.0)
    with pytest.raises(ConfigurationError):
        controlled_swap(tensor(a, b), 0, 1, [1], [])
