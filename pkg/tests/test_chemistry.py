import os

import numpy as np
import pytest

from qudithhl.chemistry import (
    CiHamiltonian,
    EnergyResult,
    build_lcc_system,
    classical_benchmarks,
    isometry_angle,
    isometry_prep,
    load_ci_directory,
    load_ci_hamiltonian,
    pec_sweep,
    solve_geometry,
)
from qudithhl.errors import ConfigurationError, DomainError, IngestionError, ParseError
from qudithhl.hhl import HHLConfig, hhl_solve

from conftest import ci_matrix

EXAMPLE_CI_FILE = os.path.join(
    os.path.dirname(__file__), "example_sweep_study", "ci_files", "h2_R1.40.txt"
)


def grid_exact_hamiltonian():
    H = np.diag([-1.0, -1.0 + 1 / 3, -1.0 + 2 / 3])
    H[1, 0] = H[0, 1] = -0.1
    H[2, 0] = H[0, 2] = -0.05
    return CiHamiltonian(R=1.4, matrix=H)


def test_build_lcc_system():
    h = CiHamiltonian(R=1.0, matrix=[[-1.0, 0.1], [0.1, 0.5]])
    system = build_lcc_system(h)
    np.testing.assert_allclose(system.A, [[1.5]])
    np.testing.assert_allclose(system.b, [-0.1])
    assert system.b_norm == pytest.approx(0.1)
    np.testing.assert_allclose(build_lcc_system(h, shift=False).A, [[0.5]])


def test_build_lcc_system_rejects():
    with pytest.raises(DomainError):
        build_lcc_system(CiHamiltonian(R=1.0, matrix=[[-1.0, 0.0], [0.0, 0.5]]))
    with pytest.raises(DomainError):
        build_lcc_system(CiHamiltonian(R=1.0, matrix=[[-1.0, 0.1], [0.1, -1.5]]))


def test_ci_hamiltonian_validation():
    with pytest.raises(DomainError):
        CiHamiltonian(R=1.0, matrix=[[1.0]])
    with pytest.raises(DomainError):
        CiHamiltonian(R=1.0, matrix=[[1.0, 0.2], [0.1, 1.0]])
    h = CiHamiltonian(R=1.0, matrix=np.eye(3))
    assert h.M == 2
    assert h.reference_energy == 1.0
    assert CiHamiltonian(R=1.0, matrix=np.eye(3), e_hf=-2.0).reference_energy == -2.0


def test_classical_benchmarks():
    H = np.array([[-1.0, 0.1], [0.1, 0.5]])
    e_lccsd, e_cisd = classical_benchmarks(CiHamiltonian(R=1.0, matrix=H))
    assert e_lccsd == pytest.approx(-0.01 / 1.5)
    assert e_cisd == pytest.approx(np.linalg.eigvalsh(H)[0] + 1.0)
    assert e_lccsd < e_cisd < 0


def test_isometry():
    assert isometry_angle([1.0, 1.0]) == pytest.approx(np.pi / 2)
    assert isometry_angle([-0.3, -0.4]) == pytest.approx(2 * np.arctan2(0.4, 0.3))
    theta = isometry_angle([0.6, 0.8])
    np.testing.assert_allclose(isometry_prep(theta).amplitudes, [0.6, 0.0, 0.8], atol=1e-12)
    with pytest.raises(DomainError):
        isometry_angle([0.6, -0.8])
    with pytest.raises(DomainError):
        isometry_angle([0.0, 0.0])
    with pytest.raises(DomainError):
        isometry_angle([0.1, 0.2, 0.3])


ISOMETRY_THETAS = {
    # bond length in Bohr: R02 angle of the H2 6-31G PEC
    1.20: 1.0296,
    1.25: 1.0074,
    1.30: 0.9845,
    1.35: 0.9615,
    1.40: 0.9383,
    1.45: 0.9152,
    1.50: 0.8920,
    1.55: 0.8690,
    1.60: 0.8465,
}


@pytest.mark.parametrize("R, theta", sorted(ISOMETRY_THETAS.items()))
def test_isometry_reproduces_pec_angles(R, theta):
    expected = [np.cos(theta / 2), 0.0, np.sin(theta / 2)]
    np.testing.assert_allclose(isometry_prep(theta).amplitudes, expected, atol=1e-6)
    assert isometry_angle([expected[0], expected[2]]) == pytest.approx(theta, abs=1e-6)


def lcc_hamiltonian(A, b, h00=-1.1, R=1.4):
    """CI matrix whose shifted LCC system is (A, b)."""
    M = len(b)
    H = np.empty((M + 1, M + 1))
    H[0, 0] = h00
    H[1:, 0] = H[0, 1:] = -np.asarray(b)
    H[1:, 1:] = A + h00 * np.eye(M)
    return CiHamiltonian(R=R, matrix=H)


def test_random_lcc_systems_within_grid_bound(rng):
    # spectra in [0.5, 0.9] with C = lambda_min, where the slack factor 10 holds
    for trial in range(20):
        M = 1 + trial % 3
        q, _ = np.linalg.qr(rng.normal(size=(M, M)))
        A = q @ np.diag(rng.uniform(0.5, 0.9, size=M)) @ q.T
        A = 0.5 * (A + A.T)
        b = rng.normal(scale=0.1, size=M)
        h = lcc_hamiltonian(A, b)
        system = build_lcc_system(h)
        e_classical = -b @ np.linalg.solve(A, b)
        C = np.linalg.eigvalsh(system.A)[0]
        for dim, n_r in ((3, 4), (2, 6)):
            config = HHLConfig(dim, n_r, C=C, ratio_policy="clip")
            result = solve_geometry(h, config)
            bound = 10 * C * (b @ b) / dim**n_r
            assert abs(result.e_corr - e_classical) <= bound, (trial, dim, n_r)
            solution = hhl_solve(system.A, system.b, config)
            e_direct = -float(np.real(np.vdot(system.b, solution.x_vector)))
            assert -solution.k * solution.overlap == pytest.approx(e_direct, abs=1e-10)


@pytest.mark.parametrize("use_isometry", [True, False])
def test_grid_exact_correlation_energy(use_isometry):
    h = grid_exact_hamiltonian()
    config = HHLConfig(dim=3, n_r=2, C=1 / 9)
    result = solve_geometry(h, config, use_isometry=use_isometry)
    assert result.error is None
    assert result.e_corr == pytest.approx(-0.03375, abs=1e-8)
    assert result.e_corr_lccsd == pytest.approx(-0.03375, abs=1e-12)
    assert result.e_total == pytest.approx(-1.03375, abs=1e-8)
    if use_isometry:
        assert result.theta == pytest.approx(2 * np.arctan2(0.05, 0.1))
    else:
        assert result.theta is None


def test_identity_system_qubit():
    H = np.diag([-1.0, 0.0, 0.0])
    H[1, 0] = H[0, 1] = -0.1
    H[2, 0] = H[0, 2] = -0.2
    config = HHLConfig(dim=2, n_r=1, C=1.0, t=np.pi)
    result = solve_geometry(CiHamiltonian(R=1.0, matrix=H), config)
    assert result.e_corr == pytest.approx(-0.05, abs=1e-10)
    assert result.k * result.overlap == pytest.approx(0.05, abs=1e-10)
    assert result.config["dim"] == 2


def test_load_ci_hamiltonian(ci_writer):
    path = ci_writer("h2.txt", 1.4, ci_matrix(1.4), ehf=-1.1167)
    h = load_ci_hamiltonian(path)
    assert h.R == pytest.approx(1.4)
    assert h.e_hf == pytest.approx(-1.1167)
    assert h.source == path
    np.testing.assert_allclose(h.matrix, ci_matrix(1.4), atol=1e-9)


def test_load_ci_hamiltonian_errors(tmp_path, ci_writer):
    no_r = tmp_path / "no_r.txt"
    no_r.write_text("dim 2\n1 0\n0 1\n")
    with pytest.raises(ParseError):
        load_ci_hamiltonian(str(no_r))
    bad_row = tmp_path / "bad_row.txt"
    bad_row.write_text("dim 2\nR 1.0\n1 0\n0\n")
    with pytest.raises(ParseError) as excinfo:
        load_ci_hamiltonian(str(bad_row))
    assert excinfo.value.line == 4
    asymmetric = ci_writer("asym.txt", 1.0, [[1.0, 0.1], [0.2, 1.0]])
    with pytest.raises(IngestionError):
        load_ci_hamiltonian(asymmetric)


def test_load_ci_directory(ci_directory):
    (ci_directory / "broken.txt").write_text("dim 3\nR 2.0\n1 2 x\n")
    hamiltonians, failures = load_ci_directory(str(ci_directory))
    assert [h.R for h in hamiltonians] == pytest.approx([1.2, 1.4, 1.6])
    assert len(failures) == 1
    assert failures[0][0].endswith("broken.txt")


def test_load_ci_directory_errors(tmp_path):
    with pytest.raises(IngestionError):
        load_ci_directory(str(tmp_path / "missing"))
    with pytest.raises(ConfigurationError):
        load_ci_directory(str(tmp_path))


def test_pec_sweep(ci_directory):
    hamiltonians, _ = load_ci_directory(str(ci_directory))
    config = HHLConfig(dim=3, n_r=5, C=0.6, ratio_policy="clip")
    results = pec_sweep(hamiltonians, config)
    assert len(results) == 3
    for h, result in zip(hamiltonians, results):
        assert result.error is None
        assert result.R == h.R
        assert result.e_corr < 0
        assert result.e_corr == pytest.approx(result.e_corr_lccsd, rel=0.1)
        assert result.theta is not None


def test_pec_sweep_isolates_failures():
    good = grid_exact_hamiltonian()
    not_positive = CiHamiltonian(R=2.0, matrix=[[-1.0, 0.1], [0.1, -1.5]])
    results = pec_sweep([good, not_positive], HHLConfig(dim=3, n_r=2, C=1 / 9))
    assert results[0].error is None
    assert "DomainError" in results[1].error
    assert np.isnan(results[1].e_corr)
    record = results[1].as_record()
    assert record["R"] == 2.0
    assert np.isnan(record["E_HHL"])


def test_pec_sweep_empty():
    with pytest.raises(ConfigurationError):
        pec_sweep([], HHLConfig(dim=3, n_r=2, C=0.1))


def test_energy_record_columns():
    record = EnergyResult(R=1.4, e_hf=-1.0, e_corr=-0.02, e_corr_lccsd=-0.021).as_record()
    for column in ("R", "E_HF", "E_CISD", "E_LCCSD", "E_HHL", "E_corr_HHL", "k", "theta"):
        assert column in record
    assert record["E_HHL"] == pytest.approx(-1.02)
    assert np.isnan(record["theta"])


def test_example_study_file_parses():
    h = load_ci_hamiltonian(EXAMPLE_CI_FILE)
    assert h.M == 2
    system = build_lcc_system(h)
    assert np.all(np.linalg.eigvalsh(system.A) > 0)
