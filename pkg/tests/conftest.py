import numpy as np
import pytest


def _format_matrix(matrix):
    return "\n".join(" ".join(f"{v:.10f}" for v in row) for row in np.atleast_2d(matrix))


def write_ci_file(path, R, matrix, ehf=None):
    matrix = np.atleast_2d(matrix)
    lines = ["# synthetic CI Hamiltonian", f"dim {matrix.shape[0]}", f"R {R}"]
    if ehf is not None:
        lines.append(f"ehf {ehf}")
    lines.append(_format_matrix(matrix))
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def ci_matrix(R):
    """3x3 CI matrix whose shifted sub-block is positive-definite with spectrum in (0, 1)."""
    h00 = -1.10 - 0.05 * (R - 1.4)
    return np.array(
        [
            [h00, 0.09 + 0.01 * (R - 1.4), 0.04],
            [0.09 + 0.01 * (R - 1.4), h00 + 0.64, 0.01],
            [0.04, 0.01, h00 + 0.87],
        ]
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ci_writer(tmp_path):
    def _write(name, R, matrix, ehf=None):
        return write_ci_file(tmp_path / name, R, matrix, ehf)

    return _write


@pytest.fixture
def ci_directory(tmp_path):
    folder = tmp_path / "ci_files"
    folder.mkdir()
    for R in (1.2, 1.4, 1.6):
        write_ci_file(folder / f"h2_R{R:.2f}.txt", R, ci_matrix(R))
    return folder


def random_state_amplitudes(rng, size):
    psi = rng.normal(size=size) + 1j * rng.normal(size=size)
    return psi / np.linalg.norm(psi)


@pytest.fixture
def random_amplitudes(rng):
    return lambda size: random_state_amplitudes(rng, size)
