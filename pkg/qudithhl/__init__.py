from .chemistry import (
    CiHamiltonian,
    EnergyResult,
    LccSystem,
    build_lcc_system,
    correlation_energy,
    isometry_prep,
    load_ci_directory,
    load_ci_hamiltonian,
    pec_sweep,
)
from .circuit import Circuit
from .gates import GateSpec, h_gate, hermitian_evolution, planar_rotation, x_gate, z_gate
from .hhl import (
    HHLConfig,
    HHLSolution,
    build_ucr,
    choose_defaults,
    expand_constant,
    hhl_solve,
    swap_test_overlap,
)
from .job_run_local import job_run_local
from .parameter_inspection import ParameterInspection
from .qft_qpe import build_iqft, build_qft, build_qpe, run_qpe
from .resources import compare_table, estimate
from .statevector import (
    Statevector,
    amplitude_encode,
    apply_controlled,
    apply_gate,
    inner_product,
    project_and_renormalize,
)
from .sweep_study import SweepStudy
