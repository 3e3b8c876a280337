import copy
import os
from dataclasses import asdict, dataclass, field
from itertools import product

import numpy as np
import pandas as pd
import yaml

from .chemistry import build_lcc_system, load_ci_hamiltonian, solve_geometry
from .errors import ConfigurationError
from .gates import hermitian_spectrum
from .hhl import HHLConfig, choose_defaults, classical_solution, hhl_solve, toy_system
from .job_run_local import job_run_local
from .parameter_inspection import ParameterInspection
from .tools import (
    float_representer,
    insert_nested_dict_in_dataframe,
    int_representer,
    number_label_formatter,
    numpy_scalar_representer,
    parse_matrix_file,
    parse_vector_file,
    update_nested_dict,
)

STUDY_FILE = "sweep_study.yaml"
AUTO_C = ("lambda_min", "auto")


@dataclass
class SweepStudy:
    """A scan of HHL settings on a fixed problem.

    Every parameter combination becomes one run dictionary
    ``{"system": ..., "config": ...}`` in which the inspected parameters have
    been substituted, e.g. 'config/n_r' or 'config/dim'.

    Parameters
    ----------
    study_name : str
        The name of the study.
    system : dict
        The problem. One of

        - ``{"toy": "diag" | "nondiag"}``: built-in 3x3 systems;
        - ``{"A": [[...]], "b": [...]}``: inline matrix and right-hand side;
        - ``{"matrix": path, "rhs": path}``: matrix and vector files;
        - ``{"ci_file": path, "shift": bool, "isometry": bool}``: one CI
          Hamiltonian, for which the correlation energy is scanned.

        Relative paths are taken from study_path.
    base_config : dict
        HHLConfig fields shared by all runs. C may be omitted or set to
        'lambda_min', in which case the smallest eigenvalue of A is used
        with ratio_policy 'clip' unless stated otherwise.
    parameters_inspected : list, optional
        The list of parameters to inspect, as ParameterInspection objects or
        dictionaries.
    study_path : str, optional
        Folder of the study. Results go to
        ``<study_path>/<study_name>/output_files``. Default "./".
    """

    study_name: str
    system: dict
    base_config: dict = field(default_factory=dict)
    parameters_inspected: list = field(default_factory=list)
    study_path: str = "./"

    def __post_init__(self):
        self.study_path = os.path.abspath(os.path.expandvars(self.study_path))
        self.output_path = os.path.join(self.study_path, self.study_name, "output_files")

        if self.parameters_inspected is None:
            self.parameters_inspected = []
        self.parameters_inspected = [
            p if isinstance(p, ParameterInspection) else ParameterInspection.from_dict(p)
            for p in self.parameters_inspected
        ]
        if self.base_config is None:
            self.base_config = {}
        if not isinstance(self.system, dict) or not self.system:
            raise ConfigurationError("The sweep system must be a nonempty dictionary.")

        # Register the custom representers for numerical types
        yaml.add_representer(int, int_representer)
        yaml.add_representer(float, float_representer)
        yaml.add_representer(np.int64, numpy_scalar_representer)
        yaml.add_representer(np.float64, numpy_scalar_representer)

    @classmethod
    def from_dict(cls, dictionary):
        return cls(**dictionary)

    @classmethod
    def from_yaml(cls, yaml_path: str):
        """Loads a sweep study file; study_path defaults to its folder."""
        with open(yaml_path, "r", encoding="utf-8") as f:
            dictionary = yaml.safe_load(f)
        dictionary.setdefault("study_path", os.path.dirname(os.path.abspath(yaml_path)))
        return cls.from_dict(dictionary)

    @classmethod
    def load_folder(cls, folder_path: str):
        """Loads the 'sweep_study.yaml' of a folder.

        Parameters
        ----------
        folder_path : str
            The path to the folder containing the sweep study.

        Returns
        -------
        sweep_study : SweepStudy
            The sweep study.
        """
        with open(os.path.join(folder_path, STUDY_FILE), "r", encoding="utf-8") as f:
            dictionary = yaml.safe_load(f)
        dictionary["study_path"] = folder_path
        return cls.from_dict(dictionary)

    def build_parameter_combinations(self):
        """Builds the parameter combinations.

        Returns
        -------
        combinations : list
            List of tuples, where each tuple contains the name(s) of the
            parameter(s), the column name(s), the values, the number of
            values, the type of combination (single or multi) and, for multi
            combinations, the index of every value in its own list.
        """
        p_names = [p.parameter_name for p in self.parameters_inspected]
        p_values = [p.values for p in self.parameters_inspected]
        p_idx = np.array([p.combination_idx for p in self.parameters_inspected], dtype=int)
        p_combo_methods = [p.combination_method for p in self.parameters_inspected]
        p_columns = [p.column_name for p in self.parameters_inspected]

        single_combinations = [
            (p_names[idx], p_columns[idx], p_values[idx], len(p_values[idx]), "single")
            for idx in np.where(p_idx == -1)[0]
        ]

        joined_combinations = []
        for val in np.unique(p_idx[p_idx != -1]):
            idxs = np.where(p_idx == val)[0]
            names = [p_names[idx] for idx in idxs]
            columns = [p_columns[idx] for idx in idxs]
            values = [p_values[idx] for idx in idxs]
            combo_method = p_combo_methods[idxs[0]]
            # check if all combo methods with same idx are the same
            if any(p_combo_methods[idx] != combo_method for idx in idxs):
                raise ValueError(
                    "All combination methods with the same idx must be the same."
                )

            if combo_method == "individual":
                if not all(len(v) == len(values[0]) for v in values):
                    raise ValueError(
                        "All values must have the same length for individual combination."
                    )
                vv = list(zip(*values))
                id_equiv = list(zip(*[range(len(v)) for v in values]))
            elif combo_method == "meshgrid":
                id_grid = np.meshgrid(*[np.arange(len(v)) for v in values])
                id_equiv = list(zip(*[g.flatten().tolist() for g in id_grid]))
                vv = [tuple(values[k][i] for k, i in enumerate(ids)) for ids in id_equiv]
            else:
                vv = list(product(*values))
                id_equiv = list(product(*[range(len(v)) for v in values]))
            joined_combinations.append((names, columns, vv, len(vv), "multi", id_equiv))

        return single_combinations + joined_combinations

    def yield_parameter_combinations(self):
        """Yields progressively the various combinations of all parameters.

        Yields
        ------
        current_combination : list
            List of tuples (parameter name, column name, value, combination
            type, index of the value).
        """
        combinations = self.build_parameter_combinations()
        if not combinations:
            yield []
            return
        n_values = [c[3] for c in combinations]
        total_combinations = int(np.prod(n_values))
        print(f"Total number of parameter combinations: {total_combinations}")

        current_idx = [0] * len(combinations)
        for _ in range(total_combinations):
            current_combination = []
            for j, c in enumerate(combinations):
                if c[4] == "single":
                    current_combination.append(
                        (c[0], c[1], c[2][current_idx[j]], c[4], current_idx[j])
                    )
                else:
                    for k in range(len(c[0])):
                        current_combination.append(
                            (
                                c[0][k],
                                c[1][k],
                                c[2][current_idx[j]][k],
                                c[4],
                                c[5][current_idx[j]][k],
                            )
                        )
            # odometer update, first parameter fastest
            for i in range(len(current_idx)):
                current_idx[i] += 1
                if current_idx[i] < n_values[i]:
                    break
                current_idx[i] = 0

            yield current_combination

    def build_runs(self):
        """Run dictionaries and case labels of every combination."""
        runs = []
        for combination in self.yield_parameter_combinations():
            run_dict = {
                "system": copy.deepcopy(self.system),
                "config": copy.deepcopy(self.base_config),
            }
            for name, _, value, _, _ in combination:
                update_nested_dict(run_dict, name, value)
            str_blocks = [
                f"{column}_{number_label_formatter(value, idx)}"
                for _, column, value, _, idx in combination
            ]
            label = "case_" + "_".join(str_blocks) if str_blocks else "case_base"
            runs.append((label, run_dict))
        return runs

    def run(self, n_concurrent_jobs=1):
        """Executes every combination.

        Parameters
        ----------
        n_concurrent_jobs : int, optional
            Parallel workers, see ``job_run_local``. Default 1.

        Returns
        -------
        pandas.DataFrame
            One row per combination: the flattened run dictionary, the case
            label, the computed quantity ('bx' or 'e_corr') with its classical
            reference, absolute error, percentage difference, success
            probability and the error message of failed runs.
        """
        runs = self.build_runs()
        jobs = [(label, run_dict, self.study_path) for label, run_dict in runs]
        results = job_run_local(run_case, jobs, n_concurrent_jobs, verbose=len(jobs) > 1)

        dataframe = None
        for (label, run_dict), result in zip(runs, results):
            if result is None:
                result = {"error": "interrupted"}
            extra = {"case": label, **result}
            dataframe = insert_nested_dict_in_dataframe(dataframe, run_dict, extra)
        n_errors = int(dataframe["error"].notna().sum())
        print(f"Finished {len(runs)} runs, {n_errors} with error.")
        return dataframe

    def save_results(self, dataframe):
        """Writes sweep_results.csv/.pkl and the resolved study file."""
        os.makedirs(self.output_path, exist_ok=True)
        results_file = os.path.join(self.output_path, "sweep_results.csv")
        dataframe.to_csv(results_file, index=False)
        dataframe.to_pickle(results_file.replace(".csv", ".pkl"))

        study = asdict(self)
        study.pop("study_path")
        study_file = os.path.join(self.study_path, self.study_name, STUDY_FILE)
        with open(study_file, "w", encoding="utf-8") as f:
            yaml.dump(study, f)
        print(f"Results saved in {self.output_path}")
        return results_file


def _resolve_path(path, base_path):
    path = os.path.expandvars(str(path))
    return path if os.path.isabs(path) else os.path.join(base_path, path)


def resolve_system(system, base_path="."):
    """(A, b) of a non-chemistry sweep system."""
    if "toy" in system:
        return toy_system(system["toy"])
    if "A" in system:
        return np.atleast_2d(np.array(system["A"], dtype=float)), np.array(
            system["b"], dtype=float
        ).reshape(-1)
    if "matrix" in system:
        _, A = parse_matrix_file(_resolve_path(system["matrix"], base_path))
        _, b = parse_vector_file(_resolve_path(system["rhs"], base_path))
        return A, b
    raise ConfigurationError(
        f"Cannot build a system from keys {sorted(system)}; expected toy, A/b, matrix/rhs or ci_file."
    )


def resolve_config(config, A):
    """HHLConfig from a config dictionary.

    C missing, 'lambda_min' or 'auto' becomes lambda_min(A) (ratio_policy
    'clip' unless given); t = 'auto' takes the grid-fitting time of
    ``choose_defaults`` for the run's d and n_r.
    """
    config = dict(config)
    if config.get("t") == "auto":
        config["t"] = choose_defaults(A, config["dim"], config["n_r"]).t
    if config.get("C") is None or config.get("C") in AUTO_C:
        config["C"] = float(hermitian_spectrum(A)[0][0])
        config.setdefault("ratio_policy", "clip")
    return HHLConfig.from_dict(config)


def run_case(args):
    """Worker of ``SweepStudy.run``: one HHL run, errors caught."""
    label, run_dict, base_path = args
    system = run_dict["system"]
    try:
        if "ci_file" in system:
            h = load_ci_hamiltonian(_resolve_path(system["ci_file"], base_path))
            shift = system.get("shift", True)
            lcc = build_lcc_system(h, shift=shift)
            config = resolve_config(run_dict["config"], lcc.A)
            energy = solve_geometry(
                h, config, shift=shift, use_isometry=system.get("isometry", True)
            )
            quantity, value, reference = "e_corr", energy.e_corr, energy.e_corr_lccsd
            p_success = energy.p_success
        else:
            A, b = resolve_system(system, base_path)
            config = resolve_config(run_dict["config"], A)
            solution = hhl_solve(A, b, config)
            quantity, value = "bx", solution.bx
            reference = float(np.real(np.vdot(b, classical_solution(A, b))))
            p_success = solution.p_success
    except (ValueError, RuntimeError, KeyError, OSError) as e:
        print(f"Error in {label}: {e}")
        return {
            "quantity": None,
            "value": np.nan,
            "reference": np.nan,
            "abs_error": np.nan,
            "pfd": np.nan,
            "p_success": np.nan,
            "c_eff": np.nan,
            "error": f"{type(e).__name__}: {e}",
        }
    abs_error = abs(value - reference)
    return {
        "quantity": quantity,
        "value": value,
        "reference": reference,
        "abs_error": abs_error,
        "pfd": abs_error / abs(reference) * 100.0 if reference else np.nan,
        "p_success": p_success,
        "c_eff": config.effective_c(),
        "error": None,
    }
