"""Instruction lists over a qudit register, with named stages and gate tallies."""
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .gates import GateSpec
from .statevector import (
    Statevector,
    apply_blocks,
    apply_controlled,
    apply_gate,
    basis_state,
)


@dataclass(frozen=True, eq=False)
class GateInstruction:
    """A gate on a list of target wires."""

    gate: GateSpec
    targets: tuple
    category: str = "gate"

    def __post_init__(self):
        targets = (self.targets,) if np.isscalar(self.targets) else tuple(self.targets)
        object.__setattr__(self, "targets", targets)

    @property
    def wires(self):
        return tuple(self.targets)

    def apply(self, state):
        return apply_gate(state, self.gate, list(self.targets))

    def inverse(self):
        return GateInstruction(self.gate.dagger(), self.targets, self.category)

    def remap(self, mapping):
        return GateInstruction(
            self.gate, tuple(mapping[t] for t in self.targets), self.category
        )


@dataclass(frozen=True, eq=False)
class ControlledInstruction:
    """A gate on ``targets`` conditioned on the digit of ``control``.

    Parameters
    ----------
    gate : GateSpec
        Base gate.
    control : int
        Control wire.
    targets : tuple
        Target wires, as many as the gate arity.
    mode : str
        "power" or "select", see ``statevector.apply_controlled``.
    value : int, optional
        Control digit for "select" mode.
    weight : int
        Number of base-unitary applications the instruction stands for. QPE
        records d^k for a controlled U^(d^k).
    category : str
        Tally bucket.
    """

    gate: GateSpec
    control: int
    targets: tuple
    mode: str = "power"
    value: int = None
    weight: int = 1
    category: str = "controlled"
    _blocks: dict = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in ("power", "select"):
            raise ConfigurationError(f"Unknown control mode '{self.mode}'.")
        if self.mode == "select" and (
            self.value is None or not 0 <= self.value < self.gate.dim
        ):
            raise ConfigurationError(f"Select mode needs a control value, got {self.value}.")
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.gate.arity != len(self.targets):
            raise ConfigurationError(
                f"Gate '{self.gate.label}' acts on {self.gate.arity} qudits, "
                f"{len(self.targets)} targets given."
            )

    @property
    def wires(self):
        return (self.control,) + tuple(self.targets)

    def blocks(self):
        """Matrix applied on each control digit; cached after the first call."""
        if self._blocks is None:
            d = self.gate.dim
            if self.mode == "power":
                blocks, current = {}, np.eye(self.gate.matrix.shape[0], dtype=complex)
                for j in range(1, d):
                    current = current @ self.gate.matrix
                    blocks[j] = current
            else:
                blocks = {int(self.value): self.gate.matrix}
            object.__setattr__(self, "_blocks", blocks)
        return self._blocks

    def apply(self, state):
        if state.dim != self.gate.dim:
            # reuse the error reporting of the plain kernel
            return apply_controlled(
                state, self.gate, self.control, list(self.targets), self.mode, self.value
            )
        return apply_blocks(state, self.blocks(), self.control, list(self.targets))

    def inverse(self):
        return ControlledInstruction(
            self.gate.dagger(),
            self.control,
            self.targets,
            self.mode,
            self.value,
            self.weight,
            self.category,
        )

    def remap(self, mapping):
        return ControlledInstruction(
            self.gate,
            mapping[self.control],
            tuple(mapping[t] for t in self.targets),
            self.mode,
            self.value,
            self.weight,
            self.category,
            self._blocks,
        )


def rotation_blocks(dim, plane, angles):
    """Stack of planar rotations R_ij(theta_v), shape (len(angles), d, d)."""
    i, j = plane
    angles = np.asarray(angles, dtype=float)
    c, s = np.cos(angles / 2), np.sin(angles / 2)
    blocks = np.tile(np.eye(dim, dtype=complex), (len(angles), 1, 1))
    blocks[:, i, i] = c
    blocks[:, j, j] = c
    blocks[:, j, i] = s
    blocks[:, i, j] = -s
    return blocks


@dataclass(frozen=True, eq=False)
class UniformlyControlledRotation:
    """Block-diagonal sum_v |v><v| (x) R_ij(angles[v]).

    ``controls`` is read most-significant first, ``target`` is the rotated
    qudit. One slot per control basis value, including v = 0.
    """

    dim: int
    controls: tuple
    target: int
    angles: np.ndarray = field(repr=False)
    plane: tuple = (0, 1)
    category: str = "ucr"

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float).reshape(-1)
        if angles.size != self.dim ** len(self.controls):
            raise ConfigurationError(
                f"{len(self.controls)} control qudits need {self.dim ** len(self.controls)} "
                f"angles, got {angles.size}."
            )
        i, j = self.plane
        if i == j or not (0 <= i < self.dim and 0 <= j < self.dim):
            raise ConfigurationError(f"Invalid rotation plane {self.plane} for d={self.dim}.")
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "plane", tuple(self.plane))

    @property
    def wires(self):
        return self.controls + (self.target,)

    @property
    def slots(self):
        return self.angles.size

    def matrix(self):
        """Dense unitary on the wire order (controls..., target)."""
        blocks = rotation_blocks(self.dim, self.plane, self.angles)
        size = self.slots * self.dim
        matrix = np.zeros((size, size), dtype=complex)
        for v, block in enumerate(blocks):
            matrix[v * self.dim : (v + 1) * self.dim, v * self.dim : (v + 1) * self.dim] = block
        return matrix

    def apply(self, state):
        d, n = state.dim, state.n_qudits
        if d != self.dim:
            raise ConfigurationError(
                f"Rotation built for d={self.dim} applied to a d={d} register."
            )
        wires = list(self.wires)
        k = len(self.controls)
        psi = state.amplitudes.reshape((d,) * n)
        psi = np.moveaxis(psi, wires, list(range(k + 1)))
        moved_shape = psi.shape
        psi = psi.reshape(self.slots, d, -1)
        blocks = rotation_blocks(d, self.plane, self.angles)
        psi = np.einsum("vab,vbr->var", blocks, psi).reshape(moved_shape)
        psi = np.moveaxis(psi, list(range(k + 1)), wires)
        return Statevector(d, n, psi.reshape(-1))

    def inverse(self):
        return UniformlyControlledRotation(
            self.dim, self.controls, self.target, -self.angles, self.plane, self.category
        )

    def remap(self, mapping):
        return UniformlyControlledRotation(
            self.dim,
            tuple(mapping[c] for c in self.controls),
            mapping[self.target],
            self.angles,
            self.plane,
            self.category,
        )


@dataclass
class Circuit:
    """Ordered instructions on ``n_qudits`` wires of dimension ``dim``.

    Parameters
    ----------
    dim : int
        Qudit dimension.
    n_qudits : int
        Register size.
    instructions : list, optional
        GateInstruction, ControlledInstruction or UniformlyControlledRotation
        objects, executed in order.
    stages : dict, optional
        Stage name to (start, stop) instruction slice, so partial executions
        can stop at intermediate states.
    """

    dim: int
    n_qudits: int
    instructions: list = field(default_factory=list)
    stages: dict = field(default_factory=dict)

    def __post_init__(self):
        instructions, self.instructions = list(self.instructions), []
        for instruction in instructions:
            self.append(instruction)

    def _check(self, instruction):
        wires = list(instruction.wires)
        if len(set(wires)) != len(wires):
            raise ConfigurationError(f"Instruction wires {wires} overlap.")
        for w in wires:
            if not 0 <= w < self.n_qudits:
                raise ConfigurationError(
                    f"Wire {w} out of range for a {self.n_qudits}-qudit circuit."
                )
        gate = getattr(instruction, "gate", None)
        if gate is not None and gate.dim != self.dim:
            raise ConfigurationError(
                f"Gate '{gate.label}' of dimension {gate.dim} in a d={self.dim} circuit."
            )

    def append(self, instruction):
        self._check(instruction)
        self.instructions.append(instruction)
        return self

    def extend(self, instructions, stage=None):
        start = len(self.instructions)
        for instruction in instructions:
            self.append(instruction)
        if stage is not None:
            self.stages[stage] = (start, len(self.instructions))
        return self

    def compose(self, other, wires=None, stage=None):
        """Appends ``other`` with its wire w mapped to ``wires[w]``.

        Stages of ``other`` are carried over as ``"<stage>/<name>"`` when a
        stage name is given.
        """
        if other.dim != self.dim:
            raise ConfigurationError(
                f"Cannot compose a d={other.dim} circuit into a d={self.dim} circuit."
            )
        wires = list(range(other.n_qudits)) if wires is None else list(wires)
        if len(wires) != other.n_qudits:
            raise ConfigurationError(
                f"Composing needs {other.n_qudits} wires, got {len(wires)}."
            )
        offset = len(self.instructions)
        self.extend((inst.remap(wires) for inst in other.instructions), stage=stage)
        if stage is not None:
            for name, (start, stop) in other.stages.items():
                self.stages[f"{stage}/{name}"] = (offset + start, offset + stop)
        return self

    def inverse(self):
        size = len(self.instructions)
        stages = {
            name: (size - stop, size - start) for name, (start, stop) in self.stages.items()
        }
        return Circuit(
            self.dim,
            self.n_qudits,
            [inst.inverse() for inst in reversed(self.instructions)],
            stages,
        )

    def _position(self, key, end):
        if key is None:
            return len(self.instructions) if end else 0
        if isinstance(key, str):
            if key not in self.stages:
                raise ConfigurationError(f"Unknown stage '{key}'.")
            return self.stages[key][1 if end else 0]
        return int(key)

    def run(self, state, start=None, stop=None):
        """Executes instructions ``start:stop``; stage names are accepted.

        ``run(state, stop="controlled_u")`` stops after that stage, and
        ``start="iqft"`` begins at the first instruction of that stage.
        """
        if state.dim != self.dim or state.n_qudits != self.n_qudits:
            raise ConfigurationError(
                f"Circuit on {self.n_qudits} qudits of d={self.dim} cannot run a "
                f"{state.n_qudits}-qudit d={state.dim} state."
            )
        for instruction in self.instructions[
            self._position(start, False) : self._position(stop, True)
        ]:
            state = instruction.apply(state)
        return state

    def unitary(self):
        """Dense matrix of the circuit, column j = run(|j>)."""
        size = self.dim**self.n_qudits
        columns = [
            self.run(basis_state(self.dim, self.n_qudits, j)).amplitudes for j in range(size)
        ]
        return np.stack(columns, axis=1)

    def counts(self):
        """Number of instructions per category."""
        return dict(Counter(inst.category for inst in self.instructions))

    def two_qudit_count(self):
        return sum(1 for inst in self.instructions if len(inst.wires) == 2)

    def controlled_u_weight(self):
        return sum(
            inst.weight for inst in self.instructions if inst.category == "controlled_u"
        )

    def rotation_slots(self):
        return sum(
            inst.slots
            for inst in self.instructions
            if isinstance(inst, UniformlyControlledRotation)
        )
