"""Arithmetic circuits over the proving field.

A circuit is a straight-line program of add / mul / const-mul gates over
wires holding field elements, with wire 0 pinned to the constant 1.
Public input wires occupy the prefix [0, num_public); everything after
that is witness: declared private inputs, advice wires filled by bit
decomposition hints, and gate outputs.

A gate whose output wire already carries a value acts as an equality
assertion during witness generation, which is how booleanity checks and
explicit equality constraints are expressed without a separate gate
kind. Comparators follow the shifted-difference construction: for
n-bit operands, bit n of (a + 2^n - b) is set exactly when a >= b.
"""

import hashlib
from dataclasses import dataclass
from typing import NamedTuple

from .algebra.fields import R
from .constraints import R1CS

_R = int(R)


class CircuitError(ValueError):
    pass


class WitnessError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str  # "add" | "mul" | "cmul"
    left: int
    right: int  # for cmul this is unused and held at 0
    out: int
    const: int = 0  # cmul scalar


@dataclass(frozen=True)
class Decomposition:
    """Witness hint: fill `bits` with the little-endian bits of `source`."""

    source: int
    bits: tuple


class Circuit:
    def __init__(self):
        self.num_wires = 1  # wire 0 is the constant 1
        self.num_public = 1
        self.private_inputs = []
        self.outputs = []
        self.program = []  # gates and hints in execution order
        self.gates = []  # gates only, in constraint-row order
        self._constants = {1: 0}
        self._layout_open = True

    # -- wire allocation ------------------------------------------------

    def _new_wire(self) -> int:
        wire = self.num_wires
        self.num_wires += 1
        return wire

    def add_public_input(self) -> int:
        if not self._layout_open:
            raise CircuitError("public inputs must be allocated before any other wire")
        wire = self._new_wire()
        self.num_public += 1
        return wire

    def add_private_input(self) -> int:
        self._layout_open = False
        wire = self._new_wire()
        self.private_inputs.append(wire)
        return wire

    def mark_output(self, wire: int) -> None:
        self.outputs.append(wire)

    # -- gates ------------------------------------------------------------

    def _emit(self, kind: str, left: int, right: int, out: int, const: int = 0) -> int:
        for wire in (left, right, out):
            if not 0 <= wire < self.num_wires:
                raise CircuitError(f"wire {wire} does not exist")
        gate = Gate(kind, left, right, out, const % _R)
        self.program.append(gate)
        self.gates.append(gate)
        return out

    def add(self, left: int, right: int) -> int:
        self._layout_open = False
        return self._emit("add", left, right, self._new_wire())

    def mul(self, left: int, right: int) -> int:
        self._layout_open = False
        return self._emit("mul", left, right, self._new_wire())

    def cmul(self, const: int, wire: int) -> int:
        self._layout_open = False
        return self._emit("cmul", wire, 0, self._new_wire(), const)

    def constant(self, value: int) -> int:
        """Wire holding a fixed field value; reused across calls."""
        value %= _R
        if value not in self._constants:
            self._constants[value] = self.cmul(value, 0)
        return self._constants[value]

    def assert_equal(self, wire: int, target: int) -> None:
        """Constrain z[wire] == z[target] (as wire * 1 = target)."""
        self._layout_open = False
        self._emit("mul", wire, 0, target)

    def sub(self, left: int, right: int) -> int:
        return self.add(left, self.cmul(_R - 1, right))

    # -- gadgets ----------------------------------------------------------

    def decompose(self, wire: int, width: int) -> list:
        """Little-endian bit wires of `wire`, constrained to recompose.

        Sound only when the recomposition constraint binds, i.e. the
        value fits in `width` bits; otherwise witness generation fails.
        """
        if width < 1:
            raise CircuitError("bit width must be positive")
        self._layout_open = False
        bits = [self._new_wire() for _ in range(width)]
        self.program.append(Decomposition(wire, tuple(bits)))
        for bit in bits:
            self._emit("mul", bit, bit, bit)  # bit * bit = bit
        acc = bits[0]
        for i in range(1, width):
            acc = self.add(acc, self.cmul(1 << i, bits[i]))
        self.assert_equal(acc, wire)
        return bits

    def less_than(self, a: int, b: int, width: int) -> int:
        """1 if a < b else 0, for operands known to fit in `width` bits."""
        shifted = self.add(a, self.constant(1 << width))
        diff = self.sub(shifted, b)  # 2^width + a - b
        bits = self.decompose(diff, width + 1)
        return self.sub(0, bits[width])  # 1 - top bit

    def less_equal(self, a: int, b: int, width: int) -> int:
        return self.less_than(a, self.add(b, 0), width)  # a < b + 1

    def greater_than(self, a: int, b: int, width: int) -> int:
        return self.less_than(b, a, width)

    # -- witness generation -----------------------------------------------

    def generate_witness(self, public_values, private_values=()) -> list:
        """Full assignment z with z[0] = 1, or WitnessError.

        `public_values` covers wires 1..num_public-1 in order;
        `private_values` covers declared private inputs in order.
        """
        if len(public_values) != self.num_public - 1:
            raise WitnessError(
                f"expected {self.num_public - 1} public values, got {len(public_values)}"
            )
        if len(private_values) != len(self.private_inputs):
            raise WitnessError(
                f"expected {len(self.private_inputs)} private values, got {len(private_values)}"
            )
        values = [None] * self.num_wires
        values[0] = 1
        for wire, value in zip(range(1, self.num_public), public_values):
            values[wire] = int(value) % _R
        for wire, value in zip(self.private_inputs, private_values):
            values[wire] = int(value) % _R

        for step_index, step in enumerate(self.program):
            if isinstance(step, Decomposition):
                source = values[step.source]
                if source is None:
                    raise WitnessError(f"hint at step {step_index} reads unassigned wire")
                for i, bit in enumerate(step.bits):
                    values[bit] = (source >> i) & 1
                continue
            left = values[step.left]
            right = values[step.right]
            if left is None or right is None:
                raise WitnessError(f"gate at step {step_index} reads unassigned wire")
            if step.kind == "add":
                result = (left + right) % _R
            elif step.kind == "mul":
                result = left * right % _R
            else:
                result = step.const * left % _R
            if values[step.out] is None:
                values[step.out] = result
            elif values[step.out] != result:
                raise WitnessError(f"constraint violated at step {step_index}")

        for wire, value in enumerate(values):
            if value is None:
                raise WitnessError(f"wire {wire} was never assigned")
        return values

    # -- lowering and identity ----------------------------------------------

    def to_r1cs(self) -> R1CS:
        system = R1CS(self.num_wires, self.num_public)
        for gate in self.gates:
            if gate.kind == "mul":
                system.add_row({gate.left: 1}, {gate.right: 1}, {gate.out: 1})
            elif gate.kind == "add":
                b = {gate.left: 1}
                b[gate.right] = b.get(gate.right, 0) + 1
                system.add_row({0: 1}, b, {gate.out: 1})
            else:
                system.add_row({0: 1}, {gate.left: gate.const}, {gate.out: 1})
        return system

    def dump(self) -> str:
        """Canonical text form; the digest of this binds keys to circuits."""
        lines = [
            f"circuit-v1 wires={self.num_wires} public={self.num_public}",
            "private " + " ".join(str(w) for w in self.private_inputs),
            "outputs " + " ".join(str(w) for w in self.outputs),
        ]
        for step in self.program:
            if isinstance(step, Decomposition):
                lines.append(f"H {step.source} -> " + " ".join(str(b) for b in step.bits))
            elif step.kind == "cmul":
                lines.append(f"G cmul {step.const} {step.left} -> {step.out}")
            else:
                lines.append(f"G {step.kind} {step.left} {step.right} -> {step.out}")
        return "\n".join(lines) + "\n"

    def digest(self) -> bytes:
        return hashlib.sha256(self.dump().encode()).digest()


class ThresholdCircuit(NamedTuple):
    """Score-threshold statement over a rows x cols score matrix."""

    circuit: Circuit
    threshold_wire: int
    entry_wires: tuple
    decision_wire: int
    rows: int
    cols: int
    bit_width: int

    def public_values(self, threshold: int, matrix) -> list:
        flat = [entry for row in matrix for entry in row]
        if len(flat) != self.rows * self.cols:
            raise CircuitError(
                f"score matrix must be {self.rows}x{self.cols}, got {len(flat)} entries"
            )
        return [int(threshold)] + [int(entry) for entry in flat]

    def witness(self, threshold: int, matrix) -> list:
        return self.circuit.generate_witness(self.public_values(threshold, matrix))


def build_threshold_circuit(rows: int, cols: int, bit_width: int = 20) -> ThresholdCircuit:
    """Statement: all entries are in [0, 100] and sum(entries) >= t * rows * cols.

    Since the entries are fixed-point percentages, the sum condition says
    the mean score clears the threshold t. Both t and the matrix are
    public; the witness carries only comparator advice bits.
    """
    if rows < 1 or cols < 1:
        raise CircuitError("score matrix must be non-empty")
    num = rows * cols
    if 100 * num >= (1 << bit_width):
        raise CircuitError("bit width too small for the aggregate score range")
    c = Circuit()
    t = c.add_public_input()
    entries = tuple(c.add_public_input() for _ in range(num))

    total = entries[0]
    for e in entries[1:]:
        total = c.add(total, e)

    hundred = c.constant(100)
    in_range = [c.less_equal(e, hundred, bit_width) for e in entries]
    range_count = in_range[0]
    for flag in in_range[1:]:
        range_count = c.add(range_count, flag)
    c.assert_equal(range_count, c.constant(num))

    scaled_t = c.cmul(num, t)
    below = c.greater_than(scaled_t, total, bit_width)
    decision = c.sub(0, below)  # 1 - (t * num > S)
    c.assert_equal(decision, 0)  # decision must equal the constant 1
    c.mark_output(decision)

    return ThresholdCircuit(c, t, entries, decision, rows, cols, bit_width)
