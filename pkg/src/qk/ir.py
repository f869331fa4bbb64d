"""Gate-level intermediate representation.

Instructions are immutable; composites are ordered trees of instructions,
nested composites and classical nodes (measurement-fed control flow kept
for the dynamic runtime).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import gates
from .errors import DynamicControlFlowInCircuitMode, NonUnitaryGate


@dataclass(frozen=True)
class Instruction:
    name: str
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()
    controls: tuple[int, ...] = ()
    adjoint: bool = False
    classical_target: str | None = None  # Measure result slot

    def __post_init__(self):
        gdef = gates.GATES.get(self.name)
        if gdef is None:
            raise ValueError(f"unknown gate {self.name!r}")
        if len(self.targets) != gdef.arity:
            raise ValueError(
                f"{self.name} expects {gdef.arity} target(s), got {len(self.targets)}"
            )
        if len(self.params) != gdef.n_params:
            raise ValueError(
                f"{self.name} expects {gdef.n_params} parameter(s), got {len(self.params)}"
            )
        seen = set(self.controls) | set(self.targets)
        if len(seen) != len(self.controls) + len(self.targets):
            raise ValueError(f"{self.name}: duplicate qubit in {self.controls + self.targets}")

    @property
    def qubits(self) -> tuple[int, ...]:
        """Controls first (most significant), then targets."""
        return self.controls + self.targets

    def with_controls(self, extra: tuple[int, ...]) -> "Instruction":
        return replace(self, controls=tuple(extra) + self.controls)


# -- classical expressions over measurement slots ----------------------------


@dataclass(frozen=True)
class CConst:
    value: object


@dataclass(frozen=True)
class CSlot:
    name: str


@dataclass(frozen=True)
class CBin:
    op: str  # + - * /
    left: object
    right: object


@dataclass(frozen=True)
class CCmp:
    op: str  # == != < > <= >=
    left: object
    right: object


def eval_cexpr(expr, slots: dict):
    if isinstance(expr, CConst):
        return expr.value
    if isinstance(expr, CSlot):
        if expr.name not in slots:
            raise KeyError(f"classical slot {expr.name!r} read before being written")
        return slots[expr.name]
    if isinstance(expr, CBin):
        a, b = eval_cexpr(expr.left, slots), eval_cexpr(expr.right, slots)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if expr.op == "/":
            return a / b
        raise ValueError(f"bad op {expr.op}")
    if isinstance(expr, CCmp):
        a, b = eval_cexpr(expr.left, slots), eval_cexpr(expr.right, slots)
        return {
            "==": a == b,
            "!=": a != b,
            "<": a < b,
            ">": a > b,
            "<=": a <= b,
            ">=": a >= b,
        }[expr.op]
    raise TypeError(f"not a classical expression: {expr!r}")


def cexpr_text(expr) -> str:
    if isinstance(expr, CConst):
        return repr(expr.value)
    if isinstance(expr, CSlot):
        return expr.name
    if isinstance(expr, CBin):
        return f"({cexpr_text(expr.left)} {expr.op} {cexpr_text(expr.right)})"
    if isinstance(expr, CCmp):
        return f"({cexpr_text(expr.left)} {expr.op} {cexpr_text(expr.right)})"
    return repr(expr)


# -- classical nodes ----------------------------------------------------------


@dataclass(frozen=True)
class CAssign:
    slot: str
    expr: object


@dataclass(frozen=True)
class CIf:
    cond: object
    then_children: tuple = ()
    else_children: tuple = ()


@dataclass(frozen=True)
class CPrint:
    args: tuple = ()


ClassicalNode = (CAssign, CIf, CPrint)


@dataclass
class CompositeInstruction:
    name: str = "composite"
    children: list = field(default_factory=list)
    region_tag: str | None = None  # None | "compute" | "action"

    def add(self, node) -> "CompositeInstruction":
        self.children.append(node)
        return self


def flatten(c: CompositeInstruction) -> list[Instruction]:
    """Depth-first instruction list; errors on measurement-fed control flow.

    Constant prints are dropped (they carry no circuit content); any other
    classical node depends on mid-circuit results and has no circuit-mode
    meaning.
    """
    out: list[Instruction] = []
    _flatten_into(c, out)
    return out


def _flatten_into(node, out):
    if isinstance(node, Instruction):
        out.append(node)
    elif isinstance(node, CompositeInstruction):
        for ch in node.children:
            _flatten_into(ch, out)
    elif isinstance(node, CPrint):
        pass
    elif isinstance(node, (CIf, CAssign)):
        raise DynamicControlFlowInCircuitMode(
            "kernel uses measurement results in control flow; run it in ftqc mode"
        )
    else:
        raise TypeError(f"unexpected IR node {node!r}")


def count_instructions(c: CompositeInstruction) -> int:
    return len(flatten(c))


def gate_matrix(instr: Instruction) -> np.ndarray:
    """Exact matrix on (controls + targets), controls most significant."""
    if instr.name in gates.NON_UNITARY:
        raise NonUnitaryGate(f"{instr.name} is not unitary")
    base = gates.base_matrix(instr.name, instr.params, instr.adjoint)
    return gates.controlled_matrix(base, len(instr.controls))


# -- canonical text dump ------------------------------------------------------


def _instr_line(instr: Instruction) -> str:
    params = f"({', '.join(_num(p) for p in instr.params)})" if instr.params else ""
    name = f"{instr.name}:adj" if instr.adjoint else instr.name
    text = f"{name}{params} {', '.join(f'q{t}' for t in instr.targets)}"
    if instr.controls:
        text += f" [ctrl: {', '.join(f'q{c}' for c in instr.controls)}]"
    if instr.classical_target:
        text += f" -> {instr.classical_target}"
    return text


def _num(v: float) -> str:
    return repr(v)


def dump(c) -> str:
    """One instruction per line; classical structure indented."""
    lines: list[str] = []
    _dump_into(c, lines, 0)
    return "\n".join(lines) + ("\n" if lines else "")


def _dump_into(node, lines, depth):
    pad = "  " * depth
    if isinstance(node, Instruction):
        lines.append(pad + _instr_line(node))
    elif isinstance(node, CompositeInstruction):
        for ch in node.children:
            _dump_into(ch, lines, depth)
    elif isinstance(node, CAssign):
        lines.append(f"{pad}{node.slot} = {cexpr_text(node.expr)}")
    elif isinstance(node, CPrint):
        lines.append(f"{pad}print({', '.join(cexpr_text(a) for a in node.args)})")
    elif isinstance(node, CIf):
        lines.append(f"{pad}if {cexpr_text(node.cond)}:")
        for ch in node.then_children:
            _dump_into(ch, lines, depth + 1)
        if node.else_children:
            lines.append(f"{pad}else:")
            for ch in node.else_children:
                _dump_into(ch, lines, depth + 1)
    else:
        raise TypeError(f"unexpected IR node {node!r}")


def has_classical_nodes(c) -> bool:
    if isinstance(c, (CIf, CAssign, CPrint)):
        return True
    if isinstance(c, CompositeInstruction):
        return any(has_classical_nodes(ch) for ch in c.children)
    return False


# -- qubit register handle ----------------------------------------------------


@dataclass
class RegResults:
    counts: dict = field(default_factory=dict)
    probabilities: dict = field(default_factory=dict)
    expectations: dict = field(default_factory=dict)
    byref_slots: dict = field(default_factory=dict)
    prints: list = field(default_factory=list)
    amplitudes: np.ndarray | None = None


class QReg:
    """Qubit register handle; execution results are persisted onto it."""

    def __init__(self, size: int, name: str = "q"):
        if size < 1:
            raise ValueError("register size must be >= 1")
        self.size = size
        self.name = name
        self.results = RegResults()

    def counts(self) -> dict:
        return dict(self.results.counts)

    def exp_val(self, name: str = "value") -> float:
        return self.results.expectations[name]

    def __repr__(self):
        return f"QReg(size={self.size}, name={self.name!r})"
