"""Circuit transforms: adjoint, controlled generation with compute-action
awareness, and a peephole cleanup pass.
"""
from __future__ import annotations

import math
from dataclasses import replace

from . import gates, ir
from .errors import MeasureInComputeBlock, NonUnitarySubcircuit


def dagger_instruction(instr: ir.Instruction) -> ir.Instruction:
    if instr.name in gates.NON_UNITARY:
        raise NonUnitarySubcircuit(f"cannot take the adjoint of {instr.name}")
    if instr.adjoint:
        return replace(instr, adjoint=False)
    rule = gates.GATES[instr.name].dagger
    if rule == "self":
        return instr
    if rule == "negate":
        return replace(instr, params=tuple(-p for p in instr.params))
    return replace(instr, name=rule)


def adjoint(c: ir.CompositeInstruction) -> ir.CompositeInstruction:
    """Reverse the circuit and dagger every instruction."""
    out = ir.CompositeInstruction(name=f"{c.name}.adjoint", region_tag=c.region_tag)
    for child in reversed(c.children):
        if isinstance(child, ir.Instruction):
            out.add(dagger_instruction(child))
        elif isinstance(child, ir.CompositeInstruction):
            out.add(adjoint(child))
        else:
            raise NonUnitarySubcircuit(
                "cannot take the adjoint of measurement-dependent control flow"
            )
    return out


_CTRL_NAMES = {"X": "CX", "Y": "CY", "Z": "CZ", "Rz": "CRz"}


def _controlled_instruction(instr: ir.Instruction, controls: tuple[int, ...]) -> ir.Instruction:
    if instr.name in gates.NON_UNITARY:
        raise NonUnitarySubcircuit(f"cannot control {instr.name}")
    if (
        len(controls) == 1
        and not instr.controls
        and not instr.adjoint
        and instr.name in _CTRL_NAMES
    ):
        return ir.Instruction(
            _CTRL_NAMES[instr.name], (controls[0],) + instr.targets, instr.params
        )
    return instr.with_controls(controls)


def controlled(c: ir.CompositeInstruction, controls) -> ir.CompositeInstruction:
    """Controlled version of a circuit.

    Compute-tagged regions are left untouched (their effect cancels with
    the appended uncompute), so only action regions and untagged parts
    gain controls.
    """
    controls = tuple(controls)
    out = ir.CompositeInstruction(name=f"{c.name}.ctrl", region_tag=c.region_tag)
    for child in c.children:
        if isinstance(child, ir.CompositeInstruction):
            if child.region_tag == "compute":
                out.add(child)
            else:
                out.add(controlled(child, controls))
        elif isinstance(child, ir.Instruction):
            out.add(_controlled_instruction(child, controls))
        elif isinstance(child, ir.CPrint):
            out.add(child)
        else:
            raise NonUnitarySubcircuit(
                "cannot control measurement-dependent control flow"
            )
    return out


def expand_compute_action(
    compute: ir.CompositeInstruction, action: ir.CompositeInstruction
) -> list[ir.CompositeInstruction]:
    """U, V -> [U, V, U-dagger] with region tags kept for controlled()."""
    for instr in ir.flatten(compute):
        if instr.name in gates.NON_UNITARY:
            raise MeasureInComputeBlock(
                f"{instr.name} inside a compute block cannot be uncomputed"
            )
    compute.region_tag = "compute"
    action.region_tag = "action"
    uncompute = adjoint(compute)
    uncompute.region_tag = "compute"
    return [compute, action, uncompute]


_SELF_INVERSE = frozenset({"H", "X", "Y", "Z", "CX", "CY", "CZ", "Swap"})
_INVERSE_PAIRS = {("S", "Sdg"), ("Sdg", "S"), ("T", "Tdg"), ("Tdg", "T")}
_ROTATIONS = {"Rx": 4 * math.pi, "Ry": 4 * math.pi, "Rz": 4 * math.pi,
              "CRz": 4 * math.pi, "CPhase": 2 * math.pi}


def _same_wires(a: ir.Instruction, b: ir.Instruction) -> bool:
    return a.targets == b.targets and a.controls == b.controls


def _wrap(angle: float, period: float) -> float:
    wrapped = math.fmod(angle, period)
    if abs(wrapped) < 1e-12 or abs(abs(wrapped) - period) < 1e-12:
        return 0.0
    return wrapped


def peephole_optimize(c: ir.CompositeInstruction) -> ir.CompositeInstruction:
    """Cancel adjacent inverse pairs, merge adjacent same-axis rotations.

    Operates on the flattened circuit and iterates to a fixpoint; the
    unitary is preserved and the instruction count never grows.
    """
    instrs = ir.flatten(c)
    changed = True
    while changed:
        changed = False
        out: list[ir.Instruction] = []
        i = 0
        while i < len(instrs):
            cur = instrs[i]
            nxt = instrs[i + 1] if i + 1 < len(instrs) else None
            if nxt is not None and _same_wires(cur, nxt) and not cur.adjoint and not nxt.adjoint:
                if cur.name == nxt.name and cur.name in _SELF_INVERSE:
                    i += 2
                    changed = True
                    continue
                if (cur.name, nxt.name) in _INVERSE_PAIRS:
                    i += 2
                    changed = True
                    continue
                if cur.name == nxt.name and cur.name in _ROTATIONS:
                    period = _ROTATIONS[cur.name]
                    merged = tuple(
                        _wrap(p + q, period) for p, q in zip(cur.params, nxt.params)
                    )
                    if all(abs(p) < 1e-12 for p in merged):
                        i += 2
                    else:
                        out.append(replace(cur, params=merged))
                        i += 2
                    changed = True
                    continue
                if cur.name == nxt.name == "fSim":
                    merged = tuple(
                        _wrap(p + q, 2 * math.pi) for p, q in zip(cur.params, nxt.params)
                    )
                    if all(abs(p) < 1e-12 for p in merged):
                        i += 2
                    else:
                        out.append(replace(cur, params=merged))
                        i += 2
                    changed = True
                    continue
            if cur.name in _ROTATIONS and all(
                abs(_wrap(p, _ROTATIONS[cur.name])) < 1e-12 for p in cur.params
            ):
                i += 1
                changed = True
                continue
            out.append(cur)
            i += 1
        instrs = out
    return ir.CompositeInstruction(name=c.name, children=list(instrs))
