"""Intrinsic gate table: arities, parameter counts, matrices, dagger rules.

Bit-ordering convention used throughout: qubit 0 is the most significant
bit of a basis index, so a k-qubit matrix acts on (q_first ... q_last)
with q_first as the MSB.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonUnitaryGate

SQ2 = 1.0 / math.sqrt(2.0)


def _h(_):
    return np.array([[SQ2, SQ2], [SQ2, -SQ2]], dtype=complex)


def _x(_):
    return np.array([[0, 1], [1, 0]], dtype=complex)


def _y(_):
    return np.array([[0, -1j], [1j, 0]], dtype=complex)


def _z(_):
    return np.array([[1, 0], [0, -1]], dtype=complex)


def _s(_):
    return np.array([[1, 0], [0, 1j]], dtype=complex)


def _sdg(_):
    return np.array([[1, 0], [0, -1j]], dtype=complex)


def _t(_):
    return np.array([[1, 0], [0, cmath.exp(0.25j * math.pi)]], dtype=complex)


def _tdg(_):
    return np.array([[1, 0], [0, cmath.exp(-0.25j * math.pi)]], dtype=complex)


def _rx(p):
    c, s = math.cos(p[0] / 2), math.sin(p[0] / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _ry(p):
    c, s = math.cos(p[0] / 2), math.sin(p[0] / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(p):
    return np.array(
        [[cmath.exp(-0.5j * p[0]), 0], [0, cmath.exp(0.5j * p[0])]], dtype=complex
    )


def _ctrl2(base):
    """Embed a 1-qubit matrix as control-on-first-qubit 2-qubit matrix."""
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = base
    return m


def _cx(_):
    return _ctrl2(_x(()))


def _cy(_):
    return _ctrl2(_y(()))


def _cz(_):
    return _ctrl2(_z(()))


def _crz(p):
    return _ctrl2(_rz(p))


def _cphase(p):
    m = np.eye(4, dtype=complex)
    m[3, 3] = cmath.exp(1j * p[0])
    return m


def _swap(_):
    m = np.eye(4, dtype=complex)
    m[[1, 2]] = m[[2, 1]]
    return m


def _fsim(p):
    # Excitation-preserving block on {|01>,|10>}, e^{-i phi} phase on |11>.
    theta, phi = p
    c, s = math.cos(theta), math.sin(theta)
    m = np.eye(4, dtype=complex)
    m[1, 1] = c
    m[1, 2] = -1j * s
    m[2, 1] = -1j * s
    m[2, 2] = c
    m[3, 3] = cmath.exp(-1j * phi)
    return m


@dataclass(frozen=True)
class GateDef:
    name: str
    arity: int
    n_params: int
    matrix_fn: object  # params tuple -> ndarray, None for Measure/Reset
    # dagger rule: "self" | "negate" | name of the partner gate
    dagger: str


GATES: dict[str, GateDef] = {
    g.name: g
    for g in [
        GateDef("H", 1, 0, _h, "self"),
        GateDef("X", 1, 0, _x, "self"),
        GateDef("Y", 1, 0, _y, "self"),
        GateDef("Z", 1, 0, _z, "self"),
        GateDef("S", 1, 0, _s, "Sdg"),
        GateDef("Sdg", 1, 0, _sdg, "S"),
        GateDef("T", 1, 0, _t, "Tdg"),
        GateDef("Tdg", 1, 0, _tdg, "T"),
        GateDef("Rx", 1, 1, _rx, "negate"),
        GateDef("Ry", 1, 1, _ry, "negate"),
        GateDef("Rz", 1, 1, _rz, "negate"),
        GateDef("CX", 2, 0, _cx, "self"),
        GateDef("CY", 2, 0, _cy, "self"),
        GateDef("CZ", 2, 0, _cz, "self"),
        GateDef("CRz", 2, 1, _crz, "negate"),
        GateDef("CPhase", 2, 1, _cphase, "negate"),
        GateDef("Swap", 2, 0, _swap, "self"),
        GateDef("fSim", 2, 2, _fsim, "negate"),
        GateDef("Measure", 1, 0, None, "none"),
        GateDef("Reset", 1, 0, None, "none"),
    ]
}

# Aliases accepted in kernel source, resolved at parse time.
GATE_ALIASES = {"CNOT": "CX", "Mz": "Measure"}

NON_UNITARY = frozenset({"Measure", "Reset"})


def is_gate_name(name: str) -> bool:
    return name in GATES or name in GATE_ALIASES


def canonical_gate_name(name: str) -> str:
    return GATE_ALIASES.get(name, name)


def base_matrix(name: str, params: tuple[float, ...], adjoint: bool = False) -> np.ndarray:
    """Matrix of a gate on its own targets (controls not included)."""
    gdef = GATES[name]
    if gdef.matrix_fn is None:
        raise NonUnitaryGate(f"{name} has no unitary matrix")
    if adjoint:
        if gdef.dagger == "negate":
            return gdef.matrix_fn(tuple(-p for p in params))
        if gdef.dagger == "self":
            return gdef.matrix_fn(params)
        return GATES[gdef.dagger].matrix_fn(params)
    return gdef.matrix_fn(params)


def controlled_matrix(base: np.ndarray, n_controls: int) -> np.ndarray:
    """Expand with controls as the most significant qubits."""
    if n_controls == 0:
        return base
    k = base.shape[0]
    dim = k * (2**n_controls)
    m = np.eye(dim, dtype=complex)
    m[dim - k :, dim - k :] = base
    return m
