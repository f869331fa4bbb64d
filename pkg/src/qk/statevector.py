"""Ideal statevector engine.

Qubit 0 is the most significant bit of a basis index; a state reshaped
to (2,)*n has qubit k on axis k.
"""
from __future__ import annotations

import numpy as np

from . import ir


class StateVector:
    def __init__(self, n: int, rng: np.random.Generator | None = None):
        self.n = n
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.amps = np.zeros(2**n, dtype=complex)
        self.amps[0] = 1.0

    def copy(self) -> "StateVector":
        sv = StateVector.__new__(StateVector)
        sv.n = self.n
        sv.rng = self.rng
        sv.amps = self.amps.copy()
        return sv

    def apply_matrix(self, matrix: np.ndarray, qubits: tuple[int, ...]):
        k = len(qubits)
        t = self.amps.reshape((2,) * self.n)
        u = np.asarray(matrix, dtype=complex).reshape((2,) * (2 * k))
        t = np.tensordot(u, t, axes=(tuple(range(k, 2 * k)), qubits))
        t = np.moveaxis(t, tuple(range(k)), qubits)
        self.amps = np.ascontiguousarray(t).reshape(-1)

    def apply(self, instr: ir.Instruction):
        self.apply_matrix(ir.gate_matrix(instr), instr.qubits)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def prob_one(self, qubit: int) -> float:
        t = np.abs(self.amps.reshape((2,) * self.n)) ** 2
        return float(t.take(1, axis=qubit).sum())

    def measure(self, qubit: int) -> int:
        """Projective measurement with collapse and renormalization."""
        p1 = self.prob_one(qubit)
        outcome = 1 if self.rng.random() < p1 else 0
        self.collapse(qubit, outcome)
        return outcome

    def collapse(self, qubit: int, outcome: int):
        t = self.amps.reshape((2,) * self.n).copy()
        idx = [slice(None)] * self.n
        idx[qubit] = 1 - outcome
        t[tuple(idx)] = 0.0
        nrm = np.sqrt(np.sum(np.abs(t) ** 2))
        if nrm == 0:
            raise ZeroDivisionError("collapse onto zero-probability outcome")
        self.amps = (t / nrm).reshape(-1)

    def reset(self, qubit: int):
        """Measure, then flip back to |0> if the outcome was 1."""
        if self.measure(qubit) == 1:
            self.apply(ir.Instruction("X", (qubit,)))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def marginal(self, qubits: tuple[int, ...]) -> dict[tuple[int, ...], float]:
        """Joint outcome distribution of a subset of qubits."""
        p = self.probabilities().reshape((2,) * self.n)
        other = tuple(ax for ax in range(self.n) if ax not in qubits)
        if other:
            p = p.sum(axis=other)
        # remaining axes are sorted ascending; reorder to match `qubits`
        kept = sorted(qubits)
        p = np.moveaxis(p, tuple(range(len(kept))), tuple(kept.index(q) for q in qubits))
        out = {}
        for idx in np.ndindex(*(2,) * len(qubits)):
            val = float(p[idx])
            if val > 0.0:
                out[idx] = val
        return out


def unitary_of(instructions, n: int) -> np.ndarray:
    """Product of the instruction matrices in execution order."""
    u = np.eye(2**n, dtype=complex)
    for instr in instructions:
        # apply the gate to every basis column through the tensor kernel
        k = len(instr.qubits)
        g = ir.gate_matrix(instr).reshape((2,) * (2 * k))
        t = u.reshape((2,) * n + (2**n,))
        t = np.tensordot(g, t, axes=(tuple(range(k, 2 * k)), instr.qubits))
        t = np.moveaxis(t, tuple(range(k)), instr.qubits)
        u = np.ascontiguousarray(t).reshape(2**n, 2**n)
    return u


def phase_aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Max-norm distance after aligning the global phase on v's
    largest-magnitude entry."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    flat = np.argmax(np.abs(v))
    i, j = np.unravel_index(flat, v.shape)
    if abs(v[i, j]) < 1e-300:
        return float(np.max(np.abs(u - v)))
    phase = u[i, j] / v[i, j]
    mag = abs(phase)
    phase = phase / mag if mag > 1e-300 else 1.0
    return float(np.max(np.abs(u - phase * v)))
