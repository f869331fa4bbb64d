"""Independent oracles used by the tests.

These deliberately avoid the production tensor kernels: gates are applied
to basis states with explicit bit arithmetic, measurement branching is
enumerated with dense vectors, and fermionic operators are built directly
in the occupation basis. Conventions pinned here: qubit 0 is the most
significant bit.
"""
from __future__ import annotations

import re
from collections import defaultdict

import numpy as np

from qk import gates, ir


def apply_to_amplitudes(instr: ir.Instruction, amp: dict, n: int) -> dict:
    """Apply one instruction to a sparse amplitude map {basis index: amp}."""
    base = gates.base_matrix(instr.name, instr.params, instr.adjoint)
    k = len(instr.targets)
    out: dict = defaultdict(complex)
    for idx, a in amp.items():
        bits = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
        if any(bits[c] == 0 for c in instr.controls):
            out[idx] += a
            continue
        col = 0
        for j, t in enumerate(instr.targets):
            col |= bits[t] << (k - 1 - j)
        for row in range(2**k):
            val = base[row, col]
            if abs(val) < 1e-300:
                continue
            new = idx
            for j, t in enumerate(instr.targets):
                mask = 1 << (n - 1 - t)
                if (row >> (k - 1 - j)) & 1:
                    new |= mask
                else:
                    new &= ~mask
            out[new] += a * val
    return {i: v for i, v in out.items() if abs(v) > 1e-300}


def dense_unitary(instrs, n: int) -> np.ndarray:
    """Column-by-column matrix of a circuit via basis-state propagation."""
    dim = 2**n
    u = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        amp = {col: 1.0 + 0j}
        for instr in instrs:
            amp = apply_to_amplitudes(instr, amp, n)
        for idx, a in amp.items():
            u[idx, col] = a
    return u


def aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    i, j = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    phase = u[i, j] / v[i, j]
    phase /= abs(phase)
    return float(np.max(np.abs(u - phase * v)))


def statevector_of(instrs, n: int) -> np.ndarray:
    amp = {0: 1.0 + 0j}
    for instr in instrs:
        amp = apply_to_amplitudes(instr, amp, n)
    vec = np.zeros(2**n, dtype=complex)
    for idx, a in amp.items():
        vec[idx] = a
    return vec


# -- dynamic-mode branch enumeration ------------------------------------------


def enumerate_ftqc(comp, n: int) -> dict[str, float]:
    """Exact outcome distribution of a dynamic program: every measurement
    splits the run into both branches weighted by the Born probabilities."""
    results: defaultdict[str, float] = defaultdict(float)

    def prob_one(state, qubit):
        t = np.abs(state.reshape((2,) * n)) ** 2
        return float(t.take(1, axis=qubit).sum())

    def collapse(state, qubit, outcome):
        t = state.reshape((2,) * n).copy()
        sel = [slice(None)] * n
        sel[qubit] = 1 - outcome
        t[tuple(sel)] = 0
        vec = t.reshape(-1)
        return vec / np.linalg.norm(vec)

    def go(nodes, state, slots, measured, weight):
        if weight < 1e-14:
            return
        if not nodes:
            key = "".join(str(measured.get(q, 0)) for q in range(n))
            results[key] += weight
            return
        node, rest = nodes[0], nodes[1:]
        if isinstance(node, ir.CompositeInstruction):
            go(list(node.children) + rest, state, slots, measured, weight)
        elif isinstance(node, ir.Instruction):
            if node.name == "Measure":
                p1 = prob_one(state, node.targets[0])
                for outcome in (0, 1):
                    p = p1 if outcome else 1 - p1
                    if p < 1e-14:
                        continue
                    s2 = collapse(state, node.targets[0], outcome)
                    m2 = dict(measured)
                    m2[node.targets[0]] = outcome
                    sl2 = dict(slots)
                    if node.classical_target:
                        sl2[node.classical_target] = bool(outcome)
                    go(rest, s2, sl2, m2, weight * p)
            elif node.name == "Reset":
                p1 = prob_one(state, node.targets[0])
                for outcome in (0, 1):
                    p = p1 if outcome else 1 - p1
                    if p < 1e-14:
                        continue
                    s2 = collapse(state, node.targets[0], outcome)
                    if outcome:
                        amp = {
                            i: v for i, v in enumerate(s2) if abs(v) > 1e-300
                        }
                        amp = apply_to_amplitudes(ir.Instruction("X", node.targets), amp, n)
                        s2 = np.zeros_like(s2)
                        for i, v in amp.items():
                            s2[i] = v
                    go(rest, s2, dict(slots), dict(measured), weight * p)
            else:
                amp = {i: v for i, v in enumerate(state) if abs(v) > 1e-300}
                amp = apply_to_amplitudes(node, amp, n)
                s2 = np.zeros_like(state)
                for i, v in amp.items():
                    s2[i] = v
                go(rest, s2, slots, measured, weight)
        elif isinstance(node, ir.CAssign):
            sl2 = dict(slots)
            sl2[node.slot] = ir.eval_cexpr(node.expr, slots)
            go(rest, state, sl2, measured, weight)
        elif isinstance(node, ir.CPrint):
            go(rest, state, slots, measured, weight)
        elif isinstance(node, ir.CIf):
            branch = node.then_children if ir.eval_cexpr(node.cond, slots) else node.else_children
            go(list(branch) + rest, state, slots, measured, weight)
        else:  # pragma: no cover
            raise TypeError(f"unexpected node {node!r}")

    init = np.zeros(2**n, dtype=complex)
    init[0] = 1.0
    go([comp], init, {}, {}, 1.0)
    return dict(results)


# -- fermionic occupation-basis matrices ----------------------------------------


def ladder_matrix(mode: int, dagger: bool, n_modes: int) -> np.ndarray:
    """a_mode or a_mode^dagger with the sign convention
    (-1)^(number of occupied modes below `mode`); mode 0 is the MSB."""
    dim = 2**n_modes
    m = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        occ = [(idx >> (n_modes - 1 - k)) & 1 for k in range(n_modes)]
        sign = (-1) ** sum(occ[:mode])
        mask = 1 << (n_modes - 1 - mode)
        if dagger and occ[mode] == 0:
            m[idx | mask, idx] = sign
        elif not dagger and occ[mode] == 1:
            m[idx & ~mask, idx] = sign
    return m


def fermion_matrix(fop, n_modes: int) -> np.ndarray:
    dim = 2**n_modes
    total = np.zeros((dim, dim), dtype=complex)
    for word, coeff in fop.terms.items():
        term = np.eye(dim, dtype=complex)
        for mode, dagger in word:
            term = term @ ladder_matrix(mode, dagger, n_modes)
        total += coeff * term
    return total


# -- OpenQASM 2.0 grammar check ------------------------------------------------

_QELIB_ARITY = {
    "h": (1, 0), "x": (1, 0), "y": (1, 0), "z": (1, 0), "s": (1, 0),
    "sdg": (1, 0), "t": (1, 0), "tdg": (1, 0), "id": (1, 0),
    "rx": (1, 1), "ry": (1, 1), "rz": (1, 1), "u1": (1, 1),
    "cx": (2, 0), "cy": (2, 0), "cz": (2, 0), "ch": (2, 0), "swap": (2, 0),
    "crz": (2, 1), "cu1": (2, 1), "ccx": (3, 0),
}

_FLOAT = r"-?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_GATE_RE = re.compile(
    rf"([a-z]\w*)\s*(?:\(({_FLOAT}(?:,{_FLOAT})*)\))?\s+(q\[\d+\](?:,q\[\d+\])*);"
)
_MEASURE_RE = re.compile(r"measure q\[(\d+)\] -> c\[(\d+)\];")
_RESET_RE = re.compile(r"reset q\[(\d+)\];")


def validate_openqasm(text: str) -> list[str]:
    """Returns a list of problems; empty means the text parses."""
    problems = []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 4 or lines[0] != "OPENQASM 2.0;" or lines[1] != 'include "qelib1.inc";':
        problems.append("bad header")
        return problems
    m = re.fullmatch(r"qreg q\[(\d+)\];", lines[2])
    c = re.fullmatch(r"creg c\[(\d+)\];", lines[3])
    if not m or not c:
        problems.append("bad register declarations")
        return problems
    n = int(m.group(1))
    for ln in lines[4:]:
        if _MEASURE_RE.fullmatch(ln) or _RESET_RE.fullmatch(ln):
            continue
        g = _GATE_RE.fullmatch(ln)
        if not g:
            problems.append(f"unparsable statement: {ln}")
            continue
        name, params, qubits = g.group(1), g.group(2), g.group(3)
        if name not in _QELIB_ARITY:
            problems.append(f"unknown gate {name}")
            continue
        arity, n_params = _QELIB_ARITY[name]
        q_indices = re.findall(r"q\[(\d+)\]", qubits)
        if len(q_indices) != arity:
            problems.append(f"{name} expects {arity} qubits: {ln}")
        if len(set(q_indices)) != len(q_indices):
            problems.append(f"duplicate qubit: {ln}")
        if any(int(i) >= n for i in q_indices):
            problems.append(f"qubit out of range: {ln}")
        got_params = len(params.split(",")) if params else 0
        if got_params != n_params:
            problems.append(f"{name} expects {n_params} params: {ln}")
    return problems
