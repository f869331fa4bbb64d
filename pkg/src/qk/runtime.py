"""Backends and the two execution modes.

Circuit mode traces, flattens and simulates the whole program, sampling
measured qubits from the final state (exact distribution kept when
shots=0). FTQC mode interprets the traced tree per shot: measurements
collapse immediately, classical nodes run in real time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gates, ir, synthesis, transforms
from .compiler import ArgPack, CompiledKernel, KernelRegistry, bind_args, first_qreg, persist_byref
from .errors import (
    BackendCapabilityError,
    BackendNotFound,
    DynamicControlFlowInCircuitMode,
    ExecutionError,
    NonHermitianObservable,
    NonUnitarySubcircuit,
)
from .ir import QReg
from .operators import PauliOperator
from .statevector import StateVector, unitary_of
from .tracer import RegView, Tracer

CAP_SHOTS = "shots"
CAP_EXACT = "exact-expectation"
CAP_MID_MEASURE = "mid-circuit-measure"


@dataclass
class Backend:
    name: str
    capabilities: frozenset
    configuration: dict = field(default_factory=dict)
    default_mode: str = "circuit"


_BACKENDS = {}


def register_backend(name: str, factory):
    _BACKENDS[name] = factory


def make_backend(name: str = "qpp", config: dict | None = None) -> Backend:
    if name not in _BACKENDS:
        raise BackendNotFound(
            f"unknown backend {name!r}; available: {sorted(_BACKENDS)}"
        )
    return _BACKENDS[name](config or {})


def _statevector_backend(config: dict) -> Backend:
    caps = {CAP_SHOTS, CAP_EXACT, CAP_MID_MEASURE}
    if str(config.get("mid_circuit_measure", "true")).lower() in ("false", "0", "no"):
        caps.discard(CAP_MID_MEASURE)
    return Backend("qpp", frozenset(caps), dict(config))


def _ftqc_backend(config: dict) -> Backend:
    backend = _statevector_backend(config)
    return Backend("ftqc", backend.capabilities, dict(config), default_mode="ftqc")


register_backend("qpp", _statevector_backend)
register_backend("ftqc", _ftqc_backend)


# -- tracing front end ---------------------------------------------------------


def _trace(kernel: CompiledKernel, pack: ArgPack, registry: KernelRegistry):
    env = bind_args(kernel, pack, registry)
    n = first_qreg(kernel, pack).size
    # the first (and only) qreg argument is the physical register
    env[kernel.params[0][0]] = RegView(tuple(range(n)))
    tracer = Tracer(registry, pack.matrices)
    comp, info = tracer.trace(kernel, env)
    return comp, info, n


def extract_composite(
    kernel: CompiledKernel,
    pack: ArgPack,
    registry: KernelRegistry,
    optimize: bool = True,
) -> ir.CompositeInstruction:
    """Fully resolved gate tree, equal to what an execution would run."""
    comp, info, _ = _trace(kernel, pack, registry)
    if optimize and not info.has_classical:
        comp = transforms.peephole_optimize(comp)
    return comp


def as_unitary_matrix(
    kernel: CompiledKernel, pack: ArgPack, registry: KernelRegistry
) -> np.ndarray:
    comp, info, n = _trace(kernel, pack, registry)
    instrs = ir.flatten(comp)
    for instr in instrs:
        if instr.name in gates.NON_UNITARY:
            raise NonUnitarySubcircuit(
                f"{instr.name} has no unitary matrix; remove it or use execute()"
            )
    return unitary_of(instrs, n)


# -- execution ------------------------------------------------------------------


def _key_for(measured_bits: dict, n: int) -> str:
    return "".join(str(measured_bits.get(q, 0)) for q in range(n))


def execute(
    kernel: CompiledKernel,
    pack: ArgPack,
    registry: KernelRegistry,
    backend: Backend | None = None,
    mode: str | None = None,
    shots: int = 1024,
    seed: int = 0,
    optimize: bool = True,
) -> QReg:
    """Run a kernel; results land on (and are returned through) its qreg."""
    backend = backend or make_backend("qpp")
    mode = mode or backend.default_mode
    if mode not in ("circuit", "ftqc"):
        raise ExecutionError(f"unknown mode {mode!r}")
    if shots < 0:
        raise ExecutionError("shots must be >= 0")
    q = first_qreg(kernel, pack)
    comp, info, n = _trace(kernel, pack, registry)
    q.results = ir.RegResults()
    rng = np.random.default_rng(seed)
    if mode == "circuit":
        if info.has_classical and ir.has_classical_nodes(comp):
            # constant prints alone are fine; CIf/CAssign are not
            _reject_dynamic(comp)
        if optimize and not info.has_classical:
            comp = transforms.peephole_optimize(comp)
        _run_circuit(comp, q, n, shots, rng)
    else:
        if CAP_MID_MEASURE not in backend.capabilities:
            raise BackendCapabilityError(
                f"backend {backend.name!r} cannot run ftqc programs"
                " (no mid-circuit measurement)"
            )
        _run_ftqc(comp, q, n, max(shots, 1), rng, info)
    slots = {}
    for name, (kind, value) in info.byref.items():
        if kind == "concrete":
            slots[name] = value
    persist_byref(q, slots)
    _write_back_cells(kernel, pack, q)
    return q


def _reject_dynamic(comp):
    for node in comp.children if isinstance(comp, ir.CompositeInstruction) else []:
        if isinstance(node, (ir.CIf, ir.CAssign)):
            raise DynamicControlFlowInCircuitMode(
                "kernel uses measurement results in control flow; run it in ftqc mode"
            )
        if isinstance(node, ir.CompositeInstruction):
            _reject_dynamic(node)


def _run_circuit(comp, q: QReg, n: int, shots: int, rng):
    sv = StateVector(n, rng)
    measured: list[int] = []
    for node in _circuit_nodes(comp):
        if isinstance(node, ir.CPrint):
            q.results.prints.append(_format_print(node, {}))
            continue
        if node.name == "Measure":
            for t in node.targets:
                if t not in measured:
                    measured.append(t)
            continue
        if node.name == "Reset":
            sv.reset(node.targets[0])
            continue
        if any(t in measured for t in node.qubits):
            raise ExecutionError(
                "circuit mode cannot apply gates after a qubit was measured;"
                " use ftqc mode"
            )
        sv.apply(node)
    q.results.amplitudes = sv.amps.copy()
    if measured:
        dist = sv.marginal(tuple(sorted(measured)))
        keyed = {
            _key_for(dict(zip(sorted(measured), bits)), n): p
            for bits, p in dist.items()
        }
        if shots == 0:
            q.results.probabilities = dict(sorted(keyed.items()))
        else:
            keys = sorted(keyed)
            pvals = np.array([keyed[k] for k in keys])
            draws = rng.multinomial(shots, pvals / pvals.sum())
            q.results.counts = {k: int(c) for k, c in zip(keys, draws) if c > 0}


def _circuit_nodes(comp):
    for node in comp.children:
        if isinstance(node, ir.CompositeInstruction):
            yield from _circuit_nodes(node)
        elif isinstance(node, (ir.CIf, ir.CAssign)):
            raise DynamicControlFlowInCircuitMode(
                "kernel uses measurement results in control flow; run it in ftqc mode"
            )
        else:
            yield node


def _format_print(node: ir.CPrint, slots: dict) -> str:
    parts = []
    for arg in node.args:
        value = ir.eval_cexpr(arg, slots)
        if isinstance(value, bool):
            value = int(value)
        parts.append(str(value))
    return " ".join(parts)


def _run_ftqc(comp, q: QReg, n: int, shots: int, rng, info):
    counts: dict[str, int] = {}
    final_slots: dict = {}
    for _ in range(shots):
        sv = StateVector(n, rng)
        slots: dict = {}
        measured_bits: dict[int, int] = {}
        _interpret(comp, sv, slots, measured_bits, q)
        if measured_bits:
            key = _key_for(measured_bits, n)
            counts[key] = counts.get(key, 0) + 1
        final_slots = slots
    q.results.amplitudes = sv.amps.copy()
    q.results.counts = dict(sorted(counts.items()))
    for name, (kind, slotname) in info.byref.items():
        if kind == "slot":
            if slotname not in final_slots:
                raise ExecutionError(
                    f"by-reference slot {slotname!r} was never written"
                )
            value = final_slots[slotname]
            q.results.byref_slots[name] = (
                int(value) if isinstance(value, bool) else value
            )


def _interpret(node, sv: StateVector, slots, measured_bits, q: QReg):
    if isinstance(node, ir.CompositeInstruction):
        for child in node.children:
            _interpret(child, sv, slots, measured_bits, q)
    elif isinstance(node, ir.Instruction):
        if node.name == "Measure":
            bit = sv.measure(node.targets[0])
            measured_bits[node.targets[0]] = bit
            if node.classical_target:
                slots[node.classical_target] = bool(bit)
        elif node.name == "Reset":
            sv.reset(node.targets[0])
        else:
            sv.apply(node)
    elif isinstance(node, ir.CAssign):
        slots[node.slot] = ir.eval_cexpr(node.expr, slots)
    elif isinstance(node, ir.CPrint):
        q.results.prints.append(_format_print(node, slots))
    elif isinstance(node, ir.CIf):
        branch = node.then_children if ir.eval_cexpr(node.cond, slots) else node.else_children
        for child in branch:
            _interpret(child, sv, slots, measured_bits, q)
    else:  # pragma: no cover
        raise ExecutionError(f"cannot interpret {node!r}")


def _write_back_cells(kernel: CompiledKernel, pack: ArgPack, q: QReg):
    from .compiler import RefCell

    for name, ann in kernel.params:
        if ann.base in ("IntRef", "FloatRef", "BoolRef") and name in q.results.byref_slots:
            value = q.results.byref_slots[name]
            cell = pack.values.get(name)
            if isinstance(cell, RefCell):
                cell.value = value


# -- observable expectation -------------------------------------------------------


def observe(
    kernel: CompiledKernel,
    op: PauliOperator,
    pack: ArgPack,
    registry: KernelRegistry,
    backend: Backend | None = None,
    shots: int = 0,
    seed: int = 0,
    result_name: str = "value",
) -> float:
    """Expectation of a Hermitian Pauli operator over the kernel's state,
    term by term with basis-change circuits (exact when shots=0)."""
    if not op.is_hermitian():
        raise NonHermitianObservable("observable must have real coefficients")
    backend = backend or make_backend("qpp")
    if shots == 0 and CAP_EXACT not in backend.capabilities:
        raise BackendCapabilityError(f"backend {backend.name!r} cannot do exact expectations")
    comp, info, n = _trace(kernel, pack, registry)
    instrs = ir.flatten(comp)
    for instr in instrs:
        if instr.name in gates.NON_UNITARY:
            raise NonUnitarySubcircuit(
                "observe needs a measurement-free kernel as the state preparation"
            )
    rng = np.random.default_rng(seed)
    base = StateVector(n, rng)
    for instr in instrs:
        base.apply(instr)
    total = 0.0
    for word, coeff in op.term_list():
        if not word:
            total += coeff.real
            continue
        sv = base.copy()
        support = []
        for qubit, letter in word:
            if qubit >= n:
                raise ExecutionError(
                    f"observable touches qubit {qubit}, register has {n}"
                )
            if letter == "X":
                sv.apply_matrix(gates.base_matrix("H", ()), (qubit,))
            elif letter == "Y":
                sv.apply_matrix(gates.base_matrix("Rx", (math.pi / 2,)), (qubit,))
            support.append(qubit)
        probs = sv.probabilities()
        signs = _parity_signs(support, n)
        if shots == 0:
            total += coeff.real * float(np.dot(signs, probs))
        else:
            draws = rng.multinomial(shots, probs / probs.sum())
            total += coeff.real * float(np.dot(signs, draws)) / shots
    q = first_qreg(kernel, pack)
    q.results.expectations[result_name] = total
    return total


def _parity_signs(support, n: int) -> np.ndarray:
    signs = np.ones(2**n)
    idx = np.arange(2**n)
    for qubit in support:
        bit = (idx >> (n - 1 - qubit)) & 1
        signs *= 1 - 2 * bit
    return signs


# -- OpenQASM 2.0 export ------------------------------------------------------------

_QASM_NAMES = {
    "H": "h", "X": "x", "Y": "y", "Z": "z", "S": "s", "Sdg": "sdg",
    "T": "t", "Tdg": "tdg", "Rx": "rx", "Ry": "ry", "Rz": "rz",
    "CX": "cx", "CY": "cy", "CZ": "cz", "Swap": "swap",
    "CRz": "crz", "CPhase": "cu1",
}


def _export_expand(instr: ir.Instruction) -> list[ir.Instruction]:
    if instr.adjoint:
        instr = transforms.dagger_instruction(instr)
    if instr.name in ("Measure", "Reset"):
        return [instr]
    if instr.name == "CX" and len(instr.controls) == 1:
        return [instr]  # ccx below
    if not instr.controls and instr.name != "fSim":
        return [instr]
    # everything else: synthesize the exact matrix on its qubits
    matrix = ir.gate_matrix(instr)
    method = {1: "zyz", 2: "kak"}.get(len(instr.qubits), "two_level")
    comp = synthesis.synthesize(matrix, list(instr.qubits), method)
    return ir.flatten(comp)


def openqasm(
    kernel: CompiledKernel, pack: ArgPack, registry: KernelRegistry
) -> str:
    comp, info, n = _trace(kernel, pack, registry)
    instrs = ir.flatten(comp)
    lines = ['OPENQASM 2.0;', 'include "qelib1.inc";', f"qreg q[{n}];", f"creg c[{n}];"]
    for raw in instrs:
        for instr in _export_expand(raw):
            if instr.name == "Measure":
                lines.append(f"measure q[{instr.targets[0]}] -> c[{instr.targets[0]}];")
                continue
            if instr.name == "Reset":
                lines.append(f"reset q[{instr.targets[0]}];")
                continue
            if instr.name == "CX" and len(instr.controls) == 1:
                c, a, b = instr.controls[0], instr.targets[0], instr.targets[1]
                lines.append(f"ccx q[{c}],q[{a}],q[{b}];")
                continue
            name = _QASM_NAMES.get(instr.name)
            if name is None or instr.controls:
                from .errors import UnsupportedGateForExport

                raise UnsupportedGateForExport(f"cannot export {instr!r}")
            params = (
                "(" + ",".join(repr(p) for p in instr.params) + ")" if instr.params else ""
            )
            qubits = ",".join(f"q[{t}]" for t in instr.targets)
            lines.append(f"{name}{params} {qubits};")
    return "\n".join(lines) + "\n"
