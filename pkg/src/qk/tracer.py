"""Program tracing: interpret a lowered kernel with bound arguments and
build the concrete instruction tree.

Static control flow (loops, conditionals over bound values) is resolved
during the trace. Anything that depends on a mid-circuit measurement is
kept symbolic: measured values live in named classical slots, and
conditionals over them become CIf nodes evaluated by the dynamic
runtime. When a branch that depends on a measurement assigns a variable
that so far had a concrete value, the variable is promoted to a slot
first so both paths agree at runtime.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ir, kast, synthesis, transforms
from .compiler import BUILTIN_CALLS, CompiledKernel, KernelRegistry, QubitRef, RefCell
from .errors import ExecutionError, TypeMismatch, UnknownKernel
from .ir import CAssign, CBin, CCmp, CConst, CIf, CPrint, CSlot
from .operators import PauliOperator, exp_i_theta


@dataclass(frozen=True)
class RegView:
    """A qubit register or a slice of one, as flat qubit indices."""

    indices: tuple

    def size(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class Sym:
    """A classical value that is only known at runtime."""

    expr: object


@dataclass
class RefBinding:
    """A by-reference parameter inside a trace: the caller's cell plus the
    tracked current value. Stays in the environment across assignments so
    nested kernels that received the binding observe updates."""

    cell: RefCell
    value: object


@dataclass
class TraceInfo:
    measured: list
    byref: dict  # param name -> final value ('concrete', v) | ('slot', name)
    has_classical: bool = False


class Tracer:
    def __init__(self, registry: KernelRegistry, matrices: dict | None = None):
        self.registry = registry
        self.matrices = matrices or {}
        self.measured: list[int] = []
        self.has_classical = False
        # id(RefCell) -> ("concrete", value) | ("slot", slot name)
        self.cell_writes: dict[int, tuple] = {}

    # -- public entry point

    def trace(self, kernel: CompiledKernel, env: dict) -> tuple[ir.CompositeInstruction, TraceInfo]:
        env = dict(env)
        ref_cells = {}
        for name, ann in kernel.params:
            if ann.base in ("IntRef", "FloatRef", "BoolRef"):
                cell = env[name]
                ref_cells[name] = cell
                env[name] = RefBinding(cell, cell.value)
        comp = ir.CompositeInstruction(name=kernel.name)
        self._block(kernel.program, env, comp, symbolic=False)
        byref = {}
        for name, cell in ref_cells.items():
            written = self.cell_writes.get(id(cell))
            if written is not None:
                byref[name] = written
        return comp, TraceInfo(self.measured, byref, self.has_classical)

    # -- statements

    def _block(self, stmts, env, comp, symbolic):
        stmts = list(stmts)
        i = 0
        while i < len(stmts):
            s = stmts[i]
            if isinstance(s, kast.SWithCompute):
                action = stmts[i + 1]
                cblock = ir.CompositeInstruction(name="compute")
                self._block(s.body, env, cblock, symbolic)
                ablock = ir.CompositeInstruction(name="action")
                self._block(action.body, env, ablock, symbolic)
                comp.children.extend(transforms.expand_compute_action(cblock, ablock))
                i += 2
                continue
            self._stmt(s, env, comp, symbolic)
            i += 1

    def _stmt(self, s, env, comp, symbolic):
        if isinstance(s, kast.SGate):
            self._gate(s, env, comp, symbolic)
        elif isinstance(s, kast.SKernelCall):
            self._call(s, env, comp)
        elif isinstance(s, kast.SClassical):
            self._classical_call(s, env, comp)
        elif isinstance(s, kast.SPrint):
            args = tuple(self._as_cexpr(self._eval(a, env)) for a in s.args)
            comp.add(CPrint(args))
            self.has_classical = True
        elif isinstance(s, kast.SAssign):
            self._assign(s.target, self._eval(s.expr, env), env, comp, symbolic)
        elif isinstance(s, kast.SFor):
            rargs = [self._int(self._eval(a, env), "range bound") for a in s.range_args]
            for value in range(*rargs):
                env[s.var] = value
                self._block(s.body, env, comp, symbolic)
        elif isinstance(s, kast.SIf):
            self._if(s, env, comp, symbolic)
        elif isinstance(s, kast.SWithDecompose):
            self._decompose(s, env, comp)
        else:  # pragma: no cover
            raise ExecutionError(f"cannot trace {s!r}")

    def _gate(self, s: kast.SGate, env, comp, symbolic):
        from . import gates

        gdef = gates.GATES[s.name]
        target_args = [self._eval(a, env) for a in s.args[: gdef.arity]]
        params = tuple(
            self._float(self._eval(a, env), f"{s.name} angle")
            for a in s.args[gdef.arity :]
        )
        controls: tuple[int, ...] = ()
        if s.ctrl is not None:
            controls = self._qubit_list(self._eval(s.ctrl, env))

        views = [v for v in target_args if isinstance(v, RegView)]
        if views:
            if gdef.arity != 1:
                raise TypeMismatch(
                    f"{s.name} acts on {gdef.arity} qubits and cannot broadcast"
                    " over a register"
                )
            if s.assign_to is not None:
                raise TypeMismatch("a broadcast Measure cannot be assigned")
            for idx in views[0].indices:
                self._emit_gate(s, (idx,), params, controls, comp, env)
            return
        targets = tuple(self._qubit(v, s.name) for v in target_args)
        self._emit_gate(s, targets, params, controls, comp, env)

    def _emit_gate(self, s: kast.SGate, targets, params, controls, comp, env):
        instr = ir.Instruction(s.name, targets, params)
        if s.adjoint:
            instr = transforms.dagger_instruction(instr)
        if controls:
            instr = transforms._controlled_instruction(instr, controls)
        if s.name == "Measure":
            slot = None
            if s.assign_to is not None:
                slot = s.assign_to
                self._store(s.assign_to, Sym(CSlot(slot)), env, slot=slot)
                self.has_classical = True
            instr = ir.Instruction(
                "Measure", targets, (), controls, False, slot
            )
            self.measured.extend(targets)
        comp.add(instr)

    def _call(self, s: kast.SKernelCall, env, comp):
        if s.via_param:
            callee = env.get(s.name)
            if not isinstance(callee, CompiledKernel):
                raise UnknownKernel(f"{s.name!r} does not hold a kernel reference")
        else:
            callee = self.registry.get(s.name)
        args = [self._eval_arg(a, env) for a in s.args]
        sub_env = {}
        for (pname, ann), value in zip(callee.params, args):
            sub_env[pname] = self._coerce_param(ann, value, pname, callee.name)
        sub = ir.CompositeInstruction(name=callee.name)
        self._block(callee.program, sub_env, sub, symbolic=False)
        if s.modifier == "adjoint":
            sub = transforms.adjoint(sub)
        elif s.modifier == "ctrl":
            controls = self._qubit_list(self._eval(s.ctrl, env))
            sub = transforms.controlled(sub, controls)
        comp.add(sub)

    def _eval_arg(self, e, env):
        """Like _eval, but a bare name holding a ref binding forwards the
        binding itself so nested kernels share the by-reference slot."""
        if isinstance(e, kast.EName) and isinstance(env.get(e.name), RefBinding):
            return env[e.name]
        return self._eval(e, env)

    def _coerce_param(self, ann: kast.TypeAnnotation, value, pname, kname):
        if ann.base == "qreg":
            if isinstance(value, RegView):
                return value
            raise TypeMismatch(f"{kname}.{pname} needs a qreg argument")
        if ann.base == "qubit":
            if isinstance(value, QubitRef):
                return value
            if isinstance(value, RegView) and value.size() == 1:
                return QubitRef(value.indices[0])
            raise TypeMismatch(f"{kname}.{pname} needs a qubit argument")
        if ann.base == "int":
            return self._int(value, f"{kname}.{pname}")
        if ann.base == "float":
            return self._float(value, f"{kname}.{pname}")
        if ann.base == "bool":
            if isinstance(value, bool):
                return value
            raise TypeMismatch(f"{kname}.{pname} needs a bool argument")
        if ann.base == "PauliOperator":
            if isinstance(value, PauliOperator):
                return value
            raise TypeMismatch(f"{kname}.{pname} needs a PauliOperator argument")
        if ann.base == "list":
            if isinstance(value, list):
                return value
            raise TypeMismatch(f"{kname}.{pname} needs a list argument")
        if ann.base == "KernelSignature":
            if isinstance(value, CompiledKernel):
                return value
            raise TypeMismatch(f"{kname}.{pname} needs a kernel argument")
        if ann.base in ("IntRef", "FloatRef", "BoolRef"):
            if isinstance(value, RefBinding):
                return value
            raise TypeMismatch(
                f"{kname}.{pname} is by-reference and needs a ref argument"
            )
        raise TypeMismatch(f"unsupported parameter type {ann.text()}")  # pragma: no cover

    def _classical_call(self, s: kast.SClassical, env, comp):
        if s.name == "exp_i_theta":
            view = self._eval(s.args[0], env)
            if isinstance(view, QubitRef):
                view = RegView((view.index,))
            if not isinstance(view, RegView):
                raise TypeMismatch("exp_i_theta needs a qreg first argument")
            theta = self._float(self._eval(s.args[1], env), "exp_i_theta angle")
            op = self._eval(s.args[2], env)
            if not isinstance(op, PauliOperator):
                raise TypeMismatch("exp_i_theta needs a PauliOperator argument")
            if op.num_qubits() > view.size():
                raise TypeMismatch(
                    f"operator acts on {op.num_qubits()} qubits, register has {view.size()}"
                )
            comp.add(exp_i_theta(theta, op, qubit_map=list(view.indices)))
            return
        if s.name in BUILTIN_CALLS:  # pragma: no cover
            raise ExecutionError(f"builtin {s.name!r} not handled")
        raise ExecutionError(
            f"unknown classical function {s.name!r} (print and exp_i_theta"
            " are the supported classical calls)"
        )

    def _assign(self, target, value, env, comp, symbolic):
        current = env.get(target)
        if isinstance(value, Sym) or symbolic:
            comp.add(CAssign(target, self._as_cexpr(value)))
            self._store(target, Sym(CSlot(target)), env, slot=target)
            self.has_classical = True
        else:
            self._store(target, value, env)

    def _store(self, target, value, env, slot=None):
        current = env.get(target)
        if isinstance(current, RefBinding):
            current.value = value
            if slot is not None:
                self.cell_writes[id(current.cell)] = ("slot", slot)
            else:
                self.cell_writes[id(current.cell)] = ("concrete", value)
        else:
            env[target] = value

    def _if(self, s: kast.SIf, env, comp, symbolic):
        cond = self._eval(s.cond, env)
        if not isinstance(cond, Sym):
            branch = s.body if cond else s.orelse
            self._block(branch, env, comp, symbolic)
            return
        # measurement-dependent condition: promote concretely-known
        # variables assigned in either branch, then trace both symbolically
        self.has_classical = True
        for name in sorted(_assigned_names(s.body) | _assigned_names(s.orelse)):
            current = env.get(name)
            if isinstance(current, RefBinding):
                if isinstance(current.value, Sym):
                    continue
                comp.add(CAssign(name, CConst(current.value)))
                self._store(name, Sym(CSlot(name)), env, slot=name)
                continue
            if current is None or isinstance(current, Sym):
                env[name] = Sym(CSlot(name))
                continue
            comp.add(CAssign(name, CConst(current)))
            env[name] = Sym(CSlot(name))
        then_comp = ir.CompositeInstruction(name="then")
        self._block(s.body, env, then_comp, symbolic=True)
        else_comp = ir.CompositeInstruction(name="else")
        self._block(s.orelse, env, else_comp, symbolic=True)
        comp.add(
            CIf(self._as_cexpr(cond), tuple(then_comp.children), tuple(else_comp.children))
        )

    def _decompose(self, s: kast.SWithDecompose, env, comp):
        view = self._eval(s.target, env)
        if isinstance(view, QubitRef):
            view = RegView((view.index,))
        if not isinstance(view, RegView):
            raise TypeMismatch("decompose target must be a qreg or a slice")
        matrix = self._run_matrix_program(s, env)
        method = s.method or "default"
        comp.add(synthesis.synthesize(matrix, list(view.indices), method))

    def _run_matrix_program(self, s: kast.SWithDecompose, env) -> np.ndarray:
        current: np.ndarray | None = None
        for m in s.body:
            if isinstance(m, kast.MAssign):
                if isinstance(m.value, kast.MEye):
                    dim = self._int(self._eval(m.value.dim, env), "np.eye dimension")
                    current = np.eye(dim, dtype=complex)
                elif isinstance(m.value, kast.MLit):
                    rows = [
                        [complex(self._number(self._eval(x, env))) for x in row]
                        for row in m.value.rows
                    ]
                    current = np.array(rows, dtype=complex)
                else:  # MRef
                    name = m.value.name
                    if name in self.matrices:
                        current = np.asarray(self.matrices[name], dtype=complex)
                    elif isinstance(env.get(name), np.ndarray):
                        current = np.asarray(env[name], dtype=complex)
                    else:
                        raise TypeMismatch(
                            f"decompose block references unknown matrix {name!r}"
                        )
            else:  # MItemAssign
                if current is None:
                    raise TypeMismatch(
                        f"matrix {m.var!r} is indexed before being assigned"
                    )
                r = self._int(self._eval(m.row, env), "matrix row")
                c = self._int(self._eval(m.col, env), "matrix column")
                current[r, c] = complex(self._number(self._eval(m.value, env)))
        if current is None:
            raise TypeMismatch(
                f"decompose block never assigns the matrix {s.matrix_var!r}"
            )
        return current

    # -- expression evaluation

    def _eval(self, e, env):
        if isinstance(e, kast.EConst):
            return e.value
        if isinstance(e, kast.EName):
            if e.name in env:
                value = env[e.name]
                if isinstance(value, RefBinding):
                    return value.value
                return value
            if e.name in self.registry:
                return self.registry.get(e.name)
            raise ExecutionError(f"undefined variable {e.name!r}")
        if isinstance(e, kast.EUn):
            v = self._eval(e.operand, env)
            if isinstance(v, Sym):
                return Sym(CBin("-", CConst(0), v.expr))
            return -self._number(v)
        if isinstance(e, kast.EBin):
            lv = self._eval(e.left, env)
            rv = self._eval(e.right, env)
            if isinstance(lv, Sym) or isinstance(rv, Sym):
                return Sym(CBin(e.op, self._as_cexpr(lv), self._as_cexpr(rv)))
            lv, rv = self._number(lv), self._number(rv)
            if e.op == "+":
                return lv + rv
            if e.op == "-":
                return lv - rv
            if e.op == "*":
                return lv * rv
            if e.op == "/":
                return lv / rv
            raise ExecutionError(f"bad operator {e.op}")  # pragma: no cover
        if isinstance(e, kast.ECmp):
            lv = self._eval(e.left, env)
            rv = self._eval(e.right, env)
            if isinstance(lv, Sym) or isinstance(rv, Sym):
                return Sym(CCmp(e.op, self._as_cexpr(lv), self._as_cexpr(rv)))
            return ir.eval_cexpr(CCmp(e.op, CConst(lv), CConst(rv)), {})
        if isinstance(e, kast.ESize):
            base = env.get(e.base)
            if isinstance(base, RegView):
                return base.size()
            if isinstance(base, list):
                return len(base)
            raise TypeMismatch(f"{e.base}.size() needs a qreg")
        if isinstance(e, kast.EIndex):
            base = env.get(e.base)
            idx = self._int(self._eval(e.index, env), "index")
            if isinstance(base, RegView):
                if not 0 <= idx < base.size():
                    raise ExecutionError(
                        f"{e.base}[{idx}] out of range for size {base.size()}"
                    )
                return QubitRef(base.indices[idx])
            if isinstance(base, list):
                return base[idx]
            raise TypeMismatch(f"{e.base!r} is not indexable")
        if isinstance(e, kast.ESlice):
            base = env.get(e.base)
            lo = self._int(self._eval(e.lo, env), "slice bound")
            if isinstance(base, RegView):
                hi = (
                    base.size()
                    if e.hi is None
                    else self._int(self._eval(e.hi, env), "slice bound")
                )
                return RegView(base.indices[lo:hi])
            if isinstance(base, list):
                hi = len(base) if e.hi is None else self._int(self._eval(e.hi, env), "slice bound")
                return base[lo:hi]
            raise TypeMismatch(f"{e.base!r} is not sliceable")
        raise ExecutionError(f"cannot evaluate {e!r}")  # pragma: no cover

    # -- small coercions

    def _as_cexpr(self, value):
        if isinstance(value, Sym):
            return value.expr
        if isinstance(value, (bool, int, float, str)):
            return CConst(value)
        raise TypeMismatch(f"{value!r} cannot appear in a classical expression")

    def _number(self, v):
        if isinstance(v, Sym):
            raise ExecutionError(
                "a measurement result cannot feed a gate parameter or qubit index"
            )
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise TypeMismatch(f"expected a number, got {type(v).__name__}")
        return v

    def _int(self, v, what: str) -> int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise TypeMismatch(f"{what} must be an int, got {v!r}")
        return v

    def _float(self, v, what: str) -> float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise TypeMismatch(f"{what} must be a number, got {v!r}")
        return float(v)

    def _qubit(self, v, gate: str) -> int:
        if isinstance(v, QubitRef):
            return v.index
        if isinstance(v, RegView) and v.size() == 1:
            return v.indices[0]
        raise TypeMismatch(f"{gate} target must be a qubit, got {v!r}")

    def _qubit_list(self, v) -> tuple:
        if isinstance(v, QubitRef):
            return (v.index,)
        if isinstance(v, RegView):
            return tuple(v.indices)
        raise TypeMismatch(f"control must be a qubit or a register slice, got {v!r}")


def _assigned_names(stmts) -> set:
    out: set[str] = set()
    for s in stmts:
        if isinstance(s, kast.SAssign):
            out.add(s.target)
        elif isinstance(s, kast.SGate) and s.assign_to:
            out.add(s.assign_to)
        elif isinstance(s, kast.SFor):
            out |= _assigned_names(s.body)
        elif isinstance(s, kast.SIf):
            out |= _assigned_names(s.body) | _assigned_names(s.orelse)
        elif isinstance(s, (kast.SWithCompute, kast.SWithAction)):
            out |= _assigned_names(s.body)
    return out
