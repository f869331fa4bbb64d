"""Lowering of kernel ASTs into executable form, the kernel registry with
its dependency DAG, and runtime argument binding.

The lowered ``program`` is the validated, canonicalized statement tree
(loops and conditionals kept); the digest is a sha256 over the canonical
source plus the sorted digests of all dependencies.
"""
from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field

from . import gates, kast
from .errors import (
    ArityError,
    ComputeWithoutAction,
    CyclicDependency,
    MeasureInComputeBlock,
    ShadowedKernelName,
    TypeMismatch,
    UnboundKernelReference,
    UnknownKernel,
)
from .ir import QReg

DIGEST_PREFIX = "qk-program-v1"

BUILTIN_CALLS = frozenset({"exp_i_theta"})


@dataclass(frozen=True)
class CompiledKernel:
    name: str
    params: tuple  # ((name, TypeAnnotation), ...)
    digest: str
    dependencies: tuple  # transitive closure, topologically ordered
    program: tuple  # validated statement tree
    source: str  # canonical rewritten source

    @property
    def signature(self):
        return tuple(t for _, t in self.params)


def digest_source(source: str, dep_digests) -> str:
    h = hashlib.sha256()
    h.update(DIGEST_PREFIX.encode())
    h.update(b"\x00")
    h.update(source.encode())
    for d in sorted(dep_digests):
        h.update(b"\x00")
        h.update(d.encode())
    return h.hexdigest()


class KernelRegistry:
    """Compiled kernels plus their dependency DAG. Registration never
    mutates previously registered kernels."""

    def __init__(self):
        self.kernels: dict[str, CompiledKernel] = {}
        self.edges: dict[str, tuple] = {}  # name -> direct dependency names

    def __contains__(self, name: str) -> bool:
        return name in self.kernels

    def get(self, name: str) -> CompiledKernel:
        if name not in self.kernels:
            raise UnknownKernel(f"kernel {name!r} is not registered")
        return self.kernels[name]

    def names(self) -> frozenset:
        return frozenset(self.kernels)

    def register(self, kernel: CompiledKernel, direct_deps=()):
        for dep in direct_deps:
            if dep not in self.kernels:
                raise UnknownKernel(
                    f"kernel {kernel.name!r} depends on unregistered {dep!r}"
                )
        self.kernels[kernel.name] = kernel
        self.edges[kernel.name] = tuple(direct_deps)


def topo_order(registry: KernelRegistry, root: str) -> list[str]:
    """Dependencies-first ordering of the kernels reachable from root;
    ties broken alphabetically."""
    registry.get(root)
    reachable: set[str] = set()
    stack = [root]
    path: list[str] = []

    def visit(name, trail):
        if name in trail:
            cycle = trail[trail.index(name):] + [name]
            raise CyclicDependency(cycle)
        if name in reachable:
            return
        for dep in registry.edges.get(name, ()):
            visit(dep, trail + [name])
        reachable.add(name)

    visit(root, [])
    indeg = {
        name: sum(1 for d in registry.edges.get(name, ()) if d in reachable)
        for name in reachable
    }
    ready = [name for name, k in indeg.items() if k == 0]
    heapq.heapify(ready)
    dependents: dict[str, list[str]] = {name: [] for name in reachable}
    for name in reachable:
        for dep in registry.edges.get(name, ()):
            if dep in reachable:
                dependents[dep].append(name)
    out = []
    while ready:
        name = heapq.heappop(ready)
        out.append(name)
        for d in sorted(dependents[name]):
            indeg[d] -= 1
            if indeg[d] == 0:
                heapq.heappush(ready, d)
    if len(out) != len(reachable):  # pragma: no cover - register() prevents this
        raise CyclicDependency(sorted(reachable - set(out)))
    return out


# -- dependency scan -------------------------------------------------------------


def scan_dependencies(ast: kast.KernelAST, candidates) -> list[str]:
    """Names from ``candidates`` referenced by the kernel body, either as
    calls (plain, .ctrl or .adjoint forms) or as kernel-reference values."""
    found: set[str] = set()
    candidates = set(candidates)

    def walk_expr(e):
        if isinstance(e, kast.EName) and e.name in candidates:
            found.add(e.name)
        elif isinstance(e, (kast.EBin, kast.ECmp)):
            walk_expr(e.left)
            walk_expr(e.right)
        elif isinstance(e, kast.EUn):
            walk_expr(e.operand)
        elif isinstance(e, kast.EIndex):
            walk_expr(e.index)
        elif isinstance(e, kast.ESlice):
            walk_expr(e.lo)
            if e.hi is not None:
                walk_expr(e.hi)

    def walk(stmts):
        for s in stmts:
            if isinstance(s, kast.SKernelCall):
                if not s.via_param and s.name in candidates:
                    found.add(s.name)
                for a in s.args:
                    walk_expr(a)
                if s.ctrl is not None:
                    walk_expr(s.ctrl)
            elif isinstance(s, kast.SGate):
                for a in s.args:
                    walk_expr(a)
                if s.ctrl is not None:
                    walk_expr(s.ctrl)
            elif isinstance(s, (kast.SClassical, kast.SPrint)):
                for a in s.args:
                    walk_expr(a)
            elif isinstance(s, kast.SAssign):
                walk_expr(s.expr)
            elif isinstance(s, kast.SFor):
                for a in s.range_args:
                    walk_expr(a)
                walk(s.body)
            elif isinstance(s, kast.SIf):
                walk_expr(s.cond)
                walk(s.body)
                walk(s.orelse)
            elif isinstance(s, (kast.SWithCompute, kast.SWithAction)):
                walk(s.body)
            elif isinstance(s, kast.SWithDecompose):
                walk_expr(s.target)
    walk(ast.body)
    return sorted(found)


# -- validation ------------------------------------------------------------------


def _contains_measure(stmts) -> bool:
    for s in stmts:
        if isinstance(s, kast.SGate) and s.name in gates.NON_UNITARY:
            return True
        if isinstance(s, kast.SFor) and _contains_measure(s.body):
            return True
        if isinstance(s, kast.SIf) and (
            _contains_measure(s.body) or _contains_measure(s.orelse)
        ):
            return True
        if isinstance(s, (kast.SWithCompute, kast.SWithAction)) and _contains_measure(s.body):
            return True
    return False


class _Validator:
    def __init__(self, ast: kast.KernelAST, registry: KernelRegistry):
        self.ast = ast
        self.registry = registry
        self.declared = {name for name, _ in ast.params}
        self.types = dict(ast.params)

    def run(self):
        self._check_block(self.ast.body)

    def _declare(self, name: str):
        if name in self.registry:
            raise ShadowedKernelName(
                f"local variable {name!r} shadows a registered kernel"
            )
        if gates.is_gate_name(name):
            raise ShadowedKernelName(f"local variable {name!r} shadows a gate name")
        self.declared.add(name)

    def _check_read(self, e):
        if isinstance(e, kast.EName):
            if e.name in self.declared or e.name in self.registry:
                return
            raise TypeMismatch(
                f"kernel {self.ast.name!r} reads undeclared variable {e.name!r}"
            )
        if isinstance(e, (kast.EBin, kast.ECmp)):
            self._check_read(e.left)
            self._check_read(e.right)
        elif isinstance(e, kast.EUn):
            self._check_read(e.operand)
        elif isinstance(e, kast.EIndex):
            if e.base not in self.declared:
                raise TypeMismatch(f"undeclared variable {e.base!r}")
            self._check_read(e.index)
        elif isinstance(e, kast.ESlice):
            if e.base not in self.declared:
                raise TypeMismatch(f"undeclared variable {e.base!r}")
            self._check_read(e.lo)
            if e.hi is not None:
                self._check_read(e.hi)
        elif isinstance(e, kast.ESize):
            if e.base not in self.declared:
                raise TypeMismatch(f"undeclared variable {e.base!r}")

    def _check_block(self, stmts):
        i = 0
        stmts = list(stmts)
        while i < len(stmts):
            s = stmts[i]
            if isinstance(s, kast.SWithCompute):
                if i + 1 >= len(stmts) or not isinstance(stmts[i + 1], kast.SWithAction):
                    raise ComputeWithoutAction(
                        f"kernel {self.ast.name!r}: a compute block must be"
                        " immediately followed by an action block"
                    )
                if _contains_measure(s.body):
                    raise MeasureInComputeBlock(
                        f"kernel {self.ast.name!r} measures inside a compute block"
                    )
                self._check_block(s.body)
                self._check_block(stmts[i + 1].body)
                i += 2
                continue
            if isinstance(s, kast.SWithAction):
                raise ComputeWithoutAction(
                    f"kernel {self.ast.name!r}: action block without a preceding"
                    " compute block"
                )
            self._check_stmt(s)
            i += 1

    def _check_stmt(self, s):
        if isinstance(s, kast.SGate):
            gdef = gates.GATES[s.name]
            if len(s.args) != gdef.arity + gdef.n_params:
                raise ArityError(
                    f"{s.name} takes {gdef.arity + gdef.n_params} argument(s),"
                    f" got {len(s.args)}"
                )
            for a in s.args:
                self._check_read(a)
            if s.ctrl is not None:
                self._check_read(s.ctrl)
            if s.assign_to:
                self._declare(s.assign_to)
        elif isinstance(s, kast.SKernelCall):
            self._check_call(s)
        elif isinstance(s, kast.SClassical):
            if s.name in BUILTIN_CALLS:
                if len(s.args) != 3:
                    raise ArityError(
                        f"{s.name} takes (qreg, theta, operator), got {len(s.args)} args"
                    )
            for a in s.args:
                self._check_read(a)
        elif isinstance(s, kast.SPrint):
            for a in s.args:
                self._check_read(a)
        elif isinstance(s, kast.SAssign):
            self._check_read(s.expr)
            self._declare(s.target)
        elif isinstance(s, kast.SFor):
            for a in s.range_args:
                self._check_read(a)
            self._declare(s.var)
            self._check_block(s.body)
        elif isinstance(s, kast.SIf):
            self._check_read(s.cond)
            self._check_block(s.body)
            self._check_block(s.orelse)
        elif isinstance(s, kast.SWithDecompose):
            self._check_read(s.target)
            if s.method not in (None, "zyz", "kak", "two_level", "default"):
                raise TypeMismatch(f"unknown synthesis method {s.method!r}")
            # the matrix mini-language scope is local to the block
        else:  # pragma: no cover
            raise TypeMismatch(f"unexpected statement {s!r}")

    def _check_call(self, s: kast.SKernelCall):
        if s.name == self.ast.name:
            raise CyclicDependency([self.ast.name, self.ast.name])
        for a in s.args:
            self._check_read(a)
        if s.ctrl is not None:
            self._check_read(s.ctrl)
        if s.via_param:
            sig = self.types[s.name].sig
            if len(s.args) != len(sig):
                raise ArityError(
                    f"{s.name} expects {len(sig)} argument(s), got {len(s.args)}"
                )
            return
        callee = self.registry.get(s.name)
        if len(s.args) != len(callee.params):
            raise ArityError(
                f"{s.name} expects {len(callee.params)} argument(s), got {len(s.args)}"
            )


def dependency_closure(registry: KernelRegistry, direct) -> list[str]:
    """Transitive dependency set in deterministic topological order."""
    closure: set[str] = set()
    for dep in direct:
        closure.add(dep)
        closure.update(registry.get(dep).dependencies)
    return _closure_topo(registry, closure)


def lower(ast: kast.KernelAST, registry: KernelRegistry, extra_deps=()) -> CompiledKernel:
    """Validate and lower a parsed kernel against a registry snapshot."""
    source = kast.pretty(ast)
    if ast.name in scan_dependencies(ast, {ast.name}):
        raise CyclicDependency([ast.name, ast.name])
    _Validator(ast, registry).run()
    direct = sorted(set(scan_dependencies(ast, registry.names())) | set(extra_deps))
    ordered = dependency_closure(registry, direct)
    dep_digests = [registry.get(d).digest for d in ordered]
    return CompiledKernel(
        name=ast.name,
        params=tuple(ast.params),
        digest=digest_source(source, dep_digests),
        dependencies=tuple(ordered),
        program=tuple(ast.body),
        source=source,
    )


def _closure_topo(registry: KernelRegistry, names: set[str]) -> list[str]:
    indeg = {
        n: sum(1 for d in registry.edges.get(n, ()) if d in names) for n in names
    }
    ready = [n for n, k in indeg.items() if k == 0]
    heapq.heapify(ready)
    dependents: dict[str, list[str]] = {n: [] for n in names}
    for n in names:
        for d in registry.edges.get(n, ()):
            if d in names:
                dependents[d].append(n)
    out = []
    while ready:
        n = heapq.heappop(ready)
        out.append(n)
        for d in sorted(dependents[n]):
            indeg[d] -= 1
            if indeg[d] == 0:
                heapq.heappush(ready, d)
    return out


def register(ast: kast.KernelAST, registry: KernelRegistry) -> CompiledKernel:
    kernel = lower(ast, registry)
    registry.register(kernel, scan_dependencies(ast, registry.names()))
    return kernel


# -- runtime argument binding --------------------------------------------------


class RefCell:
    """Mutable by-reference argument holder."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __repr__(self):
        return f"RefCell({self.value!r})"


@dataclass(frozen=True)
class QubitRef:
    index: int


@dataclass
class ArgPack:
    """Ordered name -> value map mirroring the kernel signature, plus an
    auxiliary matrix namespace for decompose blocks."""

    values: dict = field(default_factory=dict)
    matrices: dict = field(default_factory=dict)


_REF_INNER = {"IntRef": int, "FloatRef": (int, float), "BoolRef": bool}


def _bind_value(annotation: kast.TypeAnnotation, value, registry: KernelRegistry, name: str):
    base = annotation.base
    if base == "qreg":
        if not isinstance(value, QReg):
            raise TypeMismatch(f"argument {name!r} must be a qreg, got {type(value).__name__}")
        return value
    if base == "qubit":
        if isinstance(value, QubitRef):
            return value
        if isinstance(value, int) and not isinstance(value, bool):
            return QubitRef(value)
        raise TypeMismatch(f"argument {name!r} must be a qubit")
    if base == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeMismatch(f"argument {name!r} must be an int")
        return value
    if base == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeMismatch(f"argument {name!r} must be a float")
        return float(value)
    if base == "bool":
        if not isinstance(value, bool):
            raise TypeMismatch(f"argument {name!r} must be a bool")
        return value
    if base == "PauliOperator":
        from .operators import PauliOperator

        if not isinstance(value, PauliOperator):
            raise TypeMismatch(f"argument {name!r} must be a PauliOperator")
        return value
    if base == "list":
        if not isinstance(value, (list, tuple)):
            raise TypeMismatch(f"argument {name!r} must be a list")
        return [ _bind_value(annotation.elem, v, registry, f"{name}[{i}]")
                 for i, v in enumerate(value) ]
    if base in _REF_INNER:
        cell = value if isinstance(value, RefCell) else RefCell(value)
        want = _REF_INNER[base]
        if base != "BoolRef" and isinstance(cell.value, bool):
            raise TypeMismatch(f"argument {name!r} must hold a {base}")
        if not isinstance(cell.value, want):
            raise TypeMismatch(f"argument {name!r} must hold a {base}")
        if base == "FloatRef":
            cell.value = float(cell.value)
        return cell
    if base == "KernelSignature":
        if isinstance(value, CompiledKernel):
            kernel = value
        elif isinstance(value, str):
            if value not in registry:
                raise UnboundKernelReference(
                    f"argument {name!r} references unregistered kernel {value!r}"
                )
            kernel = registry.get(value)
        else:
            raise TypeMismatch(f"argument {name!r} must reference a kernel")
        if len(kernel.params) != len(annotation.sig):
            raise TypeMismatch(
                f"kernel {kernel.name!r} does not match the"
                f" {annotation.text()} signature of {name!r}"
            )
        for (_, have), want in zip(kernel.params, annotation.sig):
            if have.base != want.base and {have.base, want.base} != {"qreg", "qubit"}:
                raise TypeMismatch(
                    f"kernel {kernel.name!r} does not match the"
                    f" {annotation.text()} signature of {name!r}"
                )
        return kernel
    raise TypeMismatch(f"unsupported annotation {annotation.text()!r}")  # pragma: no cover


def bind_args(kernel: CompiledKernel, pack: ArgPack, registry: KernelRegistry) -> dict:
    """Validate an ArgPack against the signature; returns the initial
    tracer environment."""
    expected = [n for n, _ in kernel.params]
    if set(pack.values.keys()) != set(expected):
        missing = [n for n in expected if n not in pack.values]
        extra = [n for n in pack.values if n not in expected]
        detail = []
        if missing:
            detail.append(f"missing {missing}")
        if extra:
            detail.append(f"unexpected {extra}")
        raise ArityError(
            f"kernel {kernel.name!r} takes {expected}: {', '.join(detail)}"
        )
    env = {}
    for name, annotation in kernel.params:
        env[name] = _bind_value(annotation, pack.values[name], registry, name)
    return env


def first_qreg(kernel: CompiledKernel, pack: ArgPack) -> QReg:
    name = kernel.params[0][0]
    value = pack.values.get(name)
    if not isinstance(value, QReg):
        raise TypeMismatch(f"argument {name!r} must be a qreg")
    return value


def persist_byref(q: QReg, slots: dict):
    q.results.byref_slots.update(slots)
