"""The kernel decorator: captures the decorated function's source,
rewrites host-level references (import aliases, module constants) into
kernel-local form, submits it to the core eagerly at definition time and
provides call/observe/print/openqasm/unitary access.
"""
from __future__ import annotations

import inspect
import re
import textwrap
import types as pytypes

from .bridge import CoreError, KernelJob
from .types import BoolRef, FloatRef, IntRef, KernelSignature, QRegHandle, qreg, qubit

_KERNEL_REGISTRY: dict[str, "DecoratedKernel"] = {}

# host modules whose aliases are rewritten to the kernel dialect's
# canonical spelling
_CANONICAL_MODULES = {"numpy": "np"}

_DIALECT_BUILTINS = frozenset(
    {
        "np", "range", "print", "exp_i_theta", "compute", "action", "decompose",
        "qreg", "qubit", "KernelSignature", "IntRef", "FloatRef", "BoolRef",
        "list", "List", "int", "float", "bool", "PauliOperator", "True", "False",
        "pass", "if", "elif", "else", "for", "in", "with", "as", "def",
        "H", "X", "Y", "Z", "S", "Sdg", "T", "Tdg", "Rx", "Ry", "Rz",
        "CX", "CNOT", "CY", "CZ", "CRz", "CPhase", "Swap", "fSim", "Measure", "Mz",
        "Reset",
    }
)


class MissingAnnotation(TypeError):
    pass


class UnsupportedCapture(TypeError):
    pass


class KernelCompileError(RuntimeError):
    pass


def _captured_source(fn) -> str:
    try:
        source = textwrap.dedent(inspect.getsource(fn))
    except (OSError, TypeError) as exc:
        raise KernelCompileError(
            f"cannot capture the source of {fn.__name__!r}: kernels must be"
            " defined in a real source file (not stdin or a compiled string)"
        ) from exc
    lines = source.splitlines()
    while lines and lines[0].lstrip().startswith("@"):
        lines.pop(0)
    return "\n".join(lines) + "\n"


def _identifier_tokens(text: str) -> set[str]:
    # strings and comments stripped first so their contents don't count
    text = re.sub(r"#[^\n]*", "", text)
    text = re.sub(r"'[^']*'|\"[^\"]*\"", "", text)
    return set(re.findall(r"[A-Za-z_][A-Za-z0-9_]*", text))


def _assigned_names(body: str) -> set[str]:
    return set(re.findall(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=[^=]", body, re.M))


def _capture_env(fn) -> dict:
    """Names visible to the function body: module globals plus closure
    (nonlocal) bindings, the latter winning on collision."""
    env = dict(fn.__globals__)
    try:
        closure = inspect.getclosurevars(fn)
        env.update(closure.globals)
        env.update(closure.nonlocals)
    except TypeError:  # builtins or exotic callables
        pass
    return env


def _resolve_aliases(source: str, env: dict) -> str:
    """Rewrite import aliases (e.g. numpy imported under another name)
    back to the dialect's canonical module name."""
    for alias, value in env.items():
        if not isinstance(value, pytypes.ModuleType):
            continue
        canonical = _CANONICAL_MODULES.get(value.__name__)
        if canonical and alias != canonical:
            source = re.sub(rf"\b{re.escape(alias)}\b(?=\s*\.)", canonical, source)
    return source


def _inject_constants(source: str, fn, env: dict, dependencies: set[str]) -> str:
    """Captured numeric constants referenced by the body become local
    assignments at the top of the kernel; anything else host-side is
    rejected with a clear error."""
    header, newline, body = source.partition("\n")
    while not header.rstrip().endswith(":"):
        # multi-line def header
        next_line, newline, body = body.partition("\n")
        header = header + "\n" + next_line
    params = set(re.findall(r"[A-Za-z_][A-Za-z0-9_]*", header.split("(", 1)[1]))
    candidates = (
        _identifier_tokens(body)
        - _DIALECT_BUILTINS
        - params
        - _assigned_names(body)
        - dependencies
        - {fn.__name__}
    )
    injected = []
    for name in sorted(candidates):
        if name not in env:
            continue  # kernel-local name; the core will judge it
        value = env[name]
        if isinstance(value, pytypes.ModuleType) or isinstance(value, DecoratedKernel):
            continue
        if isinstance(value, bool) or isinstance(value, (int, float)):
            injected.append(f"{name} = {value!r}")
        else:
            raise UnsupportedCapture(
                f"kernel {fn.__name__!r} captures host object {name!r} of type"
                f" {type(value).__name__}; only numeric module constants can"
                " be captured"
            )
    if not injected:
        return source
    indent_match = re.match(r"\s*", body.splitlines()[0] if body else "    ")
    indent = indent_match.group(0) or "    "
    block = "".join(f"{indent}{line}\n" for line in injected)
    return header + newline + block + body


def _annotation_check(fn):
    sig = inspect.signature(fn)
    for name, param in sig.parameters.items():
        if param.annotation is inspect.Parameter.empty:
            raise MissingAnnotation(
                f"kernel {fn.__name__!r}: parameter {name!r} needs a type annotation"
            )
    return sig


class DecoratedKernel:
    """A compiled kernel bound to its host function; calling it executes
    through the core and attaches results to the qreg handle."""

    def __init__(self, fn, qpu: str = "qpp", shots: int = 1024, seed: int = 0,
                 mode: str | None = None):
        self._fn = fn
        self.name = fn.__name__
        self.signature = _annotation_check(fn)
        self.qpu = qpu
        self.shots = shots
        self.seed = seed
        self.mode = mode

        env = _capture_env(fn)
        source = _captured_source(fn)
        source = _resolve_aliases(source, env)
        deps = self._dependencies(source)
        source = _inject_constants(source, fn, env, {d.name for d in deps})
        self.kernel_source = source
        self._closure_sources = [dep.kernel_source for dep in deps] + [source]
        self._jobs: dict[frozenset, KernelJob] = {}
        try:
            digests = self._job_for(()).compile()
        except CoreError as exc:
            raise KernelCompileError(
                f"kernel {self.name!r} failed to compile: {exc}"
            ) from exc
        self.digest = digests[self.name]
        _KERNEL_REGISTRY[self.name] = self

    def _job_for(self, extra_kernels) -> KernelJob:
        """Invocation file: sources of any kernels passed as arguments
        (with their own dependencies) come first, then this kernel's
        dependency closure and body."""
        key = frozenset(k.name for k in extra_kernels)
        if key not in self._jobs:
            seen: dict[str, None] = {}
            pieces: list[str] = []
            for kernel in (*extra_kernels, self):
                for text in kernel._closure_sources:
                    if text not in seen:
                        seen[text] = None
                        pieces.append(text)
            self._jobs[key] = KernelJob("".join(pieces), self.name)
        return self._jobs[key]

    # -- decoration helpers

    def _dependencies(self, source: str) -> list["DecoratedKernel"]:
        wanted = _identifier_tokens(source) & set(_KERNEL_REGISTRY)
        wanted.discard(self.name)
        ordered: list[DecoratedKernel] = []
        seen: set[str] = set()

        def visit(kernel: "DecoratedKernel"):
            if kernel.name in seen:
                return
            seen.add(kernel.name)
            for sub in kernel._deps:
                visit(sub)
            ordered.append(kernel)

        self._deps = [_KERNEL_REGISTRY[name] for name in sorted(wanted)]
        for dep in self._deps:
            visit(dep)
        return ordered

    # -- marshalling

    def _args_doc(self, args) -> tuple[dict, QRegHandle, list, list]:
        params = list(self.signature.parameters.items())
        if len(args) != len(params):
            raise TypeError(
                f"{self.name} takes {len(params)} argument(s), got {len(args)}"
            )
        doc = {}
        handle = None
        writebacks = []
        kernel_args = []
        for (name, param), value in zip(params, args):
            ann = param.annotation
            if ann is qreg:
                if not isinstance(value, QRegHandle):
                    raise TypeError(f"argument {name!r} must come from qalloc()")
                handle = value
                doc[name] = {"size": value.size}
            elif isinstance(ann, KernelSignature):
                if isinstance(value, DecoratedKernel):
                    doc[name] = value.name
                    kernel_args.append(value)
                elif isinstance(value, str) and value in _KERNEL_REGISTRY:
                    doc[name] = value
                    kernel_args.append(_KERNEL_REGISTRY[value])
                else:
                    raise TypeError(f"argument {name!r} must be a decorated kernel")
            elif ann in (IntRef, FloatRef, BoolRef):
                if not isinstance(value, ann):
                    raise TypeError(f"argument {name!r} must be a {ann.__name__}")
                doc[name] = value.value
                writebacks.append((name, value))
            else:
                doc[name] = value
        if handle is None:
            raise TypeError(f"{self.name} needs a qreg first argument")
        return doc, handle, writebacks, kernel_args

    # -- execution and utility surface

    def __call__(self, *args, shots: int | None = None, seed: int | None = None,
                 qpu: str | None = None, mode: str | None = None):
        doc, handle, writebacks, kernel_args = self._args_doc(args)
        result = self._job_for(kernel_args).run(
            doc,
            qpu=qpu or self.qpu,
            shots=self.shots if shots is None else shots,
            seed=self.seed if seed is None else seed,
            mode=mode or self.mode,
        )
        handle._counts = result.get("counts", {})
        handle._probabilities = result.get("probabilities", {})
        handle._expectations = result.get("expectations", {})
        handle._byref = result.get("byref", {})
        handle._prints = result.get("prints", [])
        for name, ref in writebacks:
            if name in handle._byref:
                ref.value = handle._byref[name]
        return handle

    def extract_composite(self, *args) -> str:
        doc, _, _, kernel_args = self._args_doc(args)
        return self._job_for(kernel_args).print_kernel(doc)

    def print_kernel(self, *args):
        print(self.extract_composite(*args), end="")

    def openqasm(self, *args) -> str:
        doc, _, _, kernel_args = self._args_doc(args)
        return self._job_for(kernel_args).openqasm(doc)

    def as_unitary_matrix(self, *args):
        doc, _, _, kernel_args = self._args_doc(args)
        return self._job_for(kernel_args).unitary(doc)

    def observe(self, operator: str, *args, shots: int | None = None,
                seed: int | None = None, qpu: str | None = None) -> float:
        doc, _, _, kernel_args = self._args_doc(args)
        return self._job_for(kernel_args).observe(
            doc,
            operator,
            qpu=qpu or self.qpu,
            shots=0 if shots is None else shots,
            seed=self.seed if seed is None else seed,
        )

    def __repr__(self):
        return f"<kernel {self.name} {self.digest[:12]}>"


def qjit(fn=None, **options):
    """Decorator: compile the function body as a quantum kernel at
    definition time."""
    if fn is None:
        return lambda f: DecoratedKernel(f, **options)
    return DecoratedKernel(fn, **options)
