"""Command-line surface: compile, run, print, export, observe, bench, cache.

Exit codes: 0 success, 2 usage, 3 compile error, 4 runtime error,
5 backend error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import ir, runtime
from .cache import DiskCache, JitSession, default_cache_dir
from .compiler import ArgPack, CompiledKernel, RefCell
from .errors import BackendError, CompileError, QkError
from .ir import QReg
from .operators import PauliOperator, parse_pauli
from .statevector import unitary_of

SCHEMA_VERSION = 1

EXIT_USAGE = 2
EXIT_COMPILE = 3
EXIT_RUNTIME = 4
EXIT_BACKEND = 5


def _session(args) -> JitSession:
    disk = None
    if not getattr(args, "no_cache", False):
        disk = DiskCache(getattr(args, "cache_dir", None) or default_cache_dir())
    return JitSession(disk=disk)


def _compile_file(session: JitSession, path: str):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return session.compile_source(text)


def _load_args(
    path: str | None,
    kernel: CompiledKernel,
    session: JitSession,
    allow_seed: bool = False,
):
    raw = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    file_seed = raw.pop("seed", None) if allow_seed else None
    matrices = {
        name: _matrix_from_json(value)
        for name, value in raw.pop("matrices", {}).items()
    }
    values = {}
    qreg = None
    for name, ann in kernel.params:
        if name not in raw:
            raise QkError(f"args file is missing {name!r}")
        value = raw.pop(name)
        if ann.base == "qreg":
            if not isinstance(value, dict) or "size" not in value:
                raise QkError(f'qreg argument {name!r} must look like {{"size": n}}')
            qreg = QReg(int(value["size"]), name)
            values[name] = qreg
        elif ann.base == "PauliOperator":
            values[name] = parse_pauli(str(value))
        elif ann.base == "list" and ann.elem.base == "PauliOperator":
            values[name] = [parse_pauli(str(v)) for v in value]
        elif ann.base in ("IntRef", "FloatRef", "BoolRef"):
            values[name] = RefCell(value)
        elif ann.base == "KernelSignature":
            values[name] = str(value)
        else:
            values[name] = value
    if raw:
        raise QkError(f"args file has unexpected entries: {sorted(raw)}")
    if qreg is None:
        raise QkError("kernel has no qreg argument")
    if allow_seed:
        return ArgPack(values, matrices), qreg, file_seed
    return ArgPack(values, matrices), qreg


def _matrix_from_json(rows) -> np.ndarray:
    def conv(x):
        if isinstance(x, str):
            return complex(x)
        if isinstance(x, (list, tuple)) and len(x) == 2:
            return complex(x[0], x[1])
        return complex(x)

    return np.array([[conv(x) for x in row] for row in rows], dtype=complex)


def _find_kernel(session: JitSession, name: str) -> CompiledKernel:
    return session.registry.get(name)


def _read_qpu_config(path: str | None) -> dict:
    config = {}
    if not path:
        return config
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition(":")
            value = value.strip()
            if value.lower() in ("true", "false"):
                parsed: object = value.lower() == "true"
            else:
                try:
                    parsed = int(value)
                except ValueError:
                    try:
                        parsed = float(value)
                    except ValueError:
                        parsed = value
            config[key.strip()] = parsed
    return config


def _matrix_text(matrix: np.ndarray) -> str:
    n = int(round(np.log2(matrix.shape[0])))
    lines = [str(n)]
    for row in matrix:
        lines.append(
            " ".join(f"{float(z.real):.17g}{float(z.imag):+.17g}j" for z in row)
        )
    return "\n".join(lines) + "\n"


def read_matrix_file(path: str) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    n = int(lines[0])
    dim = 2**n
    rows = [[complex(tok) for tok in ln.split()] for ln in lines[1 : 1 + dim]]
    return np.array(rows, dtype=complex)


# -- subcommands -------------------------------------------------------------


def cmd_compile(args) -> int:
    session = _session(args)
    reports = _compile_file(session, args.file)
    for rep in reports:
        print(f"{rep.kernel.name} {rep.kernel.digest} {rep.provenance}")
    return 0


def cmd_run(args) -> int:
    session = _session(args)
    _compile_file(session, args.file)
    kernel = _find_kernel(session, args.kernel)
    pack, qreg, file_seed = _load_args(args.args, kernel, session, allow_seed=True)
    seed = args.seed if args.seed is not None else (file_seed if file_seed is not None else 0)
    backend = runtime.make_backend(args.qpu, _read_qpu_config(args.qpu_config))
    t1 = time.perf_counter_ns()
    runtime.execute(
        kernel,
        pack,
        session.registry,
        backend=backend,
        mode=args.mode,
        shots=args.shots,
        seed=seed,
    )
    t_exec = time.perf_counter_ns() - t1
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kernel": kernel.name,
        "backend": backend.name,
        "mode": args.mode or backend.default_mode,
        "shots": args.shots,
        "seed": seed,
        "counts": qreg.results.counts,
        "probabilities": qreg.results.probabilities,
        "expectations": qreg.results.expectations,
        "byref": qreg.results.byref_slots,
        "prints": qreg.results.prints,
        "timing_ns": {
            "parse": session.parse_ns,
            "lower": session.lower_ns,
            "execute": t_exec,
        },
    }
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def cmd_print(args) -> int:
    session = _session(args)
    _compile_file(session, args.file)
    kernel = _find_kernel(session, args.kernel)
    pack, _ = _load_args(args.args, kernel, session)
    comp = runtime.extract_composite(kernel, pack, session.registry)
    sys.stdout.write(ir.dump(comp))
    return 0


def cmd_export_openqasm(args) -> int:
    session = _session(args)
    _compile_file(session, args.file)
    kernel = _find_kernel(session, args.kernel)
    pack, _ = _load_args(args.args, kernel, session)
    sys.stdout.write(runtime.openqasm(kernel, pack, session.registry))
    return 0


def cmd_unitary(args) -> int:
    session = _session(args)
    _compile_file(session, args.file)
    kernel = _find_kernel(session, args.kernel)
    pack, _ = _load_args(args.args, kernel, session)
    matrix = runtime.as_unitary_matrix(kernel, pack, session.registry)
    text = _matrix_text(matrix)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_observe(args) -> int:
    session = _session(args)
    _compile_file(session, args.file)
    kernel = _find_kernel(session, args.kernel)
    pack, _ = _load_args(args.args, kernel, session)
    with open(args.operator, encoding="utf-8") as fh:
        op = parse_pauli(fh.read())
    backend = runtime.make_backend(args.qpu, _read_qpu_config(args.qpu_config))
    value = runtime.observe(
        kernel, op, pack, session.registry,
        backend=backend, shots=args.shots, seed=args.seed,
    )
    print(repr(value))
    return 0


TROTTER_KERNEL = """def trotter_circ(q : qreg, exp_args : list[PauliOperator], n_terms : int, n_steps : int):
    for s in range(n_steps):
        for i in range(n_terms):
            exp_i_theta(q, 1.0, exp_args[i])
"""


def cmd_bench_trotter(args) -> int:
    with open(args.operator, encoding="utf-8") as fh:
        op = parse_pauli(fh.read())
    terms = [PauliOperator({word: coeff}) for word, coeff in op.term_list()]
    n_qubits = max(op.num_qubits(), 1)
    session = JitSession()  # composition benchmark: no disk round trips
    session.compile_source(TROTTER_KERNEL)
    kernel = session.registry.get("trotter_circ")
    pack = ArgPack(
        {
            "q": QReg(n_qubits),
            "exp_args": terms,
            "n_terms": len(terms),
            "n_steps": args.steps,
        }
    )
    t0 = time.perf_counter_ns()
    comp = runtime.extract_composite(kernel, pack, session.registry, optimize=False)
    flat = ir.flatten(comp)
    elapsed = time.perf_counter_ns() - t0
    doc = {
        "schema_version": SCHEMA_VERSION,
        "qubits": n_qubits,
        "terms": len(terms),
        "steps": args.steps,
        "instructions": len(flat),
        "composition_ns": elapsed,
    }
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def cmd_cache(args) -> int:
    disk = DiskCache(args.cache_dir or default_cache_dir())
    if args.action == "stats":
        json.dump(disk.stats(), sys.stdout, indent=2, sort_keys=True)
        print()
    else:
        removed = disk.clear()
        print(f"removed {removed} entr{'y' if removed == 1 else 'ies'}")
    return 0


# -- argument parsing ----------------------------------------------------------


def _add_common(p, args_required=True):
    p.add_argument("file", help="kernel source file (.qk)")
    p.add_argument("--kernel", required=True, help="kernel name to operate on")
    p.add_argument("--args", required=args_required, help="JSON args file")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--cache-dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qk", description="quantum-kernel compiler and runtime"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile all kernels in a file")
    p.add_argument("file")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--cache-dir")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("run", help="execute a kernel and emit a results document")
    _add_common(p)
    p.add_argument("-qpu", "--qpu", default="qpp", help="backend name")
    p.add_argument("--shots", type=int, default=1024)
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (falls back to a 'seed' args-file entry, then 0)")
    p.add_argument("--mode", choices=["circuit", "ftqc"], default=None)
    p.add_argument("--qpu-config", default=None, help="key: value configuration file")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("print", help="canonical IR dump of a kernel")
    _add_common(p)
    p.set_defaults(fn=cmd_print)

    p = sub.add_parser("export-openqasm", help="OpenQASM 2.0 text of a kernel")
    _add_common(p)
    p.set_defaults(fn=cmd_export_openqasm)

    p = sub.add_parser("unitary", help="unitary matrix of a kernel")
    _add_common(p)
    p.add_argument("--out", default=None, help="matrix file (stdout otherwise)")
    p.set_defaults(fn=cmd_unitary)

    p = sub.add_parser("observe", help="expectation value of an operator")
    _add_common(p)
    p.add_argument("--operator", required=True, help="operator text file")
    p.add_argument("-qpu", "--qpu", default="qpp")
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--qpu-config", default=None)
    p.set_defaults(fn=cmd_observe)

    p = sub.add_parser("bench", help="benchmarks")
    bench_sub = p.add_subparsers(dest="bench_command", required=True)
    b = bench_sub.add_parser("trotter", help="Trotter composition benchmark")
    b.add_argument("--operator", required=True)
    b.add_argument("--steps", type=int, default=1)
    b.set_defaults(fn=cmd_bench_trotter)

    p = sub.add_parser("cache", help="cache maintenance")
    p.add_argument("action", choices=["stats", "clear"])
    p.add_argument("--cache-dir")
    p.set_defaults(fn=cmd_cache)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except CompileError as exc:
        print(f"compile error: {exc}", file=sys.stderr)
        return EXIT_COMPILE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
