"""The front end must add no semantics: for each corpus kernel the
canonical IR dump of the decorator-submitted source is byte-identical to
compiling the same source from a .qk file."""
import json
import subprocess

import pytest

from qk_frontend import KernelSignature, qalloc, qjit, qreg
from qk_frontend.bridge import core_command


def file_based_dump(tmp_path, source: str, kernel: str, args_doc: dict) -> str:
    src = tmp_path / "kernels.qk"
    src.write_text(source)
    args = tmp_path / "args.json"
    args.write_text(json.dumps(args_doc))
    proc = subprocess.run(
        core_command()
        + ["print", str(src), "--kernel", kernel, "--args", str(args)],
        capture_output=True,
        text=True,
        check=True,
    )
    return proc.stdout


def test_parity_bell(tmp_path):
    @qjit
    def bell(q: qreg):
        H(q[0])
        CX(q[0], q[1])
        for i in range(q.size()):
            Measure(q[i])

    want = file_based_dump(tmp_path, bell.kernel_source, "bell", {"q": {"size": 2}})
    assert bell.extract_composite(qalloc(2)) == want


def test_parity_compute_action(tmp_path):
    @qjit
    def ucc1(q: qreg, x: float):
        with compute:
            Rx(q[0], np.pi / 2.0)
            for i in range(3):
                H(q[i + 1])
            for i in range(3):
                CX(q[i], q[i + 1])
        with action:
            Rz(q[3], x)

    @qjit
    def kernel(q: qreg, d: float):
        ucc1.ctrl(q[4], q[0:4], d)

    combined = ucc1.kernel_source + kernel.kernel_source
    want = file_based_dump(
        tmp_path, combined, "kernel", {"q": {"size": 5}, "d": 1.234}
    )
    got = kernel.extract_composite(qalloc(5), 1.234)
    assert got == want
    assert len(got.strip().splitlines()) == 15


def test_parity_grover(tmp_path):
    @qjit
    def cz_oracle(q: qreg):
        CZ(q[0], q[2])
        CZ(q[1], q[2])

    @qjit
    def reflect_about_uniform(q: qreg):
        with compute:
            H(q)
            X(q)
        with action:
            Z.ctrl(q[0 : q.size() - 1], q[q.size() - 1])

    @qjit
    def run_grover(q: qreg, oracle_var: KernelSignature(qreg), iterations: int):
        H(q)
        for i in range(iterations):
            oracle_var(q)
            reflect_about_uniform(q)
        Measure(q)

    combined = (
        cz_oracle.kernel_source
        + reflect_about_uniform.kernel_source
        + run_grover.kernel_source
    )
    want = file_based_dump(
        tmp_path,
        combined,
        "run_grover",
        {"q": {"size": 3}, "oracle_var": "cz_oracle", "iterations": 1},
    )
    assert run_grover.extract_composite(qalloc(3), cz_oracle, 1) == want


def test_parity_dynamic_kernel(tmp_path):
    @qjit
    def applyQEC(q: qreg):
        ancIdx = 3
        CX(q[0], q[ancIdx])
        CX(q[1], q[ancIdx])
        parity01 = Measure(q[ancIdx])
        Reset(q[ancIdx])
        CX(q[1], q[ancIdx])
        CX(q[2], q[ancIdx])
        parity12 = Measure(q[ancIdx])
        Reset(q[ancIdx])
        parity = 0
        if parity01:
            parity = parity + 1
        if parity12:
            parity = parity + 2
        print("Syndrome value=", parity)
        if parity == 1:
            X(q[0])
        if parity == 2:
            X(q[2])
        if parity == 3:
            X(q[1])

    want = file_based_dump(
        tmp_path, applyQEC.kernel_source, "applyQEC", {"q": {"size": 4}}
    )
    assert applyQEC.extract_composite(qalloc(4)) == want


def test_parity_decompose(tmp_path):
    @qjit
    def ccnot(q: qreg):
        with decompose(q) as m:
            m = np.eye(8)
            m[6, 6] = 0.0
            m[7, 7] = 0.0
            m[6, 7] = 1.0
            m[7, 6] = 1.0

    want = file_based_dump(tmp_path, ccnot.kernel_source, "ccnot", {"q": {"size": 3}})
    assert ccnot.extract_composite(qalloc(3)) == want
