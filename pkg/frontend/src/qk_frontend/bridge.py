"""Subprocess bridge to the core toolchain.

Everything crosses the boundary through the CLI's documented surfaces:
kernel source files, the JSON args file and the JSON results document.
"""
from __future__ import annotations

import json
import os
import shutil
import subprocess
import sys
import tempfile

import numpy as np


class CoreError(RuntimeError):
    def __init__(self, message, exit_code=None):
        super().__init__(message)
        self.exit_code = exit_code


def core_command() -> list[str]:
    override = os.environ.get("QK_FRONTEND_CLI")
    if override:
        return override.split()
    if shutil.which("qk"):
        return ["qk"]
    return [sys.executable, "-m", "qk.cli"]


def run_core(args: list[str]) -> str:
    proc = subprocess.run(
        core_command() + args, capture_output=True, text=True
    )
    if proc.returncode != 0:
        raise CoreError(
            proc.stderr.strip() or f"qk exited with {proc.returncode}",
            exit_code=proc.returncode,
        )
    return proc.stdout


class KernelJob:
    """One kernel's compiled presence in the core, addressed by source."""

    def __init__(self, source_text: str, kernel_name: str):
        self.source_text = source_text
        self.kernel_name = kernel_name
        self._dir = tempfile.mkdtemp(prefix="qk-frontend-")
        self.source_path = os.path.join(self._dir, "kernels.qk")
        with open(self.source_path, "w", encoding="utf-8") as fh:
            fh.write(source_text)

    def compile(self) -> dict[str, str]:
        out = run_core(["compile", self.source_path])
        digests = {}
        for line in out.splitlines():
            name, digest, _provenance = line.split()
            digests[name] = digest
        return digests

    def _args_file(self, args_doc: dict) -> str:
        path = os.path.join(self._dir, "args.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(args_doc, fh)
        return path

    def run(self, args_doc: dict, qpu: str, shots: int, seed: int, mode: str | None) -> dict:
        cmd = [
            "run", self.source_path,
            "--kernel", self.kernel_name,
            "--args", self._args_file(args_doc),
            "-qpu", qpu,
            "--shots", str(shots),
            "--seed", str(seed),
        ]
        if mode:
            cmd += ["--mode", mode]
        return json.loads(run_core(cmd))

    def print_kernel(self, args_doc: dict) -> str:
        return run_core(
            ["print", self.source_path, "--kernel", self.kernel_name,
             "--args", self._args_file(args_doc)]
        )

    def openqasm(self, args_doc: dict) -> str:
        return run_core(
            ["export-openqasm", self.source_path, "--kernel", self.kernel_name,
             "--args", self._args_file(args_doc)]
        )

    def unitary(self, args_doc: dict) -> np.ndarray:
        out_path = os.path.join(self._dir, "unitary.mat")
        run_core(
            ["unitary", self.source_path, "--kernel", self.kernel_name,
             "--args", self._args_file(args_doc), "--out", out_path]
        )
        with open(out_path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
        dim = 2 ** int(lines[0])
        return np.array(
            [[complex(tok) for tok in ln.split()] for ln in lines[1 : 1 + dim]]
        )

    def observe(self, args_doc: dict, operator_text: str, qpu: str, shots: int, seed: int) -> float:
        op_path = os.path.join(self._dir, "observable.op")
        with open(op_path, "w", encoding="utf-8") as fh:
            fh.write(operator_text)
        out = run_core(
            ["observe", self.source_path, "--kernel", self.kernel_name,
             "--args", self._args_file(args_doc), "--operator", op_path,
             "-qpu", qpu, "--shots", str(shots), "--seed", str(seed)]
        )
        return float(out.strip())
