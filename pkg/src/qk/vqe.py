"""Variational minimization: an observe-backed objective plus a compact
gradient-free Nelder-Mead optimizer.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import runtime
from .compiler import ArgPack, CompiledKernel, KernelRegistry
from .errors import TypeMismatch
from .ir import QReg
from .operators import PauliOperator


@dataclass
class ObjectiveFunction:
    """y = F(x): expectation of an observable over a parameterized kernel.

    Scalar float parameters consume one entry of x each, in signature
    order; a single list[float] parameter consumes the whole vector.
    """

    kernel: CompiledKernel
    observable: PauliOperator
    registry: KernelRegistry
    n_qubits: int | None = None
    shots: int = 0
    seed: int = 0
    evaluations: int = 0
    history: list = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits is None:
            self.n_qubits = max(self.observable.num_qubits(), 1)
        bases = [ann.base for _, ann in self.kernel.params[1:]]
        self._list_param = bases == ["list"]
        if not self._list_param and any(b != "float" for b in bases):
            raise TypeMismatch(
                "objective kernels take floats (or one list[float]) after the qreg"
            )

    def __call__(self, x) -> float:
        x = [float(v) for v in np.atleast_1d(x)]
        q = QReg(self.n_qubits)
        values: dict = {self.kernel.params[0][0]: q}
        if self._list_param:
            values[self.kernel.params[1][0]] = x
        else:
            names = [n for n, _ in self.kernel.params[1:]]
            if len(x) != len(names):
                raise TypeMismatch(f"objective expects {len(names)} parameter(s)")
            values.update(dict(zip(names, x)))
        energy = runtime.observe(
            self.kernel,
            self.observable,
            ArgPack(values),
            self.registry,
            shots=self.shots,
            seed=self.seed,
        )
        self.evaluations += 1
        self.history.append(energy)
        return energy


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    evaluations: int
    converged: bool


def nelder_mead(
    f,
    x0,
    max_evals: int = 200,
    xtol: float = 1e-8,
    ftol: float = 1e-10,
    step: float = 0.5,
) -> OptimizeResult:
    """Downhill simplex with the standard reflection/expansion/contraction
    coefficients. Deterministic for a deterministic objective."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n = len(x0)
    simplex = [x0]
    for i in range(n):
        p = x0.copy()
        p[i] += step if p[i] == 0 else 0.25 * abs(p[i]) + step
        simplex.append(p)
    evals = 0

    def call(p):
        nonlocal evals
        evals += 1
        return float(f(p))

    values = [call(p) for p in simplex]
    while evals < max_evals:
        order = np.argsort(values)
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        spread_x = max(np.max(np.abs(p - simplex[0])) for p in simplex[1:])
        spread_f = abs(values[-1] - values[0])
        if spread_x < xtol and spread_f < ftol:
            return OptimizeResult(simplex[0], values[0], evals, True)
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        reflected = centroid + (centroid - worst)
        fr = call(reflected)
        if fr < values[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            fe = call(expanded)
            if fe < fr:
                simplex[-1], values[-1] = expanded, fe
            else:
                simplex[-1], values[-1] = reflected, fr
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = reflected, fr
            continue
        contracted = centroid + 0.5 * (worst - centroid)
        fc = call(contracted)
        if fc < values[-1]:
            simplex[-1], values[-1] = contracted, fc
            continue
        # shrink toward the best vertex
        for i in range(1, len(simplex)):
            simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
            values[i] = call(simplex[i])
    order = np.argsort(values)
    return OptimizeResult(simplex[order[0]], values[order[0]], evals, False)
