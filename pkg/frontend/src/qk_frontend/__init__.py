"""Decorator front end for the qk quantum-kernel toolchain.

Kernels are ordinary annotated Python functions; decorating one compiles
it eagerly through the ``qk`` CLI, and calling it executes on the core
runtime with results attached back to the register handle::

    from qk_frontend import qjit, qalloc, qreg

    @qjit
    def bell(q: qreg):
        H(q[0])
        CX(q[0], q[1])
        for i in range(q.size()):
            Measure(q[i])

    q = qalloc(2)
    bell(q)
    print(q.counts())
"""

from .bridge import CoreError
from .decorator import (
    DecoratedKernel,
    KernelCompileError,
    MissingAnnotation,
    UnsupportedCapture,
    qjit,
)
from .types import (
    BoolRef,
    FloatRef,
    IntRef,
    KernelSignature,
    QRegHandle,
    qalloc,
    qreg,
    qubit,
)

__version__ = "0.1.0"

__all__ = [
    "BoolRef",
    "CoreError",
    "DecoratedKernel",
    "FloatRef",
    "IntRef",
    "KernelCompileError",
    "KernelSignature",
    "MissingAnnotation",
    "QRegHandle",
    "UnsupportedCapture",
    "qalloc",
    "qjit",
    "qreg",
    "qubit",
]
