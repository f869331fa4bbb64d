"""Annotation markers and runtime handles used by decorated kernels."""
from __future__ import annotations


class qreg:
    """Annotation marker for the qubit-register parameter."""


class qubit:
    """Annotation marker for a single-qubit parameter."""


class KernelSignature:
    """Annotation for callable-kernel parameters: KernelSignature(qreg, float)."""

    def __init__(self, *types):
        self.types = types


class _Ref:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __repr__(self):
        return f"{type(self).__name__}({self.value!r})"


class IntRef(_Ref):
    pass


class FloatRef(_Ref):
    pass


class BoolRef(_Ref):
    pass


class QRegHandle:
    """Allocated register; execution results are attached after each run."""

    def __init__(self, size: int):
        if size < 1:
            raise ValueError("register size must be >= 1")
        self.size = size
        self._counts: dict = {}
        self._probabilities: dict = {}
        self._expectations: dict = {}
        self._byref: dict = {}
        self._prints: list = []

    def counts(self) -> dict:
        return dict(self._counts)

    def probabilities(self) -> dict:
        return dict(self._probabilities)

    def prints(self) -> list:
        return list(self._prints)

    def exp_val(self, name: str = "value") -> float:
        return self._expectations[name]

    def __repr__(self):
        return f"QRegHandle(size={self.size})"


def qalloc(size: int) -> QRegHandle:
    return QRegHandle(size)
