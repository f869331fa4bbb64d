"""Exception hierarchy for the qk compiler and runtime.

Compile-time errors map to CLI exit code 3, runtime errors to 4 and
backend errors to 5.
"""


class QkError(Exception):
    """Base class for all qk errors."""


# -- compile-time ------------------------------------------------------------


class CompileError(QkError):
    pass


class KernelSyntaxError(CompileError):
    """Malformed kernel source. Carries a 1-based source position."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class KernelIndentationError(KernelSyntaxError):
    """Dedent to a column that never opened a block."""


class TabSpaceMixError(KernelIndentationError):
    """Tabs in indentation (only spaces are legal)."""


class UnterminatedString(KernelSyntaxError):
    pass


class MissingAnnotation(CompileError):
    pass


class FirstArgNotQreg(CompileError):
    pass


class UnknownKernel(CompileError):
    pass


class TypeMismatch(CompileError):
    pass


class CyclicDependency(CompileError):
    def __init__(self, cycle):
        super().__init__(f"cyclic kernel dependency: {' -> '.join(cycle)}")
        self.cycle = list(cycle)


class ComputeWithoutAction(CompileError):
    pass


class MeasureInComputeBlock(CompileError):
    pass


class ShadowedKernelName(CompileError):
    pass


class ArityError(CompileError):
    pass


class UnboundKernelReference(CompileError):
    pass


class MalformedOperator(CompileError):
    pass


# -- runtime -----------------------------------------------------------------


class ExecutionError(QkError):
    pass


class NonUnitaryGate(ExecutionError):
    pass


class NonUnitarySubcircuit(ExecutionError):
    pass


class DynamicControlFlowInCircuitMode(ExecutionError):
    pass


class NonUnitaryInput(ExecutionError):
    pass


class DimensionMismatch(ExecutionError):
    pass


class NonHermitianGenerator(ExecutionError):
    pass


class NonHermitianObservable(ExecutionError):
    pass


class IndexOutOfRange(ExecutionError):
    pass


class UnsupportedGateForExport(ExecutionError):
    pass


# -- backend -----------------------------------------------------------------


class BackendError(QkError):
    pass


class BackendNotFound(BackendError):
    pass


class BackendCapabilityError(BackendError):
    pass


# -- cache (degrades to a miss; raised only for unrecoverable IO) ------------


class CacheCorruption(QkError):
    pass
