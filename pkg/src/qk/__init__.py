"""qk: a Pythonic quantum-kernel DSL compiler and statevector runtime.

Typical in-process use::

    from qk import JitSession, ArgPack, QReg, execute

    session = JitSession()
    session.compile_source(open("kernels.qk").read())
    q = QReg(2)
    execute(session.registry.get("bell"), ArgPack({"q": q}), session.registry)
    print(q.counts())
"""

from .cache import CacheEntry, DiskCache, JitSession, default_cache_dir
from .compiler import (
    ArgPack,
    CompiledKernel,
    KernelRegistry,
    QubitRef,
    RefCell,
    bind_args,
    lower,
    persist_byref,
    topo_order,
)
from .errors import QkError
from .ir import CompositeInstruction, Instruction, QReg, count_instructions, dump, flatten, gate_matrix
from .kast import classify_call, parse_kernel, parse_source, pretty
from .lexer import Token, tokenize
from .operators import (
    FermionOperator,
    I,
    PauliOperator,
    X,
    Y,
    Z,
    exp_i_theta,
    jordan_wigner,
    parse_fermion,
    parse_pauli,
    pauli_matrix,
    pauli_mul,
    print_fermion,
    print_pauli,
)
from .runtime import (
    Backend,
    as_unitary_matrix,
    execute,
    extract_composite,
    make_backend,
    observe,
    openqasm,
)
from .synthesis import kak, synthesize, two_level, zyz
from .transforms import adjoint, controlled, expand_compute_action, peephole_optimize
from .vqe import ObjectiveFunction, nelder_mead

__version__ = "0.1.0"

__all__ = [
    "ArgPack",
    "Backend",
    "CacheEntry",
    "CompiledKernel",
    "CompositeInstruction",
    "DiskCache",
    "FermionOperator",
    "I",
    "Instruction",
    "JitSession",
    "KernelRegistry",
    "ObjectiveFunction",
    "PauliOperator",
    "QReg",
    "QkError",
    "QubitRef",
    "RefCell",
    "Token",
    "X",
    "Y",
    "Z",
    "adjoint",
    "as_unitary_matrix",
    "bind_args",
    "classify_call",
    "controlled",
    "count_instructions",
    "default_cache_dir",
    "dump",
    "execute",
    "exp_i_theta",
    "expand_compute_action",
    "extract_composite",
    "flatten",
    "gate_matrix",
    "jordan_wigner",
    "kak",
    "lower",
    "make_backend",
    "nelder_mead",
    "observe",
    "openqasm",
    "parse_fermion",
    "parse_kernel",
    "parse_pauli",
    "parse_source",
    "pauli_matrix",
    "pauli_mul",
    "peephole_optimize",
    "persist_byref",
    "pretty",
    "print_fermion",
    "print_pauli",
    "synthesize",
    "tokenize",
    "topo_order",
    "two_level",
    "zyz",
]
