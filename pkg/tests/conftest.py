import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qk.cache import JitSession
from qk.compiler import ArgPack
from qk.ir import QReg

BELL_SRC = """def bell(q : qreg):
    H(q[0])
    CX(q[0], q[1])
    for i in range(q.size()):
        Measure(q[i])
"""

UCC1_SRC = """def ucc1(q : qreg, x : float):
    with compute:
        Rx(q[0], np.pi/2.)
        for i in range(3):
            H(q[i+1])
        for i in range(3):
            CX(q[i], q[i+1])
    with action:
        Rz(q[3], x)

def kernel(q: qreg, d : float):
    ucc1.ctrl(q[4], q[0:4], d)
"""

GROVER_SRC = """def reflect_about_uniform(q: qreg):
    with compute:
        H(q)
        X(q)
    with action:
        Z.ctrl(q[0: q.size() - 1], q[q.size() - 1])

def cz_oracle(q: qreg):
    CZ(q[0], q[2])
    CZ(q[1], q[2])

def run_grover(q: qreg, oracle_var: KernelSignature(qreg), iterations: int):
    H(q)
    for i in range(iterations):
        oracle_var(q)
        reflect_about_uniform(q)
    Measure(q)
"""

QEC_SRC = """def applyQEC(q : qreg):
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

def qec_demo(q : qreg, one_state : bool, err_loc : int):
    if one_state:
        X(q[0])
        X(q[1])
        X(q[2])
    if err_loc == 0:
        X(q[0])
    if err_loc == 1:
        X(q[1])
    if err_loc == 2:
        X(q[2])
    applyQEC(q)
"""

FIG7_SRC = """def a(q : qreg):
    H(q[0])

def b(q : qreg):
    X(q[0])

def c(q : qreg):
    a(q)
    T(q[1])

def d(q : qreg):
    b(q)
    c.adjoint(q)
"""

CCNOT_SRC = """def ccnot(q : qreg):
    with decompose(q) as m:
        m = np.eye(8)
        m[6, 6] = 0.0
        m[7, 7] = 0.0
        m[6, 7] = 1.0
        m[7, 6] = 1.0
"""

ANSATZ_SRC = """def ansatz(q : qreg, t0: float):
    X(q[0])
    Ry(q[1], t0)
    CNOT(q[1], q[0])
"""

CORPUS = {
    "bell": BELL_SRC,
    "ucc1": UCC1_SRC,
    "grover": GROVER_SRC,
    "qec": QEC_SRC,
    "fig7": FIG7_SRC,
    "ccnot": CCNOT_SRC,
    "ansatz": ANSATZ_SRC,
}


@pytest.fixture
def session():
    return JitSession()


@pytest.fixture
def corpus_session():
    s = JitSession()
    for src in CORPUS.values():
        s.compile_source(src)
    return s


def pack_for(qreg_size: int, **rest) -> tuple[ArgPack, QReg]:
    q = QReg(qreg_size)
    values = {"q": q}
    values.update(rest)
    return ArgPack(values), q
