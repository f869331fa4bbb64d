import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qk import ir, runtime
from qk.cache import JitSession
from qk.compiler import ArgPack, RefCell
from qk.errors import (
    BackendCapabilityError,
    BackendNotFound,
    DynamicControlFlowInCircuitMode,
    NonHermitianObservable,
    NonUnitarySubcircuit,
    TypeMismatch,
)
from qk.ir import QReg
from qk.operators import I, X, Y, Z, parse_pauli
from qk.statevector import StateVector

import oracles
from conftest import ANSATZ_SRC, BELL_SRC, CCNOT_SRC, GROVER_SRC, QEC_SRC, UCC1_SRC, pack_for

DEUTERON = -2.1433 * X(0) * X(1) - 2.1433 * Y(0) * Y(1) + 0.21829 * Z(0) - 6.125 * Z(1) + 5.907


@pytest.fixture
def world(corpus_session):
    return corpus_session


def kernel(world, name):
    return world.registry.get(name)


# -- execute: circuit mode ----------------------------------------------------------


def test_bell_sampling_within_4_sigma(world):
    pack, q = pack_for(2)
    runtime.execute(kernel(world, "bell"), pack, world.registry, shots=8192, seed=11)
    counts = q.counts()
    assert set(counts) <= {"00", "11"}
    sigma = math.sqrt(8192 * 0.25)
    for key in ("00", "11"):
        assert abs(counts.get(key, 0) - 4096) <= 4 * sigma
    assert sum(counts.values()) == 8192


def test_bell_exact_probabilities(world):
    pack, q = pack_for(2)
    runtime.execute(kernel(world, "bell"), pack, world.registry, shots=0)
    assert q.results.probabilities == pytest.approx({"00": 0.5, "11": 0.5})
    assert q.results.counts == {}


def test_seeded_counts_reproducible(world):
    pack1, q1 = pack_for(2)
    pack2, q2 = pack_for(2)
    runtime.execute(kernel(world, "bell"), pack1, world.registry, shots=500, seed=9)
    runtime.execute(kernel(world, "bell"), pack2, world.registry, shots=500, seed=9)
    assert q1.counts() == q2.counts()


def test_empty_kernel(world):
    world.compile_source("def nothing(q : qreg):\n")
    pack, q = pack_for(2)
    runtime.execute(world.registry.get("nothing"), pack, world.registry, shots=100)
    assert q.counts() == {}
    assert np.allclose(q.results.amplitudes, [1, 0, 0, 0])


def test_qec_rejected_in_circuit_mode(world):
    pack, _ = pack_for(4, one_state=False, err_loc=1)
    with pytest.raises(DynamicControlFlowInCircuitMode):
        runtime.execute(kernel(world, "qec_demo"), pack, world.registry, mode="circuit")


def test_sampling_matches_exact_for_grover(world):
    pack, q = pack_for(3, oracle_var="cz_oracle", iterations=1)
    runtime.execute(kernel(world, "run_grover"), pack, world.registry, shots=0)
    exact = dict(q.results.probabilities)
    pack2, q2 = pack_for(3, oracle_var="cz_oracle", iterations=1)
    runtime.execute(kernel(world, "run_grover"), pack2, world.registry, shots=100_000, seed=1)
    for key, p in exact.items():
        sigma = math.sqrt(100_000 * p * (1 - p)) or 1.0
        assert abs(q2.counts().get(key, 0) - 100_000 * p) <= 4 * sigma


def test_grover_against_bruteforce_oracle(world):
    pack, q = pack_for(3, oracle_var="cz_oracle", iterations=1)
    runtime.execute(kernel(world, "run_grover"), pack, world.registry, shots=0)
    # independent construction: H^3, oracle, H X CCZ X H
    H1 = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    X1 = np.array([[0, 1], [1, 0]])
    def on(mat, q_, n=3):
        out = [np.eye(2)] * n
        out[q_] = mat
        full = out[0]
        for m in out[1:]:
            full = np.kron(full, m)
        return full
    CZ02 = np.diag([(-1.0) ** (((i >> 2) & 1) * (i & 1)) for i in range(8)])
    CZ12 = np.diag([(-1.0) ** (((i >> 1) & 1) * (i & 1)) for i in range(8)])
    CCZ = np.diag([1.0] * 7 + [-1.0])
    layer_h = on(H1, 0) @ on(H1, 1) @ on(H1, 2)
    layer_x = on(X1, 0) @ on(X1, 1) @ on(X1, 2)
    oracle = CZ12 @ CZ02
    reflect = layer_h @ layer_x @ CCZ @ layer_x @ layer_h
    state = reflect @ oracle @ layer_h @ np.eye(8)[:, 0]
    probs = np.abs(state) ** 2
    marked = probs[0b011] + probs[0b101]
    got_marked = q.results.probabilities.get("011", 0) + q.results.probabilities.get("101", 0)
    assert abs(got_marked - marked) < 1e-10
    for idx in range(8):
        key = format(idx, "03b")
        assert abs(q.results.probabilities.get(key, 0.0) - probs[idx]) < 1e-10


# -- ftqc mode -----------------------------------------------------------------------


@pytest.mark.parametrize("one_state", [False, True])
@pytest.mark.parametrize("err_loc,syndrome", [(-1, 0), (0, 1), (1, 3), (2, 2)])
def test_qec_corrects_all_single_flips(world, one_state, err_loc, syndrome):
    pack, q = pack_for(4, one_state=one_state, err_loc=err_loc)
    runtime.execute(
        kernel(world, "qec_demo"), pack, world.registry, mode="ftqc", shots=1, seed=3
    )
    assert q.results.prints == [f"Syndrome value= {syndrome}"]
    expect = np.zeros(16, dtype=complex)
    expect[0b1110 if one_state else 0] = 1.0
    assert abs(np.vdot(expect, q.results.amplitudes)) ** 2 == pytest.approx(1.0)


def test_ftqc_needs_capability(world):
    pack, _ = pack_for(4, one_state=False, err_loc=0)
    crippled = runtime.make_backend("qpp", {"mid_circuit_measure": False})
    with pytest.raises(BackendCapabilityError):
        runtime.execute(
            kernel(world, "qec_demo"), pack, world.registry,
            backend=crippled, mode="ftqc", shots=1,
        )


def test_backend_not_found():
    with pytest.raises(BackendNotFound):
        runtime.make_backend("tnqvm")


def test_mode_equivalence_static_kernels(world):
    # exact: circuit-mode distribution == branch-enumerated dynamic run
    for name, size, extra in [
        ("bell", 2, {}),
        ("run_grover", 3, {"oracle_var": "cz_oracle", "iterations": 1}),
    ]:
        pack, q = pack_for(size, **extra)
        runtime.execute(kernel(world, name), pack, world.registry, shots=0)
        comp = runtime.extract_composite(kernel(world, name), pack, world.registry)
        dynamic = oracles.enumerate_ftqc(comp, size)
        for key in set(q.results.probabilities) | set(dynamic):
            assert q.results.probabilities.get(key, 0.0) == pytest.approx(
                dynamic.get(key, 0.0), abs=1e-10
            )


def test_byref_float_updated(world):
    world.compile_source(
        "def setref(q : qreg, x : FloatRef):\n    x = 0.5\n    H(q[0])\n"
    )
    cell = RefCell(0.0)
    pack = ArgPack({"q": QReg(1), "x": cell})
    q = pack.values["q"]
    runtime.execute(world.registry.get("setref"), pack, world.registry, shots=0)
    assert q.results.byref_slots == {"x": 0.5}
    assert cell.value == 0.5


def test_byref_two_refs(world):
    world.compile_source(
        "def tworef(q : qreg, u : IntRef, w : FloatRef):\n"
        "    u = 3\n"
        "    u = u + 4\n"
        "    w = 0.25\n"
        "    H(q[0])\n"
    )
    # interpreted trace oracle: u = 3 then u + 4 = 7; w = 0.25
    cu, cw = RefCell(0), RefCell(0.0)
    pack = ArgPack({"q": QReg(1), "u": cu, "w": cw})
    runtime.execute(world.registry.get("tworef"), pack, world.registry, shots=0)
    assert pack.values["q"].results.byref_slots == {"u": 7, "w": 0.25}
    assert (cu.value, cw.value) == (7, 0.25)


def test_byref_untouched_when_not_assigned(world):
    world.compile_source("def noref(q : qreg, x : FloatRef):\n    H(q[0])\n")
    cell = RefCell(1.25)
    pack = ArgPack({"q": QReg(1), "x": cell})
    runtime.execute(world.registry.get("noref"), pack, world.registry, shots=0)
    assert pack.values["q"].results.byref_slots == {}
    assert cell.value == 1.25


def test_byref_measurement_dependent(world):
    world.compile_source(
        "def mref(q : qreg, got : BoolRef):\n"
        "    X(q[0])\n"
        "    got = Measure(q[0])\n"
    )
    cell = RefCell(False)
    pack = ArgPack({"q": QReg(1), "got": cell})
    runtime.execute(world.registry.get("mref"), pack, world.registry, mode="ftqc", shots=1)
    assert cell.value == 1


def test_nested_byref_forwarding(world):
    world.compile_source(
        "def inner(q : qreg, v : FloatRef):\n    v = 2.5\n\n"
        "def outer(q : qreg, v : FloatRef):\n    inner(q, v)\n    H(q[0])\n"
    )
    cell = RefCell(0.0)
    pack = ArgPack({"q": QReg(1), "v": cell})
    runtime.execute(world.registry.get("outer"), pack, world.registry, shots=0)
    assert cell.value == 2.5


def test_qubit_parameter_passing(world):
    world.compile_source(
        "def mark(q : qreg, t : qubit):\n    T(t)\n\n"
        "def driver(q : qreg):\n    H(q[0])\n    mark(q, q[2])\n"
    )
    pack, _ = pack_for(3)
    comp = runtime.extract_composite(world.registry.get("driver"), pack, world.registry)
    flat = ir.flatten(comp)
    assert flat == [ir.Instruction("H", (0,)), ir.Instruction("T", (2,))]


def test_broadcast_gates(world):
    world.compile_source("def allh(q : qreg):\n    H(q)\n    Measure(q)\n")
    pack, q = pack_for(3)
    runtime.execute(world.registry.get("allh"), pack, world.registry, shots=0)
    assert len(q.results.probabilities) == 8
    world.compile_source("def bad(q : qreg):\n    CX(q, q)\n")
    with pytest.raises(TypeMismatch):
        pack2, _ = pack_for(2)
        runtime.execute(world.registry.get("bad"), pack2, world.registry)


def test_prints_logged_in_circuit_mode(world):
    world.compile_source('def chatty(q : qreg):\n    print("hello", 3)\n    H(q[0])\n')
    pack, q = pack_for(1)
    runtime.execute(world.registry.get("chatty"), pack, world.registry, shots=0)
    assert q.results.prints == ["hello 3"]


# -- the Table 1 utility surface -----------------------------------------------------


def test_extract_composite_bell(world):
    pack, _ = pack_for(2)
    comp = runtime.extract_composite(kernel(world, "bell"), pack, world.registry)
    assert ir.count_instructions(comp) == 4


def test_extract_composite_ucc1_ctrl(world):
    pack, _ = pack_for(5, d=1.234)
    comp = runtime.extract_composite(kernel(world, "kernel"), pack, world.registry)
    flat = ir.flatten(comp)
    assert len(flat) == 15
    crz = [i for i in flat if i.name == "CRz" or (i.name == "Rz" and i.controls)]
    assert len(crz) == 1


def test_extract_composite_resolves_synthesis(world):
    pack, _ = pack_for(3)
    comp = runtime.extract_composite(kernel(world, "ccnot"), pack, world.registry)

    def audit(node):
        assert isinstance(node, (ir.Instruction, ir.CompositeInstruction))
        if isinstance(node, ir.CompositeInstruction):
            for ch in node.children:
                audit(ch)

    audit(comp)
    assert ir.count_instructions(comp) > 0


def test_as_unitary_empty(world):
    world.compile_source("def empty1(q : qreg):\n")
    pack, _ = pack_for(1)
    u = runtime.as_unitary_matrix(world.registry.get("empty1"), pack, world.registry)
    assert np.array_equal(u, np.eye(2))


def test_as_unitary_bell_without_measures(world):
    world.compile_source("def bell_u(q : qreg):\n    H(q[0])\n    CX(q[0], q[1])\n")
    pack, _ = pack_for(2)
    u = runtime.as_unitary_matrix(world.registry.get("bell_u"), pack, world.registry)
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    cx = np.eye(4)
    cx[2:, 2:] = [[0, 1], [1, 0]]
    assert np.max(np.abs(u - cx @ np.kron(h, np.eye(2)))) < 1e-12


def test_as_unitary_ccnot_matches_fig8(world):
    pack, _ = pack_for(3)
    u = runtime.as_unitary_matrix(kernel(world, "ccnot"), pack, world.registry)
    want = np.eye(8, dtype=complex)
    want[6, 6] = want[7, 7] = 0
    want[6, 7] = want[7, 6] = 1
    assert oracles.aligned_distance(u, want) < 1e-6


def test_as_unitary_rejects_measure(world):
    pack, _ = pack_for(2)
    with pytest.raises(NonUnitarySubcircuit):
        runtime.as_unitary_matrix(kernel(world, "bell"), pack, world.registry)


def test_openqasm_bell(world):
    pack, _ = pack_for(2)
    text = runtime.openqasm(kernel(world, "bell"), pack, world.registry)
    assert "h q[0];" in text
    assert "cx q[0],q[1];" in text
    assert text.count("measure") == 2
    assert oracles.validate_openqasm(text) == []


def test_openqasm_empty(world):
    world.compile_source("def empty2(q : qreg):\n")
    pack, _ = pack_for(2)
    text = runtime.openqasm(world.registry.get("empty2"), pack, world.registry)
    assert text.splitlines() == [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        "qreg q[2];",
        "creg c[2];",
    ]


def test_openqasm_grover_validates(world):
    pack, _ = pack_for(3, oracle_var="cz_oracle", iterations=1)
    text = runtime.openqasm(kernel(world, "run_grover"), pack, world.registry)
    assert oracles.validate_openqasm(text) == []


def test_openqasm_fsim_expanded_via_kak(world):
    world.compile_source("def fs(q : qreg):\n    fSim(q[0], q[1], 0.7, 0.3)\n")
    pack, _ = pack_for(2)
    text = runtime.openqasm(world.registry.get("fs"), pack, world.registry)
    assert "fSim" not in text
    assert oracles.validate_openqasm(text) == []


# -- observe --------------------------------------------------------------------------


def test_observe_bell_stabilizer(world):
    world.compile_source("def bell_u2(q : qreg):\n    H(q[0])\n    CX(q[0], q[1])\n")
    pack, _ = pack_for(2)
    val = runtime.observe(world.registry.get("bell_u2"), Z(0) * Z(1), pack, world.registry)
    assert val == pytest.approx(1.0, abs=1e-12)


def test_observe_identity_passthrough(world):
    world.compile_source("def anystate(q : qreg):\n    Ry(q[0], 0.7)\n")
    pack, _ = pack_for(1)
    val = runtime.observe(world.registry.get("anystate"), I(5.907), pack, world.registry)
    assert val == pytest.approx(5.907)


def test_observe_deuteron_minimum(world):
    pack, _ = pack_for(2, t0=0.5944)
    val = runtime.observe(kernel(world, "ansatz"), DEUTERON, pack, world.registry)
    assert abs(val - (-1.74886)) < 1e-3


def test_observe_shots_path(world):
    pack, _ = pack_for(2, t0=0.5944)
    val = runtime.observe(
        kernel(world, "ansatz"), DEUTERON, pack, world.registry, shots=200_000, seed=2
    )
    assert abs(val - (-1.74886)) < 0.05


def test_observe_rejects_nonhermitian(world):
    pack, _ = pack_for(2, t0=0.1)
    from qk.operators import PauliOperator

    with pytest.raises(NonHermitianObservable):
        runtime.observe(
            kernel(world, "ansatz"),
            PauliOperator.word({0: "X"}, 1j),
            pack,
            world.registry,
        )


def test_observe_rejects_measuring_kernel(world):
    pack, _ = pack_for(2)
    with pytest.raises(NonUnitarySubcircuit):
        runtime.observe(kernel(world, "bell"), Z(0), pack, world.registry)


def test_observe_matches_dense_expectation(world):
    from qk.operators import pauli_matrix

    pack, _ = pack_for(2, t0=0.31)
    val = runtime.observe(kernel(world, "ansatz"), DEUTERON, pack, world.registry)
    u_pack, _ = pack_for(2, t0=0.31)
    u = runtime.as_unitary_matrix(kernel(world, "ansatz"), u_pack, world.registry)
    psi = u[:, 0]
    want = float(np.real(psi.conj() @ pauli_matrix(DEUTERON, 2) @ psi))
    assert val == pytest.approx(want, abs=1e-12)


# -- properties -----------------------------------------------------------------------


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 10_000))
def test_norm_preserved_along_random_circuits(seed):
    rng = np.random.default_rng(seed)
    sv = StateVector(3, rng)
    names = ["H", "X", "Y", "Z", "S", "T", "Rx", "Ry", "Rz", "CX", "CZ", "Swap", "fSim"]
    from qk import gates

    for _ in range(15):
        name = str(rng.choice(names))
        gdef = gates.GATES[name]
        qubits = tuple(rng.choice(3, size=gdef.arity, replace=False).tolist())
        params = tuple(float(rng.normal()) for _ in range(gdef.n_params))
        sv.apply(ir.Instruction(name, qubits, params))
        assert abs(sv.norm() - 1.0) < 1e-10


def test_ftqc_matches_circuit_for_bell_histogram(world):
    pack, q = pack_for(2)
    runtime.execute(kernel(world, "bell"), pack, world.registry, mode="ftqc", shots=20_000, seed=21)
    counts = q.counts()
    assert set(counts) <= {"00", "11"}
    sigma = math.sqrt(20_000 * 0.25)
    assert abs(counts.get("00", 0) - 10_000) < 4 * sigma
