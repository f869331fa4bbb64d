import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qk import ir, synthesis
from qk.errors import DimensionMismatch, NonUnitaryInput
from qk.synthesis import kak, synthesize, two_level, zyz

import oracles


def rand_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q @ np.diag(np.exp(-1j * np.angle(np.diag(r))))


def rebuild_zyz(alpha, beta, gamma, delta):
    def rz(t):
        return np.diag([cmath.exp(-0.5j * t), cmath.exp(0.5j * t)])

    ry = np.array(
        [[math.cos(gamma / 2), -math.sin(gamma / 2)], [math.sin(gamma / 2), math.cos(gamma / 2)]]
    )
    return cmath.exp(1j * alpha) * rz(beta) @ ry @ rz(delta)


CCNOT = np.eye(8, dtype=complex)
CCNOT[6, 6] = CCNOT[7, 7] = 0
CCNOT[6, 7] = CCNOT[7, 6] = 1

CX_MAT = np.eye(4, dtype=complex)
CX_MAT[2:, 2:] = [[0, 1], [1, 0]]
SWAP_MAT = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


# -- zyz ---------------------------------------------------------------------------


def test_zyz_identity_canonical():
    assert zyz(np.eye(2)) == (0.0, 0.0, 0.0, 0.0)


def test_zyz_diagonal_canonical_split():
    angles = zyz(np.diag([cmath.exp(-0.35j), cmath.exp(0.35j)]))
    assert angles[1] == pytest.approx(0.7)
    assert angles[2] == 0.0 and angles[3] == 0.0


def test_zyz_hadamard():
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert np.max(np.abs(rebuild_zyz(*zyz(h)) - h)) < 1e-10


@settings(deadline=None, max_examples=60)
@given(st.integers(0, 10_000))
def test_zyz_random(seed):
    u = rand_unitary(np.random.default_rng(seed), 2)
    assert np.max(np.abs(rebuild_zyz(*zyz(u)) - u)) < 1e-10


def test_zyz_rejects_nonunitary():
    with pytest.raises(NonUnitaryInput):
        zyz(np.array([[1.0, 0.0], [0.0, 2.0]]))


# -- kak ---------------------------------------------------------------------------


def cx_count(comp):
    return sum(1 for i in ir.flatten(comp) if i.name == "CX")


def test_kak_cx_is_one_cx_class():
    comp = kak(CX_MAT)
    assert cx_count(comp) <= 1
    assert oracles.aligned_distance(oracles.dense_unitary(ir.flatten(comp), 2), CX_MAT) < 1e-8


def test_kak_local_product_zero_cx():
    rng = np.random.default_rng(3)
    u = np.kron(rand_unitary(rng, 2), rand_unitary(rng, 2))
    comp = kak(u)
    assert cx_count(comp) == 0
    assert oracles.aligned_distance(oracles.dense_unitary(ir.flatten(comp), 2), u) < 1e-8


def test_kak_swap_three_cx():
    comp = kak(SWAP_MAT)
    assert cx_count(comp) == 3
    assert oracles.aligned_distance(oracles.dense_unitary(ir.flatten(comp), 2), SWAP_MAT) < 1e-8


def test_kak_two_cx_class():
    # exp(i (a XX + b ZZ)) needs exactly 2 CX
    from scipy.linalg import expm
    from qk.operators import X, Z, pauli_matrix

    h = 0.3 * pauli_matrix(X(0) * X(1), 2) + 0.55 * pauli_matrix(Z(0) * Z(1), 2)
    u = expm(1j * h)
    comp = kak(u)
    assert cx_count(comp) <= 2
    assert oracles.aligned_distance(oracles.dense_unitary(ir.flatten(comp), 2), u) < 1e-8


@settings(deadline=None, max_examples=50)
@given(st.integers(0, 10_000))
def test_kak_random_su4(seed):
    u = rand_unitary(np.random.default_rng(seed), 4)
    comp = kak(u)
    assert cx_count(comp) <= 3
    assert oracles.aligned_distance(oracles.dense_unitary(ir.flatten(comp), 2), u) < 1e-8


def test_kak_rejects_bad_shape():
    with pytest.raises(DimensionMismatch):
        kak(np.eye(8))


# -- two-level -----------------------------------------------------------------------


def test_two_level_cz():
    cz = np.diag([1, 1, 1, -1]).astype(complex)
    comp = two_level(cz)
    assert oracles.aligned_distance(oracles.dense_unitary(ir.flatten(comp), 2), cz) < 1e-6


def test_two_level_identity_empty():
    assert ir.flatten(two_level(np.eye(8, dtype=complex))) == []


def test_two_level_ccnot():
    comp = two_level(CCNOT)
    got = oracles.dense_unitary(ir.flatten(comp), 3)
    assert oracles.aligned_distance(got, CCNOT) < 1e-6


@pytest.mark.parametrize("n", [1, 2, 3])
def test_two_level_random(n):
    u = rand_unitary(np.random.default_rng(n), 2**n)
    comp = two_level(u)
    assert oracles.aligned_distance(oracles.dense_unitary(ir.flatten(comp), n), u) < 1e-6


# -- synthesize front door --------------------------------------------------------------


def test_synthesize_identity_empty_after_peephole():
    assert ir.flatten(synthesize(np.eye(4, dtype=complex), [0, 1])) == []


def test_synthesize_ccnot_on_targets():
    comp = synthesize(CCNOT, [0, 1, 2], method="two_level")
    got = oracles.dense_unitary(ir.flatten(comp), 3)
    assert oracles.aligned_distance(got, CCNOT) < 1e-6


def test_synthesize_remaps_targets():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    comp = synthesize(x, [2])
    assert all(set(i.targets) <= {2} for i in ir.flatten(comp))


def test_synthesize_rejects_nonunitary():
    with pytest.raises(NonUnitaryInput):
        synthesize(np.ones((4, 4)), [0, 1])


def test_synthesize_dimension_checks():
    with pytest.raises(DimensionMismatch):
        synthesize(np.eye(4, dtype=complex), [0])
    with pytest.raises(DimensionMismatch):
        synthesize(np.eye(3), [0, 1])


def test_synthesize_near_unitary_rejected_above_tolerance():
    m = np.eye(4, dtype=complex)
    m[0, 0] = 1 + 1e-6  # over the 1e-8 unitarity gate
    with pytest.raises(NonUnitaryInput):
        synthesize(m, [0, 1])


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_forward_then_daggered_synthesis_mutually_inverse(seed):
    u = rand_unitary(np.random.default_rng(seed), 4)
    fwd = oracles.dense_unitary(ir.flatten(synthesize(u, [0, 1])), 2)
    bwd = oracles.dense_unitary(ir.flatten(synthesize(u.conj().T, [0, 1])), 2)
    assert oracles.aligned_distance(bwd @ fwd, np.eye(4, dtype=complex)) < 1e-6
