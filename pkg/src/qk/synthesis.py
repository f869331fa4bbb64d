"""Unitary-to-circuit synthesis.

Three methods sit behind :func:`synthesize`:

* ``zyz``       1 qubit, Euler angles.
* ``kak``       2 qubits, Cartan decomposition with at most 3 CX
                (the 0/1/2/3-CX cases follow Shende, Bullock & Markov,
                quant-ph/0308033 / 0308045).
* ``two_level`` any size, Givens column reduction into multi-controlled
                1-qubit gates, expanded without ancillas.

All reconstructions are verified up to global phase.
"""
from __future__ import annotations

import cmath
import itertools
import math

import numpy as np

from . import ir, transforms
from .errors import DimensionMismatch, NonUnitaryInput, QkError
from .statevector import phase_aligned_distance, unitary_of

UNITARITY_TOL = 1e-8
ZERO_TOL = 1e-12

# Magic basis: E maps SO(4) into SU(2) x SU(2).
E = np.array(
    [[1, 1j, 0, 0], [0, 0, 1j, 1], [0, 0, 1j, -1], [1, -1j, 0, 0]], dtype=complex
) / math.sqrt(2)
EDAG = E.conj().T


def require_unitary(m: np.ndarray, tol: float = UNITARITY_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonUnitaryInput(f"matrix must be square, got shape {m.shape}")
    err = np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0])))
    if err > tol:
        raise NonUnitaryInput(f"matrix is not unitary (max deviation {err:.3e})")
    return m


# -- one qubit -----------------------------------------------------------------


def zyz(u: np.ndarray) -> tuple[float, float, float, float]:
    """Euler angles (alpha, beta, gamma, delta) with
    u = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta).

    Diagonal inputs canonicalize to delta = 0.
    """
    u = require_unitary(u)
    if u.shape != (2, 2):
        raise DimensionMismatch("zyz needs a 2x2 matrix")
    det = np.linalg.det(u)
    alpha = cmath.phase(det) / 2.0
    su = u * cmath.exp(-1j * alpha)
    a, b = abs(su[0, 0]), abs(su[1, 0])
    gamma = 2.0 * math.atan2(b, a)
    if b < 1e-12:
        beta = 2.0 * cmath.phase(su[1, 1])
        delta = 0.0
        gamma = 0.0
    elif a < 1e-12:
        beta = 2.0 * cmath.phase(su[1, 0])
        delta = 0.0
        gamma = math.pi
    else:
        t11, t10 = cmath.phase(su[1, 1]), cmath.phase(su[1, 0])
        beta = t11 + t10
        delta = t11 - t10
    return alpha, beta, gamma, delta


def _one_qubit_ops(u: np.ndarray, target: int) -> list[ir.Instruction]:
    """Instructions for u up to global phase: Rz(delta), Ry(gamma), Rz(beta)."""
    if (
        abs(u[0, 1]) < ZERO_TOL
        and abs(u[1, 0]) < ZERO_TOL
        and abs(u[0, 0] - u[1, 1]) < ZERO_TOL
    ):
        return []  # identity up to global phase
    _, beta, gamma, delta = zyz(u)
    out = []
    if abs(delta) > ZERO_TOL:
        out.append(ir.Instruction("Rz", (target,), (delta,)))
    if abs(gamma) > ZERO_TOL:
        out.append(ir.Instruction("Ry", (target,), (gamma,)))
    if abs(beta) > ZERO_TOL:
        out.append(ir.Instruction("Rz", (target,), (beta,)))
    return out


# -- two qubits (Cartan / KAK) ----------------------------------------------------


def _to_su4(u: np.ndarray) -> np.ndarray:
    det = np.linalg.det(u)
    return u * cmath.exp(-1j * cmath.phase(det) / 4.0)


def _split_tensor_product(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split w = A (x) B (both unitary) via a rank-1 SVD of the reshuffle."""
    m = w.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(m)
    a = u[:, 0].reshape(2, 2) * math.sqrt(2)
    b = vh[0, :].reshape(2, 2) * (s[0] / math.sqrt(2))
    return a, b


def _orth_eigenvectors(m: np.ndarray) -> np.ndarray:
    """Real orthogonal eigenvectors of a complex symmetric unitary matrix,
    columns ordered by eigenvalue phase, determinant +1.

    Re(m) and Im(m) commute, so a two-stage eigh (refine inside nearly
    degenerate blocks) diagonalizes both.
    """
    a, b = m.real, m.imag
    w, p = np.linalg.eigh(a)
    i = 0
    while i < len(w):
        j = i + 1
        while j < len(w) and w[j] - w[i] < 1e-7:
            j += 1
        if j - i > 1:
            block = p[:, i:j]
            sub = block.T @ b @ block
            _, r = np.linalg.eigh((sub + sub.T) / 2)
            p[:, i:j] = block @ r
        i = j
    lam = np.array([p[:, k] @ m @ p[:, k] for k in range(m.shape[0])])
    order = np.argsort(np.angle(lam).round(9), kind="stable")
    p = p[:, order]
    if np.linalg.det(p) < 0:
        p[:, -1] *= -1
    return p


def _extract_prefactors(u4: np.ndarray, v4: np.ndarray):
    """Find A, B, C, D in U(2) with (A x B) v4 (C x D) = u4 given that u4 and
    v4 share the Cartan class (both in SU(4))."""
    u = EDAG @ u4 @ E
    v = EDAG @ v4 @ E
    p = _orth_eigenvectors(u @ u.T)
    q = _orth_eigenvectors(v @ v.T)
    g = p @ q.T
    h = v.conj().T @ g.T @ u
    ab = E @ g @ EDAG
    cd = E @ h @ EDAG
    a, b = _split_tensor_product(ab)
    c, d = _split_tensor_product(cd)
    return a, b, c, d


def _gamma_eigs(u4: np.ndarray) -> np.ndarray:
    u = EDAG @ u4 @ E
    return np.linalg.eigvals(u @ u.T)


def _num_cnots(u4: np.ndarray) -> int:
    """Cartan-class CX count of an SU(4) matrix (trace test of gamma)."""
    g = _gamma_eigs(u4)
    tr = np.sum(g)
    if abs(abs(tr) - 4) < 1e-9 and abs(tr.imag) < 1e-9:
        return 0
    evs = np.sort(np.imag(g))
    if abs(tr) < 1e-9 and np.allclose(evs, [-1, -1, 1, 1], atol=1e-9):
        return 1
    if abs(tr.imag) < 1e-9:
        return 2
    return 3


_SWAP_M = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def _sandwich(inner: list[ir.Instruction], a, b, c, d) -> list[ir.Instruction]:
    """C, D first, then the interior, then A, B (matrix order right-to-left)."""
    ops = _one_qubit_ops(c, 0) + _one_qubit_ops(d, 1)
    ops += inner
    ops += _one_qubit_ops(a, 0) + _one_qubit_ops(b, 1)
    return ops


def _kak_0(su: np.ndarray) -> list[ir.Instruction]:
    a, b = _split_tensor_product(su)
    return _one_qubit_ops(a, 0) + _one_qubit_ops(b, 1)


def _kak_1(su: np.ndarray) -> list[ir.Instruction]:
    swapped = cmath.exp(1j * math.pi / 4) * (_SWAP_M @ su)
    inner = [ir.Instruction("CX", (0, 1))]
    v = _to_su4(unitary_of(inner, 2))
    v_swapped = cmath.exp(1j * math.pi / 4) * (_SWAP_M @ v)
    a, b, c, d = _extract_prefactors(swapped, v_swapped)
    # the swap trick exchanges which wire A and B land on
    return (
        _one_qubit_ops(c, 0)
        + _one_qubit_ops(d, 1)
        + inner
        + _one_qubit_ops(a, 1)
        + _one_qubit_ops(b, 0)
    )


def _kak_2(su: np.ndarray) -> list[ir.Instruction]:
    evs = _gamma_eigs(su)
    x = float(np.angle(evs[0]))
    y = float(np.angle(evs[1]))
    if abs(x + y) < 1e-11:
        y = float(np.angle(evs[2]))
    delta = (x + y) / 2.0
    phi = (x - y) / 2.0
    inner = [
        ir.Instruction("CX", (1, 0)),
        ir.Instruction("Rz", (0,), (delta,)),
        ir.Instruction("Rx", (1,), (phi,)),
        ir.Instruction("CX", (1, 0)),
    ]
    v = _to_su4(unitary_of(inner, 2))
    a, b, c, d = _extract_prefactors(su, v)
    return _sandwich(inner, a, b, c, d)


def _kak_3(su: np.ndarray, angle_order=None) -> list[ir.Instruction]:
    swapped = cmath.exp(1j * math.pi / 4) * (_SWAP_M @ su)
    evs = _gamma_eigs(swapped)
    angles = sorted(float(np.angle(ev)) for ev in evs)
    x, y, z = (
        (angles[0], angles[1], angles[2])
        if angle_order is None
        else (angles[angle_order[0]], angles[angle_order[1]], angles[angle_order[2]])
    )
    alpha = (x + y) / 2.0
    beta = (x + z) / 2.0
    delta = (z + y) / 2.0
    inner = [
        ir.Instruction("CX", (1, 0)),
        ir.Instruction("Rz", (0,), (delta,)),
        ir.Instruction("Ry", (1,), (beta,)),
        ir.Instruction("CX", (0, 1)),
        ir.Instruction("Ry", (1,), (alpha,)),
        ir.Instruction("CX", (1, 0)),
    ]
    v = _to_su4(_SWAP_M @ unitary_of(inner, 2))
    a, b, c, d = _extract_prefactors(swapped, v)
    return (
        _one_qubit_ops(c, 0)
        + _one_qubit_ops(d, 1)
        + inner
        + _one_qubit_ops(a, 1)
        + _one_qubit_ops(b, 0)
    )


def kak(u: np.ndarray) -> ir.CompositeInstruction:
    """Two-qubit synthesis with at most 3 CX, verified to 1e-8."""
    u = require_unitary(u)
    if u.shape != (4, 4):
        raise DimensionMismatch("kak needs a 4x4 matrix")
    su = _to_su4(u)
    first = _num_cnots(su)
    attempts = []
    for case in range(first, 4):
        attempts.append([_kak_0, _kak_1, _kak_2, _kak_3][case])
    last_err = None
    for builder in attempts:
        try:
            ops = builder(su)
            if phase_aligned_distance(unitary_of(ops, 2), u) < 5e-9:
                return ir.CompositeInstruction(name="kak", children=ops)
        except (np.linalg.LinAlgError, ValueError) as exc:  # pragma: no cover
            last_err = exc
    for order in itertools.permutations(range(4), 3):
        ops = _kak_3(su, angle_order=order)
        if phase_aligned_distance(unitary_of(ops, 2), u) < 5e-9:
            return ir.CompositeInstruction(name="kak", children=ops)
    raise QkError(f"kak decomposition failed to converge ({last_err})")


# -- n qubits (two-level / Givens) --------------------------------------------------


def _sqrt_unitary_2x2(g: np.ndarray) -> np.ndarray:
    if abs(g[0, 1]) < 1e-15 and abs(g[1, 0]) < 1e-15:
        return np.diag([cmath.sqrt(g[0, 0]), cmath.sqrt(g[1, 1])])
    w, v = np.linalg.eig(g)
    v = v / np.linalg.norm(v, axis=0, keepdims=True)
    return v @ np.diag([cmath.sqrt(w[0]), cmath.sqrt(w[1])]) @ v.conj().T


def _controlled_1q_ops(g: np.ndarray, controls: list[int], target: int) -> list[ir.Instruction]:
    """Expand a multi-controlled 1-qubit gate into CX plus 1-qubit gates.

    Phases are exact (up to one overall global phase at the top level),
    using the ABC construction for one control and the square-root
    recursion for more.
    """
    if not controls:
        return _one_qubit_ops(g, target)
    if len(controls) == 1:
        return _abc_ops(g, controls[0], target)
    v = _sqrt_unitary_2x2(g)
    c_rest, c_last = controls[:-1], controls[-1]
    ops = _abc_ops(v, c_last, target)
    ops += _controlled_1q_ops(np.array([[0, 1], [1, 0]], dtype=complex), c_rest, c_last)
    ops += _abc_ops(v.conj().T, c_last, target)
    ops += _controlled_1q_ops(np.array([[0, 1], [1, 0]], dtype=complex), c_rest, c_last)
    ops += _controlled_1q_ops(v, c_rest, target)
    return ops


def _abc_ops(g: np.ndarray, control: int, target: int) -> list[ir.Instruction]:
    """Single-controlled arbitrary 1-qubit gate, exact phases."""
    alpha, beta, gamma, delta = zyz(g)
    ops: list[ir.Instruction] = []

    def rz(t, a):
        if abs(a) > ZERO_TOL:
            ops.append(ir.Instruction("Rz", (t,), (a,)))

    def ry(t, a):
        if abs(a) > ZERO_TOL:
            ops.append(ir.Instruction("Ry", (t,), (a,)))

    # C = Rz((delta-beta)/2)
    rz(target, (delta - beta) / 2.0)
    ops.append(ir.Instruction("CX", (control, target)))
    # B = Ry(-gamma/2) Rz(-(delta+beta)/2)
    rz(target, -(delta + beta) / 2.0)
    ry(target, -gamma / 2.0)
    ops.append(ir.Instruction("CX", (control, target)))
    # A = Rz(beta) Ry(gamma/2)
    ry(target, gamma / 2.0)
    rz(target, beta)
    # phase on the control: diag(1, e^{i alpha}) = CPhase-less 1q form
    if abs(alpha) > ZERO_TOL:
        ops.append(ir.Instruction("Rz", (control,), (alpha,)))
        # the dropped e^{i alpha / 2} is a global phase at this level
    return ops


def _bits(index: int, n: int) -> list[int]:
    return [(index >> (n - 1 - k)) & 1 for k in range(n)]


def _apply_polarity(controls: list[int], want: list[int]) -> tuple[list, list]:
    """X-wrap controls that must fire on 0."""
    pre = [ir.Instruction("X", (c,)) for c, w in zip(controls, want) if w == 0]
    return pre, list(pre)


def _two_level_ops(i: int, j: int, g: np.ndarray, n: int) -> list[ir.Instruction]:
    """Two-level unitary mixing basis states i < j, Gray-code routed."""
    diff = [k for k in range(n) if _bits(i, n)[k] != _bits(j, n)[k]]
    path = [i]
    cur = i
    for k in diff[:-1]:
        cur ^= 1 << (n - 1 - k)
        path.append(cur)
    # cur and j now differ only at diff[-1]
    t = diff[-1]
    perm_ops: list[ir.Instruction] = []
    for a, b in zip(path, path[1:]):
        flip = next(k for k in range(n) if _bits(a, n)[k] != _bits(b, n)[k])
        controls = [k for k in range(n) if k != flip]
        want = [_bits(b, n)[k] for k in controls]
        pre, post = _apply_polarity(controls, want)
        body = _controlled_1q_ops(
            np.array([[0, 1], [1, 0]], dtype=complex), controls, flip
        )
        perm_ops += pre + body + post
    gate = g
    if _bits(j, n)[t] == 0:
        gate = g[::-1, ::-1]  # swap roles of |0> and |1> on the target
    controls = [k for k in range(n) if k != t]
    want = [_bits(j, n)[k] for k in controls]
    pre, post = _apply_polarity(controls, want)
    core = pre + _controlled_1q_ops(gate, controls, t) + post
    return perm_ops + core + list(reversed([_inverse_perm(op) for op in perm_ops]))


def _inverse_perm(op: ir.Instruction) -> ir.Instruction:
    return transforms.dagger_instruction(op)


def two_level(u: np.ndarray) -> ir.CompositeInstruction:
    """Givens column reduction; entries below 1e-12 are treated as zeros."""
    u = require_unitary(u)
    dim = u.shape[0]
    n = int(round(math.log2(dim)))
    if 2**n != dim:
        raise DimensionMismatch(f"matrix dimension {dim} is not a power of 2")
    if n == 1:
        return ir.CompositeInstruction(name="two_level", children=_one_qubit_ops(u, 0))
    work = u.astype(complex).copy()
    factors: list[tuple[int, int, np.ndarray]] = []  # left-multiplied eliminations
    for c in range(dim - 1):
        for r in range(dim - 1, c, -1):
            if abs(work[r, c]) < ZERO_TOL:
                continue
            a, b = work[c, c], work[r, c]
            nrm = math.hypot(abs(a), abs(b))
            g = np.array(
                [[a.conjugate() / nrm, b.conjugate() / nrm], [-b / nrm, a / nrm]],
                dtype=complex,
            )
            rows = np.vstack([work[c, :], work[r, :]])
            rows = g @ rows
            work[c, :], work[r, :] = rows[0], rows[1]
            factors.append((c, r, g))
    ops: list[ir.Instruction] = []
    # diagonal phases first (rightmost in matrix order)
    for idx in range(dim):
        phase = cmath.phase(work[idx, idx])
        if abs(phase) < 1e-12:
            continue
        t = n - 1
        gate = np.diag([1.0, cmath.exp(1j * phase)]).astype(complex)
        if _bits(idx, n)[t] == 0:
            gate = gate[::-1, ::-1]
        controls = [k for k in range(n) if k != t]
        want = [_bits(idx, n)[k] for k in controls]
        pre, post = _apply_polarity(controls, want)
        ops += pre + _controlled_1q_ops(gate, controls, t) + post
    for c, r, g in reversed(factors):
        ops += _two_level_ops(c, r, g.conj().T, n)
    return ir.CompositeInstruction(name="two_level", children=ops)


# -- front door -----------------------------------------------------------------


def synthesize(
    matrix: np.ndarray,
    targets: list[int],
    method: str = "default",
    tol: float = 1e-6,
) -> ir.CompositeInstruction:
    """Turn a unitary into a circuit on ``targets``; reconstruction is
    verified up to global phase within ``tol``."""
    matrix = require_unitary(matrix)
    n = int(round(math.log2(matrix.shape[0])))
    if 2**n != matrix.shape[0]:
        raise DimensionMismatch(f"matrix dimension {matrix.shape[0]} is not a power of 2")
    if len(targets) != n:
        raise DimensionMismatch(
            f"matrix acts on {n} qubit(s) but {len(targets)} target(s) given"
        )
    if method == "default":
        method = {1: "zyz", 2: "kak"}.get(n, "two_level")
    if method == "zyz":
        if n != 1:
            raise DimensionMismatch("zyz synthesis needs exactly 1 qubit")
        comp = ir.CompositeInstruction(name="synth", children=_one_qubit_ops(matrix, 0))
    elif method == "kak":
        if n != 2:
            raise DimensionMismatch("kak synthesis needs exactly 2 qubits")
        comp = kak(matrix)
    elif method == "two_level":
        comp = two_level(matrix)
    else:
        raise QkError(f"unknown synthesis method {method!r}")
    comp = transforms.peephole_optimize(comp)
    built = unitary_of(ir.flatten(comp), n)
    err = phase_aligned_distance(built, matrix)
    if err > tol:
        raise QkError(f"synthesis reconstruction error {err:.3e} exceeds {tol:.1e}")
    remapped = _remap(comp, {k: t for k, t in enumerate(targets)})
    remapped.name = "synth"
    return remapped


def _remap(comp: ir.CompositeInstruction, mapping: dict[int, int]) -> ir.CompositeInstruction:
    out = ir.CompositeInstruction(name=comp.name, region_tag=comp.region_tag)
    for child in comp.children:
        if isinstance(child, ir.Instruction):
            out.add(
                ir.Instruction(
                    child.name,
                    tuple(mapping[t] for t in child.targets),
                    child.params,
                    tuple(mapping[c] for c in child.controls),
                    child.adjoint,
                    child.classical_target,
                )
            )
        else:
            out.add(_remap(child, mapping))
    return out
