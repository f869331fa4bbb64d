"""Pauli and fermion operator algebra, the Jordan-Wigner map and the
first-order Trotter circuit generator.

A Pauli word is a tuple of (qubit, letter) pairs sorted by qubit; the
empty word is the identity. Coefficients below 1e-14 are pruned.
"""
from __future__ import annotations

import cmath
import math
import re

import numpy as np

from . import ir
from .errors import (
    IndexOutOfRange,
    MalformedOperator,
    NonHermitianGenerator,
)

PRUNE_TOL = 1e-14

_SINGLE = {
    # (a, b) -> (phase, result letter or None for identity)
    ("X", "X"): (1, None),
    ("Y", "Y"): (1, None),
    ("Z", "Z"): (1, None),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}

_MATS = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliOperator:
    """Complex-weighted sum of Pauli words."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict[tuple, complex] = {}
        if terms:
            for word, coeff in terms.items():
                self._accumulate(word, coeff)
        self._prune()

    def _accumulate(self, word, coeff):
        word = tuple(sorted(word))
        self.terms[word] = self.terms.get(word, 0) + complex(coeff)

    def _prune(self):
        self.terms = {w: c for w, c in self.terms.items() if abs(c) >= PRUNE_TOL}

    # constructors

    @staticmethod
    def identity(coeff=1.0) -> "PauliOperator":
        return PauliOperator({(): coeff})

    @staticmethod
    def word(letters: dict[int, str], coeff=1.0) -> "PauliOperator":
        return PauliOperator({tuple(sorted(letters.items())): coeff})

    # algebra

    def __add__(self, other):
        other = _coerce(other)
        out = PauliOperator(self.terms)
        for w, c in other.terms.items():
            out._accumulate(w, c)
        out._prune()
        return out

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * _coerce(other)

    def __rsub__(self, other):
        return _coerce(other) + (-1) * self

    def __neg__(self):
        return (-1) * self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return PauliOperator({w: c * other for w, c in self.terms.items()})
        return pauli_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.__mul__(other)
        return pauli_mul(_coerce(other), self)

    def __eq__(self, other):
        if not isinstance(other, PauliOperator):
            return NotImplemented
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) < 1e-10 for k in keys)

    def __hash__(self):
        return hash(frozenset((w, round(c.real, 10), round(c.imag, 10)) for w, c in self.terms.items()))

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def num_qubits(self) -> int:
        return max((q for w in self.terms for q, _ in w), default=-1) + 1

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(c.imag) < tol for c in self.terms.values())

    def coefficient(self, word: tuple) -> complex:
        return self.terms.get(tuple(sorted(word)), 0j)

    def term_list(self):
        """Terms in a deterministic order: identity last, words sorted."""
        words = sorted((w for w in self.terms if w), key=lambda w: (len(w), w))
        if () in self.terms:
            words.append(())
        return [(w, self.terms[w]) for w in words]

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for word, coeff in self.term_list():
            num = repr(coeff.real) if abs(coeff.imag) < PRUNE_TOL else f"({coeff})"
            factors = "".join(f" * {letter}({q})" for q, letter in word)
            parts.append(f"{num}{factors}")
        return " + ".join(parts)

    __repr__ = __str__


def _coerce(v) -> PauliOperator:
    if isinstance(v, PauliOperator):
        return v
    if isinstance(v, (int, float, complex)):
        return PauliOperator.identity(v)
    raise TypeError(f"cannot combine {type(v).__name__} with PauliOperator")


def X(q: int) -> PauliOperator:
    return PauliOperator.word({q: "X"})


def Y(q: int) -> PauliOperator:
    return PauliOperator.word({q: "Y"})


def Z(q: int) -> PauliOperator:
    return PauliOperator.word({q: "Z"})


def I(coeff=1.0) -> PauliOperator:  # noqa: E743 - matches the operator naming
    return PauliOperator.identity(coeff)


def pauli_mul(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Product distributing over sums; single-qubit letters follow the
    cyclic relations (X*Y = iZ and friends)."""
    out = PauliOperator()
    for wa, ca in a.terms.items():
        da = dict(wa)
        for wb, cb in b.terms.items():
            phase = ca * cb
            merged = dict(da)
            for q, letter in wb:
                if q in merged:
                    ph, res = _SINGLE[(merged[q], letter)]
                    phase *= ph
                    if res is None:
                        del merged[q]
                    else:
                        merged[q] = res
                else:
                    merged[q] = letter
            out._accumulate(tuple(sorted(merged.items())), phase)
    out._prune()
    return out


def pauli_matrix(op: PauliOperator, n: int) -> np.ndarray:
    """Dense matrix with qubit 0 as the most significant bit."""
    if op.num_qubits() > n:
        raise IndexOutOfRange(
            f"operator touches qubit {op.num_qubits() - 1}, register has {n}"
        )
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for word, coeff in op.terms.items():
        letters = dict(word)
        m = np.array([[coeff]], dtype=complex)
        for q in range(n):
            m = np.kron(m, _MATS.get(letters.get(q), np.eye(2, dtype=complex)))
        out += m
    return out


# -- fermion operators --------------------------------------------------------


class FermionOperator:
    """Sum of products of fermionic ladder operators.

    A term is a tuple of (mode, dagger) pairs in application order
    (leftmost acts last), written in the ``"1^ 0"`` style.
    """

    __slots__ = ("terms",)

    def __init__(self, word="", coeff=1.0, *, terms=None):
        self.terms: dict[tuple, complex] = {}
        if terms is not None:
            for w, c in terms.items():
                self.terms[tuple(w)] = self.terms.get(tuple(w), 0) + complex(c)
        else:
            self.terms[_parse_fermion_word(word)] = complex(coeff)
        self._prune()

    def _prune(self):
        self.terms = {w: c for w, c in self.terms.items() if abs(c) >= PRUNE_TOL}

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = FermionOperator("", other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return FermionOperator(terms=out)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = FermionOperator("", other)
        return self + FermionOperator(terms={w: -c for w, c in other.terms.items()})

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float, complex)):
            raise TypeError("FermionOperator supports scalar multiplication only")
        return FermionOperator(terms={w: c * scalar for w, c in self.terms.items()})

    __rmul__ = __mul__

    def n_modes(self) -> int:
        return max((m for w in self.terms for m, _ in w), default=-1) + 1

    def term_list(self):
        return sorted(self.terms.items(), key=lambda item: (len(item[0]), item[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for i, (word, coeff) in enumerate(self.term_list()):
            c = coeff.real
            body = " ".join(f"{m}^" if dag else f"{m}" for m, dag in word)
            num = repr(abs(c)) if i else repr(c)
            sign = ("- " if c < 0 else "+ ") if i else ""
            parts.append(f"{sign}{num} [{body}]")
        return " ".join(parts)

    __repr__ = __str__


def _parse_fermion_word(text: str) -> tuple:
    word = []
    for tok in text.split():
        m = re.fullmatch(r"(\d+)(\^?)", tok)
        if not m:
            raise MalformedOperator(f"bad ladder token {tok!r}")
        word.append((int(m.group(1)), m.group(2) == "^"))
    return tuple(word)


def jordan_wigner(f: FermionOperator) -> PauliOperator:
    """Map ladder operators to Pauli strings: a_p (dagger) becomes
    (X_p -/+ iY_p)/2 with a Z string on all modes below p."""
    total = PauliOperator()
    for word, coeff in f.terms.items():
        acc = PauliOperator.identity(coeff)
        for mode, dagger in word:
            zs = {q: "Z" for q in range(mode)}
            sign = -1j if dagger else 1j
            factor = PauliOperator.word({**zs, mode: "X"}, 0.5) + PauliOperator.word(
                {**zs, mode: "Y"}, 0.5 * sign
            )
            acc = pauli_mul(acc, factor)
        total = total + acc
    return total


# -- text formats ---------------------------------------------------------------


def parse_pauli(text: str) -> PauliOperator:
    """Parse ``-2.1433 * X(0) * X(1) + .21829 * Z(0) + 5.907`` style text."""
    text = text.strip()
    if not text:
        return PauliOperator()
    tokens = re.findall(
        r"[XYZI]\(\d+\)|[-+*]|\d+\.\d*(?:[eE][-+]?\d+)?j?|\.\d+(?:[eE][-+]?\d+)?j?|\d+(?:[eE][-+]?\d+)?j?|\S",
        text,
    )
    op = PauliOperator()
    pos = 0

    def bad(tok):
        raise MalformedOperator(f"unexpected token {tok!r} in operator text")

    while pos < len(tokens):
        sign = 1.0
        while pos < len(tokens) and tokens[pos] in "+-":
            if tokens[pos] == "-":
                sign = -sign
            pos += 1
        if pos >= len(tokens):
            raise MalformedOperator("dangling sign at end of operator text")
        coeff = complex(sign)
        letters: dict[int, str] = {}
        expect_factor = True
        while pos < len(tokens):
            tok = tokens[pos]
            if tok == "*":
                pos += 1
                expect_factor = True
                continue
            if tok in "+-" and not expect_factor:
                break
            m = re.fullmatch(r"([XYZI])\((\d+)\)", tok)
            if m:
                letter, q = m.group(1), int(m.group(2))
                if letter != "I":
                    if q in letters:
                        single = PauliOperator.word({q: letters[q]}) * PauliOperator.word({q: letter})
                        ((w, ph),) = single.terms.items() if single.terms else (((), 1),)
                        coeff *= ph
                        letters.pop(q)
                        letters.update(dict(w))
                    else:
                        letters[q] = letter
                pos += 1
                expect_factor = False
                continue
            try:
                coeff *= complex(tok)
            except ValueError:
                bad(tok)
            pos += 1
            expect_factor = False
        if expect_factor:
            bad(tokens[pos - 1] if pos else text)
        op = op + PauliOperator.word(letters, coeff)
    return op


def print_pauli(op: PauliOperator) -> str:
    """Text form accepted back by :func:`parse_pauli` (real coefficients;
    the format exists for Hermitian observables)."""
    if not op.terms:
        return "0"
    parts = []
    for i, (word, coeff) in enumerate(op.term_list()):
        if abs(coeff.imag) >= PRUNE_TOL:
            raise MalformedOperator(
                "operator text supports real coefficients only"
            )
        c = coeff.real
        num = repr(abs(c)) if i else repr(c)
        sign = ("- " if c < 0 else "+ ") if i else ""
        factors = " * ".join(f"{letter}({q})" for q, letter in word)
        term = f"{num} * {factors}" if factors else num
        parts.append(sign + term)
    return " ".join(parts)


def parse_fermion(text: str) -> FermionOperator:
    """Parse ``-0.43658 [0^ 0] + 4.2866 [1 0^]`` style text; a bare number
    is the constant term."""
    text = text.strip()
    if not text:
        return FermionOperator(terms={})
    out = FermionOperator(terms={})
    pattern = re.compile(
        r"\s*([+-])?\s*((?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)\s*(?:\[([^\]]*)\])?"
    )
    pos = 0
    first = True
    while pos < len(text):
        m = pattern.match(text, pos)
        if not m or m.end() == pos:
            raise MalformedOperator(f"bad fermion operator text near {text[pos:pos+20]!r}")
        sign, num, word = m.groups()
        if sign is None and not first:
            raise MalformedOperator("terms must be joined with + or -")
        coeff = float(num) * (-1 if sign == "-" else 1)
        out = out + FermionOperator(word or "", coeff)
        pos = m.end()
        first = False
    return out


def print_fermion(f: FermionOperator) -> str:
    return str(f)


# -- Trotter circuit -------------------------------------------------------------


def exp_i_theta(theta: float, op: PauliOperator, qubit_map=None) -> ir.CompositeInstruction:
    """First-order Trotter circuit for exp(i * theta * op).

    Exact (up to global phase) for a single word; first order in theta for
    sums. Per term: basis changes into Z (H for X, an Rx(pi/2) pair for Y),
    a CNOT ladder up the sorted support, Rz(-2 * theta * c) on the highest
    qubit, then the mirror. Identity terms only shift global phase and
    emit nothing.
    """
    if not op.is_hermitian():
        raise NonHermitianGenerator(
            "exp_i_theta needs real coefficients (Hermitian generator)"
        )
    comp = ir.CompositeInstruction(name="exp_i_theta")
    for word, coeff in op.term_list():
        if not word:
            continue
        c = coeff.real
        qubits = [q for q, _ in word]
        mapped = [qubit_map[q] if qubit_map else q for q in qubits]
        pre: list[ir.Instruction] = []
        post: list[ir.Instruction] = []
        for (q, letter), mq in zip(word, mapped):
            if letter == "X":
                pre.append(ir.Instruction("H", (mq,)))
                post.append(ir.Instruction("H", (mq,)))
            elif letter == "Y":
                pre.append(ir.Instruction("Rx", (mq,), (math.pi / 2,)))
                post.append(ir.Instruction("Rx", (mq,), (-math.pi / 2,)))
        ladder = [
            ir.Instruction("CX", (mapped[i], mapped[i + 1])) for i in range(len(mapped) - 1)
        ]
        comp.children.extend(pre)
        comp.children.extend(ladder)
        comp.children.append(ir.Instruction("Rz", (mapped[-1],), (-2.0 * theta * c,)))
        comp.children.extend(reversed(ladder))
        comp.children.extend(reversed(post))
    return comp
