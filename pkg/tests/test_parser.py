import pytest
from hypothesis import given, strategies as st

from qk import kast, lexer
from qk.errors import (
    ComputeWithoutAction,
    FirstArgNotQreg,
    KernelSyntaxError,
    MissingAnnotation,
)
from qk.kast import (
    SFor,
    SGate,
    SIf,
    SKernelCall,
    SPrint,
    SWithAction,
    SWithCompute,
    SWithDecompose,
    classify_call,
    parse_kernel,
    parse_source,
    pretty,
)

from conftest import CORPUS, BELL_SRC, UCC1_SRC


def count_stmts(stmts):
    total = 0
    for s in stmts:
        total += 1
        for attr in ("body", "orelse"):
            total += count_stmts(getattr(s, attr, ()))
    return total


def test_bell_ast_shape():
    ast = parse_kernel(lexer.tokenize(BELL_SRC))
    assert ast.name == "bell"
    assert [type(s) for s in ast.body] == [SGate, SGate, SFor]
    assert ast.body[0].name == "H"
    assert ast.body[1].name == "CX"
    assert isinstance(ast.body[2].body[0], SGate)
    assert ast.body[2].body[0].name == "Measure"


def test_empty_kernel_legal():
    ast = parse_source("def k(q : qreg):\n")[0]
    assert ast.body == ()
    # canonical form uses pass and round-trips
    again = parse_source(pretty(ast))[0]
    assert again == ast


def test_ucc1_ast_shape():
    ucc1, kernel = parse_source(UCC1_SRC, known_kernels=set())
    assert [type(s) for s in ucc1.body] == [SWithCompute, SWithAction]
    assert count_stmts(ucc1.body[0].body) == 5
    assert sum(isinstance(s, SFor) for s in ucc1.body[0].body) == 2
    assert count_stmts(ucc1.body[1].body) == 1
    call = kernel.body[0]
    assert isinstance(call, SKernelCall) and call.modifier == "ctrl"


def test_missing_annotation():
    with pytest.raises(MissingAnnotation):
        parse_source("def k(q : qreg, x):\n    H(q[0])\n")


def test_first_arg_not_qreg():
    with pytest.raises(FirstArgNotQreg):
        parse_source("def k(x : float):\n    H(x)\n")
    with pytest.raises(FirstArgNotQreg):
        parse_source("def k():\n    pass\n")


def test_syntax_error_carries_position():
    with pytest.raises(KernelSyntaxError) as err:
        parse_source("def k(q : qreg):\n    H(q[0]\n")
    assert err.value.line is not None


def test_kernel_signature_annotation():
    ast = parse_source(
        "def k(q : qreg, o : KernelSignature(qreg, float)):\n    o(q, 0.5)\n"
    )[0]
    ann = ast.params[1][1]
    assert ann.base == "KernelSignature"
    assert [t.base for t in ann.sig] == ["qreg", "float"]
    assert isinstance(ast.body[0], SKernelCall) and ast.body[0].via_param


def test_list_annotations():
    ast = parse_source(
        "def k(q : qreg, xs : list[float], ops : List[PauliOperator]):\n    pass\n"
    )[0]
    assert ast.params[1][1].text() == "list[float]"
    assert ast.params[2][1].text() == "list[PauliOperator]"


def test_decompose_block():
    ast = parse_source(CORPUS["ccnot"])[0]
    dec = ast.body[0]
    assert isinstance(dec, SWithDecompose)
    assert dec.matrix_var == "m"
    assert dec.method is None
    assert len(dec.body) == 5


def test_decompose_with_method():
    ast = parse_source(
        "def k(q : qreg):\n    with decompose(q, kak) as u:\n        u = np.eye(4)\n"
    )[0]
    assert ast.body[0].method == "kak"


def test_print_statement():
    ast = parse_source('def k(q : qreg):\n    print("x=", 3)\n')[0]
    assert isinstance(ast.body[0], SPrint)


def test_gate_aliases_resolved():
    ast = parse_source("def k(q : qreg):\n    CNOT(q[0], q[1])\n    Mz(q[0])\n")[0]
    assert ast.body[0].name == "CX"
    assert ast.body[1].name == "Measure"


def test_measure_assignment():
    ast = parse_source("def k(q : qreg):\n    b = Measure(q[0])\n")[0]
    assert ast.body[0].assign_to == "b"


def test_gate_assignment_rejected():
    with pytest.raises(KernelSyntaxError):
        parse_source("def k(q : qreg):\n    b = H(q[0])\n")


def test_elif_chain():
    src = (
        "def k(q : qreg, x : int):\n"
        "    if x == 0:\n        H(q[0])\n"
        "    elif x == 1:\n        X(q[0])\n"
        "    else:\n        Z(q[0])\n"
    )
    ast = parse_source(src)[0]
    top = ast.body[0]
    assert isinstance(top, SIf)
    assert isinstance(top.orelse[0], SIf)
    assert parse_source(pretty(ast))[0] == ast


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_roundtrip_corpus(name):
    known: set = set()
    for ast in parse_source(CORPUS[name], known_kernels=known):
        text = pretty(ast)
        again = parse_source(text, known_kernels=known)[0]
        assert again == ast, f"{name}: {text}"
        known.add(ast.name)


def max_depth(stmts, depth=1):
    out = depth
    for s in stmts:
        for attr in ("body", "orelse"):
            inner = getattr(s, attr, ())
            if inner and not isinstance(s, SWithDecompose):
                out = max(out, max_depth(inner, depth + 1))
    return out


@pytest.mark.parametrize("name", sorted(set(CORPUS) - {"ccnot"}))
def test_nesting_depth_matches_indentation(name):
    known: set = set()
    for ast in parse_source(CORPUS[name], known_kernels=known):
        known.add(ast.name)
        text = pretty(ast)
        indent_cols = {
            (len(line) - len(line.lstrip())) // 4
            for line in text.splitlines()[1:]
            if line.strip()
        }
        assert max(indent_cols) == max_depth(ast.body)


def test_classify_call_examples():
    assert classify_call("CX", frozenset()) == "intrinsic"
    assert classify_call("c.adjoint", frozenset({"c"})) == "kernel-modifier"
    assert classify_call("print", frozenset()) == "classical"
    assert classify_call("Z.ctrl", frozenset()) == "intrinsic"
    assert classify_call("mystery", frozenset()) == "classical"
    assert classify_call("c", frozenset({"c"})) == "kernel"


@given(
    name=st.sampled_from(["CX", "H", "foo", "c", "c.adjoint", "print", "x.ctrl"]),
    registry=st.frozensets(st.sampled_from(["c", "foo", "k"])),
)
def test_classification_is_pure(name, registry):
    assert classify_call(name, registry) == classify_call(name, registry)


def test_forward_reference_is_classical():
    # calling a later-defined kernel stays a classical fall-through
    src = "def k1(q : qreg):\n    later(q)\n\ndef later(q : qreg):\n    H(q[0])\n"
    k1, later = parse_source(src)
    assert isinstance(k1.body[0], kast.SClassical)
