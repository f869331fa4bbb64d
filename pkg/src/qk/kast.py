"""Kernel AST: expression/statement node types, the parser and the
canonical pretty printer.

The pretty-printed form is the canonical rewritten source that gets
hashed by the JIT cache, so printing is deterministic and
``parse(pretty(parse(src)))`` is structurally equal to ``parse(src)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import gates, lexer
from .errors import (
    FirstArgNotQreg,
    KernelSyntaxError,
    MissingAnnotation,
)

SCALAR_TYPES = frozenset(
    {"qreg", "qubit", "int", "float", "bool", "PauliOperator", "IntRef", "FloatRef", "BoolRef"}
)
REF_TYPES = frozenset({"IntRef", "FloatRef", "BoolRef"})


@dataclass(frozen=True)
class TypeAnnotation:
    base: str
    elem: "TypeAnnotation | None" = None  # list element type
    sig: tuple = ()  # KernelSignature parameter types

    def text(self) -> str:
        if self.base == "list":
            return f"list[{self.elem.text()}]"
        if self.base == "KernelSignature":
            return f"KernelSignature({', '.join(t.text() for t in self.sig)})"
        return self.base


# -- expressions ---------------------------------------------------------------


@dataclass(frozen=True)
class EConst:
    value: object  # int | float | bool | str


@dataclass(frozen=True)
class EName:
    name: str


@dataclass(frozen=True)
class EBin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class EUn:
    op: str
    operand: object


@dataclass(frozen=True)
class ECmp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class EIndex:
    base: str
    index: object


@dataclass(frozen=True)
class ESlice:
    base: str
    lo: object
    hi: object


@dataclass(frozen=True)
class ESize:
    base: str


# -- statements ----------------------------------------------------------------


@dataclass(frozen=True)
class SGate:
    name: str  # canonical gate name
    args: tuple  # target expressions, then rotation angles per arity
    ctrl: object = None  # control expression for Gate.ctrl(...)
    adjoint: bool = False
    assign_to: str | None = None  # `x = Measure(...)`


@dataclass(frozen=True)
class SKernelCall:
    name: str
    modifier: str | None = None  # None | "ctrl" | "adjoint"
    ctrl: object = None
    args: tuple = ()
    via_param: bool = False  # call through a KernelSignature parameter


@dataclass(frozen=True)
class SClassical:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class SPrint:
    args: tuple = ()


@dataclass(frozen=True)
class SAssign:
    target: str
    expr: object


@dataclass(frozen=True)
class SFor:
    var: str
    range_args: tuple  # 1..3 expressions
    body: tuple = ()


@dataclass(frozen=True)
class SIf:
    cond: object
    body: tuple = ()
    orelse: tuple = ()  # elif chains become a nested SIf here


@dataclass(frozen=True)
class SWithCompute:
    body: tuple = ()


@dataclass(frozen=True)
class SWithAction:
    body: tuple = ()


# matrix mini-language of `with decompose` blocks


@dataclass(frozen=True)
class MEye:
    dim: object


@dataclass(frozen=True)
class MLit:
    rows: tuple  # tuple of tuples of scalar expressions


@dataclass(frozen=True)
class MRef:
    name: str


@dataclass(frozen=True)
class MAssign:
    var: str
    value: object  # MEye | MLit | MRef


@dataclass(frozen=True)
class MItemAssign:
    var: str
    row: object
    col: object
    value: object


@dataclass(frozen=True)
class SWithDecompose:
    target: object  # qreg expression
    method: str | None
    matrix_var: str
    body: tuple = ()  # matrix statements


@dataclass(frozen=True)
class KernelAST:
    name: str
    params: tuple  # ((name, TypeAnnotation), ...)
    body: tuple = ()


# -- call classification ---------------------------------------------------


def classify_call(name: str, registry_view: frozenset | set, gate_set=None) -> str:
    """Classify a call target: intrinsic | kernel | kernel-modifier | classical.

    ``name`` may carry a ``.ctrl`` / ``.adjoint`` suffix. Unknown names fall
    through to classical so they can be resolved (or rejected) at runtime.
    """
    base, dot, suffix = name.partition(".")
    is_known = base in registry_view
    is_gate = gates.is_gate_name(base) if gate_set is None else base in gate_set
    if dot and suffix in ("ctrl", "adjoint"):
        if is_gate or is_known:
            return "kernel-modifier" if is_known else "intrinsic"
        return "classical"
    if dot:
        return "classical"
    if is_gate:
        return "intrinsic"
    if is_known:
        return "kernel"
    return "classical"


# -- parser --------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[lexer.Token], known_kernels=frozenset()):
        self.tokens = tokens
        self.pos = 0
        self.known = set(known_kernels)
        self.params: dict[str, TypeAnnotation] = {}

    # token helpers

    def peek(self, ahead: int = 0) -> lexer.Token | None:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def next(self) -> lexer.Token:
        tok = self.peek()
        if tok is None:
            raise KernelSyntaxError("unexpected end of input")
        self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: str | None = None) -> lexer.Token:
        tok = self.peek()
        if tok is None or tok.kind != kind or (text is not None and tok.text != text):
            what = text or kind
            got = f"{tok.kind} {tok.text!r}" if tok else "end of input"
            line = tok.line if tok else None
            col = tok.column if tok else None
            raise KernelSyntaxError(f"expected {what}, got {got}", line, col)
        self.pos += 1
        return tok

    def skip_newlines(self):
        while self.at("newline"):
            self.pos += 1

    # grammar

    def parse_file(self) -> list[KernelAST]:
        # kernels become callable for later defs in the same file, matching
        # the define-before-use order of the JIT flow
        kernels = []
        self.skip_newlines()
        while self.peek() is not None:
            ast = self.parse_def()
            kernels.append(ast)
            self.known.add(ast.name)
            self.skip_newlines()
        return kernels

    def parse_def(self) -> KernelAST:
        self.expect("keyword", "def")
        name = self.expect("identifier").text
        self.expect("operator", "(")
        params = self.parse_params(name)
        self.expect("operator", ")")
        self.expect("operator", ":")
        self.params = dict(params)
        # the kernel's own name classifies as a kernel call so that direct
        # recursion surfaces as CyclicDependency at lowering, not as an
        # unresolved classical call at run time
        self.known.add(name)
        body = self.parse_block(allow_empty=True)
        self.params = {}
        return KernelAST(name, tuple(params), tuple(body))

    def parse_params(self, kernel_name: str):
        params: list[tuple[str, TypeAnnotation]] = []
        seen = set()
        while not self.at("operator", ")"):
            tok = self.expect("identifier")
            if tok.text in seen:
                raise KernelSyntaxError(f"duplicate parameter {tok.text!r}", tok.line, tok.column)
            seen.add(tok.text)
            if not self.at("operator", ":"):
                raise MissingAnnotation(
                    f"parameter {tok.text!r} of kernel {kernel_name!r} needs a type annotation"
                )
            self.next()
            ann = self.parse_type()
            params.append((tok.text, ann))
            if self.at("operator", ","):
                self.next()
        if not params or params[0][1].base != "qreg":
            raise FirstArgNotQreg(
                f"kernel {kernel_name!r}: first parameter must have type qreg"
            )
        for name, ann in params[1:]:
            if ann.base == "qreg":
                raise KernelSyntaxError(
                    f"kernel {kernel_name!r}: only the first parameter may be a qreg"
                )
        return params

    def parse_type(self) -> TypeAnnotation:
        tok = self.expect("identifier")
        name = tok.text
        if name in ("list", "List"):
            self.expect("operator", "[")
            elem = self.parse_type()
            self.expect("operator", "]")
            if elem.base not in ("float", "int", "PauliOperator"):
                raise KernelSyntaxError(
                    f"unsupported list element type {elem.text()!r}", tok.line, tok.column
                )
            return TypeAnnotation("list", elem=elem)
        if name == "KernelSignature":
            self.expect("operator", "(")
            sig = [self.parse_type()]
            while self.at("operator", ","):
                self.next()
                sig.append(self.parse_type())
            self.expect("operator", ")")
            if sig[0].base not in ("qreg", "qubit"):
                raise KernelSyntaxError(
                    "KernelSignature first parameter must be qreg or qubit",
                    tok.line,
                    tok.column,
                )
            return TypeAnnotation("KernelSignature", sig=tuple(sig))
        if name not in SCALAR_TYPES:
            raise KernelSyntaxError(f"unknown type {name!r}", tok.line, tok.column)
        return TypeAnnotation(name)

    def parse_block(self, allow_empty: bool = False) -> list:
        self.expect("newline")
        if allow_empty and not self.at("indent"):
            return []
        self.expect("indent")
        body = []
        while not self.at("dedent"):
            if self.at("newline"):
                self.next()
                continue
            if self.at("keyword", "pass"):
                self.next()
                self.expect("newline")
                continue
            body.append(self.parse_stmt())
        self.expect("dedent")
        return body

    def parse_stmt(self):
        if self.at("keyword", "for"):
            return self.parse_for()
        if self.at("keyword", "if"):
            return self.parse_if()
        if self.at("keyword", "with"):
            return self.parse_with()
        return self.parse_simple()

    def parse_for(self) -> SFor:
        self.expect("keyword", "for")
        var = self.expect("identifier").text
        self.expect("keyword", "in")
        rtok = self.expect("identifier")
        if rtok.text != "range":
            raise KernelSyntaxError(
                "for loops iterate over range(...) only", rtok.line, rtok.column
            )
        self.expect("operator", "(")
        args = [self.parse_expr()]
        while self.at("operator", ","):
            self.next()
            args.append(self.parse_expr())
        self.expect("operator", ")")
        if len(args) > 3:
            raise KernelSyntaxError("range takes at most 3 arguments", rtok.line, rtok.column)
        self.expect("operator", ":")
        body = self.parse_block()
        return SFor(var, tuple(args), tuple(body))

    def parse_if(self) -> SIf:
        tok = self.expect("keyword")  # if or elif
        cond = self.parse_expr()
        self.expect("operator", ":")
        body = self.parse_block()
        orelse: tuple = ()
        if self.at("keyword", "elif"):
            orelse = (self.parse_if(),)
        elif self.at("keyword", "else"):
            self.next()
            self.expect("operator", ":")
            orelse = tuple(self.parse_block())
        return SIf(cond, tuple(body), orelse)

    def parse_with(self):
        self.expect("keyword", "with")
        tok = self.expect("identifier")
        if tok.text == "compute":
            self.expect("operator", ":")
            return SWithCompute(tuple(self.parse_block()))
        if tok.text == "action":
            self.expect("operator", ":")
            return SWithAction(tuple(self.parse_block()))
        if tok.text == "decompose":
            return self.parse_decompose()
        raise KernelSyntaxError(
            f"unknown with-block {tok.text!r} (compute, action or decompose)",
            tok.line,
            tok.column,
        )

    def parse_decompose(self) -> SWithDecompose:
        self.expect("operator", "(")
        target = self.parse_expr()
        method = None
        if self.at("operator", ","):
            self.next()
            method = self.expect("identifier").text
        self.expect("operator", ")")
        self.expect("keyword", "as")
        var = self.expect("identifier").text
        self.expect("operator", ":")
        self.expect("newline")
        self.expect("indent")
        body = []
        while not self.at("dedent"):
            if self.at("newline"):
                self.next()
                continue
            body.append(self.parse_matrix_stmt(var))
        self.expect("dedent")
        return SWithDecompose(target, method, var, tuple(body))

    def parse_matrix_stmt(self, var: str):
        tok = self.expect("identifier")
        if tok.text != var:
            raise KernelSyntaxError(
                f"decompose block may only assign to {var!r}", tok.line, tok.column
            )
        if self.at("operator", "["):
            self.next()
            row = self.parse_expr()
            self.expect("operator", ",")
            col = self.parse_expr()
            self.expect("operator", "]")
            self.expect("operator", "=")
            value = self.parse_expr()
            self.expect("newline")
            return MItemAssign(var, row, col, value)
        self.expect("operator", "=")
        value = self.parse_matrix_expr()
        self.expect("newline")
        return MAssign(var, value)

    def parse_matrix_expr(self):
        if self.at("identifier", "np"):
            tok = self.next()
            self.expect("operator", ".")
            fn = self.expect("identifier")
            if fn.text != "eye":
                raise KernelSyntaxError(
                    f"only np.eye is supported here, not np.{fn.text}", fn.line, fn.column
                )
            self.expect("operator", "(")
            dim = self.parse_expr()
            self.expect("operator", ")")
            return MEye(dim)
        if self.at("operator", "["):
            self.next()
            rows = []
            while True:
                self.expect("operator", "[")
                row = [self.parse_expr()]
                while self.at("operator", ","):
                    self.next()
                    row.append(self.parse_expr())
                self.expect("operator", "]")
                rows.append(tuple(row))
                if self.at("operator", ","):
                    self.next()
                    continue
                break
            self.expect("operator", "]")
            return MLit(tuple(rows))
        tok = self.expect("identifier")
        return MRef(tok.text)

    def parse_simple(self):
        tok = self.peek()
        if tok is None:
            raise KernelSyntaxError("unexpected end of input")
        if tok.kind == "identifier" and tok.text == "print" and self._is(1, "operator", "("):
            self.next()
            args = self.parse_call_args()
            self.expect("newline")
            return SPrint(args)
        # assignment: NAME = ...
        if tok.kind == "identifier" and self._is(1, "operator", "="):
            target = self.next().text
            self.next()
            stmt = self.parse_assign_rhs(target)
            self.expect("newline")
            return stmt
        stmt = self.parse_call_stmt()
        self.expect("newline")
        return stmt

    def _is(self, ahead: int, kind: str, text: str) -> bool:
        tok = self.peek(ahead)
        return tok is not None and tok.kind == kind and tok.text == text

    def parse_assign_rhs(self, target: str):
        tok = self.peek()
        if (
            tok is not None
            and tok.kind == "identifier"
            and gates.is_gate_name(tok.text)
            and self._is(1, "operator", "(")
        ):
            name = gates.canonical_gate_name(tok.text)
            if name != "Measure":
                raise KernelSyntaxError(
                    f"gate {tok.text} has no return value", tok.line, tok.column
                )
            self.next()
            args = self.parse_call_args()
            return SGate(name, args, assign_to=target)
        return SAssign(target, self.parse_expr())

    def parse_call_stmt(self):
        tok = self.expect("identifier")
        name = tok.text
        modifier = None
        if self.at("operator", "."):
            self.next()
            mod = self.expect("identifier")
            if mod.text not in ("ctrl", "adjoint"):
                raise KernelSyntaxError(
                    f"unknown kernel modifier .{mod.text}", mod.line, mod.column
                )
            modifier = mod.text
        if not self.at("operator", "("):
            raise KernelSyntaxError(f"expected a call after {name!r}", tok.line, tok.column)
        args = self.parse_call_args()
        kind = classify_call(
            name if modifier is None else f"{name}.{modifier}", self.known
        )
        is_sig_param = (
            name in self.params and self.params[name].base == "KernelSignature"
        )
        if kind == "intrinsic":
            return self._gate_stmt(gates.canonical_gate_name(name), modifier, args, tok)
        if kind in ("kernel", "kernel-modifier") or is_sig_param:
            ctrl = None
            if modifier == "ctrl":
                if not args:
                    raise KernelSyntaxError(
                        f"{name}.ctrl needs a control argument", tok.line, tok.column
                    )
                ctrl, args = args[0], args[1:]
            return SKernelCall(name, modifier, ctrl, tuple(args), via_param=is_sig_param)
        full = name if modifier is None else f"{name}.{modifier}"
        return SClassical(full, args)

    def _gate_stmt(self, name: str, modifier: str | None, args: tuple, tok) -> SGate:
        if modifier == "ctrl":
            if len(args) < 2:
                raise KernelSyntaxError(
                    f"{name}.ctrl needs control and target arguments", tok.line, tok.column
                )
            return SGate(name, args[1:], ctrl=args[0])
        if modifier == "adjoint":
            return SGate(name, args, adjoint=True)
        return SGate(name, args)

    def parse_call_args(self) -> tuple:
        self.expect("operator", "(")
        args = []
        while not self.at("operator", ")"):
            args.append(self.parse_expr())
            if self.at("operator", ","):
                self.next()
        self.expect("operator", ")")
        return tuple(args)

    # expressions

    def parse_expr(self):
        left = self.parse_arith()
        tok = self.peek()
        if tok is not None and tok.kind == "operator" and tok.text in ("==", "!=", "<", ">", "<=", ">="):
            self.next()
            right = self.parse_arith()
            return ECmp(tok.text, left, right)
        return left

    def parse_arith(self):
        node = self.parse_term()
        while self.at("operator", "+") or self.at("operator", "-"):
            op = self.next().text
            node = EBin(op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_unary()
        while self.at("operator", "*") or self.at("operator", "/"):
            op = self.next().text
            node = EBin(op, node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.at("operator", "-"):
            self.next()
            return EUn("-", self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self):
        tok = self.peek()
        if tok is None:
            raise KernelSyntaxError("unexpected end of expression")
        if tok.kind == "number":
            self.next()
            return EConst(_parse_number(tok))
        if tok.kind == "string":
            self.next()
            return EConst(tok.text)
        if tok.kind == "keyword" and tok.text in ("True", "False"):
            self.next()
            return EConst(tok.text == "True")
        if tok.kind == "operator" and tok.text == "(":
            self.next()
            inner = self.parse_expr()
            self.expect("operator", ")")
            return inner
        if tok.kind != "identifier":
            raise KernelSyntaxError(
                f"unexpected token {tok.text!r} in expression", tok.line, tok.column
            )
        self.next()
        name = tok.text
        # whitelisted constant
        if name == "np" and self.at("operator", "."):
            self.next()
            attr = self.expect("identifier")
            if attr.text != "pi":
                raise KernelSyntaxError(
                    f"np.{attr.text} is not available in kernels", attr.line, attr.column
                )
            return EConst(math.pi)
        if self.at("operator", "."):
            self.next()
            attr = self.expect("identifier")
            if attr.text != "size":
                raise KernelSyntaxError(
                    f"unknown attribute .{attr.text} in expression", attr.line, attr.column
                )
            self.expect("operator", "(")
            self.expect("operator", ")")
            return ESize(name)
        if self.at("operator", "["):
            self.next()
            if self.at("operator", ":"):
                lo = EConst(0)
            else:
                lo = self.parse_expr()
            if self.at("operator", ":"):
                self.next()
                hi = None if self.at("operator", "]") else self.parse_expr()
                self.expect("operator", "]")
                return ESlice(name, lo, hi)
            self.expect("operator", "]")
            return EIndex(name, lo)
        if self.at("operator", "("):
            raise KernelSyntaxError(
                f"call to {name!r} cannot be used inside an expression", tok.line, tok.column
            )
        return EName(name)


def _parse_number(tok: lexer.Token):
    text = tok.text
    if "." in text or "e" in text or "E" in text:
        return float(text)
    return int(text)


def parse_kernel(tokens: list[lexer.Token], known_kernels=frozenset()) -> KernelAST:
    """Parse a single ``def`` from a token stream."""
    p = _Parser(tokens, known_kernels)
    p.skip_newlines()
    ast = p.parse_def()
    p.skip_newlines()
    if p.peek() is not None:
        tok = p.peek()
        raise KernelSyntaxError("trailing input after kernel", tok.line, tok.column)
    return ast


def parse_source(source: str, known_kernels=frozenset()) -> list[KernelAST]:
    """Parse a ``.qk`` source file: one or more kernels."""
    return _Parser(lexer.tokenize(source), known_kernels).parse_file()


# -- canonical pretty printer --------------------------------------------------

_PREC = {"cmp": 1, "+": 2, "-": 2, "*": 3, "/": 3, "u-": 4, "atom": 5}


def expr_text(e, parent_prec: int = 0) -> str:
    if isinstance(e, EConst):
        if isinstance(e.value, bool):
            return "True" if e.value else "False"
        if isinstance(e.value, str):
            return '"' + e.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
        return repr(e.value)
    if isinstance(e, EName):
        return e.name
    if isinstance(e, ESize):
        return f"{e.base}.size()"
    if isinstance(e, EIndex):
        return f"{e.base}[{expr_text(e.index)}]"
    if isinstance(e, ESlice):
        hi = expr_text(e.hi) if e.hi is not None else ""
        return f"{e.base}[{expr_text(e.lo)}:{hi}]"
    if isinstance(e, EUn):
        text = f"-{expr_text(e.operand, _PREC['u-'])}"
        return text if parent_prec <= _PREC["u-"] else f"({text})"
    if isinstance(e, EBin):
        prec = _PREC[e.op]
        text = f"{expr_text(e.left, prec)} {e.op} {expr_text(e.right, prec + 1)}"
        return text if prec >= parent_prec else f"({text})"
    if isinstance(e, ECmp):
        text = f"{expr_text(e.left, _PREC['cmp'] + 1)} {e.op} {expr_text(e.right, _PREC['cmp'] + 1)}"
        return text if _PREC["cmp"] >= parent_prec else f"({text})"
    raise TypeError(f"not an expression: {e!r}")


def _matrix_value_text(v) -> str:
    if isinstance(v, MEye):
        return f"np.eye({expr_text(v.dim)})"
    if isinstance(v, MRef):
        return v.name
    if isinstance(v, MLit):
        rows = ", ".join("[" + ", ".join(expr_text(x) for x in row) + "]" for row in v.rows)
        return f"[{rows}]"
    raise TypeError(f"not a matrix value: {v!r}")


def _stmt_lines(stmt, depth: int, lines: list[str]):
    pad = "    " * depth
    if isinstance(stmt, SGate):
        call = f"{stmt.name}({', '.join(expr_text(a) for a in stmt.args)})"
        if stmt.ctrl is not None:
            call = f"{stmt.name}.ctrl({', '.join(expr_text(a) for a in (stmt.ctrl,) + stmt.args)})"
        elif stmt.adjoint:
            call = f"{stmt.name}.adjoint({', '.join(expr_text(a) for a in stmt.args)})"
        if stmt.assign_to:
            call = f"{stmt.assign_to} = {call}"
        lines.append(pad + call)
    elif isinstance(stmt, SKernelCall):
        args = stmt.args if stmt.ctrl is None else (stmt.ctrl,) + stmt.args
        mod = f".{stmt.modifier}" if stmt.modifier else ""
        lines.append(pad + f"{stmt.name}{mod}({', '.join(expr_text(a) for a in args)})")
    elif isinstance(stmt, (SClassical, SPrint)):
        name = "print" if isinstance(stmt, SPrint) else stmt.name
        lines.append(pad + f"{name}({', '.join(expr_text(a) for a in stmt.args)})")
    elif isinstance(stmt, SAssign):
        lines.append(pad + f"{stmt.target} = {expr_text(stmt.expr)}")
    elif isinstance(stmt, SFor):
        rng = ", ".join(expr_text(a) for a in stmt.range_args)
        lines.append(pad + f"for {stmt.var} in range({rng}):")
        for s in stmt.body:
            _stmt_lines(s, depth + 1, lines)
    elif isinstance(stmt, SIf):
        _if_lines(stmt, depth, lines, "if")
    elif isinstance(stmt, SWithCompute):
        lines.append(pad + "with compute:")
        for s in stmt.body:
            _stmt_lines(s, depth + 1, lines)
    elif isinstance(stmt, SWithAction):
        lines.append(pad + "with action:")
        for s in stmt.body:
            _stmt_lines(s, depth + 1, lines)
    elif isinstance(stmt, SWithDecompose):
        method = f", {stmt.method}" if stmt.method else ""
        lines.append(pad + f"with decompose({expr_text(stmt.target)}{method}) as {stmt.matrix_var}:")
        for m in stmt.body:
            mpad = "    " * (depth + 1)
            if isinstance(m, MAssign):
                lines.append(mpad + f"{m.var} = {_matrix_value_text(m.value)}")
            else:
                lines.append(
                    mpad
                    + f"{m.var}[{expr_text(m.row)}, {expr_text(m.col)}] = {expr_text(m.value)}"
                )
    else:
        raise TypeError(f"not a statement: {stmt!r}")


def _if_lines(stmt: SIf, depth: int, lines: list[str], head: str):
    pad = "    " * depth
    lines.append(pad + f"{head} {expr_text(stmt.cond)}:")
    for s in stmt.body:
        _stmt_lines(s, depth + 1, lines)
    if len(stmt.orelse) == 1 and isinstance(stmt.orelse[0], SIf):
        _if_lines(stmt.orelse[0], depth, lines, "elif")
    elif stmt.orelse:
        lines.append(pad + "else:")
        for s in stmt.orelse:
            _stmt_lines(s, depth + 1, lines)


def pretty(ast: KernelAST) -> str:
    """Canonical source form; the digest is computed over this text."""
    params = ", ".join(f"{n}: {t.text()}" for n, t in ast.params)
    lines = [f"def {ast.name}({params}):"]
    if not ast.body:
        lines.append("    pass")
    for stmt in ast.body:
        _stmt_lines(stmt, 1, lines)
    return "\n".join(lines) + "\n"
