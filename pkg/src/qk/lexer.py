"""Tokenizer for the kernel dialect.

Indentation is significant: synthetic indent/dedent tokens are derived
from column changes, CPython-style (a dedent must land on a previously
opened column). Only spaces may indent. Newlines are suppressed inside
brackets, so calls may span lines.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import KernelIndentationError, KernelSyntaxError, TabSpaceMixError, UnterminatedString

KEYWORDS = frozenset(
    {"def", "for", "in", "if", "elif", "else", "with", "as", "pass", "True", "False"}
)

# Longest first so two-char operators win.
_OPERATORS = ["==", "!=", "<=", ">=", "(", ")", "[", "]", ",", ":", ".", "=", "<", ">", "+", "-", "*", "/"]


@dataclass(frozen=True)
class Token:
    kind: str  # identifier|keyword|number|string|operator|newline|indent|dedent
    text: str
    line: int
    column: int

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.column})"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    indents = [1]
    depth = 0  # bracket nesting
    lines = source.split("\n")

    for lineno, raw in enumerate(lines, start=1):
        # Strip comments outside of strings.
        line = _strip_comment(raw, lineno)
        if depth == 0:
            stripped = line.strip()
            if not stripped:
                continue
            col = _indent_column(line, lineno)
            if col > indents[-1]:
                indents.append(col)
                tokens.append(Token("indent", "", lineno, col))
            else:
                while col < indents[-1]:
                    indents.pop()
                    tokens.append(Token("dedent", "", lineno, col))
                if col != indents[-1]:
                    raise KernelIndentationError(
                        "dedent does not match any outer block", lineno, col
                    )
        depth = _lex_line(line, lineno, tokens, depth)
        if depth == 0 and tokens and tokens[-1].kind not in ("newline", "indent", "dedent"):
            tokens.append(Token("newline", "", lineno, len(line) + 1))

    if depth != 0:
        raise KernelSyntaxError("unclosed bracket at end of input", len(lines), 1)
    while len(indents) > 1:
        indents.pop()
        tokens.append(Token("dedent", "", len(lines), 1))
    return tokens


def _strip_comment(line: str, lineno: int) -> str:
    in_str: str | None = None
    i = 0
    while i < len(line):
        ch = line[i]
        if in_str:
            if ch == "\\":
                i += 2
                continue
            if ch == in_str:
                in_str = None
        elif ch in "'\"":
            in_str = ch
        elif ch == "#":
            return line[:i]
        i += 1
    return line


def _indent_column(line: str, lineno: int) -> int:
    i = 0
    while i < len(line) and line[i] in " \t":
        if line[i] == "\t":
            raise TabSpaceMixError("tab in indentation; use spaces", lineno, i + 1)
        i += 1
    return i + 1


def _lex_line(line: str, lineno: int, tokens: list[Token], depth: int) -> int:
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch in " \t":
            i += 1
            continue
        col = i + 1
        if ch.isdigit() or (ch == "." and i + 1 < n and line[i + 1].isdigit()):
            j = i
            seen_dot = False
            seen_exp = False
            while j < n:
                c = line[j]
                if c.isdigit():
                    j += 1
                elif c == "." and not seen_dot and not seen_exp:
                    seen_dot = True
                    j += 1
                elif c in "eE" and not seen_exp and j > i:
                    if j + 1 < n and (line[j + 1].isdigit() or line[j + 1] in "+-"):
                        seen_exp = True
                        seen_dot = True
                        j += 2 if line[j + 1] in "+-" else 1
                    else:
                        break
                else:
                    break
            tokens.append(Token("number", line[i:j], lineno, col))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (line[j].isalnum() or line[j] == "_"):
                j += 1
            text = line[i:j]
            kind = "keyword" if text in KEYWORDS else "identifier"
            tokens.append(Token(kind, text, lineno, col))
            i = j
        elif ch in "'\"":
            j = i + 1
            buf = []
            while j < n and line[j] != ch:
                if line[j] == "\\" and j + 1 < n:
                    esc = line[j + 1]
                    buf.append({"n": "\n", "t": "\t", "\\": "\\", "'": "'", '"': '"'}.get(esc, esc))
                    j += 2
                else:
                    buf.append(line[j])
                    j += 1
            if j >= n:
                raise UnterminatedString("unterminated string literal", lineno, col)
            tokens.append(Token("string", "".join(buf), lineno, col))
            i = j + 1
        else:
            for op in _OPERATORS:
                if line.startswith(op, i):
                    if op in "([":
                        depth += 1
                    elif op in ")]":
                        depth = max(0, depth - 1)
                    tokens.append(Token("operator", op, lineno, col))
                    i += len(op)
                    break
            else:
                raise KernelSyntaxError(f"unexpected character {ch!r}", lineno, col)
    return depth
