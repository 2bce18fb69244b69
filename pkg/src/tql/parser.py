"""Lexer and recursive-descent parser for the query language.

Precedence, tightest first: signature application `C : {sig}`, function
application (SELECT/FILTER/UNION/DIFF/PROD/JOIN and their operands), AND and
NAND, OR, then assignment (right-associative, lowest).  Signatures and row
predicates follow NOT > AND > OR.  Comparison binds looser than arithmetic,
and `*` `/` bind tighter than `+` `-`.  Parentheses group everywhere.

All spans are byte offsets into the UTF-8 encoding of the input, half-open.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .ast import (
    Assign, Attr, BinOp, Cmp, Col, ColStar, CollAnd, CollNand, CollOr,
    CollectionExpr, Diff, Exists, Expr, Filter, Forall, Ident, Join, Lit,
    PfKey, PredAnd, PredNot, PredOr, Prod, QueryAst, Restrict, RowPred,
    Select, SigAnd, SigNot, SigOr, Signature, Siml, Src, Union,
    RESERVED_WORDS, is_identifier,
)

_MAX_DEPTH = 80


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    STRING = "string"
    NUMBER = "number"
    PUNCT = "punctuation"
    CMP = "comparison"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    span: tuple[int, int]
    value: object = field(default=None, compare=False)


class ParseError(Exception):
    """Syntax error with a byte span into the original input."""

    def __init__(self, message: str, span: tuple[int, int] = (0, 0), expected: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.span = span
        self.expected = expected

    def __str__(self) -> str:
        tail = f" (expected {self.expected})" if self.expected else ""
        return f"{self.message} at bytes {self.span[0]}..{self.span[1]}{tail}"


_IDENT_START = re.compile(r"[A-Za-z_]")
_IDENT_BODY = re.compile(r"[A-Za-z0-9_]*")
_NUMBER = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?")

_UNICODE_CMP = {"≥": ">=", "≤": "<=", "≠": "!="}
_UNICODE_ARITH = {"×": "*", "÷": "/", "−": "-"}
_SINGLE_PUNCT = set(";:{}[](),+-*/")


def _blen(ch: str) -> int:
    return len(ch.encode("utf-8", "surrogatepass"))


def lex(source: str) -> list[Token]:
    """Tokenize; raises ParseError on an illegal character or an unterminated
    string.  Keywords are case-sensitive uppercase, and COL* is one token."""
    toks: list[Token] = []
    i, b = 0, 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            b += _blen(ch)
            continue
        if _IDENT_START.match(ch):
            m = _IDENT_BODY.match(source, i + 1)
            j = m.end()
            word = source[i:j]
            if word == "COL" and j < n and source[j] == "*":
                word, j = "COL*", j + 1
            kind = TokenKind.KEYWORD if word in RESERVED_WORDS else TokenKind.IDENT
            b2 = b + len(word)  # ASCII lexeme
            toks.append(Token(kind, word, (b, b2), word))
            i, b = j, b2
            continue
        if "0" <= ch <= "9":
            m = _NUMBER.match(source, i)
            assert m is not None
            word = m.group()
            b2 = b + len(word)
            if "." in word or "e" in word or "E" in word:
                value: object = float(word)
                if math.isinf(value):
                    raise ParseError(f"numeric literal out of range: {word}", (b, b2))
            else:
                value = int(word)
            toks.append(Token(TokenKind.NUMBER, word, (b, b2), value))
            i, b = m.end(), b2
            continue
        if ch == '"':
            start_i, start_b = i, b
            i += 1
            b += 1
            parts: list[str] = []
            while True:
                if i >= n:
                    raise ParseError("unterminated string literal", (start_b, b))
                c = source[i]
                if c == '"':
                    i += 1
                    b += 1
                    break
                if c == "\\":
                    if i + 1 >= n:
                        raise ParseError("unterminated string literal", (start_b, b + 1))
                    esc = source[i + 1]
                    if esc not in ('"', "\\"):
                        raise ParseError(
                            f"unknown escape sequence \\{esc}", (b, b + 1 + _blen(esc))
                        )
                    parts.append(esc)
                    i += 2
                    b += 1 + _blen(esc)
                    continue
                parts.append(c)
                i += 1
                b += _blen(c)
            text = "".join(parts)
            toks.append(Token(TokenKind.STRING, source[start_i:i], (start_b, b), text))
            continue
        two = source[i : i + 2]
        if two in ("<=", ">=", "!="):
            toks.append(Token(TokenKind.CMP, two, (b, b + 2), two))
            i += 2
            b += 2
            continue
        if ch in "<>=":
            toks.append(Token(TokenKind.CMP, ch, (b, b + 1), ch))
            i += 1
            b += 1
            continue
        if ch in _UNICODE_CMP:
            b2 = b + _blen(ch)
            toks.append(Token(TokenKind.CMP, ch, (b, b2), _UNICODE_CMP[ch]))
            i += 1
            b = b2
            continue
        if ch in _UNICODE_ARITH:
            b2 = b + _blen(ch)
            toks.append(Token(TokenKind.PUNCT, ch, (b, b2), _UNICODE_ARITH[ch]))
            i += 1
            b = b2
            continue
        if ch in _SINGLE_PUNCT:
            toks.append(Token(TokenKind.PUNCT, ch, (b, b + 1), ch))
            i += 1
            b += 1
            continue
        raise ParseError(f"illegal character {ch!r}", (b, b + _blen(ch)))
    return toks


class _Parser:
    def __init__(self, tokens: list[Token]):
        self._toks = tokens
        self._pos = 0
        self._depth = 0

    # --- plumbing ---

    def _peek(self, k: int = 0) -> Optional[Token]:
        i = self._pos + k
        return self._toks[i] if i < len(self._toks) else None

    def _advance(self) -> Token:
        tok = self._toks[self._pos]
        self._pos += 1
        return tok

    def _eof_span(self) -> tuple[int, int]:
        if self._toks:
            end = self._toks[-1].span[1]
            return (end, end)
        return (0, 0)

    def _here(self) -> tuple[int, int]:
        tok = self._peek()
        return tok.span if tok else self._eof_span()

    def _fail(self, message: str, expected: Optional[str] = None) -> None:
        raise ParseError(message, self._here(), expected)

    def _at(self, value: str, k: int = 0) -> bool:
        tok = self._peek(k)
        return tok is not None and tok.value == value and tok.kind in (
            TokenKind.PUNCT, TokenKind.CMP, TokenKind.KEYWORD,
        )

    def _eat(self, value: str, context: str) -> Token:
        if not self._at(value):
            got = self._peek()
            what = f"'{got.lexeme}'" if got else "end of input"
            self._fail(f"unexpected {what} in {context}", expected=f"'{value}'")
        return self._advance()

    def _descend(self) -> None:
        self._depth += 1
        if self._depth > _MAX_DEPTH:
            raise ParseError("expression nesting too deep", self._here())

    # --- queries ---

    def parse_query(self) -> QueryAst:
        if not self._toks:
            raise ParseError("empty query", (0, 0), expected="a statement")
        stmts = [self._collection()]
        while True:
            if self._at(";"):
                self._advance()
                if self._peek() is None:
                    break
                stmts.append(self._collection())
                continue
            if self._peek() is None:
                break  # final statement may omit its terminator
            self._fail("expected ';' between statements", expected="';'")
        return QueryAst(tuple(stmts))

    # --- collection expressions ---

    def _collection(self) -> CollectionExpr:
        tok = self._peek()
        if tok is not None and tok.kind is TokenKind.IDENT and self._at("=", k=1):
            name = self._advance().lexeme
            self._advance()
            return Assign(name, self._collection())
        return self._or_level()

    def _or_level(self) -> CollectionExpr:
        e = self._and_level()
        while True:
            tok = self._peek()
            if tok is not None and tok.kind is TokenKind.KEYWORD and tok.lexeme == "OR":
                self._advance()
                e = CollOr(e, self._and_level())
            else:
                return e

    def _and_level(self) -> CollectionExpr:
        e = self._postfix()
        while True:
            tok = self._peek()
            if tok is None or tok.kind is not TokenKind.KEYWORD:
                return e
            if tok.lexeme == "AND":
                nxt = self._peek(1)
                if nxt is not None and nxt.kind is TokenKind.KEYWORD and nxt.lexeme == "NOT":
                    self._advance()
                    self._advance()
                    e = CollNand(e, self._postfix())  # AND NOT reads as set minus
                else:
                    self._advance()
                    e = CollAnd(e, self._postfix())
            elif tok.lexeme == "NAND":
                self._advance()
                e = CollNand(e, self._postfix())
            else:
                return e

    def _postfix(self) -> CollectionExpr:
        e = self._primary()
        while self._at(":"):
            self._advance()
            self._eat("{", "signature application")
            if self._at("}"):
                self._fail("empty signature braces", expected="a signature")
            sig = self._sig_or()
            self._eat("}", "signature application")
            e = Restrict(e, sig)
        return e

    def _primary(self) -> CollectionExpr:
        self._descend()
        try:
            tok = self._peek()
            if tok is None:
                self._fail("unexpected end of input", expected="a collection expression")
            assert tok is not None
            if tok.kind is TokenKind.IDENT:
                self._advance()
                return Ident(tok.lexeme)
            if self._at("("):
                self._advance()
                e = self._collection()
                self._eat(")", "parenthesized expression")
                return e
            if tok.kind is TokenKind.KEYWORD:
                kw = tok.lexeme
                if kw == "SELECT":
                    self._advance()
                    self._eat("[", "SELECT column list")
                    cols = self._string_list()
                    self._eat("]", "SELECT column list")
                    return Select(tuple(cols), self._postfix())
                if kw == "FILTER":
                    self._advance()
                    self._eat("[", "FILTER predicate")
                    pred = self._pred_or()
                    self._eat("]", "FILTER predicate")
                    return Filter(pred, self._postfix())
                if kw in ("UNION", "DIFF", "PROD"):
                    self._advance()
                    a = self._postfix()
                    b = self._postfix()
                    cls = {"UNION": Union, "DIFF": Diff, "PROD": Prod}[kw]
                    return cls(a, b)
                if kw == "JOIN":
                    self._advance()
                    pred = None
                    if self._at("["):
                        self._advance()
                        pred = self._pred_or()
                        self._eat("]", "JOIN predicate")
                    a = self._postfix()
                    b = self._postfix()
                    return Join(pred, a, b)
            self._fail(f"unexpected '{tok.lexeme}'", expected="a collection expression")
            raise AssertionError("unreachable")
        finally:
            self._depth -= 1

    def _string_list(self) -> list[str]:
        items = [self._string_value("column name")]
        while self._at(","):
            self._advance()
            items.append(self._string_value("column name"))
        return items

    def _string_value(self, what: str) -> str:
        tok = self._peek()
        if tok is None or tok.kind is not TokenKind.STRING:
            self._fail(f"expected {what}", expected="a string literal")
        assert tok is not None
        if tok.value == "":
            raise ParseError(f"{what} must not be empty", tok.span)
        self._advance()
        return str(tok.value)

    # --- signatures ---

    def _sig_or(self) -> Signature:
        e = self._sig_and()
        while self._at("OR"):
            self._advance()
            e = SigOr(e, self._sig_and())
        return e

    def _sig_and(self) -> Signature:
        e = self._sig_not()
        while self._at("AND"):
            self._advance()
            e = SigAnd(e, self._sig_not())
        return e

    def _sig_not(self) -> Signature:
        self._descend()
        try:
            if self._at("NOT"):
                self._advance()
                return SigNot(self._sig_not())
            return self._sig_atom()
        finally:
            self._depth -= 1

    def _sig_atom(self) -> Signature:
        self._descend()
        try:
            if self._at("("):
                self._advance()
                e = self._sig_or()
                self._eat(")", "signature group")
                return e
            tok = self._peek()
            if tok is None or tok.kind is not TokenKind.KEYWORD:
                self._fail("expected a signature", expected="SRC, COL, COL*, SIML, PFKEY, FORALL, EXISTS or NOT")
            assert tok is not None
            kw = tok.lexeme
            if kw == "SRC":
                self._advance()
                self._eat("[", "SRC")
                name = self._name_value("SRC")
                self._eat("]", "SRC")
                return Src(name)
            if kw in ("COL", "COL*"):
                self._advance()
                self._eat("[", kw)
                s = self._string_value(f"{kw} name")
                self._eat("]", kw)
                return Col(s) if kw == "COL" else ColStar(s)
            if kw in ("SIML", "PFKEY"):
                self._advance()
                self._eat("[", kw)
                ident = self._ident_value(kw)
                self._eat("]", kw)
                return Siml(ident) if kw == "SIML" else PfKey(ident)
            if kw in ("FORALL", "EXISTS"):
                self._advance()
                self._eat("[", kw)
                pred = self._pred_or()
                self._eat("]", kw)
                return Forall(pred) if kw == "FORALL" else Exists(pred)
            self._fail(f"unexpected '{kw}' in signature", expected="a signature property")
            raise AssertionError("unreachable")
        finally:
            self._depth -= 1

    def _name_value(self, context: str) -> str:
        # bare identifiers are allowed where a table name is expected
        tok = self._peek()
        if tok is not None and tok.kind is TokenKind.IDENT:
            self._advance()
            return tok.lexeme
        return self._string_value(f"{context} name")

    def _ident_value(self, context: str) -> str:
        tok = self._peek()
        if tok is not None and tok.kind is TokenKind.IDENT:
            self._advance()
            return tok.lexeme
        if tok is not None and tok.kind is TokenKind.STRING and is_identifier(str(tok.value)):
            self._advance()
            return str(tok.value)
        self._fail(f"expected a collection identifier in {context}[...]", expected="an identifier")
        raise AssertionError("unreachable")

    # --- row predicates ---

    def _pred_or(self) -> RowPred:
        e = self._pred_and()
        while self._at("OR"):
            self._advance()
            e = PredOr(e, self._pred_and())
        return e

    def _pred_and(self) -> RowPred:
        e = self._pred_not()
        while self._at("AND"):
            self._advance()
            e = PredAnd(e, self._pred_not())
        return e

    def _pred_not(self) -> RowPred:
        self._descend()
        try:
            if self._at("NOT"):
                self._advance()
                return PredNot(self._pred_not())
            return self._pred_atom()
        finally:
            self._depth -= 1

    def _pred_atom(self) -> RowPred:
        self._descend()
        try:
            if self._at("("):
                # "(" may open an arithmetic group or a predicate group; try
                # the comparison reading first and fall back on failure
                snapshot = (self._pos, self._depth)
                try:
                    return self._cmp_tail()
                except ParseError:
                    self._pos, self._depth = snapshot
                self._advance()
                p = self._pred_or()
                self._eat(")", "predicate group")
                return p
            return self._cmp_tail()
        finally:
            self._depth -= 1

    def _cmp_tail(self) -> Cmp:
        e0 = self._expr_add()
        tok = self._peek()
        if tok is None or tok.kind is not TokenKind.CMP:
            self._fail("expected a comparison operator", expected=">=, >, <=, <, = or !=")
        assert tok is not None
        self._advance()
        e1 = self._expr_add()
        return Cmp(e0, str(tok.value), e1)

    # --- expressions ---

    def _expr_add(self) -> Expr:
        e = self._expr_mul()
        while True:
            tok = self._peek()
            if tok is not None and tok.kind is TokenKind.PUNCT and tok.value in ("+", "-"):
                self._advance()
                e = BinOp(e, str(tok.value), self._expr_mul())
            else:
                return e

    def _expr_mul(self) -> Expr:
        e = self._expr_atom()
        while True:
            tok = self._peek()
            if tok is not None and tok.kind is TokenKind.PUNCT and tok.value in ("*", "/"):
                self._advance()
                e = BinOp(e, str(tok.value), self._expr_atom())
            else:
                return e

    def _expr_atom(self) -> Expr:
        self._descend()
        try:
            tok = self._peek()
            if tok is None:
                self._fail("unexpected end of input", expected="an expression")
            assert tok is not None
            if tok.kind is TokenKind.NUMBER:
                self._advance()
                return Lit(tok.value)  # type: ignore[arg-type]
            if tok.kind is TokenKind.STRING:
                self._advance()
                return Lit(tok.value)  # type: ignore[arg-type]
            if tok.kind is TokenKind.PUNCT and tok.value == "-":
                nxt = self._peek(1)
                if nxt is not None and nxt.kind is TokenKind.NUMBER:
                    self._advance()
                    self._advance()
                    return Lit(-nxt.value)  # type: ignore[operator]
                self._fail("a '-' here must prefix a numeric literal", expected="a number")
            if tok.kind is TokenKind.IDENT:
                self._advance()
                self._eat("[", "attribute reference")
                col = self._string_value("attribute column")
                self._eat("]", "attribute reference")
                return Attr(tok.lexeme, col)
            if tok.kind is TokenKind.PUNCT and tok.value == "(":
                self._advance()
                e = self._expr_add()
                self._eat(")", "arithmetic group")
                return e
            self._fail(f"unexpected '{tok.lexeme}'", expected="an expression")
            raise AssertionError("unreachable")
        finally:
            self._depth -= 1


def parse(tokens: list[Token]) -> QueryAst:
    """Build a QueryAst from a token list; raises ParseError."""
    return _Parser(tokens).parse_query()


def parse_source(source: str) -> QueryAst:
    return parse(lex(source))
