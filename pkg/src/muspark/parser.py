"""Tokenizer and recursive-descent parser for the concrete muSPARK syntax.

The grammar is shipped in ``docs/grammar.ebnf``.
"""
from __future__ import annotations

import dataclasses as dc
import enum
from typing import Optional

from .syntax import (
    DEREF, SCALARS, Access, AddressOf, Alloc, Assign, BinOp, BoolLit, Call,
    Expr, FieldDecl, If, IntLit, Local, Mode, Named, Null, Param, Path, PathRef,
    ProcDecl, Program, RealLit, RecordDecl, Span, Stmt, Type, While,
    number_statements,
)


class TokenKind(enum.Enum):
    IDENT = "identifier"
    INT = "integer literal"
    REAL = "real literal"
    KEYWORD = "keyword"
    PUNCT = "punctuation"
    TICK = "tick"
    EOF = "end of input"


KEYWORDS = frozenset({
    "type", "is", "record", "end", "access", "procedure", "in", "out",
    "begin", "if", "then", "else", "while", "loop", "new", "null", "all",
    "and", "or", "true", "false", "True", "False",
})

# longest match first
PUNCTUATION = (":=", "/=", "<=", ">=", "(", ")", ";", ",", ":", ".", "+", "-",
               "*", "/", "<", ">", "=")


@dc.dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    span: Span

    def __str__(self) -> str:
        if self.kind is TokenKind.EOF:
            return "end of input"
        return f"{self.kind.value} '{self.lexeme}'"


class ParseError(Exception):
    def __init__(self, span: Span, expected: str, found: str):
        super().__init__(f"expected {expected}, found {found}")
        self.span = span
        self.expected = expected
        self.found = found

    @property
    def code(self) -> str:
        return "parse-error"


class LexError(ParseError):
    @property
    def code(self) -> str:
        return "lex-error"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def span(length: int) -> Span:
        return Span(line, col, line, col + length)

    while i < n:
        c = source[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r\f":
            i, col = i + 1, col + 1
            continue
        if source.startswith("--", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c.isascii() and c.isalpha():
            j = i + 1
            while j < n and source[j].isascii() and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            if tokens and tokens[-1].kind is TokenKind.TICK and word == "Access":
                kind = TokenKind.KEYWORD
            elif word in KEYWORDS:
                kind = TokenKind.KEYWORD
            else:
                kind = TokenKind.IDENT
            tokens.append(Token(kind, word, span(j - i)))
        elif c.isascii() and c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            kind = TokenKind.INT
            if j + 1 < n and source[j] == "." and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
                kind = TokenKind.REAL
            if j < n and source[j].isascii() and (source[j].isalpha() or source[j] == "_"):
                raise LexError(span(j - i + 1), "a numeric literal",
                               f"malformed literal '{source[i:j + 1]}'")
            tokens.append(Token(kind, source[i:j], span(j - i)))
        elif c == "'":
            j = i + 1
            tokens.append(Token(TokenKind.TICK, "'", span(1)))
        else:
            for p in PUNCTUATION:
                if source.startswith(p, i):
                    j = i + len(p)
                    tokens.append(Token(TokenKind.PUNCT, p, span(len(p))))
                    break
            else:
                raise LexError(span(1), "a token", f"unexpected character {c!r}")
        col += j - i
        i = j
    tokens.append(Token(TokenKind.EOF, "", Span(line, col, line, col)))
    return tokens


_RELOPS = ("<", "<=", ">", ">=", "=", "/=")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def at(self, *lexemes: str) -> bool:
        t = self.tok
        return t.kind in (TokenKind.KEYWORD, TokenKind.PUNCT) and t.lexeme in lexemes

    def advance(self) -> Token:
        t = self.tok
        if t.kind is not TokenKind.EOF:
            self.pos += 1
        return t

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            raise ParseError(self.tok.span, f"'{lexeme}'", str(self.tok))
        return self.advance()

    def accept(self, lexeme: str) -> bool:
        if self.at(lexeme):
            self.advance()
            return True
        return False

    def ident(self) -> Token:
        if self.tok.kind is not TokenKind.IDENT:
            raise ParseError(self.tok.span, "identifier", str(self.tok))
        return self.advance()

    def span_from(self, start: Token) -> Span:
        end = self.tokens[self.pos - 1].span if self.pos else start.span
        return Span(start.span.line, start.span.col, end.end_line, end.end_col)

    # -- declarations --------------------------------------------------
    def program(self) -> Program:
        records, procs = [], []
        while self.at("type"):
            records.append(self.record())
        while self.at("procedure"):
            procs.append(self.procedure())
        if self.tok.kind is not TokenKind.EOF:
            raise ParseError(self.tok.span, "'type' or 'procedure'", str(self.tok))
        return number_statements(Program(tuple(records), tuple(procs)))

    def record(self) -> RecordDecl:
        start = self.expect("type")
        name = self.ident().lexeme
        self.expect("is")
        self.expect("record")
        fields = []
        while not self.at("end"):
            for tok, t in self.typed_names():
                fields.append(FieldDecl(tok.lexeme, t, tok.span))
            self.expect(";")
        self.expect("end")
        self.expect("record")
        self.expect(";")
        return RecordDecl(name, tuple(fields), self.span_from(start))

    def typed_names(self) -> list[tuple[Token, Type]]:
        names = [self.ident()]
        while self.accept(","):
            names.append(self.ident())
        self.expect(":")
        t = self.type()
        return [(n, t) for n in names]

    def type(self) -> Type:
        if self.accept("access"):
            return Access(self.type())
        name = self.ident().lexeme
        return SCALARS.get(name) or Named(name)

    def mode(self) -> Mode:
        if self.accept("in"):
            return Mode.IN_OUT if self.accept("out") else Mode.IN
        if self.accept("out"):
            return Mode.OUT
        return Mode.IN

    def procedure(self) -> ProcDecl:
        start = self.expect("procedure")
        name = self.ident().lexeme
        params: list[Param] = []
        if self.accept("("):
            while True:
                names = [self.ident()]
                while self.accept(","):
                    names.append(self.ident())
                self.expect(":")
                mode = self.mode()
                t = self.type()
                params.extend(Param(n.lexeme, mode, t, n.span) for n in names)
                if not self.accept(";"):
                    break
            self.expect(")")
        self.expect("is")
        locals_: list[Local] = []
        inits: list[Stmt] = []
        while not self.at("begin"):
            decl_start = self.tok
            typed = self.typed_names()
            init: Optional[Expr] = self.expr() if self.accept(":=") else None
            self.expect(";")
            for tok, t in typed:
                locals_.append(Local(tok.lexeme, t, tok.span))
                if init is not None:
                    # an initializer is sugar for a leading assignment
                    inits.append(Assign(Path(tok.lexeme), init, self.span_from(decl_start)))
        self.expect("begin")
        body = self.stmts()
        self.expect("end")
        if self.tok.kind is TokenKind.IDENT:
            end_name = self.advance()
            if end_name.lexeme != name:
                raise ParseError(end_name.span, f"'{name}'", str(end_name))
        self.expect(";")
        return ProcDecl(name, tuple(params), tuple(locals_), tuple(inits) + body,
                        self.span_from(start))

    # -- statements ----------------------------------------------------
    def stmts(self) -> tuple[Stmt, ...]:
        out = []
        while not self.at("end", "else") and self.tok.kind is not TokenKind.EOF:
            out.append(self.stmt())
        return tuple(out)

    def stmt(self) -> Stmt:
        start = self.tok
        if self.accept("if"):
            cond = self.expr()
            self.expect("then")
            then = self.stmts()
            orelse = self.stmts() if self.accept("else") else ()
            self.expect("end")
            self.expect("if")
            self.expect(";")
            return If(cond, then, orelse, self.span_from(start))
        if self.accept("while"):
            cond = self.expr()
            self.expect("loop")
            body = self.stmts()
            self.expect("end")
            self.expect("loop")
            self.expect(";")
            return While(cond, body, self.span_from(start))
        if self.tok.kind is TokenKind.IDENT and self.peek().lexeme in ("(", ";"):
            name = self.advance().lexeme
            args: list[Expr] = []
            if self.accept("("):
                if not self.at(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
            self.expect(";")
            return Call(name, tuple(args), self.span_from(start))
        if self.tok.kind is not TokenKind.IDENT:
            raise ParseError(self.tok.span, "statement", str(self.tok))
        lhs = self.path()
        self.expect(":=")
        if self.accept("new"):
            t = self.type()
            self.expect(";")
            return Alloc(lhs, t, self.span_from(start))
        rhs = self.expr()
        self.expect(";")
        return Assign(lhs, rhs, self.span_from(start))

    def path(self) -> Path:
        segs = []
        root = self.ident().lexeme
        while self.accept("."):
            if self.accept("all"):
                segs.append(DEREF)
            else:
                segs.append(self.ident().lexeme)
        return Path(root, tuple(segs))

    # -- expressions ---------------------------------------------------
    def expr(self) -> Expr:
        return self.binary(("or",), self.and_expr)

    def and_expr(self) -> Expr:
        return self.binary(("and",), self.relation)

    def relation(self) -> Expr:
        start = self.tok
        left = self.additive()
        if self.at(*_RELOPS):
            op = self.advance().lexeme
            right = self.additive()
            left = BinOp(op, left, right, self.span_from(start))
        return left

    def additive(self) -> Expr:
        return self.binary(("+", "-"), self.term)

    def term(self) -> Expr:
        return self.binary(("*", "/"), self.primary)

    def binary(self, ops: tuple[str, ...], operand) -> Expr:
        start = self.tok
        left = operand()
        while self.at(*ops):
            op = self.advance().lexeme
            left = BinOp(op, left, operand(), self.span_from(start))
        return left

    def primary(self) -> Expr:
        t = self.tok
        if t.kind is TokenKind.INT:
            self.advance()
            return IntLit(int(t.lexeme), t.span)
        if t.kind is TokenKind.REAL:
            self.advance()
            return RealLit(float(t.lexeme), t.span)
        if self.at("true", "True", "false", "False"):
            self.advance()
            return BoolLit(t.lexeme.lower() == "true", t.span)
        if self.accept("null"):
            return Null(t.span)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind is TokenKind.IDENT:
            p = self.path()
            if self.tok.kind is TokenKind.TICK:
                self.advance()
                self.expect("Access")
                return AddressOf(p, self.span_from(t))
            return PathRef(p, self.span_from(t))
        raise ParseError(t.span, "expression", str(t))


def parse_program(tokens: list[Token]) -> Program:
    return _Parser(tokens).program()


def parse(source: str) -> Program:
    return parse_program(tokenize(source))


def parse_expr(source: str) -> Expr:
    p = _Parser(tokenize(source))
    e = p.expr()
    if p.tok.kind is not TokenKind.EOF:
        raise ParseError(p.tok.span, "end of input", str(p.tok))
    return e
