import pytest
from conftest import CORPUS, LIST_DECL, corpus_program
from hypothesis import given, settings
from hypothesis import strategies as st

from muspark.fuzz import GenConfig, generate_program
from muspark.parser import LexError, ParseError, TokenKind, parse, parse_expr, tokenize
from muspark.printer import format_expr, pretty_print
from muspark.syntax import (
    BOOLEAN, INTEGER, Access, AddressOf, Alloc, Assign, BinOp, BoolLit, Call, If,
    IntLit, Mode, Named, Null, Path, PathRef, RealLit, While,
)


def kinds(source):
    return [(t.kind, t.lexeme) for t in tokenize(source)][:-1]


def test_tokenize_assignment():
    K, I, P = TokenKind.KEYWORD, TokenKind.IDENT, TokenKind.PUNCT
    assert kinds("A.Key.all := 42;") == [
        (I, "A"), (P, "."), (I, "Key"), (P, "."), (K, "all"), (P, ":="),
        (TokenKind.INT, "42"), (P, ";")]


def test_tokenize_strips_comments():
    assert kinds("-- comment\nnull") == [(TokenKind.KEYWORD, "null")]


def test_tokenize_access_attribute():
    assert kinds("X'Access") == [(TokenKind.IDENT, "X"), (TokenKind.TICK, "'"),
                                 (TokenKind.KEYWORD, "Access")]


def test_tokenize_tracks_positions():
    toks = tokenize("A :=\n  B;")
    assert [(t.span.line, t.span.col) for t in toks[:4]] == [(1, 1), (1, 3), (2, 3), (2, 4)]


@pytest.mark.parametrize("source", ["A := #;", "A @ B"])
def test_lex_errors(source):
    with pytest.raises(LexError) as e:
        tokenize(source)
    assert e.value.code == "lex-error"


@pytest.mark.parametrize("source", ["A := 1.;", "X'Size"])
def test_lexable_but_malformed(source):
    with pytest.raises(ParseError):
        parse(f"procedure Main is begin {source} end Main;")


def test_parse_swap():
    program = parse(LIST_DECL + """
procedure Swap (X, Y : in out List) is
   Temp : List := Y;
begin
   Y := X;
   X := Temp;
end Swap;
procedure Main is begin end Main;
""")
    swap = program.procedure("Swap")
    assert [p.mode for p in swap.params] == [Mode.IN_OUT, Mode.IN_OUT]
    assert len(swap.locals) == 1
    # the initializer becomes the first of three assignments
    assert [type(s) for s in swap.body] == [Assign, Assign, Assign]
    assert swap.body[0] == Assign(Path("Temp"), PathRef(Path("Y")))
    assert [s.sid for s in swap.body] == [1, 2, 3]


def test_parse_record():
    program = parse("type List is record Flag : Boolean; Key : access Integer; "
                    "Next : access List; end record; procedure Main is begin end Main;")
    rec = program.record("List")
    assert [(f.name, f.type) for f in rec.fields] == [
        ("Flag", BOOLEAN), ("Key", Access(INTEGER)), ("Next", Access(Named("List")))]


def test_parse_empty_main():
    program = parse("procedure Main is begin end Main;")
    assert program.procedure("Main").body == () and program.records == ()


def test_parse_statements():
    program = parse(LIST_DECL + """
procedure Main is
   P : access List;
   N : Integer;
begin
   P := new List;
   if N < 3 and not_a_keyword = 0 then N := 1; else P := null; end if;
   while N > 0 loop N := N - 1; end loop;
   Main;
end Main;
""".replace("not_a_keyword", "N"))
    body = program.procedure("Main").body
    assert body[0] == Alloc(Path("P"), Named("List"))
    assert isinstance(body[1], If) and body[1].orelse == (Assign(Path("P"), Null()),)
    assert isinstance(body[2], While)
    assert body[3] == Call("Main", ())
    assert [s.sid for s in body] == [1, 2, 5, 7]


def test_default_mode_is_in():
    program = parse("procedure P (A : Integer) is begin end P; procedure Main is begin end Main;")
    assert program.procedure("P").params[0].mode is Mode.IN


def test_expression_precedence():
    e = parse_expr("A + B * 2 < 7 or C and D")
    assert e == BinOp("or",
                      BinOp("<", BinOp("+", PathRef(Path("A")),
                                       BinOp("*", PathRef(Path("B")), IntLit(2))), IntLit(7)),
                      BinOp("and", PathRef(Path("C")), PathRef(Path("D"))))
    assert parse_expr("X'Access") == AddressOf(Path("X"))
    assert parse_expr("True") == BoolLit(True) == parse_expr("true")
    assert parse_expr("2.5") == RealLit(2.5)


def test_subtraction_is_left_associative():
    e = parse_expr("1 - 2 - 3")
    assert e == BinOp("-", BinOp("-", IntLit(1), IntLit(2)), IntLit(3))
    assert format_expr(BinOp("-", IntLit(1), BinOp("-", IntLit(2), IntLit(3)))) == "1 - (2 - 3)"


@pytest.mark.parametrize("source, expected", [
    ("procedure Main is begin X := ; end Main;", "expression"),
    ("procedure Main is begin end Other;", "Main"),
    ("procedure Main is begin A < B < C; end Main;", None),
    ("type T is record end; procedure Main is begin end Main;", None),
])
def test_parse_errors(source, expected):
    with pytest.raises(ParseError) as e:
        parse(source)
    assert e.value.code == "parse-error"
    if expected:
        assert expected in str(e.value)


def test_empty_main_prints_canonically():
    assert pretty_print(parse("procedure Main is begin end Main;")) == \
        "procedure Main is\nbegin\nend Main;\n"


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.mus")), ids=lambda p: p.stem)
def test_corpus_round_trip(path):
    program = corpus_program(path.stem)
    text = pretty_print(program)
    assert parse(text) == program
    assert pretty_print(parse(text)) == text


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.booleans())
def test_generated_round_trip(seed, guided):
    program = generate_program(GenConfig(seed=seed, guided=guided))
    assert parse(pretty_print(program)) == program
