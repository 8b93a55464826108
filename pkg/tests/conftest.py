import sys
from pathlib import Path

import pytest

from muspark.parser import parse
from muspark.typecheck import check_program

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
sys.path.insert(0, str(Path(__file__).resolve().parent))

LIST_DECL = """
type List is record
   Flag : Boolean;
   Key  : access Integer;
   Next : access List;
end record;
"""


def corpus_source(name: str) -> str:
    return (CORPUS / f"{name}.mus").read_text()


def corpus_program(name: str):
    return parse(corpus_source(name))


def scope(decls: str, proc_header: str, body: str = ""):
    """Parse ``decls`` plus one procedure and an empty Main; return the
    program and the type environment of the procedure."""
    name = proc_header.split()[1]
    source = f"{decls}\n{proc_header}\nbegin\n{body}\nend {name};\n\nprocedure Main is\nbegin\nend Main;\n"
    program = parse(source)
    return program, check_program(program)[name]


@pytest.fixture
def list_scope():
    """A scope with every kind of List variable used by the examples."""
    return scope(LIST_DECL,
                 "procedure T (A, B : in out List; P, Q : in out access List; "
                 "R : in out access Boolean; X : in out access Integer) is")
