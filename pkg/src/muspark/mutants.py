"""Deliberately weakened transformers.

Each mutant drops part of one transformer's effect. A campaign run under a
mutant should report failures; if it does not, the oracles are too weak to
notice that transformer.
"""
from __future__ import annotations

import contextlib
from typing import Callable, Iterator

from .permission import NO, W, AccessPolicy
from .syntax import Path


def _cut_root_only(self: AccessPolicy, p: Path) -> AccessPolicy:
    # p loses R but its extensions keep whatever they had
    self._node(p).perm = W
    return self


def _block_noop(self: AccessPolicy, p: Path) -> AccessPolicy:
    return self


def _borrow_path_only(self: AccessPolicy, p: Path) -> AccessPolicy:
    # prefixes keep their permissions, so a prefix can be lent again
    return self.fresh(p, NO)


MUTANTS: dict[str, tuple[str, Callable]] = {
    "cut": ("cut", _cut_root_only),
    "block": ("block", _block_noop),
    "borrow": ("borrow", _borrow_path_only),
}


@contextlib.contextmanager
def mutant(name: str) -> Iterator[None]:
    """Run the body with the named transformer replaced by its mutant."""
    try:
        attr, fn = MUTANTS[name]
    except KeyError:
        raise ValueError(f"unknown mutant {name!r}; choose from {', '.join(MUTANTS)}") from None
    original = getattr(AccessPolicy, attr)
    setattr(AccessPolicy, attr, fn)
    try:
        yield
    finally:
        setattr(AccessPolicy, attr, original)
