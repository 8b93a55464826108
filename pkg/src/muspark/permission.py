"""Permission lattice, lazily expanded access policies and their transformers.

An access policy maps every well-typed path of a procedure scope to a
permission. Recursive record types make that path space infinite, so a
policy is stored as one tree per variable whose unexpanded subtrees are
summarized by a descriptor:

``Uniform(p)``
    every strict descendant has permission ``p``;
``CutFrom(p)``
    the image of ``Uniform(p)`` under :meth:`AccessPolicy.cut`: near deep
    descendants have ``W``, near shallow ones ``p`` and far ones ``NO``.

Both descriptors are closed under one-level expansion, so transformers only
ever expand the nodes along the path they act on.
"""
from __future__ import annotations

import dataclasses as dc
import enum
from collections import deque
from typing import Callable, Iterator, Optional, Union

from .syntax import DEREF, AddressOf, BinOp, Expr, Null, Path, PathRef, Type
from .typecheck import NullType, TypeEnv


class Permission(enum.Enum):
    NO = 0
    R = 1
    W = 2
    RW = 3

    def __str__(self) -> str:
        return self.name

    def __and__(self, other: "Permission") -> "Permission":
        return Permission(self.value & other.value)

    def __le__(self, other: "Permission") -> bool:
        return self.value & other.value == self.value

    def __ge__(self, other: "Permission") -> bool:
        return other <= self

    def __lt__(self, other: "Permission") -> bool:
        return self != other and self <= other

    def __gt__(self, other: "Permission") -> bool:
        return other < self


RW, R, W, NO = Permission.RW, Permission.R, Permission.W, Permission.NO


def meet(a: Permission, b: Permission) -> Permission:
    return a & b


def leq(a: Permission, b: Permission) -> bool:
    return a <= b


@dc.dataclass(frozen=True)
class Uniform:
    perm: Permission


@dc.dataclass(frozen=True)
class CutFrom:
    perm: Permission


Descriptor = Union[Uniform, CutFrom]


class PermError(Exception):
    """A ``check`` premise failed."""

    def __init__(self, path: Path, required: Permission, actual: Permission,
                 transformer: str = "check"):
        super().__init__(f"path {path} requires {required}, has {actual}")
        self.path = path
        self.required = required
        self.actual = actual
        self.transformer = transformer


class PolicyInvariantError(Exception):
    """``block`` reached a field step whose prefix has exactly ``R``.

    Consistent policies never get there; seeing it means the policy was
    inconsistent before the transformer ran.
    """

    def __init__(self, path: Path):
        super().__init__(f"block: prefix {path} has permission R")
        self.path = path


class _Node:
    __slots__ = ("perm", "type", "desc", "children")

    def __init__(self, perm: Permission, type: Type, desc: Optional[Descriptor],
                 children: Optional[dict[str, "_Node"]] = None):
        self.perm = perm
        self.type = type
        self.desc = desc
        self.children = children

    def __repr__(self) -> str:
        if self.children is None:
            return f"<{self.perm} {self.desc}>"
        return f"<{self.perm} {self.children}>"


def _expansion(env: TypeEnv, node: _Node) -> dict[str, _Node]:
    """Children of an unexpanded node, built fresh from its descriptor."""
    d = node.desc
    out = {}
    for seg, t in env.children(node.type):
        if isinstance(d, Uniform):
            out[seg] = _Node(d.perm, t, d)
        elif seg == DEREF:
            out[seg] = _Node(NO, t, Uniform(NO))
        elif env.is_deep(t):
            out[seg] = _Node(W, t, d)
        else:
            out[seg] = _Node(d.perm, t, Uniform(d.perm))
    return out


def _children(env: TypeEnv, node: _Node) -> dict[str, _Node]:
    return node.children if node.children is not None else _expansion(env, node)


def _expand(env: TypeEnv, node: _Node) -> dict[str, _Node]:
    if node.children is None:
        node.children = _expansion(env, node)
        node.desc = None
    return node.children


def _same_leaf(a: _Node, b: _Node) -> bool:
    return (a.children is None and b.children is None
            and a.perm is b.perm and a.desc == b.desc)


def _normalized(env: TypeEnv, node: _Node) -> _Node:
    """Copy of ``node`` with fully described subtrees collapsed."""
    if node.children is None:
        return _Node(node.perm, node.type, node.desc)
    kids = {s: _normalized(env, c) for s, c in node.children.items()}
    if not kids:
        return _Node(node.perm, node.type, Uniform(node.perm))
    for desc in [*(Uniform(p) for p in Permission), *(CutFrom(p) for p in Permission)]:
        probe = _expansion(env, _Node(node.perm, node.type, desc))
        if all(_same_leaf(kids[s], probe[s]) for s in kids):
            return _Node(node.perm, node.type, desc)
    return _Node(node.perm, node.type, None, kids)


class AccessPolicy:
    """Permissions for every path of one procedure scope.

    Transformers mutate the policy in place and return it, so they chain.
    A policy is single-owner: even reads may not run concurrently with
    mutation. Use :meth:`copy` for snapshots.
    """

    def __init__(self, env: TypeEnv, roots: Optional[dict[str, _Node]] = None):
        self.env = env
        self.roots: dict[str, _Node] = roots if roots is not None else {}
        # when set, failed premises are reported here instead of raised
        self.on_error: Optional[Callable[[Exception], None]] = None

    @classmethod
    def uniform(cls, env: TypeEnv, perm: Permission) -> "AccessPolicy":
        pol = cls(env)
        for name in env.variables:
            pol.fresh(Path(name), perm)
        return pol

    def copy(self) -> "AccessPolicy":
        pol = AccessPolicy(self.env, {k: _normalized(self.env, n) for k, n in self.roots.items()})
        pol.on_error = self.on_error
        return pol

    def _fail(self, err: Exception) -> None:
        if self.on_error is None:
            raise err
        self.on_error(err)

    # -- observation -------------------------------------------------------
    def get(self, p: Path) -> Permission:
        node = self.roots[p.root]
        for i, seg in enumerate(p.segments):
            if node.children is None:
                d = node.desc
                if isinstance(d, Uniform):
                    return d.perm
                if DEREF in p.segments[i:]:
                    return NO
                return W if self.env.is_deep_path(p) else d.perm
            node = node.children[seg]
        return node.perm

    __getitem__ = get

    def items(self, depth: int) -> Iterator[tuple[Path, Permission]]:
        """All ``(path, permission)`` pairs with at most ``depth`` segments."""
        for name, node in self.roots.items():
            yield from self._walk(node, Path(name), depth)

    def _walk(self, node: _Node, path: Path, depth: int) -> Iterator[tuple[Path, Permission]]:
        yield path, node.perm
        if len(path) < depth:
            for seg, child in _children(self.env, node).items():
                yield from self._walk(child, path.field(seg), depth)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AccessPolicy):
            return NotImplemented
        return dominates(self, other) is None and dominates(other, self) is None

    def __repr__(self) -> str:
        return f"AccessPolicy({self.roots!r})"

    # -- primitive updates -------------------------------------------------
    def _node(self, p: Path) -> _Node:
        node = self.roots[p.root]
        for seg in p.segments:
            node = _expand(self.env, node)[seg]
        return node

    def set(self, p: Path, perm: Permission) -> "AccessPolicy":
        """Change the permission of ``p`` alone; extensions are untouched."""
        self._node(p).perm = perm
        return self

    # -- transformers --------------------------------------------------------
    def check(self, p: Path, perm: Permission) -> "AccessPolicy":
        actual = self.get(p)
        if not perm <= actual:
            self._fail(PermError(p, perm, actual))
        return self

    def fresh(self, p: Path, perm: Permission) -> "AccessPolicy":
        if p.is_variable:
            self.roots[p.root] = _Node(perm, self.env.variable_type(p.root), Uniform(perm))
            return self
        node = self._node(p)
        node.perm, node.desc, node.children = perm, Uniform(perm), None
        return self

    def cut(self, p: Path) -> "AccessPolicy":
        self._cut(self._node(p))
        return self

    def _cut(self, node: _Node) -> None:
        node.perm = W
        if node.children is None:
            if isinstance(node.desc, Uniform):
                node.desc = CutFrom(node.desc.perm)
            return
        for seg, child in node.children.items():
            if seg == DEREF:
                child.perm, child.desc, child.children = NO, Uniform(NO), None
            elif self.env.is_deep(child.type):
                self._cut(child)

    def block(self, p: Path) -> "AccessPolicy":
        while not p.is_variable:
            q = p.parent
            if p.last != DEREF:
                current = self.get(q)
                if current is NO:
                    break
                if current is R:
                    self._fail(PolicyInvariantError(q))
            self.set(q, W)
            p = q
        return self

    def drop(self, p: Path) -> "AccessPolicy":
        while not p.is_variable:
            q = p.parent
            if p.last == DEREF:
                self.set(q, W)
                return self.block(q)
            self.set(q, NO)
            p = q
        return self

    def lift(self, p: Path) -> "AccessPolicy":
        while not p.is_variable:
            q = p.parent
            if p.last != DEREF and not self._all_rw_below(self._node(q)):
                break
            self.set(q, RW)
            p = q
        return self

    def _all_rw_below(self, node: _Node) -> bool:
        if node.children is None and isinstance(node.desc, Uniform):
            return node.desc.perm is RW or not self.env.children(node.type)
        return all(c.perm is RW and self._all_rw_below(c)
                   for c in _children(self.env, node).values())

    def borrow(self, p: Path) -> "AccessPolicy":
        self.fresh(p, NO)
        for q in p.prefixes():
            self.set(q, NO)
        return self

    def freeze(self, p: Path) -> "AccessPolicy":
        for q in p.prefixes():
            node = self._node(q)
            node.perm = node.perm & R
        self._cap(self._node(p), R)
        return self

    def _cap(self, node: _Node, perm: Permission) -> None:
        node.perm = node.perm & perm
        if node.children is None:
            d = node.desc
            if isinstance(d, Uniform):
                node.desc = Uniform(d.perm & perm)
                return
            if W <= perm:
                node.desc = CutFrom(d.perm & perm)
                return
        for child in _expand(self.env, node).values():
            self._cap(child, perm)

    # -- expression transformers ---------------------------------------------
    def _is_shallow(self, e: Expr) -> bool:
        t = self.env.type_of_expr(e)
        return not isinstance(t, NullType) and not self.env.is_deep(t)

    def check_expr(self, e: Expr, perm: Permission,
                   order: Optional[Callable[[list[Path]], list[Path]]] = None) -> "AccessPolicy":
        paths = paths_of_expr(e)
        for p in (order(paths) if order else paths):
            self.check(p, perm)
        return self

    def move(self, e: Expr, order=None) -> "AccessPolicy":
        match e:
            case Null():
                return self
            case AddressOf(path=p):
                return self.check(p, RW).fresh(p, NO).drop(p)
            case PathRef(path=p) if not self._is_shallow(e):
                return self.check(p, RW).cut(p).block(p)
        return self.check_expr(e, R, order)

    def observe(self, e: Expr) -> "AccessPolicy":
        match e:
            case AddressOf(path=p):
                return self.freeze(p)
            case PathRef(path=p) if not self._is_shallow(e):
                return self.freeze(p)
        return self


def paths_of_expr(e: Expr) -> list[Path]:
    """Maximal operand paths of ``e``, left to right, duplicates kept."""
    match e:
        case PathRef(path=p):
            return [p]
        case BinOp(left=l, right=r):
            return paths_of_expr(l) + paths_of_expr(r)
    return []


# --------------------------------------------------------------------
# Module-level spellings of the transformers

def get(policy: AccessPolicy, p: Path) -> Permission:
    return policy.get(p)


def check(policy: AccessPolicy, p: Path, perm: Permission) -> AccessPolicy:
    return policy.check(p, perm)


def fresh(policy: AccessPolicy, p: Path, perm: Permission) -> AccessPolicy:
    return policy.fresh(p, perm)


def cut(policy: AccessPolicy, p: Path) -> AccessPolicy:
    return policy.cut(p)


def block(policy: AccessPolicy, p: Path) -> AccessPolicy:
    return policy.block(p)


def drop(policy: AccessPolicy, p: Path) -> AccessPolicy:
    return policy.drop(p)


def lift(policy: AccessPolicy, p: Path) -> AccessPolicy:
    return policy.lift(p)


def borrow(policy: AccessPolicy, p: Path) -> AccessPolicy:
    return policy.borrow(p)


def freeze(policy: AccessPolicy, p: Path) -> AccessPolicy:
    return policy.freeze(p)


def move(policy: AccessPolicy, e: Expr) -> AccessPolicy:
    return policy.move(e)


def observe(policy: AccessPolicy, e: Expr) -> AccessPolicy:
    return policy.observe(e)


# --------------------------------------------------------------------
# Whole-policy operations

def _meet_nodes(env: TypeEnv, x: _Node, y: _Node) -> _Node:
    perm = x.perm & y.perm
    if x.children is None and y.children is None:
        dx, dy = x.desc, y.desc
        if type(dx) is type(dy):
            return _Node(perm, x.type, type(dx)(dx.perm & dy.perm))
        cut_d, uni = (dx, dy) if isinstance(dx, CutFrom) else (dy, dx)
        if W <= uni.perm:
            return _Node(perm, x.type, CutFrom(cut_d.perm & uni.perm))
    xc, yc = _children(env, x), _children(env, y)
    if not xc:
        return _Node(perm, x.type, Uniform(perm))
    return _Node(perm, x.type, None, {s: _meet_nodes(env, xc[s], yc[s]) for s in xc})


def policy_meet(a: AccessPolicy, b: AccessPolicy) -> AccessPolicy:
    """Pointwise greatest lower bound of two policies over the same scope."""
    roots = {name: _normalized(a.env, _meet_nodes(a.env, a.roots[name], b.roots[name]))
             for name in a.roots}
    pol = AccessPolicy(a.env, roots)
    pol.on_error = a.on_error
    return pol


def _subtree_dominates(x: _Node, y: _Node) -> bool:
    """Decide from descriptors alone whether x's descendants dominate y's."""
    dx, dy = x.desc, y.desc
    if dy == Uniform(NO) or dx == Uniform(RW):
        return True
    return type(dx) is type(dy) and dy.perm <= dx.perm


def dominates(strong: AccessPolicy, weak: AccessPolicy) -> Optional[Path]:
    """None if ``strong(p) >= weak(p)`` for every path, else a shortest witness."""
    env = strong.env
    queue = deque((Path(name), strong.roots[name], weak.roots[name]) for name in strong.roots)
    while queue:
        path, x, y = queue.popleft()
        if not y.perm <= x.perm:
            return path
        if x.children is None and y.children is None and _subtree_dominates(x, y):
            continue
        xc, yc = _children(env, x), _children(env, y)
        for seg in xc:
            queue.append((path.field(seg), xc[seg], yc[seg]))
    return None


def policy_leq(p1: AccessPolicy, p2: AccessPolicy) -> Union[bool, Path]:
    """Loop-preservation test: True if ``p1 >= p2`` pointwise, else a witness.

    The argument order follows the loop rule, which asks the policy after the
    body (``p1``) to be at least the policy before it (``p2``).
    """
    witness = dominates(p1, p2)
    return True if witness is None else witness


# --------------------------------------------------------------------
# Consistency

@dc.dataclass(frozen=True)
class Inconsistency:
    path: Path
    extension: Path
    perm: Permission
    extension_perm: Permission

    def __str__(self) -> str:
        return f"{self.path}={self.perm} but {self.extension}={self.extension_perm}"


def _violates(parent: Permission, child: Permission, seg: str) -> bool:
    if parent is RW or parent is R:
        return child is not parent
    if parent is W and seg != DEREF:
        return not W <= child
    return False


def consistency_violations(policy: AccessPolicy, depth: int = 6) -> list[Inconsistency]:
    """Every pair (p, p.s) up to ``depth`` segments breaking the invariants:
    RW and R propagate to all one-step extensions, W to every field."""
    out: list[Inconsistency] = []
    env = policy.env

    def walk(node: _Node, path: Path) -> None:
        if len(path) >= depth:
            return
        for seg, child in _children(env, node).items():
            if _violates(node.perm, child.perm, seg):
                out.append(Inconsistency(path, path.field(seg), node.perm, child.perm))
            walk(child, path.field(seg))

    for name, node in policy.roots.items():
        walk(node, Path(name))
    return out
