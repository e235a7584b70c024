"""Terms of the (a)synchronous pi-calculus.

Processes are immutable trees over names; every operation in this module
is a pure function, so values can be shared freely between threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Union


@dataclass(frozen=True, order=True)
class Name:
    """A channel/value name.

    Reserved names form a namespace of their own (rendered with a leading
    '%'), used for machinery-introduced names: encoding protocol channels,
    canonical binders and fresh transition objects.  A reserved name is
    never equal to a user name, whatever the identifier.
    """

    ident: str
    reserved: bool = False

    def __str__(self) -> str:
        return "%" + self.ident if self.reserved else self.ident


@dataclass(frozen=True)
class Nil:
    pass


@dataclass(frozen=True)
class Success:
    pass


@dataclass(frozen=True)
class Output:
    chan: Name
    datum: Name
    cont: "Process"


@dataclass(frozen=True)
class Input:
    chan: Name
    binder: Name
    cont: "Process"


@dataclass(frozen=True)
class Par:
    left: "Process"
    right: "Process"


@dataclass(frozen=True)
class Restrict:
    binder: Name
    body: "Process"


@dataclass(frozen=True)
class Repl:
    body: "Process"


@dataclass(frozen=True)
class Hole:
    """Numbered hole; only meaningful inside encoding contexts."""

    index: int


Process = Union[Nil, Success, Output, Input, Par, Restrict, Repl, Hole]


def _cached_hash(self):
    # deep terms are hashed constantly as memo keys; cache per node
    h = self.__dict__.get("_hashcache")
    if h is None:
        vals = tuple(getattr(self, f) for f in self.__dataclass_fields__)
        h = hash((self.__class__.__qualname__, vals))
        object.__setattr__(self, "_hashcache", h)
    return h


for _cls in (Name, Nil, Success, Output, Input, Par, Restrict, Repl, Hole):
    _cls.__hash__ = _cached_hash  # type: ignore[assignment]

NIL = Nil()
OK = Success()


@dataclass(frozen=True)
class NameSets:
    free: frozenset
    bound: frozenset
    all: frozenset


@lru_cache(maxsize=None)
def _free(p: Process) -> frozenset:
    match p:
        case Nil() | Success() | Hole():
            return frozenset()
        case Output(c, d, k):
            return frozenset((c, d)) | _free(k)
        case Input(c, b, k):
            return frozenset((c,)) | (_free(k) - {b})
        case Par(l, r):
            return _free(l) | _free(r)
        case Restrict(b, body):
            return _free(body) - {b}
        case Repl(body):
            return _free(body)
    raise TypeError(f"not a process: {p!r}")


@lru_cache(maxsize=None)
def _bound(p: Process) -> frozenset:
    match p:
        case Nil() | Success() | Hole():
            return frozenset()
        case Output(_, _, k):
            return _bound(k)
        case Input(_, b, k):
            return frozenset((b,)) | _bound(k)
        case Par(l, r):
            return _bound(l) | _bound(r)
        case Restrict(b, body):
            return frozenset((b,)) | _bound(body)
        case Repl(body):
            return _bound(body)
    raise TypeError(f"not a process: {p!r}")


def free_names(p: Process) -> NameSets:
    """fn/bn/n of a term.  Input and restriction bind their binder."""
    f, b = _free(p), _bound(p)
    return NameSets(free=f, bound=b, all=f | b)


def names(p: Process) -> frozenset:
    return _free(p) | _bound(p)


@lru_cache(maxsize=None)
def size(p: Process) -> int:
    """Node count of the term."""
    match p:
        case Nil() | Success() | Hole():
            return 1
        case Output(_, _, k) | Input(_, _, k) | Restrict(_, k) | Repl(k):
            return 1 + size(k)
        case Par(l, r):
            return 1 + size(l) + size(r)
    raise TypeError(f"not a process: {p!r}")


@lru_cache(maxsize=None)
def is_async(p: Process) -> bool:
    """True iff every output subterm has continuation 0."""
    match p:
        case Nil() | Success() | Hole():
            return True
        case Output(_, _, k):
            return k == NIL
        case Input(_, _, k) | Restrict(_, k) | Repl(k):
            return is_async(k)
        case Par(l, r):
            return is_async(l) and is_async(r)
    raise TypeError(f"not a process: {p!r}")


def fresh_variant(base: Name, avoid) -> Name:
    """First primed variant of `base` outside `avoid`, same namespace."""
    ident = base.ident
    while True:
        ident += "'"
        cand = Name(ident, base.reserved)
        if cand not in avoid:
            return cand


def substitute(p: Process, old: Name, new: Name) -> Process:
    """Capture-avoiding replacement of free occurrences of `old` by `new`."""
    return substitute_all(p, {old: new})


def substitute_all(p: Process, mapping: Mapping[Name, Name]) -> Process:
    """Simultaneous capture-avoiding renaming of free occurrences.

    Binders whose name would capture an incoming name are renamed to a
    fresh primed variant first.
    """
    items = tuple(sorted((y, w) for y, w in mapping.items() if y != w))
    return _subst(p, items)


@lru_cache(maxsize=None)
def _subst(p: Process, items) -> Process:
    fp = _free(p)
    items = tuple((y, w) for y, w in items if y in fp)
    if not items:
        return p
    m = dict(items)
    match p:
        case Output(c, d, k):
            return Output(m.get(c, c), m.get(d, d), _subst(k, items))
        case Input(c, b, k):
            c2 = m.get(c, c)
            b2, k2 = _subst_binder(b, k, items)
            return Input(c2, b2, k2)
        case Par(l, r):
            return Par(_subst(l, items), _subst(r, items))
        case Restrict(b, body):
            b2, body2 = _subst_binder(b, body, items)
            return Restrict(b2, body2)
        case Repl(body):
            return Repl(_subst(body, items))
    raise TypeError(f"not a process: {p!r}")


def _subst_binder(b: Name, body: Process, items):
    inner = tuple((y, w) for y, w in items if y != b and y in _free(body))
    if not inner:
        return b, body
    incoming = {w for _, w in inner}
    if b in incoming:
        avoid = _free(body) | incoming | {y for y, _ in inner} | {b}
        b2 = fresh_variant(b, avoid)
        body = _subst(body, ((b, b2),))
        return b2, _subst(body, inner)
    return b, _subst(body, inner)


def _canonical_pool(prefix: str, skip) -> Iterator[Name]:
    for i in itertools.count():
        n = Name(f"{prefix}{i}", reserved=True)
        if n not in skip:
            yield n


@lru_cache(maxsize=None)
def alpha_normalize(p: Process) -> Process:
    """Canonical alpha-representative.

    Binders are renamed to reserved names in left-to-right depth-first
    order, skipping any that occur free in the term.  Idempotent and
    fn-preserving; two terms are alpha-equivalent iff their normal forms
    are syntactically identical.
    """
    pool = _canonical_pool("b", _free(p))

    def rec(t: Process, env: dict) -> Process:
        match t:
            case Nil() | Success() | Hole():
                return t
            case Output(c, d, k):
                return Output(env.get(c, c), env.get(d, d), rec(k, env))
            case Input(c, b, k):
                nb = next(pool)
                return Input(env.get(c, c), nb, rec(k, {**env, b: nb}))
            case Par(l, r):
                return Par(rec(l, env), rec(r, env))
            case Restrict(b, body):
                nb = next(pool)
                return Restrict(nb, rec(body, {**env, b: nb}))
            case Repl(body):
                return Repl(rec(body, env))
        raise TypeError(f"not a process: {t!r}")

    return rec(p, {})


def alpha_eq(p: Process, q: Process) -> bool:
    """Equality up to renaming of bound names."""
    return alpha_normalize(p) == alpha_normalize(q)
