"""Structural congruence via a canonical normal form.

The normal form at every parallel level is a block of restrictions (in
positional order) over a flat, text-sorted multiset of components, with
0-units, void restrictions and alpha-variance removed.  Two terms are
congruent iff their normal forms are syntactically identical; replication
unfolding (!P == P | !P) is not part of the normal form but searched up
to a budget in `congruent`.
"""

from __future__ import annotations

import itertools
import re
from functools import lru_cache
from typing import Iterator

from .syntax import (NIL, Hole, Input, Name, Nil, Output, Par, Process, Repl,
                     Restrict, Success, _free, substitute_all)
from .text import render_term

# a normal form is an ordinary Process whose shape is canonical: per
# parallel level a positional restriction block over text-sorted components
CongruenceNF = Process

_LEVEL_RE = re.compile(r"r\d+$")


@lru_cache(maxsize=None)
def _level_name(slot: int, skip: frozenset) -> Name:
    pool = (Name(f"r{i}", reserved=True) for i in itertools.count())
    usable = (n for n in pool if n not in skip)
    return next(itertools.islice(usable, slot, None))


def normalize(p: Process, unfold_budget: int = 0) -> Process:
    """Canonical representative of the congruence class of `p`.

    The budget is validated for interface compatibility; the normal form
    itself never unfolds replication (see `congruent`).
    """
    if unfold_budget < 0:
        raise ValueError("unfold_budget must be >= 0")
    return _normalize(p)


@lru_cache(maxsize=None)
def _normalize(p: Process) -> Process:
    skip = frozenset(n for n in _free(p) if n.reserved and _LEVEL_RE.match(n.ident))
    return _canon(p, (), 0, skip)


def _env_key(env: tuple, p: Process) -> tuple:
    fp = _free(p)
    return tuple((y, w) for y, w in env if y in fp)


_CANON_MEMO: dict = {}


def _canon(p: Process, env: tuple, depth: int, skip: frozenset) -> Process:
    key = (p, _env_key(env, p), depth, skip)
    hit = _CANON_MEMO.get(key)
    if hit is not None:
        return hit
    m = dict(env)
    match p:
        case Nil() | Success() | Hole():
            out = p
        case Output(c, d, k):
            out = Output(m.get(c, c), m.get(d, d), _canon(k, env, depth, skip))
        case Input(c, b, k):
            nb = _level_name(depth, skip)
            out = Input(m.get(c, c), nb, _canon(k, env + ((b, nb),), depth + 1, skip))
        case Repl(body):
            out = Repl(_canon(body, env, depth, skip))
        case Par(_, _) | Restrict(_, _):
            out = _canon_level(p, env, depth, skip)
        case _:
            raise TypeError(f"not a process: {p!r}")
    _CANON_MEMO[key] = out
    return out


_tmp_counter = itertools.count()


def _peel(p: Process, ren: dict, temps: list, comps: list) -> None:
    # Flatten the parallel level, lifting every restriction binder to a
    # throwaway temp name (pure alpha + maximal outward scope extrusion).
    match p:
        case Par(l, r):
            _peel(l, ren, temps, comps)
            _peel(r, ren, temps, comps)
        case Restrict(b, body):
            tmp = Name(f"tmp{next(_tmp_counter)}", reserved=True)
            temps.append(tmp)
            _peel(body, {**ren, b: tmp}, temps, comps)
        case Nil():
            pass
        case _:
            comps.append(substitute_all(p, ren))


def _canon_level(p: Process, env: tuple, depth: int, skip: frozenset) -> Process:
    temps: list = []
    comps: list = []
    _peel(p, {}, temps, comps)
    if not comps:
        return NIL
    live = [t for t in temps if any(t in _free(c) for c in comps)]

    best = None
    best_text = None
    for order in _binder_orders(live, comps, env):
        assign = tuple((t, _level_name(depth + i, skip)) for i, t in enumerate(order))
        env2 = env + assign
        inner_depth = depth + len(live)
        cs = sorted(
            (_canon(c, env2, inner_depth, skip) for c in comps),
            key=render_term,
        )
        body = cs[0]
        for c in cs[1:]:
            body = Par(body, c)
        for i in reversed(range(len(live))):
            body = Restrict(_level_name(depth + i, skip), body)
        text = render_term(body)
        if best_text is None or text < best_text:
            best, best_text = body, text
    return best


# markers use '#', which the concrete syntax cannot produce, so signature
# renders can never collide with real names
_SELF = Name("s#", reserved=True)

_ORDER_CAP = 24


def _binder_orders(live: list, comps: list, env: tuple):
    """Candidate canonical orders of a restriction block.

    Binders are partitioned by an order-independent usage signature:
    each component is rendered with the outer canonical renaming applied,
    its own binders alpha-normalised, this binder marked self and the
    others marked by their current group.  The partition is refined until
    stable; only tied binders are permuted, capped at _ORDER_CAP
    candidates.  Residual ties are almost always genuine block
    automorphisms, for which every order renders identically."""
    if len(live) <= 1:
        return [tuple(live)]

    env_map = dict(env)
    group_of = {t: 0 for t in live}

    def signature(t):
        # canonical render of the env-applied, binder-blinded component:
        # invariant across congruent presentations of the level
        blind = {
            **env_map,
            **{
                u: (_SELF if u == t else Name(f"g{group_of[u]}#", reserved=True))
                for u in live
            },
        }
        return tuple(
            sorted(
                render_term(_normalize(substitute_all(c, blind)))
                for c in comps
                if t in _free(c)
            )
        )

    while True:
        # refine only: the key keeps the old group, so partitions never merge
        sigs = {t: (group_of[t], signature(t)) for t in live}
        buckets: dict = {}
        for t in live:
            buckets.setdefault(sigs[t], []).append(t)
        new_group_of = {}
        for idx, key in enumerate(sorted(buckets)):
            for t in buckets[key]:
                new_group_of[t] = idx
        if new_group_of == group_of:
            break
        group_of = new_group_of

    ordered_groups = [buckets[key] for key in sorted(buckets)]
    total = 1
    for g in ordered_groups:
        for i in range(2, len(g) + 1):
            total *= i
    if total > _ORDER_CAP:
        # beyond the cap: deterministic but potentially incomplete order
        return [tuple(t for g in ordered_groups for t in g)]
    perms = [itertools.permutations(g) for g in ordered_groups]
    return [
        tuple(t for part in combo for t in part)
        for combo in itertools.product(*perms)
    ]


def _positions(p: Process) -> Iterator[tuple]:
    """Yield (replicated subterm, rebuild function) for every !-node."""
    match p:
        case Repl(body):
            yield p, (lambda new: new)
        case _:
            pass
    match p:
        case Output(c, d, k):
            for sub, rb in _positions(k):
                yield sub, (lambda new, rb=rb: Output(c, d, rb(new)))
        case Input(c, b, k):
            for sub, rb in _positions(k):
                yield sub, (lambda new, rb=rb: Input(c, b, rb(new)))
        case Par(l, r):
            for sub, rb in _positions(l):
                yield sub, (lambda new, rb=rb: Par(rb(new), r))
            for sub, rb in _positions(r):
                yield sub, (lambda new, rb=rb: Par(l, rb(new)))
        case Restrict(b, body):
            for sub, rb in _positions(body):
                yield sub, (lambda new, rb=rb: Restrict(b, rb(new)))
        case Repl(body):
            for sub, rb in _positions(body):
                yield sub, (lambda new, rb=rb: Repl(rb(new)))
        case _:
            pass


def unfold_once(p: Process) -> frozenset:
    """All terms obtained by one application of !P == P | !P, left to right."""
    out = set()
    for sub, rebuild in _positions(p):
        out.add(rebuild(Par(sub.body, sub)))
    return frozenset(out)


def _variants(p: Process, budget: int) -> frozenset:
    seen = {_normalize(p)}
    frontier = set(seen)
    for _ in range(budget):
        nxt = set()
        for t in frontier:
            for u in unfold_once(t):
                c = _normalize(u)
                if c not in seen:
                    seen.add(c)
                    nxt.add(c)
        frontier = nxt
        if not frontier:
            break
    return frozenset(seen)


def congruent(p: Process, q: Process, unfold_budget: int = 0) -> bool:
    """Decide structural congruence.

    Sound always; complete for replication-free terms at budget 0.  With a
    positive budget, some pairing of replication unfoldings is searched on
    both sides.
    """
    if unfold_budget < 0:
        raise ValueError("unfold_budget must be >= 0")
    if _normalize(p) == _normalize(q):
        return True
    if unfold_budget == 0:
        return False
    return not _variants(p, unfold_budget).isdisjoint(_variants(q, unfold_budget))
