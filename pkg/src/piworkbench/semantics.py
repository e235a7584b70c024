"""Labelled transition semantics, bounded LTS fragments, divergence.

Transitions are derived structurally (OUTPUT/INPUT-ACT, PAR, COM, CLOSE,
RES, OPEN and the three replication rules); the reduction relation is the
tau fragment of the labelled one, which by the Harmony Lemma represents
reduction up to structural congruence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

from .congruence import normalize
from .syntax import (Input, Name, Output, Par, Process, Repl, Restrict,
                     _free, names, substitute)
from .text import render_term


@dataclass(frozen=True)
class Tau:
    pass


@dataclass(frozen=True)
class FreeOutput:
    chan: Name
    datum: Name


@dataclass(frozen=True)
class BoundOutput:
    chan: Name
    datum: Name


@dataclass(frozen=True)
class InputLab:
    chan: Name
    datum: Name


Label = Tau | FreeOutput | BoundOutput | InputLab
TAU = Tau()


def label_fn(a: Label) -> frozenset:
    match a:
        case Tau():
            return frozenset()
        case FreeOutput(c, d):
            return frozenset((c, d))
        case BoundOutput(c, _) | InputLab(c, _):
            return frozenset((c,))
    raise TypeError(f"not a label: {a!r}")


def label_bn(a: Label) -> frozenset:
    match a:
        case BoundOutput(_, d) | InputLab(_, d):
            return frozenset((d,))
        case _:
            return frozenset()


def label_names(a: Label) -> frozenset:
    return label_fn(a) | label_bn(a)


def render_label(a: Label) -> str:
    match a:
        case Tau():
            return "tau"
        case FreeOutput(c, d):
            return f"{c}!{d}"
        case BoundOutput(c, d):
            return f"{c}!({d})"
        case InputLab(c, d):
            return f"{c}?({d})"
    raise TypeError(f"not a label: {a!r}")


def _label_key(a: Label):
    order = {Tau: 0, FreeOutput: 1, BoundOutput: 2, InputLab: 3}
    return (order[type(a)],) + tuple(sorted(label_names(a)))


class FreshExhausted(RuntimeError):
    """The universe has no name left that is fresh for the term."""


def _raw_transitions(p: Process, w: Name) -> list:
    """All Table-style transitions of p, with `w` (fresh for the whole
    term) as the single bound-name representative."""
    match p:
        case Output(x, z, k):
            return [(FreeOutput(x, z), k)]
        case Input(x, y, k):
            return [(InputLab(x, w), substitute(k, y, w))]
        case Par(l, r):
            lt = _raw_transitions(l, w)
            rt = _raw_transitions(r, w)
            out = []
            for a, t in lt:
                out.append((a, Par(t, r)))
            for b, u in rt:
                out.append((b, Par(l, u)))
            for a, t in lt:
                for b, u in rt:
                    out.extend(_sync(a, t, b, u, w))
                    out.extend(_sync(b, u, a, t, w, swap=True))
            return out
        case Restrict(y, body):
            out = []
            for a, t in _raw_transitions(body, w):
                if y not in label_names(a):
                    out.append((a, Restrict(y, t)))
                elif isinstance(a, FreeOutput) and a.datum == y and a.chan != y:
                    out.append((BoundOutput(a.chan, w), substitute(t, y, w)))
            return out
        case Repl(body):
            base = _raw_transitions(body, w)
            out = [(a, Par(t, p)) for a, t in base]
            for a, t in base:
                for b, u in base:
                    if isinstance(a, FreeOutput) and isinstance(b, InputLab) and a.chan == b.chan:
                        out.append((TAU, Par(Par(t, substitute(u, w, a.datum)), p)))
                    if isinstance(a, BoundOutput) and isinstance(b, InputLab) and a.chan == b.chan:
                        out.append((TAU, Par(Restrict(w, Par(t, u)), p)))
            return out
        case _:
            return []


def _sync(a: Label, t: Process, b: Label, u: Process, w: Name, swap: bool = False):
    """COM and CLOSE between a sender transition (a, t) and a receiver
    transition (b, u); `swap` restores the original component order."""
    if not isinstance(b, InputLab):
        return
    pair = (lambda s, r: Par(r, s)) if swap else Par
    if isinstance(a, FreeOutput) and a.chan == b.chan:
        yield (TAU, pair(t, substitute(u, w, a.datum)))
    if isinstance(a, BoundOutput) and a.chan == b.chan:
        yield (TAU, Restrict(w, pair(t, u)))


def _temp_bound_name(p: Process) -> Name:
    taken = names(p)
    for i in itertools.count():
        n = Name(f"t{i}'", reserved=True)
        if n not in taken:
            return n


_UNIVERSE_POOL_PREFIX = "w"


def universe_fresh_names(avoid, count: int) -> tuple:
    """First `count` names of the reserved fresh pool outside `avoid`."""
    out = []
    for i in itertools.count(1):
        n = Name(f"{_UNIVERSE_POOL_PREFIX}{i}", reserved=True)
        if n not in avoid:
            out.append(n)
            if len(out) == count:
                return tuple(out)


def _fresh_representative(p: Process, universe: frozenset) -> Optional[Name]:
    np = names(p)
    cands = sorted(n for n in universe if n not in np)
    if not cands:
        return None
    pooled = [n for n in cands if n.reserved]
    return pooled[0] if pooled else cands[0]


def _steps(p: Process, universe: frozenset, tau_only: bool) -> tuple:
    tmp = _temp_bound_name(p)
    raw = _raw_transitions(p, tmp)
    out = set()
    rep = None
    for a, t in raw:
        if isinstance(a, Tau):
            out.add((a, normalize(t)))
        elif not tau_only:
            if rep is None:
                rep = _fresh_representative(p, universe)
                if rep is None:
                    raise FreshExhausted(render_term(p))
            if label_bn(a):
                a = type(a)(a.chan, rep)
                t = substitute(t, tmp, rep)
            out.add((a, normalize(t)))
    return tuple(sorted(out, key=lambda at: (_label_key(at[0]), render_term(at[1]))))


def default_universe(p: Process, extra: int = 1) -> frozenset:
    return frozenset(_free(p)) | frozenset(universe_fresh_names(names(p), extra))


def step_labels(p: Process, universe: Iterable[Name]) -> tuple:
    """All transitions of `p`, with one canonical fresh representative for
    bound names, targets in canonical form."""
    universe = frozenset(universe)
    if not universe >= _free(p):
        raise ValueError("universe must contain the free names of the term")
    if not universe - names(p):
        raise ValueError("universe must contain a name fresh for the term")
    return _steps(p, universe, tau_only=False)


@lru_cache(maxsize=None)
def reduce_once(p: Process) -> tuple:
    """Canonical tau-successors; by the Harmony Lemma these are exactly the
    one-step reducts up to structural congruence."""
    steps = _steps(p, default_universe(p), tau_only=True)
    return tuple(t for _, t in steps)


@dataclass(frozen=True)
class LtsFragment:
    """Bounded, canonical fragment of the transition system.

    states[0] is the root; transitions hold state indices.  States in
    `frontier` have derivable successors that were not expanded.
    """

    states: tuple
    transitions: tuple  # (source index, Label, target index)
    root: int
    frontier: frozenset
    depth_bound: int
    universe: tuple
    label_mode: str
    # filled by equivalences.saturate
    tau_closure: Optional[tuple] = None  # per state: (frozenset of indices, closed)
    weak_moves: Optional[tuple] = None  # per state: (moves tuple, complete); move = (Label, target)

    def index_of(self, term: Process) -> Optional[int]:
        return self._index().get(term)

    def _index(self) -> dict:
        idx = getattr(self, "_idx", None)
        if idx is None:
            idx = {t: i for i, t in enumerate(self.states)}
            object.__setattr__(self, "_idx", idx)
        return idx

    def edges_from(self, i: int) -> tuple:
        out = getattr(self, "_out", None)
        if out is None:
            out = {}
            for s, a, t in self.transitions:
                out.setdefault(s, []).append((a, t))
            object.__setattr__(self, "_out", out)
        return tuple(out.get(i, ()))


def build_fragment(
    p: Process,
    depth: int,
    label_mode: str = "all_labels",
    universe_extra: int = 1,
    universe: Optional[Iterable[Name]] = None,
) -> LtsFragment:
    """Breadth-first bounded exploration over canonical states."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if universe_extra < 1:
        raise ValueError("universe_extra must be >= 1")
    if label_mode not in ("all_labels", "tau_only"):
        raise ValueError(f"unknown label_mode {label_mode!r}")
    tau_only = label_mode == "tau_only"
    root = normalize(p)
    if universe is None:
        uni = frozenset(_free(root)) | frozenset(
            universe_fresh_names(names(root), universe_extra)
        )
    else:
        uni = frozenset(universe)

    states = [root]
    index = {root: 0}
    dist = {0: 0}
    transitions = []
    frontier = set()
    queue = [0]
    qpos = 0
    while qpos < len(queue):
        i = queue[qpos]
        qpos += 1
        try:
            steps = _steps(states[i], uni, tau_only)
        except FreshExhausted:
            frontier.add(i)
            continue
        if dist[i] >= depth:
            if steps:
                frontier.add(i)
            continue
        for a, t in steps:
            j = index.get(t)
            if j is None:
                j = len(states)
                states.append(t)
                index[t] = j
                dist[j] = dist[i] + 1
                queue.append(j)
            transitions.append((i, a, j))
    return LtsFragment(
        states=tuple(states),
        transitions=tuple(transitions),
        root=0,
        frontier=frozenset(frontier),
        depth_bound=depth,
        universe=tuple(sorted(uni)),
        label_mode=label_mode,
    )


@dataclass(frozen=True)
class Diverges:
    """Tri-state divergence evidence."""

    status: str  # "yes" | "no" | "unknown"
    cycle: tuple = ()
    reason: str = ""

    @property
    def is_yes(self) -> bool:
        return self.status == "yes"


def tau_cycle(frag: LtsFragment, start: int = 0) -> Optional[tuple]:
    """A tau-cycle reachable from `start` in the fragment, if any."""
    color = {}
    stack = [(start, iter([t for a, t in frag.edges_from(start) if isinstance(a, Tau)]))]
    path = [start]
    color[start] = 1
    while stack:
        node, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            color[node] = 2
            stack.pop()
            path.pop()
            continue
        c = color.get(nxt)
        if c == 1:
            k = path.index(nxt)
            return tuple(frag.states[i] for i in path[k:])
        if c is None:
            color[nxt] = 1
            path.append(nxt)
            stack.append((nxt, iter([t for a, t in frag.edges_from(nxt) if isinstance(a, Tau)])))
    return None


def diverges(p: Process, depth: int) -> Diverges:
    """Detect a reachable tau-cycle among canonical states.

    Explored by iterative deepening so an early cycle is found without
    expanding the whole horizon.  Exact when the bounded fragment closed
    (empty frontier); Unknown when the horizon was hit cycle-free.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    frag = None
    for d in range(1, depth + 1):
        frag = build_fragment(p, d, label_mode="tau_only")
        cyc = tau_cycle(frag)
        if cyc is not None:
            return Diverges("yes", cycle=cyc)
        if not frag.frontier:
            return Diverges("no")
    return Diverges("unknown", reason="frontier hit before the tau graph closed")
