"""Bounded checkers for the weak equivalences.

Verdicts are exact (related / not related) whenever both bounded
fragments closed without hitting the depth horizon; otherwise a verdict
is only definite when the deciding evidence is fully explored, and
Unknown is sticky: an obligation that touches a frontier state or leads
outside the built fragments can downgrade Related to Unknown, never
flip it to NotRelated.
"""

from __future__ import annotations

import dataclasses
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .congruence import normalize
from .observables import CHAN, IN, OUT, SUCC, strong_barbs
from .semantics import (BoundOutput, FreeOutput, InputLab, LtsFragment, Tau,
                        build_fragment, render_label, universe_fresh_names)
from .syntax import NIL, Output, Par, Process, _free, names, substitute
from .text import render_term

LABEL_KINDS = ("ewb", "wot", "wab")
REDUCTION_KINDS = ("wbb", "awbb", "wcb", "srwrb")
KINDS = LABEL_KINDS + REDUCTION_KINDS

_OBSERVED = {
    "wbb": (IN, OUT),
    "awbb": (OUT,),
    "wcb": (CHAN,),
    "srwrb": (SUCC,),
}

_INPUT_UNIVERSE_NOTE = (
    "input clause instantiated over the shared free names plus one fresh name"
)


@dataclass(frozen=True)
class RelationKind:
    """Which equivalence to check, plus the divergence-preserving and
    branching strengthenings of the reduction-based kinds."""

    kind: str
    divergence_preserving: bool = False
    branching: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown relation kind {self.kind!r}")
        if self.branching and self.kind not in REDUCTION_KINDS:
            raise ValueError("branching variants exist only for reduction-based kinds")

    @property
    def reduction_based(self) -> bool:
        return self.kind in REDUCTION_KINDS


EWB = RelationKind("ewb")
WOT = RelationKind("wot")
WAB = RelationKind("wab")
WBB = RelationKind("wbb")
AWBB = RelationKind("awbb")
WCB = RelationKind("wcb")
SRWRB = RelationKind("srwrb")


def kind_from_string(text: str, divergence_preserving=False, branching=False) -> RelationKind:
    return RelationKind(text.lower(), divergence_preserving, branching)


@dataclass(frozen=True)
class WitnessStep:
    side: str  # "left" | "right"
    label: str


@dataclass(frozen=True)
class Witness:
    """Counterexample: how to reach the failing pair, and which obligation
    is definitely unmatched there."""

    steps: tuple
    pair: tuple  # rendered failing pair (left term, right term)
    side: str  # side owning the unmatched move/barb
    category: str  # "input-move" | "output-move" | "tau-move" | "barb" | "divergence"
    label: str
    detail: str
    near_miss: tuple = ()

    def describe(self) -> str:
        path = "; ".join(f"{s.side} {s.label}" for s in self.steps)
        prefix = f"after [{path}] " if path else ""
        return f"{prefix}{self.detail}"


@dataclass(frozen=True)
class Verdict:
    status: str  # "related" | "not_related" | "unknown"
    relation: tuple = ()
    witness: Optional[Witness] = None
    reason: str = ""
    approximations: tuple = ()

    @property
    def is_related(self) -> bool:
        return self.status == "related"

    @property
    def is_not_related(self) -> bool:
        return self.status == "not_related"

    @property
    def is_unknown(self) -> bool:
        return self.status == "unknown"


def saturate(frag: LtsFragment, mode: str = "weak") -> LtsFragment:
    """Attach weak-transition data to a fragment.

    Weak mode precomputes tau* closures and the composed =alpha=> moves;
    branching mode keeps single steps and exposes tau* reachability only.
    Completeness flags record whether any of it was cut off by a frontier.
    """
    if mode not in ("weak", "branching"):
        raise ValueError(f"unknown saturation mode {mode!r}")
    n = len(frag.states)
    closures = []
    for i in range(n):
        seen = {i}
        stack = [i]
        while stack:
            j = stack.pop()
            for a, t in frag.edges_from(j):
                if isinstance(a, Tau) and t not in seen:
                    seen.add(t)
                    stack.append(t)
        closures.append((frozenset(seen), frag.frontier.isdisjoint(seen)))
    weak = None
    if mode == "weak":
        weak = []
        for i in range(n):
            cl, complete = closures[i]
            moves = set()
            for j in cl:
                for a, k in frag.edges_from(j):
                    if isinstance(a, Tau):
                        continue
                    clk, closedk = closures[k]
                    complete = complete and closedk
                    for l in clk:
                        moves.add((a, l))
            ordered = tuple(sorted(moves, key=lambda m: (render_label(m[0]), m[1])))
            weak.append((ordered, complete))
        weak = tuple(weak)
    return dataclasses.replace(frag, tau_closure=tuple(closures), weak_moves=weak)


_OK, _FAIL, _TAINT = "ok", "fail", "taint"

_CATEGORY_RANK = {
    "input-move": 0,
    "output-move": 1,
    "barb": 2,
    "divergence": 3,
    "tau-move": 4,
}


@dataclass(frozen=True)
class Blame:
    side: str
    category: str
    label: str
    detail: str
    near_miss: tuple = ()


def _divergence_status(frag: LtsFragment) -> list:
    cyclic = set()
    for i in range(len(frag.states)):
        for a, t in frag.edges_from(i):
            if isinstance(a, Tau) and i in frag.tau_closure[t][0]:
                cyclic.add(i)
    out = []
    for i in range(len(frag.states)):
        cl, closed = frag.tau_closure[i]
        if cl & cyclic:
            out.append("yes")
        elif closed:
            out.append("no")
        else:
            out.append("unknown")
    return out


class _Engine:
    """Obligation tables for one check: both fragments saturated, every
    pair's clause obligations precomputed, then refined to the greatest
    satisfying relation."""

    def __init__(self, kind: RelationKind, fa: LtsFragment, fb: LtsFragment, wset: tuple):
        self.kind = kind
        self.fa = fa
        self.fb = fb
        self.wset = wset
        self.sides = {"left": (fa, fb), "right": (fb, fa)}
        if kind.reduction_based:
            obs_kinds = _OBSERVED[kind.kind]
            self.obs = {
                s: [
                    frozenset(b for b in strong_barbs(t) if b.kind in obs_kinds)
                    for t in frag.states
                ]
                for s, (frag, _) in self.sides.items()
            }
            self.weak_obs = {}
            for s, (frag, _) in self.sides.items():
                per = []
                for i in range(len(frag.states)):
                    cl, closed = frag.tau_closure[i]
                    found = frozenset().union(*(self.obs[s][j] for j in cl))
                    per.append((found, closed))
                self.weak_obs[s] = per
        if kind.divergence_preserving:
            self.div = {s: _divergence_status(frag) for s, (frag, _) in self.sides.items()}
        self.table = {}
        for i in range(len(fa.states)):
            for j in range(len(fb.states)):
                obs = self._pair_obligations("left", i, j) + self._pair_obligations("right", j, i)
                self.table[(i, j)] = obs

    def _key(self, side: str, x2: int, y2: int) -> tuple:
        return (x2, y2) if side == "left" else (y2, x2)

    def _pair_obligations(self, side: str, x: int, y: int) -> tuple:
        fx, fy = self.sides[side]
        obs = []
        term = render_term(fx.states[x])
        if self.kind.divergence_preserving and side == "left":
            dx, dy = self.div["left"][x], self.div["right"][y]
            if "unknown" in (dx, dy):
                obs.append(("static", _TAINT, None))
            elif dx != dy:
                obs.append(
                    (
                        "static",
                        _FAIL,
                        Blame(
                            side,
                            "divergence",
                            dx,
                            f"left diverges={dx} but right diverges={dy}",
                        ),
                    )
                )
        if x in fx.frontier:
            obs.append(("static", _TAINT, None))
        if self.kind.reduction_based:
            obs.extend(self._barb_obligations(side, x, y))
            obs.extend(self._tau_obligations(side, x, y, fx, fy))
        else:
            obs.extend(self._tau_obligations(side, x, y, fx, fy))
            obs.extend(self._label_obligations(side, x, y, fx, fy))
        return tuple(obs)

    def _barb_obligations(self, side: str, x: int, y: int):
        other = "right" if side == "left" else "left"
        found, closed = self.weak_obs[other][y]
        for b in sorted(self.obs[side][x]):
            if b in found:
                continue
            status = _FAIL if closed else _TAINT
            blame = Blame(
                side,
                "barb",
                str(b),
                f"{side} has strong barb '{b}' which the {other} side never reaches weakly",
            )
            yield ("static", status, blame)

    def _tau_obligations(self, side: str, x: int, y: int, fx: LtsFragment, fy: LtsFragment):
        cly, closedy = fy.tau_closure[y]
        for a, x2 in fx.edges_from(x):
            if not isinstance(a, Tau):
                continue
            if self.kind.branching:
                entries = [("pair", self._key(side, x2, y))]
                for y1 in sorted(cly):
                    for b, y2 in fy.edges_from(y1):
                        if isinstance(b, Tau):
                            entries.append(
                                ("pair2", self._key(side, x, y1), self._key(side, x2, y2))
                            )
            else:
                entries = [("pair", self._key(side, x2, y2)) for y2 in sorted(cly)]
            blame = Blame(
                side,
                "tau-move",
                "tau",
                f"a tau step on the {side} cannot be matched weakly",
            )
            yield ("exists", tuple(entries), closedy, blame)

    def _near_miss(self, fy: LtsFragment, y: int, chan) -> tuple:
        moves, _ = fy.weak_moves[y]
        return tuple(sorted({render_label(a) for a, _ in moves if getattr(a, "chan", None) == chan}))

    def _label_obligations(self, side: str, x: int, y: int, fx: LtsFragment, fy: LtsFragment):
        other = "right" if side == "left" else "left"
        ymoves, ycomplete = fy.weak_moves[y]
        for a, x2 in fx.edges_from(x):
            if isinstance(a, Tau):
                continue
            if isinstance(a, FreeOutput):
                entries = [
                    ("pair", self._key(side, x2, y2)) for b, y2 in ymoves if b == a
                ]
                blame = Blame(
                    side,
                    "output-move",
                    render_label(a),
                    f"{side} performs free output {render_label(a)} with no weak match on the {other}",
                    self._near_miss(fy, y, a.chan),
                )
                yield ("exists", tuple(entries), ycomplete, blame)
            elif isinstance(a, BoundOutput):
                entries = []
                for b, y2 in ymoves:
                    if not isinstance(b, BoundOutput) or b.chan != a.chan:
                        continue
                    entries.append(self._aligned_entry(side, fx, fy, x2, y2, b.datum, a.datum))
                blame = Blame(
                    side,
                    "output-move",
                    render_label(a),
                    f"{side} performs bound output {render_label(a)} with no weak match on the {other}",
                    self._near_miss(fy, y, a.chan),
                )
                yield ("exists", tuple(entries), ycomplete, blame)
            elif isinstance(a, InputLab) and self.kind.kind == "ewb":
                yield self._input_obligation(side, x2, a, y, fx, fy, ymoves, ycomplete)
        if self.kind.kind == "wab":
            xmoves, xcomplete = fx.weak_moves[x]
            if not xcomplete:
                yield ("static", _TAINT, None)
            for a, x2 in xmoves:
                if not isinstance(a, InputLab):
                    continue
                branch_a = self._input_obligation(side, x2, a, y, fx, fy, ymoves, ycomplete)
                cly, closedy = fy.tau_closure[y]
                entries = []
                for y2 in sorted(cly):
                    buffered = normalize(Par(fy.states[y2], Output(a.chan, a.datum, NIL)))
                    entries.append(self._resolve(side, fx, fy, x2, buffered))
                branch_b = ("exists", tuple(entries), closedy, None)
                blame = Blame(
                    side,
                    "input-move",
                    render_label(a),
                    f"{side} weak input {render_label(a)} has neither a weak input match nor a buffered-output match on the {other}",
                    self._near_miss(fy, y, a.chan),
                )
                yield ("disj", (branch_a, branch_b), blame)

    def _aligned_entry(self, side, fx, fy, x2, y2, have, want):
        if have == want:
            return ("pair", self._key(side, x2, y2))
        aligned = normalize(substitute(fy.states[y2], have, want))
        return self._resolve(side, fx, fy, x2, aligned)

    def _resolve(self, side, fx, fy, x2, term: Process):
        j2 = fy.index_of(term)
        if j2 is not None:
            return ("pair", self._key(side, x2, j2))
        if fx.states[x2] == term:
            return ("ok",)
        return ("taint",)

    def _input_obligation(self, side, x2, a, y, fx, fy, ymoves, ycomplete):
        subs = []
        for w in self.wset:
            entries = []
            for b, y2 in ymoves:
                if not isinstance(b, InputLab) or b.chan != a.chan:
                    continue
                u1 = normalize(substitute(fx.states[x2], a.datum, w))
                u2 = normalize(substitute(fy.states[y2], b.datum, w))
                if u1 == u2:
                    entries.append(("ok",))
                    continue
                i2 = fx.index_of(u1)
                j2 = fy.index_of(u2)
                if i2 is not None and j2 is not None:
                    entries.append(("pair", self._key(side, i2, j2)))
                else:
                    entries.append(("taint",))
            subs.append(("exists", tuple(entries), ycomplete, None))
        other = "right" if side == "left" else "left"
        blame = Blame(
            side,
            "input-move",
            render_label(a),
            f"{side} performs input {render_label(a)} which the {other} side cannot weakly match",
            self._near_miss(fy, y, a.chan),
        )
        return ("forall", tuple(subs), blame)

    # --- evaluation -------------------------------------------------

    def _eval(self, ob, live) -> str:
        tag = ob[0]
        if tag == "static":
            return ob[1]
        if tag == "exists":
            _, entries, complete, _ = ob
            taint = not complete
            for e in entries:
                if e[0] == "ok":
                    return _OK
                if e[0] == "pair" and e[1] in live:
                    return _OK
                if e[0] == "pair2" and e[1] in live and e[2] in live:
                    return _OK
                if e[0] == "taint":
                    taint = True
            return _TAINT if taint else _FAIL
        if tag == "forall":
            worst = _OK
            for sub in ob[1]:
                s = self._eval(sub, live)
                if s == _FAIL:
                    return _FAIL
                if s == _TAINT:
                    worst = _TAINT
            return worst
        if tag == "disj":
            statuses = [self._eval(sub, live) for sub in ob[1]]
            if _OK in statuses:
                return _OK
            if all(s == _FAIL for s in statuses):
                return _FAIL
            return _TAINT
        raise AssertionError(ob)

    def refine(self, strict: bool):
        live = set(self.table)
        blames = {}
        changed = True
        while changed:
            changed = False
            for pair in sorted(live):
                fails = []
                tainted = False
                for ob in self.table[pair]:
                    s = self._eval(ob, live)
                    if s == _FAIL:
                        fails.append(ob[-1])
                    elif s == _TAINT:
                        tainted = True
                if fails or (strict and tainted):
                    live.discard(pair)
                    changed = True
                    if fails:
                        blames[pair] = tuple(b for b in fails if b is not None)
        return live, blames

    def audit(self, live) -> tuple:
        """Replay every clause against a fixed relation; returns definite
        violations (frontier-induced unknowns are not violations)."""
        bad = []
        for pair in sorted(live):
            for ob in self.table[pair]:
                s = self._eval(ob, live)
                if s == _FAIL:
                    blame = ob[-1]
                    bad.append((pair, s, blame.category if blame else "frontier"))
        return tuple(bad)

    def witness(self, blames) -> Optional[Witness]:
        dist = {(0, 0): 0}
        parent = {}
        dq = deque([(0, 0)])
        while dq:
            i, j = dq.popleft()
            here = dist[(i, j)]
            for a, i2 in self.fa.edges_from(i):
                np = (i2, j)
                if np not in dist:
                    dist[np] = here + 1
                    parent[np] = ((i, j), WitnessStep("left", render_label(a)))
                    dq.append(np)
            for b, j2 in self.fb.edges_from(j):
                np = (i, j2)
                if np not in dist:
                    dist[np] = here + 1
                    parent[np] = ((i, j), WitnessStep("right", render_label(b)))
                    dq.append(np)
        best = None
        for pair in sorted(blames):
            if pair not in dist:
                continue
            for k, blame in enumerate(blames[pair]):
                rank = (_CATEGORY_RANK[blame.category], dist[pair], pair, k)
                if best is None or rank < best[0]:
                    best = (rank, pair, blame)
        if best is None:
            return None
        _, pair, blame = best
        steps = []
        cur = pair
        while cur != (0, 0):
            prev, step = parent[cur]
            steps.append(step)
            cur = prev
        steps.reverse()
        return Witness(
            steps=tuple(steps),
            pair=(render_term(self.fa.states[pair[0]]), render_term(self.fb.states[pair[1]])),
            side=blame.side,
            category=blame.category,
            label=blame.label,
            detail=blame.detail,
            near_miss=blame.near_miss,
        )


def _build_engine(kind: RelationKind, p: Process, q: Process, depth: int) -> _Engine:
    if kind.reduction_based:
        fa = build_fragment(p, depth, label_mode="tau_only")
        fb = build_fragment(q, depth, label_mode="tau_only")
        wset = ()
    else:
        shared_free = _free(p) | _free(q)
        extras = universe_fresh_names(names(p) | names(q), max(depth, 1))
        uni = shared_free | frozenset(extras)
        fa = build_fragment(p, depth, label_mode="all_labels", universe=uni)
        fb = build_fragment(q, depth, label_mode="all_labels", universe=uni)
        wset = tuple(sorted(shared_free | {extras[0]}))
    mode = "branching" if kind.branching else "weak"
    return _Engine(kind, saturate(fa, mode), saturate(fb, mode), wset)


def check_bisim(kind: RelationKind, p: Process, q: Process, depth: int) -> Verdict:
    """Decide whether p and q are related by the given equivalence kind,
    over fragments bounded by `depth`."""
    if isinstance(kind, str):
        kind = RelationKind(kind)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    approx = (_INPUT_UNIVERSE_NOTE,) if kind.kind in ("ewb", "wab") else ()
    if normalize(p) == normalize(q):
        # the identity relation is a bisimulation of every kind here,
        # whatever the exploration bound
        frag = build_fragment(
            p, depth, label_mode="tau_only" if kind.reduction_based else "all_labels"
        )
        rel = tuple((s, s) for s in frag.states)
        return Verdict("related", relation=rel, approximations=approx)
    eng = _build_engine(kind, p, q, depth)
    strict_live, _ = eng.refine(strict=True)
    if (0, 0) in strict_live:
        rel = tuple(
            (eng.fa.states[i], eng.fb.states[j]) for i, j in sorted(strict_live)
        )
        return Verdict("related", relation=rel, approximations=approx)
    loose_live, blames = eng.refine(strict=False)
    if (0, 0) not in loose_live:
        return Verdict("not_related", witness=eng.witness(blames), approximations=approx)
    return Verdict(
        "unknown",
        reason="bounded exploration hit a frontier or left the built fragments",
        approximations=approx,
    )


def audit_relation(kind: RelationKind, p: Process, q: Process, depth: int, relation) -> tuple:
    """Replay a Related verdict's relation clause-by-clause; empty result
    means the self-audit passed."""
    if isinstance(kind, str):
        kind = RelationKind(kind)
    eng = _build_engine(kind, p, q, depth)
    live = set()
    bad = []
    for pa, pb in relation:
        i = eng.fa.index_of(pa)
        j = eng.fb.index_of(pb)
        if i is None or j is None:
            bad.append(((pa, pb), "fail", "pair outside fragments"))
        else:
            live.add((i, j))
    return tuple(bad) + eng.audit(live)
