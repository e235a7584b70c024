"""Operational-correspondence criteria, the inert-reduction relation and
per-instance testers for the supporting lemmas."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .congruence import congruent, normalize, unfold_once
from .encodings import Boudol, EncodingScheme, HondaTokoro, Op, _encode, apply_op, encode, encoding_context, fill
from .equivalences import SRWRB, RelationKind, check_bisim
from .observables import IN, OUT, strong_barbs, weak_barbs, succ
from .semantics import reduce_once
from .syntax import (NIL, Input, Nil, Output, Par, Process, Restrict,
                     _free, alpha_eq, is_async, substitute, substitute_all)
from .text import render_term

PROTOCOL_STEPS = {Boudol: 3, HondaTokoro: 2}


@dataclass(frozen=True)
class Criterion:
    """Correspondence criterion selector: completeness (c), its weakened
    form (cp), and the soundness ladder (i, s, w, g).  The equivalence
    parameter feeds the target-side comparison where one is allowed."""

    tag: str
    equivalence: Optional[RelationKind] = None

    def __post_init__(self):
        if self.tag not in ("c", "cp", "i", "s", "w", "g"):
            raise ValueError(f"unknown criterion {self.tag!r}")


@dataclass(frozen=True)
class CheckReport:
    check_id: str
    instance: Mapping
    status: str  # "pass" | "fail" | "unknown"
    details: Mapping = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def _block_and_components(p: Process):
    binders = []
    while isinstance(p, Restrict):
        binders.append(p.binder)
        p = p.body
    comps = []
    spine = [p]
    while spine:
        t = spine.pop()
        if isinstance(t, Par):
            spine.append(t.left)
            spine.append(t.right)
        elif not isinstance(t, Nil):
            comps.append(t)
    comps.reverse()
    return binders, comps


def _rebuild(binders, comps) -> Process:
    if not comps:
        body = NIL
    else:
        body = comps[0]
        for c in comps[1:]:
            body = Par(body, c)
    for b in reversed(binders):
        body = Restrict(b, body)
    return body


def inert_steps(p: Process) -> frozenset:
    """All one-step inert reducts of an asynchronous term: a private
    send/receive pair on a restricted channel is consumed, provided the
    channel has no other occurrence afterwards.  Results are canonical;
    matching happens on the normal form with one replication unfolding
    allowed."""
    if not is_async(p):
        raise ValueError("inert reduction is defined on the asynchronous fragment")
    starts = {normalize(p)}
    starts.update(normalize(u) for u in unfold_once(normalize(p)))
    out = set()
    for start in starts:
        binders, comps = _block_and_components(start)
        for v in binders:
            for i, ci in enumerate(comps):
                if not (isinstance(ci, Output) and ci.chan == v and ci.cont == NIL):
                    continue
                for j, cj in enumerate(comps):
                    if j == i or not (isinstance(cj, Input) and cj.chan == v):
                        continue
                    received = substitute(cj.cont, cj.binder, ci.datum)
                    others = [c for k, c in enumerate(comps) if k not in (i, j)]
                    leftover = frozenset().union(
                        *(_free(c) for c in others), _free(received)
                    )
                    if v in leftover:
                        continue
                    rest = [b for b in binders if b != v]
                    out.add(normalize(_rebuild(rest, others + [received])))
    return frozenset(out)


def inert_closure(p: Process, depth: int) -> frozenset:
    """Canonical terms reachable by at most `depth` inert steps."""
    seen = {normalize(p)}
    frontier = set(seen)
    for _ in range(depth):
        nxt = set()
        for t in frontier:
            for u in inert_steps(t):
                if u not in seen:
                    seen.add(u)
                    nxt.add(u)
        frontier = nxt
        if not frontier:
            break
    return frozenset(seen)


def _tau_reachable(p: Process, bound: int) -> list:
    """Canonical states reachable within `bound` reductions, with their
    distance, in BFS order."""
    root = normalize(p)
    dist = {root: 0}
    order = [root]
    queue = [root]
    while queue:
        t = queue.pop(0)
        if dist[t] >= bound:
            continue
        for u in reduce_once(t):
            if u not in dist:
                dist[u] = dist[t] + 1
                order.append(u)
                queue.append(u)
    return [(t, dist[t]) for t in order]


LEMMA_IDS = ("l1", "l2", "l2star", "pb", "l5", "l6")


def check_lemma(
    lemma_id: str,
    term: Process,
    depth: int = 8,
    scheme: EncodingScheme = Boudol,
) -> CheckReport:
    """Evaluate one supporting lemma on a concrete instance."""
    lemma_id = lemma_id.lower()
    if lemma_id not in LEMMA_IDS:
        raise ValueError(f"unknown lemma id {lemma_id!r}")
    instance = {"lemma": lemma_id, "term": render_term(term), "depth": depth}
    details: dict = {}

    if lemma_id == "l1":
        # reduction is closed under structural congruence, so membership
        # is up to one replication unfold (the inert start may have used one)
        reducts = reduce_once(normalize(term))
        missing = [
            q
            for q in sorted(inert_steps(term), key=render_term)
            if not any(congruent(q, r, 1) for r in reducts)
        ]
        details["inert_steps"] = len(inert_steps(term))
        details["missing"] = [render_term(q) for q in missing]
        return CheckReport("lemma-l1", instance, "fail" if missing else "pass", details)

    if lemma_id == "l2":
        violations = []
        checked = 0
        for q in sorted(inert_steps(term), key=render_term):
            for p2 in reduce_once(normalize(term)):
                if congruent(p2, q, 1):
                    continue
                checked += 1
                if not any(
                    congruent(q2, r, 1)
                    for q2 in reduce_once(q)
                    for r in inert_steps(p2)
                ):
                    violations.append((render_term(p2), render_term(q)))
        details["obligations"] = checked
        details["violations"] = violations
        return CheckReport("lemma-l2", instance, "fail" if violations else "pass", details)

    if lemma_id == "l2star":
        violations = []
        for q in sorted(inert_closure(term, depth), key=render_term):
            for p2 in reduce_once(normalize(term)):
                closure_p2 = inert_closure(p2, depth)
                if q in closure_p2:
                    continue
                if not any(r in closure_p2 for r in reduce_once(q)):
                    violations.append((render_term(p2), render_term(q)))
        details["violations"] = violations
        return CheckReport("lemma-l2star", instance, "fail" if violations else "pass", details)

    if lemma_id == "pb":
        want = frozenset(b for b in strong_barbs(term) if b.kind in (IN, OUT))
        violations = []
        for q in sorted(inert_steps(term), key=render_term):
            have = strong_barbs(q)
            lost = sorted(str(b) for b in want - have)
            if lost:
                violations.append({"target": render_term(q), "lost": lost})
        details["violations"] = violations
        return CheckReport("lemma-pb", instance, "fail" if violations else "pass", details)

    if lemma_id == "l5":
        return _completeness_report("lemma-l5", scheme, term, PROTOCOL_STEPS[scheme], instance)

    # l6
    image = encode(scheme, term)
    source_reducts = reduce_once(normalize(term))
    failures = []
    for q in reduce_once(normalize(image)):
        closure = inert_closure(q, depth)
        if not any(
            any(congruent(c, _encode(scheme, p2), 1) for c in closure)
            for p2 in source_reducts
        ):
            failures.append(render_term(q))
    details["failures"] = failures
    return CheckReport("lemma-l6", instance, "fail" if failures else "pass", details)


def _completeness_report(check_id, scheme, term, bound, instance, match_related=None, eq_depth=8):
    image = normalize(encode(scheme, term))
    reach = _tau_reachable(image, bound)
    per_reduct = []
    ok = True
    for p2 in reduce_once(normalize(term)):
        target = _encode(scheme, p2)
        hit = None
        for state, d in reach:
            if match_related is None:
                matched = congruent(state, target, 1)
            else:
                matched = check_bisim(match_related, state, target, eq_depth).is_related
            if matched:
                hit = d
                break
        per_reduct.append({"reduct": render_term(p2), "path_length": hit})
        if hit is None:
            ok = False
    details = {"reducts": per_reduct, "bound": bound}
    return CheckReport(check_id, instance, "pass" if ok else "fail", details)


def check_completeness(
    scheme: EncodingScheme, term: Process, step_bound: Optional[int] = None
) -> CheckReport:
    """Operational completeness: every source reduct is reached by the
    translation within the protocol's step budget."""
    bound = PROTOCOL_STEPS[scheme] if step_bound is None else step_bound
    if bound < 1:
        raise ValueError("step_bound must be >= 1")
    instance = {
        "criterion": "c",
        "scheme": scheme.tag,
        "term": render_term(term),
        "bound": bound,
    }
    return _completeness_report("criterion-c", scheme, term, bound, instance)


def check_soundness(
    criterion: Criterion, scheme: EncodingScheme, term: Process, depth: int
) -> CheckReport:
    """Soundness criteria: every (weak) step of the translation must be
    explained by a source computation, at the criterion's strictness."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    tag = criterion.tag
    instance = {"criterion": tag, "scheme": scheme.tag, "term": render_term(term), "depth": depth}
    if tag in ("c", "cp"):
        rep = _completeness_report(
            f"criterion-{tag}",
            scheme,
            term,
            PROTOCOL_STEPS[scheme],
            instance,
            match_related=None if criterion.equivalence is None else criterion.equivalence,
        )
        return rep

    image = normalize(encode(scheme, term))
    factor = PROTOCOL_STEPS[scheme]
    source_states = _tau_reachable(normalize(term), depth)
    source_images = [(_encode(scheme, s), s) for s, _ in source_states]

    if tag == "i":
        failures = []
        for t in reduce_once(image):
            if not any(
                congruent(t, _encode(scheme, s2), 1) for s2 in reduce_once(normalize(term))
            ):
                failures.append(render_term(t))
        status = "fail" if failures else "pass"
        return CheckReport("criterion-i", instance, status, {"failures": failures})

    targets = _tau_reachable(image, factor * depth)
    exhaustive = all(
        d < factor * depth or not reduce_once(state) for state, d in targets
    )
    failures = []
    undecided = []
    for t, _ in targets:
        saw_unknown = False
        matched = False
        if tag == "s":
            reach_t = _tau_reachable(t, factor * depth)
            matched = any(
                congruent(u, img, 1) for u, _ in reach_t for img, _ in source_images
            )
            if not matched:
                saw_unknown = any(
                    d >= factor * depth and reduce_once(u) for u, d in reach_t
                )
        elif tag == "w":
            eq = criterion.equivalence or SRWRB
            for img, _ in source_images:
                v = check_bisim(eq, t, img, depth)
                if v.is_related:
                    matched = True
                    break
                saw_unknown = saw_unknown or v.is_unknown
        else:  # g
            eq = criterion.equivalence or SRWRB
            reach_t = _tau_reachable(t, factor * depth)
            for u, _ in reach_t:
                for img, _ in source_images:
                    v = check_bisim(eq, u, img, depth)
                    if v.is_related:
                        matched = True
                        break
                    saw_unknown = saw_unknown or v.is_unknown
                if matched:
                    break
        if not matched:
            if saw_unknown:
                undecided.append(render_term(t))
            else:
                failures.append(render_term(t))
    if failures:
        status = "fail"
    elif undecided or not exhaustive:
        status = "unknown"
    else:
        status = "pass"
    return CheckReport(
        f"criterion-{tag}",
        instance,
        status,
        {"failures": failures, "undecided": undecided, "targets": len(targets)},
    )


def check_success_sensitiveness(scheme: EncodingScheme, term: Process, depth: int) -> CheckReport:
    """S reports success weakly iff its translation does; the target search
    is scaled by the protocol factor."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    factor = PROTOCOL_STEPS[scheme]
    sb, s_exh = weak_barbs(term, depth)
    tb, t_exh = weak_barbs(encode(scheme, term), factor * depth)
    s_has, t_has = succ() in sb, succ() in tb
    instance = {"scheme": scheme.tag, "term": render_term(term), "depth": depth}
    details = {
        "source_succeeds": s_has,
        "target_succeeds": t_has,
        "source_exhaustive": s_exh,
        "target_exhaustive": t_exh,
    }
    if s_has and t_has:
        status = "pass"
    elif s_has and not t_has:
        status = "fail" if t_exh else "unknown"
    elif t_has and not s_has:
        status = "fail" if s_exh else "unknown"
    else:
        status = "pass" if (s_exh and t_exh) else "unknown"
    return CheckReport("success-sensitiveness", instance, status, details)


def _is_injective(sigma: Mapping) -> bool:
    values = list(sigma.values())
    if len(set(values)) != len(values):
        return False
    return all(v in sigma or v == k for k, v in sigma.items())


def check_name_invariance(
    scheme: EncodingScheme, term: Process, sigma: Mapping, depth: int = 8
) -> CheckReport:
    """Renaming commutes with the translation: exactly for injective
    renamings, up to weak barbed bisimilarity otherwise."""
    if any(k.reserved or v.reserved for k, v in sigma.items()):
        raise ValueError("renamings may not touch reserved names")
    renamed_then_encoded = encode(scheme, substitute_all(term, sigma))
    encoded_then_renamed = substitute_all(encode(scheme, term), sigma)
    injective = _is_injective(sigma)
    instance = {
        "scheme": scheme.tag,
        "term": render_term(term),
        "sigma": {str(k): str(v) for k, v in sorted(sigma.items())},
        "injective": injective,
    }
    if injective:
        ok = alpha_eq(renamed_then_encoded, encoded_then_renamed)
        return CheckReport("name-invariance", instance, "pass" if ok else "fail", {})
    verdict = check_bisim(RelationKind("wbb"), renamed_then_encoded, encoded_then_renamed, depth)
    status = {"related": "pass", "not_related": "fail", "unknown": "unknown"}[verdict.status]
    return CheckReport("name-invariance", instance, status, {"verdict": verdict.status})


def check_compositionality(scheme: EncodingScheme, op: Op, args) -> CheckReport:
    """Compare the direct translation of op(args) against context filling,
    in both regimes: exact equality with the names-aware context, and
    equality up to alpha with the names-independent default context."""
    args = tuple(args)
    direct = _encode(scheme, apply_op(op, args))
    encoded = tuple(_encode(scheme, a) for a in args)
    arg_names = frozenset().union(*(_free(a) for a in args)) if args else frozenset()

    ctx_n = encoding_context(scheme, op, arg_names)
    exact_n = fill(ctx_n, encoded) == direct
    ctx_default = encoding_context(scheme, op, frozenset())
    exact_default = fill(ctx_default, encoded) == direct
    alpha_default = alpha_eq(fill(ctx_default, encoded, capture_avoiding=True), direct)

    status = "pass" if (exact_n and alpha_default) else "fail"
    instance = {
        "scheme": scheme.tag,
        "op": op.tag,
        "args": [render_term(a) for a in args],
    }
    details = {
        "exact_with_n_context": exact_n,
        "exact_with_default_context": exact_default,
        "alpha_with_default_context": alpha_default,
    }
    return CheckReport("compositionality", instance, status, details)
