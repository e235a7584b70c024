"""Deterministic random term generation and suite execution."""

from __future__ import annotations

import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .correspondence import (CheckReport, Criterion, check_completeness,
                             check_lemma, check_soundness,
                             check_success_sensitiveness)
from .encodings import encode, scheme_from_string
from .equivalences import RelationKind, check_bisim
from .observables import CHAN, IN, OUT, strong_barbs
from .semantics import diverges
from .syntax import (NIL, OK, Input, Name, Output, Par, Process, Repl,
                     Restrict)
from .text import render_term

_DEFAULT_WEIGHTS = {
    "output": 3.0,
    "input": 3.0,
    "par": 3.0,
    "restrict": 1.5,
    "repl": 0.5,
}


@dataclass(frozen=True)
class GenConfig:
    """Knobs for the seeded term generator."""

    seed: int = 0
    max_size: int = 8
    name_pool: int = 3
    weights: Mapping = field(default_factory=lambda: dict(_DEFAULT_WEIGHTS))
    allow_replication: bool = True
    insert_success_probability: float = 0.0
    communication_bias: float = 0.0
    asynchronous: bool = False

    def __post_init__(self):
        if self.max_size < 1:
            raise ValueError("max_size must be >= 1")
        if self.name_pool < 1:
            raise ValueError("name_pool must be >= 1")
        for p in (self.insert_success_probability, self.communication_bias):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")


_POOL_IDENTS = "abcdexyzpqrs"


def _names(cfg: GenConfig):
    out = []
    for i in range(cfg.name_pool):
        if i < len(_POOL_IDENTS):
            out.append(Name(_POOL_IDENTS[i]))
        else:
            out.append(Name(f"n{i}"))
    return out


def _leaf(rng: random.Random, cfg: GenConfig) -> Process:
    if rng.random() < cfg.insert_success_probability:
        return OK
    return NIL


def _gen(rng: random.Random, cfg: GenConfig, budget: int, pool) -> Process:
    if budget <= 1:
        return _leaf(rng, cfg)
    choices = []
    for tag, w in sorted(cfg.weights.items()):
        if w <= 0:
            continue
        if tag == "repl" and not cfg.allow_replication:
            continue
        if tag == "par" and budget < 3:
            continue
        if tag == "output" and cfg.asynchronous and budget < 2:
            continue
        choices.append((tag, w))
    if not choices:
        return _leaf(rng, cfg)
    total = sum(w for _, w in choices)
    pick = rng.random() * total
    tag = choices[-1][0]
    for t, w in choices:
        pick -= w
        if pick <= 0:
            tag = t
            break
    if tag == "output":
        cont = NIL if cfg.asynchronous else _gen(rng, cfg, budget - 1, pool)
        return Output(rng.choice(pool), rng.choice(pool), cont)
    if tag == "input":
        return Input(rng.choice(pool), rng.choice(pool), _gen(rng, cfg, budget - 1, pool))
    if tag == "restrict":
        return Restrict(rng.choice(pool), _gen(rng, cfg, budget - 1, pool))
    if tag == "repl":
        return Repl(_gen(rng, cfg, budget - 1, pool))
    # par
    if rng.random() < cfg.communication_bias and budget >= 5:
        # complementary send/receive pair on a shared channel, sometimes
        # made private so the exchange is unobservable
        restrict = budget >= 6 and rng.random() < 0.5
        if restrict:
            budget -= 1
        chan = rng.choice(pool)
        lbudget = 2 if cfg.asynchronous else rng.randint(2, budget - 3)
        left = Output(chan, rng.choice(pool), NIL if cfg.asynchronous else _gen(rng, cfg, lbudget - 1, pool))
        right = Input(chan, rng.choice(pool), _gen(rng, cfg, budget - 1 - lbudget - 1, pool))
        pair = Par(left, right) if rng.random() < 0.5 else Par(right, left)
        return Restrict(chan, pair) if restrict else pair
    lbudget = rng.randint(1, budget - 2)
    return Par(_gen(rng, cfg, lbudget, pool), _gen(rng, cfg, budget - 1 - lbudget, pool))


def generate_corpus(cfg: GenConfig, count: int) -> tuple:
    """Deterministic corpus of well-formed source terms within max_size."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = random.Random(cfg.seed)
    pool = _names(cfg)
    out = []
    for _ in range(count):
        budget = rng.randint(1, cfg.max_size)
        out.append(_gen(rng, cfg, budget, pool))
    return tuple(out)


@dataclass(frozen=True)
class CheckSpec:
    """One named check to run over a corpus; params are check-specific."""

    check_id: str
    kind: str  # barb-preservation | chan-barb-preservation | bisim-validity
    #            | success | divergence | criterion | lemma
    params: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class Limits:
    depth: int = 8


@dataclass(frozen=True)
class SuiteReport:
    reports: tuple
    passed: int
    failed: int
    unknown: int
    config: Mapping

    def to_dict(self) -> dict:
        return {
            "config": dict(self.config),
            "summary": {"pass": self.passed, "fail": self.failed, "unknown": self.unknown},
            "reports": [
                {
                    "check_id": r.check_id,
                    "instance": dict(r.instance),
                    "status": r.status,
                    "details": _plain(r.details),
                }
                for r in self.reports
            ],
        }


def _plain(value):
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def _run_check(spec: CheckSpec, index: int, term: Process, limits: Limits) -> CheckReport:
    params = dict(spec.params)
    scheme = params.get("scheme")
    if isinstance(scheme, str):
        scheme = scheme_from_string(scheme)
    depth = int(params.get("depth", limits.depth))
    kind = spec.kind
    base = {"index": index, "term": render_term(term)}
    if kind == "barb-preservation":
        want = {b for b in strong_barbs(term) if b.kind in (IN, OUT)}
        have = {b for b in strong_barbs(encode(scheme, term)) if b.kind in (IN, OUT)}
        ok = want == have
        details = {
            "missing": sorted(str(b) for b in want - have),
            "extra": sorted(str(b) for b in have - want),
        }
        return CheckReport(spec.check_id, base, "pass" if ok else "fail", details)
    if kind == "chan-barb-preservation":
        want = {b for b in strong_barbs(term) if b.kind == CHAN}
        have = {b for b in strong_barbs(encode(scheme, term)) if b.kind == CHAN}
        ok = want == have
        return CheckReport(spec.check_id, base, "pass" if ok else "fail", {})
    if kind == "bisim-validity":
        rk = RelationKind(
            params["relation"],
            bool(params.get("divergence_preserving", False)),
            bool(params.get("branching", False)),
        )
        verdict = check_bisim(rk, term, encode(scheme, term), depth)
        status = {"related": "pass", "not_related": "fail", "unknown": "unknown"}[verdict.status]
        details = {"verdict": verdict.status}
        if verdict.witness is not None:
            details["witness"] = verdict.witness.describe()
        return CheckReport(spec.check_id, base, status, details)
    if kind == "success":
        rep = check_success_sensitiveness(scheme, term, depth)
        return CheckReport(spec.check_id, {**base, **rep.instance}, rep.status, rep.details)
    if kind == "divergence":
        d_src = diverges(term, depth)
        d_tgt = diverges(encode(scheme, term), depth * 3)
        if "unknown" in (d_src.status, d_tgt.status):
            status = "unknown"
        else:
            status = "pass" if d_src.status == d_tgt.status else "fail"
        return CheckReport(
            spec.check_id, base, status, {"source": d_src.status, "target": d_tgt.status}
        )
    if kind == "criterion":
        crit = Criterion(params["criterion"], params.get("equivalence"))
        if crit.tag == "c" and params.get("equivalence") is None:
            rep = check_completeness(scheme, term, params.get("step_bound"))
        else:
            rep = check_soundness(crit, scheme, term, depth)
        return CheckReport(spec.check_id, {**base, **rep.instance}, rep.status, rep.details)
    if kind == "lemma":
        if scheme is not None:
            rep = check_lemma(params["lemma"], term, depth, scheme)
        else:
            rep = check_lemma(params["lemma"], term, depth)
        return CheckReport(spec.check_id, {**base, **rep.instance}, rep.status, rep.details)
    raise ValueError(f"malformed check specification: unknown kind {spec.kind!r}")


def _worker_count() -> int:
    env = os.environ.get("WORKBENCH_THREADS")
    if env:
        return max(1, int(env))
    return 1


def run_suite(
    corpus: Sequence[Process],
    checks: Sequence[CheckSpec],
    limits: Limits = Limits(),
    config: Optional[Mapping] = None,
) -> SuiteReport:
    """Run every check over every corpus element.

    A failing or crashing check never aborts the suite; unknowns are
    counted apart from failures, and the report order is normalised."""
    jobs = []
    for spec in checks:
        for idx, term in enumerate(corpus):
            jobs.append((spec, idx, term))

    def run(job):
        spec, idx, term = job
        try:
            return (spec.check_id, idx), _run_check(spec, idx, term, limits)
        except Exception as exc:  # noqa: BLE001 - reported, not raised
            report = CheckReport(
                spec.check_id,
                {"index": idx, "term": render_term(term)},
                "fail",
                {"error": f"{type(exc).__name__}: {exc}"},
            )
            return (spec.check_id, idx), report

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    results.sort(key=lambda kv: kv[0])
    reports = tuple(r for _, r in results)
    passed = sum(1 for r in reports if r.status == "pass")
    failed = sum(1 for r in reports if r.status == "fail")
    unknown = sum(1 for r in reports if r.status == "unknown")
    return SuiteReport(reports, passed, failed, unknown, dict(config or {}))
