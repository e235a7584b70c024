import random

import pytest

from _oracle import enum_terms, oracle_classes, scramble
from piworkbench.congruence import congruent, normalize, unfold_once
from piworkbench.syntax import NIL, Name, free_names, size
from piworkbench.text import parse_term, render_term


def test_par_unit_dropped():
    p = parse_term("x!a.y?(q).0 | 0")
    assert normalize(p) == normalize(parse_term("x!a.y?(q).0"))


def test_restrict_over_nil_dropped():
    assert normalize(parse_term("(nu y)0")) == NIL


def test_scope_extrusion_same_normal_form():
    # w not in n(P): (nu w)(P | Q) and P | (nu w)Q coincide
    lhs = parse_term("(nu w)(x!a | w?(q).q!b)")
    rhs = parse_term("x!a | (nu w)w?(q).q!b")
    assert normalize(lhs) == normalize(rhs)


def test_commutativity_and_associativity():
    terms = ["x!a | (y!b | z!c)", "(z!c | y!b) | x!a", "y!b | (x!a | z!c)"]
    forms = {normalize(parse_term(t)) for t in terms}
    assert len(forms) == 1


def test_unused_restriction_dropped():
    assert normalize(parse_term("(nu q)(x!a)")) == normalize(parse_term("x!a"))


def test_congruent_replication_unfold():
    p = parse_term("!(x!a)")
    q = parse_term("x!a | !(x!a)")
    assert not congruent(p, q, 0)
    assert congruent(p, q, 1)


def test_congruent_reflexive_budget_zero():
    p = parse_term("!(x!a | y?(q).0)")
    assert congruent(p, p, 0)


def test_congruent_distinct_free_usage():
    assert not congruent(parse_term("x!a"), parse_term("a!x"), 0)


def test_normalize_idempotent_examples():
    for t in [
        "x!a | (0 | (nu q)(q!b | q?(r).r!c))",
        "!(x?(y).(y!a | 0)) | (nu w)0",
        "(nu a)(nu b)(a!b | b!a | x?(q).(nu c)(c!q | q!c))",
    ]:
        n = normalize(parse_term(t))
        assert normalize(n) == n


def test_normalize_budget_validated():
    with pytest.raises(ValueError):
        normalize(NIL, -1)


def test_unfold_once_positions():
    p = parse_term("!(x!a) | y?(q).!(q!b)")
    got = {render_term(u) for u in unfold_once(p)}
    assert got == {
        "x!a | !x!a | y?(q).!q!b",
        "!x!a | y?(q).(q!b | !q!b)",
    }


def test_fn_preserved_by_normalize():
    rng = random.Random(7)
    pool = [Name(c) for c in "ab"]
    for t in enum_terms(4, pool):
        assert free_names(normalize(t)).free == free_names(t).free


def test_normalize_idempotent_on_protocol_states():
    # every canonical state reachable inside encoded protocols must be a
    # fixpoint of normalize (regression: binder-order signatures used to
    # depend on the pre-canonical presentation)
    from piworkbench.encodings import Boudol, HondaTokoro, encode
    from piworkbench.harness import GenConfig, generate_corpus
    from piworkbench.semantics import build_fragment

    cfg = GenConfig(seed=77, max_size=8, allow_replication=False,
                    communication_bias=0.8)
    for t in generate_corpus(cfg, 20):
        for scheme in (Boudol, HondaTokoro):
            frag = build_fragment(encode(scheme, t), 6, label_mode="tau_only")
            for s in frag.states:
                assert normalize(s) == s, render_term(s)


def test_normalize_invariant_under_scrambling():
    rng = random.Random(99)
    corpus = [
        "x!a | y?(q).(q!b | 0)",
        "(nu w)(w!a | w?(q).q!b) | x!c",
        "!(x!a) | (nu q)(q?(r).0 | q!x)",
        "x?(y).(nu w)(w!y | w?(v).v!y)",
    ]
    for t in corpus:
        p = parse_term(t)
        for _ in range(5):
            q = scramble(p, rng)
            assert normalize(q) == normalize(p), render_term(q)


def test_congruent_agrees_with_rewrite_closure_oracle():
    # exhaustive rewrite closure over a bounded universe: seeds are raw
    # (non-canonical) small terms, classes come from the axioms alone
    pool = [Name(c) for c in "ab"]
    rng = random.Random(3)
    seeds = []
    seen = set()
    for t in enum_terms(3, pool):
        variants = [t] + [scramble(t, rng, steps=2) for _ in range(2)]
        for variant in variants:
            if size(variant) <= 5 and variant not in seen:
                seen.add(variant)
                seeds.append(variant)
    classes = oracle_classes(seeds, size_cap=5, pool=pool + [Name("spare1")])
    agree_true = agree_false = 0
    for i, p in enumerate(seeds):
        for q in seeds[i + 1 :]:
            got = congruent(p, q, 0)
            want = classes[p] == classes[q]
            assert got == want, (render_term(p), render_term(q), got, want)
            agree_true += got
            agree_false += not got
    assert agree_true >= 30
    assert agree_false >= 1000


def test_congruent_true_on_scrambled_larger_terms():
    # the scramble path is itself an axiom derivation, so these pairs are
    # congruent by construction
    rng = random.Random(11)
    for t in [
        "x!a | (nu w)(w!b | w?(q).(q!a | 0)) | y?(r).r!x",
        "!(x?(y).y!a) | z!b | (nu c)(c!z | c?(d).d!z)",
    ]:
        p = parse_term(t)
        for _ in range(8):
            q = scramble(p, rng, steps=8)
            assert congruent(p, q, 0)
