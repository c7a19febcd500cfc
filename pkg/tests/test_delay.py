"""Delay values pinned against plain step arithmetic.

Each derived behavior gets an oracle computed without the library: step
counts are integers added by hand, weak bisimilarity over finite chains
is "same value, divergence only matches divergence"."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delaydist.delay import (DIVERGE, EXHAUSTED, KNOWN_DIVERGENT, DelayFuelError,
                             Deferred, Now, Step, Terminated, bind, defer, delay_n,
                             diverge, dmap, force, join, now, reify, render_delay,
                             resolve, step, step_count, strong_equal, weak_bisim)

VALUES = ("a", "b", "c")


def chains(values=VALUES, max_steps=4, with_diverge=True):
    out = [delay_n(n, v) for n in range(max_steps + 1) for v in values]
    if with_diverge:
        out.append(DIVERGE)
    return out


class TestConstructors:
    def test_delay_n_shapes(self):
        assert delay_n(0, "a") == Now("a")
        assert delay_n(2, "a") == Step(Step(Now("a")))

    def test_delay_n_rejects_negative(self):
        with pytest.raises(ValueError):
            delay_n(-1, "a")

    def test_step_requires_delay(self):
        with pytest.raises(TypeError):
            step("a")

    def test_diverge_is_the_marker(self):
        assert diverge() is DIVERGE


class TestForce:
    def test_exact_step_count(self):
        assert force(delay_n(3, "a"), 5) == Terminated("a", 3)

    def test_fuel_exhaustion(self):
        assert force(delay_n(3, "a"), 2) is EXHAUSTED

    def test_boundary_fuel_suffices(self):
        assert force(delay_n(3, "a"), 3) == Terminated("a", 3)

    def test_divergence_marker(self):
        assert force(diverge(), 100) is KNOWN_DIVERGENT
        assert force(Step(DIVERGE), 100) is KNOWN_DIVERGENT

    def test_deferred_chains_resolve(self):
        d = defer(lambda: Step(defer(lambda: Now("v"))))
        assert force(d, 4) == Terminated("v", 1)


class TestBindJoin:
    def test_left_unit_clause(self):
        k = lambda v: delay_n(2, v.upper())
        assert reify(bind(now("a"), k)) == delay_n(2, "A")

    def test_step_clause_keeps_guard(self):
        out = resolve(bind(delay_n(1, "a"), now))
        assert isinstance(out, Step)

    def test_diverge_clause(self):
        assert bind(DIVERGE, now) is DIVERGE

    def test_join_adds_layer_counts(self):
        # oracle: integer addition of the two layers' counts
        for m in range(5):
            for n in range(5):
                d = delay_n(m, delay_n(n, "v"))
                assert step_count(join(d)) == m + n
                assert force(join(d), 16).value == "v"

    def test_flattening_the_two_one_step_nestings(self):
        assert step_count(join(now(step(now("x"))))) == 1
        assert step_count(join(step(now(now("y"))))) == 1

    def test_bind_suspends_at_unforced_nodes(self):
        forced = []

        def tail():
            forced.append(True)
            return Now("a")

        d = Step(defer(tail))
        out = bind(d, now)
        assert not forced  # building the bind must not run the suspension
        assert step_count(out) == 1
        assert forced


class TestStrongEqual:
    def test_equal_chains(self):
        assert strong_equal(delay_n(2, "a"), delay_n(2, "a"), 16).is_yes

    def test_count_mismatch(self):
        assert strong_equal(delay_n(1, "a"), delay_n(2, "a"), 16).is_no

    def test_value_mismatch(self):
        assert strong_equal(delay_n(2, "a"), delay_n(2, "b"), 16).is_no

    def test_divergence_matches_itself_only(self):
        assert strong_equal(DIVERGE, DIVERGE, 4).is_yes
        assert strong_equal(DIVERGE, now("a"), 4).is_no

    def test_fuel_zero_on_suspended_tails(self):
        x = Step(defer(lambda: Now("a")))
        y = Step(defer(lambda: Now("a")))
        v = strong_equal(x, y, 0)
        assert v.is_unknown and v.fuel_spent == 0

    def test_custom_value_relation(self):
        rel = lambda u, v: u.lower() == v.lower()
        assert strong_equal(now("A"), now("a"), 4, value_eq=rel).is_yes

    def test_exhaustive_against_oracle(self):
        # oracle: chains are (count, value) pairs; equal iff both match
        pool = chains()
        for x, y in itertools.product(pool, repeat=2):
            if x is DIVERGE or y is DIVERGE:
                expected = x is y
            else:
                expected = (step_count(x) == step_count(y)
                            and force(x, 9).value == force(y, 9).value)
            assert strong_equal(x, y, 16).is_yes == expected


class TestWeakBisim:
    def test_ignores_finite_step_differences(self):
        assert weak_bisim(now("a"), delay_n(4, "a"), lambda u, v: u == v, 10).is_yes

    def test_divergence_never_meets_now(self):
        assert weak_bisim(diverge(), now("a"), lambda u, v: u == v, 10).is_no

    def test_reflexive_without_fuel(self):
        assert weak_bisim(now("a"), now("a"), lambda u, v: u == v, 0).is_yes

    def test_value_mismatch_after_stripping(self):
        assert weak_bisim(delay_n(2, "a"), delay_n(5, "b"), lambda u, v: u == v, 10).is_no

    def test_exhaustive_against_termination_oracle(self):
        # oracle: equal iff both diverge, or both terminate on equal values
        pool = chains()
        for x, y in itertools.product(pool, repeat=2):
            if x is DIVERGE or y is DIVERGE:
                expected = x is y
            else:
                expected = force(x, 9).value == force(y, 9).value
            assert weak_bisim(x, y, lambda u, v: u == v, 16).is_yes == expected

    def test_step_closure_exhaustive(self):
        rel = lambda u, v: u == v
        pool = chains()
        for d in pool:
            assert weak_bisim(d, Step(d), rel, 16).is_yes
        for x, y in itertools.product(pool, repeat=2):
            if weak_bisim(x, y, rel, 16).is_yes:
                assert weak_bisim(Step(x), y, rel, 16).is_yes

    def test_equivalence_exhaustive(self):
        rel = lambda u, v: u == v
        pool = chains()
        for d in pool:
            assert weak_bisim(d, d, rel, 16).is_yes
        for x, y in itertools.product(pool, repeat=2):
            assert weak_bisim(x, y, rel, 16).kind == weak_bisim(y, x, rel, 16).kind
        for x, y, z in itertools.product(pool, repeat=3):
            if weak_bisim(x, y, rel, 16).is_yes and weak_bisim(y, z, rel, 16).is_yes:
                assert weak_bisim(x, z, rel, 16).is_yes

    def test_join_preserves_bisimilarity(self):
        rel = lambda u, v: u == v
        inner = lambda d1, d2: weak_bisim(d1, d2, rel, 32)
        nested = [delay_n(m, delay_n(n, v))
                  for m in range(5) for n in range(5) for v in ("a", "b")]
        nested += [DIVERGE, delay_n(1, DIVERGE)]
        for x, y in itertools.product(nested, repeat=2):
            if weak_bisim(x, y, inner, 32).is_yes:
                assert weak_bisim(join(x), join(y), rel, 32).is_yes


class TestMonadLaws:
    def test_exhaustive_small(self):
        pool = chains(max_steps=3)
        k_table = {v: delay_n(i, v.upper()) for i, v in enumerate(VALUES)}
        h_table = {v: delay_n(1, v + v) for v in VALUES}
        h_table["A"] = DIVERGE
        h_table["B"] = now("b")
        h_table["C"] = delay_n(2, "c")
        k = lambda v: k_table[v]
        h = lambda v: h_table[v]
        for v in VALUES:
            assert strong_equal(bind(now(v), k), k(v), 32).is_yes
        for m in pool:
            assert strong_equal(bind(m, now), m, 32).is_yes
        for m in pool:
            lhs = bind(bind(m, k), h)
            rhs = bind(m, lambda v: bind(k(v), h))
            assert strong_equal(lhs, rhs, 32).is_yes


class TestObservation:
    def test_step_count(self):
        assert step_count(delay_n(7, "a")) == 7
        assert step_count(DIVERGE) is None

    def test_reify_materializes(self):
        lazy = defer(lambda: Step(defer(lambda: Step(Now("a")))))
        assert reify(lazy) == delay_n(2, "a")

    def test_reify_absorbs_steps_into_divergence(self):
        assert reify(Step(Step(DIVERGE))) is DIVERGE

    def test_reify_limit(self):
        def spin():
            return Step(defer(spin))

        with pytest.raises(DelayFuelError):
            reify(defer(spin), limit=50)

    def test_render(self):
        assert render_delay(delay_n(2, "a")) == "2·step ▸ a"
        assert render_delay(now("a")) == "0·step ▸ a"
        assert render_delay(DIVERGE) == "⊥"
        assert render_delay(Step(DIVERGE)) == "1·step ▸ ⊥"

    def test_deferred_forces_once(self):
        calls = []

        def thunk():
            calls.append(1)
            return Now("x")

        d = Deferred(thunk)
        assert d.peek() is None
        assert d.forced() is d.forced()
        assert calls == [1]


@st.composite
def delays(draw):
    n = draw(st.integers(min_value=0, max_value=6))
    if draw(st.booleans()) and draw(st.integers(0, 9)) == 0:
        return DIVERGE
    return delay_n(n, draw(st.sampled_from(VALUES)))


@given(delays(), st.integers(0, 3), st.sampled_from(VALUES))
@settings(max_examples=200, deadline=None)
def test_bind_step_counts_add(d, extra, v):
    k = lambda _: delay_n(extra, v)
    out = bind(d, k)
    if step_count(d) is None:
        assert step_count(out) is None
    else:
        assert step_count(out) == step_count(d) + extra
        assert force(out, 32).value == v


@given(delays())
@settings(max_examples=200, deadline=None)
def test_dmap_preserves_counts(d):
    out = dmap(d, lambda v: v.upper())
    assert step_count(out) == step_count(d)
    if step_count(d) is not None:
        assert force(out, 32).value == force(d, 32).value.upper()
