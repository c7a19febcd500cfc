"""Machine-checked refutation traces and the two step-count witnesses.

Every trace must replay rewrite by rewrite; tampering with any step has
to be caught.  The distribution family's delay exponent is pinned to an
independent least-power computation done with plain Fractions."""

import dataclasses
import re
from fractions import Fraction

import pytest

from delaydist import nogo
from delaydist.delay import step_count, strong_equal, weak_bisim
from delaydist.laws import TestUniverse as Universe
from delaydist import freemodel as fm


@pytest.fixture(scope="module")
def powerset_results():
    return nogo.powerset_nogo_search()


class TestPowersetSearch:
    def test_exactly_32_candidates(self, powerset_results):
        assert len(powerset_results) == 32
        assert len({cfg for cfg, _ in powerset_results}) == 32

    def test_every_trace_verifies(self, powerset_results):
        for cfg, trace in powerset_results:
            assert trace.verify(), cfg.describe()

    def test_no_survivors_means_all_clash(self, powerset_results):
        for _, trace in powerset_results:
            assert trace.clash.kind in ("ModelRefutation", "StepEqNow", "StepEqDoubleStep")

    def test_clash_kind_distribution(self, powerset_results):
        kinds = [t.clash.kind for _, t in powerset_results]
        assert kinds.count("ModelRefutation") == 27
        assert kinds.count("StepEqNow") == 3
        assert kinds.count("StepEqDoubleStep") == 2

    def test_double_step_trace_present(self, powerset_results):
        # at least one candidate is refuted by x after one step equalling
        # x after two
        found = []
        for cfg, trace in powerset_results:
            if trace.clash.kind == "StepEqDoubleStep":
                found.append(trace.render())
        assert found
        assert any("step(x) = step(step(x))" in r for r in found)

    def test_titles_carry_configuration(self, powerset_results):
        for cfg, trace in powerset_results:
            assert trace.title == f"powerset candidate {cfg.describe()}"
            assert cfg.branch in ("Eq1", "Eq2")

    def test_render_shape(self, powerset_results):
        _, trace = powerset_results[0]
        text = trace.render()
        assert "assuming:" in text
        assert re.search(r"\d+\. .*--\[.*\]-->", text)
        assert "derived:" in text
        assert "CLASH:" in text


class TestTraceIntegrity:
    def test_tampered_step_rejected(self, powerset_results):
        _, trace = powerset_results[0]
        bad_step = dataclasses.replace(trace.steps[-1], result=("var", "zz"))
        tampered = dataclasses.replace(trace, steps=trace.steps[:-1] + [bad_step])
        with pytest.raises(nogo.TraceError):
            tampered.verify()

    def test_wrong_clash_rejected(self, powerset_results):
        for _, trace in powerset_results:
            if trace.clash.kind == "StepEqNow":
                tampered = dataclasses.replace(trace, clash=nogo.Clash("StepEqDoubleStep"))
                with pytest.raises(nogo.TraceError):
                    tampered.verify()
                return
        pytest.fail("no StepEqNow trace found")

    def test_empty_trace_rejected(self, powerset_results):
        _, trace = powerset_results[0]
        with pytest.raises(nogo.TraceError):
            dataclasses.replace(trace, steps=[]).verify()

    def test_non_contradiction_is_an_error(self):
        with pytest.raises(nogo.TraceError):
            nogo.derive_clash(nogo.var("x"), nogo.var("x"))

    def test_derive_clash_kinds(self):
        x = nogo.var("x")
        assert nogo.derive_clash(nogo.step_t(x), nogo.now_t(x)).kind == "StepEqNow"
        assert nogo.derive_clash(nogo.step_t(x), nogo.step_t(nogo.step_t(x))).kind == \
            "StepEqDoubleStep"
        c = nogo.derive_clash(nogo.union_t(x, nogo.var("y")), x)
        assert c.kind == "ModelRefutation"
        assert c.model == "diamond"


class TestConvexRuleSoundness:
    def test_sound_rule_accepted(self):
        x, y = nogo.var("x"), nogo.var("y")
        r = nogo.convex_rule("comm", nogo.mix_t(Fraction(1, 2), x, y),
                             nogo.mix_t(Fraction(1, 2), y, x))
        assert r.name == "comm"

    def test_unsound_rule_rejected(self):
        x, y = nogo.var("x"), nogo.var("y")
        with pytest.raises(nogo.TraceError):
            nogo.convex_rule("bogus", nogo.mix_t(Fraction(1, 2), x, y),
                             nogo.mix_t(Fraction(1, 3), x, y))

    def test_degenerate_weight_rejected(self):
        x, y = nogo.var("x"), nogo.var("y")
        with pytest.raises(nogo.TraceError):
            nogo.convex_rule("w", nogo.mix_t(Fraction(1), x, y),
                             nogo.mix_t(Fraction(1), x, y))


def _least_n(p: Fraction, branch: str) -> int:
    # oracle: least n with (1/2)^n <= 1-p for Eq1, with (1-p)^n <= 1/2
    # for the mirrored branch; exact Fraction arithmetic throughout
    base, bound = (Fraction(1, 2), 1 - p) if branch == "Eq1" else (1 - p, Fraction(1, 2))
    n, w = 0, Fraction(1)
    while w > bound:
        n += 1
        w *= base
    return n


class TestDistributionsFamily:
    @pytest.mark.parametrize("p", [Fraction(1, 2), Fraction(2, 3), Fraction(1, 3),
                                   Fraction(3, 4), Fraction(63, 64), Fraction(1, 64)])
    @pytest.mark.parametrize("branch", ["Eq1", "Eq2"])
    def test_trace_verifies_with_pinned_exponent(self, p, branch):
        trace = nogo.distributions_nogo_replay(p, branch)
        assert trace.verify()
        assert trace.meta["p"] == p
        assert trace.meta["branch"] == branch
        assert trace.meta["n"] == _least_n(p, branch)

    def test_zero_slack_omits_leftover_weight(self):
        trace = nogo.distributions_nogo_replay(Fraction(1, 2), "Eq1")
        assert trace.meta["z_weight"] is None

    def test_positive_slack_records_leftover_weight(self):
        p = Fraction(1, 3)
        trace = nogo.distributions_nogo_replay(p, "Eq1")
        w = trace.meta["z_weight"]
        assert w is not None and 0 < w < 1

    def test_all_denominators_up_to_eight(self):
        for den in range(2, 9):
            for num in range(1, den):
                p = Fraction(num, den)
                for branch in ("Eq1", "Eq2"):
                    assert nogo.distributions_nogo_replay(p, branch).verify()

    @pytest.mark.parametrize("bad", [Fraction(0), Fraction(1), Fraction(5, 4),
                                     Fraction(-1, 2)])
    def test_degenerate_probability_rejected(self, bad):
        with pytest.raises(ValueError):
            nogo.distributions_nogo_replay(bad)

    def test_unknown_branch_rejected(self):
        with pytest.raises(ValueError):
            nogo.distributions_nogo_replay(Fraction(1, 2), "Eq3")

    def test_clash_is_step_eq_now(self):
        trace = nogo.distributions_nogo_replay(Fraction(1, 2), "Eq1")
        assert trace.clash.kind == "StepEqNow"


class TestStepCountWitness:
    def test_paths_differ_by_one_step(self):
        demo = nogo.mogelberg_vezzosi_witness()
        assert demo.step_counts == (1, 2)
        assert demo.entry.verdict.is_no
        assert demo.entry.predicted
        assert demo.weak_entry.verdict.is_yes

    def test_report_embeds_entry(self):
        demo = nogo.mogelberg_vezzosi_witness()
        r = demo.report()
        assert r.entry("MultT").verdict.is_no


class TestIdempotentUnary:
    def test_theory_shape(self):
        th = nogo.idempotent_unary_theory()
        assert th.rewrite_complete
        assert th.signature.arity("mul") == 2
        assert th.signature.arity("bang") == 1

    def test_witness_single_step_both_paths(self):
        lhs, rhs = nogo.idempotent_unary_witness()
        assert step_count(lhs) == 1
        assert step_count(rhs) == 1
        th = nogo.idempotent_unary_theory()
        rel = lambda a, b: fm.model_equal(th, a, b)
        assert strong_equal(lhs, rhs, 64, value_eq=lambda a, b: rel(a, b).is_yes).is_yes

    def test_lift_rejects_unknown_op(self):
        th = nogo.idempotent_unary_theory()
        with pytest.raises(ValueError):
            nogo.step_absorbing_lift("frob", [], th)

    def test_demo_passes_reduced_bounds_strict_and_weak(self):
        # weak consistency: whatever passes strictly must pass weakly too
        strict = nogo.idempotent_unary_demo(
            Universe(carrier_size=2, max_steps=1, max_depth=1))
        assert strict.all_yes
        weak = nogo.idempotent_unary_demo(
            Universe(carrier_size=2, max_steps=1, max_depth=1, relation="weak"))
        assert weak.all_yes
