"""Axiom-suite engine behaviour: verdict bookkeeping, witnesses, JSON,
bound monotonicity, and the composite monad-law checks."""

import itertools
import json

import pytest

from delaydist import freemodel as fm
from delaydist import laws
from delaydist.laws import (AXIOM_ORDER, LawReport, UniverseBudgetError,
                            check_delay_monad_laws, render_report, report_from_json_dict,
                            run_suite)
from delaydist.laws import TestUniverse as Universe
from delaydist.lifting import induced_candidate


def _suite(th, mode, **bounds):
    return run_suite(th, mode, Universe(**bounds))


class TestUniverseConfig:
    def test_defaults(self):
        u = Universe()
        assert (u.carrier_size, u.max_steps, u.max_depth) == (2, 3, 2)
        assert u.relation == "strict"

    @pytest.mark.parametrize("kwargs", [
        {"carrier_size": 0}, {"carrier_size": 5}, {"max_steps": -1},
        {"max_depth": -1}, {"relation": "fuzzy"}, {"fuel": 0},
        {"case_budget": 0},
    ])
    def test_rejects_bad_bounds(self, kwargs):
        with pytest.raises(ValueError):
            Universe(**kwargs)

    def test_bounds_dict_keys(self):
        d = Universe().bounds_dict()
        assert set(d) == {"carrierSize", "maxSteps", "maxDepth", "fuel", "includeDiverge"}


class TestReportShape:
    def test_axioms_in_canonical_order(self):
        r = _suite(fm.semilattice(), "seq", carrier_size=1, max_steps=1, max_depth=1)
        assert tuple(e.axiom for e in r.entries) == AXIOM_ORDER

    def test_seq_semilattice_fails_where_predicted(self):
        r = _suite(fm.semilattice(), "seq", carrier_size=2, max_steps=2, max_depth=2)
        eqp = r.entry("EquationPreservation")
        assert eqp.verdict.is_no
        assert eqp.predicted
        assert "idem" in (eqp.witness.note or "") or any(
            "idem" in d[0] for d in eqp.details)
        assert not r.unexpected_failures

    def test_seq_monoid_all_yes(self):
        r = _suite(fm.monoid(), "seq", carrier_size=2, max_steps=1, max_depth=1)
        assert r.all_yes
        assert r.guaranteed

    def test_witness_replays_bit_for_bit(self):
        r = _suite(fm.semilattice(), "seq", carrier_size=2, max_steps=2, max_depth=2)
        seen = 0
        for e in r.entries:
            if e.witness is not None and e.witness.replay is not None:
                lhs, rhs = e.witness.replay()
                assert (lhs, rhs) == (e.witness.lhs_render, e.witness.rhs_render)
                seen += 1
        assert seen >= 1

    def test_case_counts_positive(self):
        r = _suite(fm.monoid(), "seq", carrier_size=2, max_steps=1, max_depth=1)
        counts = r.case_counts
        assert set(counts) == set(AXIOM_ORDER)
        assert all(c > 0 for c in counts.values())

    def test_no_equations_means_no_preservation_cases(self):
        r = _suite(fm.magma(), "seq", carrier_size=2, max_steps=1, max_depth=1)
        assert r.entry("EquationPreservation").cases == 0
        assert r.entry("EquationPreservation").verdict.is_yes


class TestMonotonicity:
    # growing any bound must not flip a Yes to a No on configurations the
    # theory guarantees
    SETTINGS = [
        dict(carrier_size=1, max_steps=1, max_depth=1),
        dict(carrier_size=2, max_steps=2, max_depth=1),
        dict(carrier_size=2, max_steps=2, max_depth=2),
    ]

    def test_monoid_seq_strict_stays_yes(self):
        for kw in self.SETTINGS:
            assert _suite(fm.monoid(), "seq", **kw).all_yes, kw

    def test_semilattice_par_weak_stays_yes(self):
        for kw in self.SETTINGS:
            r = _suite(fm.semilattice(), "par", relation="weak", **kw)
            assert r.all_yes, kw
            assert r.guaranteed


class TestJsonRoundTrip:
    @pytest.mark.parametrize("th,mode,relation", [
        (fm.monoid(), "seq", "strict"),
        (fm.semilattice(), "seq", "strict"),
        (fm.semilattice(), "par", "weak"),
    ])
    def test_parse_emit_identity(self, th, mode, relation):
        r = _suite(th, mode, carrier_size=2, max_steps=2, max_depth=2,
                   relation=relation)
        back = report_from_json_dict(json.loads(r.to_json()))
        assert back == r

    def test_schema_keys(self):
        r = _suite(fm.monoid(), "seq", carrier_size=1, max_steps=1, max_depth=1)
        d = r.to_json_dict()
        assert set(d) >= {"theory", "mode", "relation", "bounds", "axioms",
                          "caseCounts", "elapsedMs"}
        for a in d["axioms"]:
            assert {"name", "verdict"} <= set(a)
        assert set(d["caseCounts"]) == set(AXIOM_ORDER)


class TestUnknowns:
    def test_tiny_fuel_yields_unknown(self):
        # with include_diverge the strict comparison cannot settle bottom
        # against bottom without enough fuel
        r = _suite(fm.monoid(), "seq", carrier_size=1, max_steps=2, max_depth=1,
                   include_diverge=True, fuel=1)
        assert r.has_unknown
        for e in r.entries:
            if e.verdict.is_unknown:
                assert e.verdict.fuel_spent >= 1
                d = e.to_json_dict()
                assert d["fuelSpent"] == e.verdict.fuel_spent

    def test_case_budget_enforced(self):
        with pytest.raises(UniverseBudgetError):
            _suite(fm.monoid(), "seq", carrier_size=2, max_steps=3, max_depth=2,
                   case_budget=5000)


class TestCompositeLaws:
    def test_delay_monad_laws_hold(self):
        out = check_delay_monad_laws()
        assert out.verdict.is_yes
        assert out.cases > 0

    def test_composite_laws_for_guaranteed_candidate(self):
        r = _suite(fm.monoid(), "seq", carrier_size=2, max_steps=1, max_depth=1)
        assert r.entry("MonadLaws").verdict.is_yes

    def test_composite_laws_fail_without_distributivity(self):
        r = _suite(fm.semilattice(), "seq", carrier_size=2, max_steps=2, max_depth=2)
        e = r.entry("MonadLaws")
        assert e.verdict.is_no
        assert e.predicted


class TestCustomCandidateEntry:
    def test_candidate_object_accepted(self):
        from delaydist.lifting import custom_candidate, seq_lift_op
        cand = custom_candidate(fm.monoid(), "mine", seq_lift_op)
        r = run_suite(fm.monoid(), cand,
                      Universe(carrier_size=1, max_steps=1, max_depth=1))
        assert r.mode == "mine"
        assert r.all_yes
        assert not r.guaranteed  # only the literal seq/par modes are vouched for


class TestRendering:
    def test_render_mentions_every_axiom(self):
        r = _suite(fm.monoid(), "seq", carrier_size=1, max_steps=1, max_depth=1)
        text = render_report(r)
        for name in AXIOM_ORDER:
            assert name in text
        assert "monoid" in text

    def test_render_marks_predicted_failures(self):
        r = _suite(fm.semilattice(), "seq", carrier_size=2, max_steps=2, max_depth=2)
        text = render_report(r)
        assert "no" in text
        assert "predicted" in text
