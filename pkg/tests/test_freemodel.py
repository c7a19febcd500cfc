"""Free-model carriers pinned against container oracles.

Lists, multisets, sets and exact-rational distributions are computed
independently with plain Python containers; the quotient carrier is
checked against a freestanding innermost rewriter written here."""

import itertools
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delaydist import freemodel as fm
from delaydist.theory import (App, Operation, Signature, Theory, Var, make_equation,
                              parse_theory, validate_theory)

VALS = ("a", "b", "c")


class TestUnitAndOps:
    def test_unit_shapes(self):
        assert fm.unit(fm.monoid(), "a").payload == ("a",)
        assert fm.unit(fm.semilattice(), "a").payload == ("a",)
        assert fm.unit(fm.convex(), "a").payload == (("a", Fraction(1)),)
        assert fm.unit(fm.exceptions(), "a").payload == ("val", "a")
        assert fm.unit(fm.magma(), "a").payload == ("leaf", "a")

    def test_monoid_is_list_concat(self):
        th = fm.monoid()
        xs = [fm.unit(th, v) for v in VALS]
        m = fm.apply_op(th, "mul", [fm.apply_op(th, "mul", [xs[0], xs[1]]), xs[2]])
        assert list(m.payload) == ["a", "b", "c"]  # oracle: list concatenation
        assert fm.apply_op(th, "unit", []).payload == ()

    def test_cmonoid_is_multiset(self):
        th = fm.cmonoid()
        ab = fm.apply_op(th, "mul", [fm.unit(th, "b"), fm.unit(th, "a")])
        ba = fm.apply_op(th, "mul", [fm.unit(th, "a"), fm.unit(th, "b")])
        assert Counter(ab.payload) == Counter(("a", "b"))  # oracle: Counter
        assert ab.payload == ba.payload

    def test_semilattice_is_finite_set(self):
        th = fm.semilattice()
        x, y = fm.unit(th, "x"), fm.unit(th, "y")
        u = fm.apply_op(th, "union", [x, fm.apply_op(th, "union", [y, x])])
        assert set(u.payload) == {"x", "y"}  # oracle: Python set
        assert len(u.payload) == 2

    def test_convex_is_exact_mixture(self):
        th = fm.convex()
        a, b = fm.unit(th, "a"), fm.unit(th, "b")
        half = fm.apply_op(th, "mix[1/2]", [a, b])
        assert dict(half.payload) == {"a": Fraction(1, 2), "b": Fraction(1, 2)}
        again = fm.apply_op(th, "mix[1/2]", [half, a])
        # oracle: 1/2·{a:1/2, b:1/2} + 1/2·{a:1}
        assert dict(again.payload) == {"a": Fraction(3, 4), "b": Fraction(1, 4)}

    def test_convex_idempotence_collapses(self):
        th = fm.convex()
        a = fm.unit(th, "a")
        assert fm.apply_op(th, "mix[1/2]", [a, a]).payload == ((("a", Fraction(1))),)

    def test_magma_keeps_shape(self):
        th = fm.magma()
        x = fm.unit(th, "x")
        l = fm.apply_op(th, "mul", [fm.apply_op(th, "mul", [x, x]), x])
        r = fm.apply_op(th, "mul", [x, fm.apply_op(th, "mul", [x, x])])
        assert l.payload != r.payload  # no associativity in the free magma


class TestEvalTerm:
    def test_semilattice_idempotence(self):
        th = fm.semilattice()
        x = Var("x")
        env = {"x": fm.unit(th, "a")}
        assert fm.eval_term(th, App("union", (x, x)), env).payload == ("a",)

    def test_convex_weighted_mixture(self):
        th = fm.convex()
        t = App("mix[1/2]", (Var("x"), Var("y")))
        env = {"x": fm.unit(th, "a"), "y": fm.unit(th, "b")}
        assert dict(fm.eval_term(th, t, env).payload) == \
            {"a": Fraction(1, 2), "b": Fraction(1, 2)}

    def test_every_builtin_equation_holds(self):
        # each theory's own equations, on all assignments from 3 generators
        for th in (fm.magma(), fm.monoid(), fm.cmonoid(), fm.semilattice(),
                   fm.convex(), fm.exceptions()):
            pool = fm.enumerate_elements(th, VALS, 1)
            for eq in th.equations:
                for assignment in itertools.product(pool, repeat=len(eq.context)):
                    env = dict(zip(eq.context, assignment))
                    lhs = fm.eval_term(th, eq.lhs, env)
                    rhs = fm.eval_term(th, eq.rhs, env)
                    assert fm.model_equal(th, lhs, rhs).is_yes, (th.name, eq.name)


class TestBind:
    def test_list_bind(self):
        th = fm.monoid()
        m = fm.apply_op(th, "mul", [fm.unit(th, "a"), fm.unit(th, "b")])
        out = fm.free_bind(th, m, lambda v: fm.apply_op(th, "mul",
                                                        [fm.unit(th, v), fm.unit(th, v)]))
        assert list(out.payload) == ["a", "a", "b", "b"]

    def test_finset_bind_dedups(self):
        th = fm.semilattice()
        m = fm.apply_op(th, "union", [fm.unit(th, "a"), fm.unit(th, "b")])
        out = fm.free_bind(th, m, lambda v: fm.unit(th, "c"))
        assert out.payload == ("c",)

    def test_dist_bind_total_probability(self):
        th = fm.convex()
        m = fm.apply_op(th, "mix[1/2]", [fm.unit(th, "a"), fm.unit(th, "b")])
        out = fm.free_bind(th, m, lambda v: fm.unit(th, "c"))
        assert dict(out.payload) == {"c": Fraction(1)}

    def test_exceptions_bind_short_circuits(self):
        th = fm.exceptions()
        exc = fm.apply_op(th, "e0", [])
        assert fm.free_bind(th, exc, lambda v: fm.unit(th, "z")).payload == ("exc", "e0")
        ok = fm.unit(th, "a")
        assert fm.free_bind(th, ok, lambda v: exc).payload == ("exc", "e0")

    def test_monad_laws_small_universes(self):
        for th in (fm.monoid(), fm.cmonoid(), fm.semilattice(), fm.convex(),
                   fm.magma(), fm.exceptions()):
            pool = fm.enumerate_elements(th, ("a", "b"), 1)
            assert len(pool) <= 30
            k = lambda v: fm.unit(th, v.upper())
            h_img = {vv: fm.unit(th, vv * 2) for vv in ("A", "B")}
            h = lambda v: h_img[v]
            for v in ("a", "b"):
                assert fm.model_equal(th, fm.free_bind(th, fm.unit(th, v), k),
                                      k(v)).is_yes
            for m in pool:
                assert fm.model_equal(th, fm.free_bind(th, m, lambda v: fm.unit(th, v)),
                                      m).is_yes
                lhs = fm.free_bind(th, fm.free_bind(th, m, k), h)
                rhs = fm.free_bind(th, m, lambda v: fm.free_bind(th, k(v), h))
                assert fm.model_equal(th, lhs, rhs).is_yes


class TestModelEqual:
    def test_canonical_decisive(self):
        th = fm.cmonoid()
        ab = fm.apply_op(th, "mul", [fm.unit(th, "a"), fm.unit(th, "b")])
        ba = fm.apply_op(th, "mul", [fm.unit(th, "b"), fm.unit(th, "a")])
        assert fm.model_equal(th, ab, ba).is_yes
        assert fm.model_equal(th, ab, fm.unit(th, "a")).is_no

    def test_dist_exact(self):
        th = fm.convex()
        a, b = fm.unit(th, "a"), fm.unit(th, "b")
        m1 = fm.apply_op(th, "mix[1/2]", [a, b])
        m2 = fm.apply_op(th, "mix[1/2]", [b, a])
        assert fm.model_equal(th, m1, m2).is_yes

    def test_mixed_carriers_rejected(self):
        with pytest.raises(ValueError):
            fm.model_equal(fm.monoid(), fm.unit(fm.monoid(), "a"),
                           fm.unit(fm.cmonoid(), "a"))

    def test_equivalence_on_small_universe(self):
        th = fm.semilattice()
        pool = fm.enumerate_elements(th, ("a", "b"), 2)
        rel = {}
        for m1, m2 in itertools.product(pool, repeat=2):
            rel[(id(m1), id(m2))] = fm.model_equal(th, m1, m2).is_yes
        for m in pool:
            assert rel[(id(m), id(m))]
        for m1, m2 in itertools.product(pool, repeat=2):
            assert rel[(id(m1), id(m2))] == rel[(id(m2), id(m1))]

    def test_quotient_three_valued(self):
        # commutativity alone: joinable pairs say yes, others unknown
        th = parse_theory("theory comm_only\nop mul : 2\neq comm : mul(x, y) = mul(y, x)")
        a, b = fm.unit(th, "a"), fm.unit(th, "b")
        ab = fm.apply_op(th, "mul", [a, b])
        ba = fm.apply_op(th, "mul", [b, a])
        assert fm.model_equal(th, ab, ba).is_yes
        assert fm.model_equal(th, ab, fm.apply_op(th, "mul", [a, a])).is_unknown

    def test_registered_finite_model_refutes(self):
        base = parse_theory("theory comm_only\nop mul : 2\neq comm : mul(x, y) = mul(y, x)")
        xor = fm.finite_model("xor", (0, 1), {
            "mul": {(i, j): i ^ j for i in (0, 1) for j in (0, 1)}})
        th = Theory(base.signature, base.equations, finite_models=(xor,))
        a, b = fm.unit(th, "a"), fm.unit(th, "b")
        ab = fm.apply_op(th, "mul", [a, b])
        aa = fm.apply_op(th, "mul", [a, a])
        assert fm.model_equal(th, ab, aa).is_no


# freestanding innermost rewriter used as the quotient-normalization oracle
def _oracle_normalize(th, p):
    if p[0] == "leaf":
        return p
    args = tuple(_oracle_normalize(th, a) for a in p[1:])
    t = (p[0],) + args
    while True:
        for eq in th.equations:
            b = _oracle_match(eq.lhs, t, {})
            if b is not None:
                t = _oracle_inst(eq.rhs, b)
                t = _oracle_normalize(th, t) if t[0] != "leaf" else t
                break
        else:
            return t


def _oracle_match(pat, p, b):
    if isinstance(pat, Var):
        if pat.name in b:
            return b if b[pat.name] == p else None
        return {**b, pat.name: p}
    if p[0] == "leaf" or p[0] != pat.op or len(p) - 1 != len(pat.args):
        return None
    for sp, sq in zip(pat.args, p[1:]):
        b = _oracle_match(sp, sq, b)
        if b is None:
            return None
    return b


def _oracle_inst(t, b):
    if isinstance(t, Var):
        return b[t.name]
    return (t.op,) + tuple(_oracle_inst(a, b) for a in t.args)


def _rewrite_complete_theory():
    x = Var("x")
    th = Theory(Signature("idem_bang", (Operation("mul", 2), Operation("bang", 1))),
                (make_equation("idem", App("mul", (x, x)), x),),
                rewrite_complete=True)
    validate_theory(th)
    return th


class TestQuotientNormalization:
    def test_outputs_are_normal_forms(self):
        th = _rewrite_complete_theory()
        pool = fm.enumerate_elements(th, ("a", "b"), 2)
        assert pool, "enumeration came back empty"
        for m in pool:
            assert m.payload == _oracle_normalize(th, m.payload)

    def test_apply_op_matches_oracle(self):
        th = _rewrite_complete_theory()
        pool = fm.enumerate_elements(th, ("a", "b"), 1)
        for m1, m2 in itertools.product(pool, repeat=2):
            got = fm.apply_op(th, "mul", [m1, m2]).payload
            want = _oracle_normalize(th, ("mul", m1.payload, m2.payload))
            assert got == want

    def test_bind_matches_oracle(self):
        th = _rewrite_complete_theory()
        pool = fm.enumerate_elements(th, ("a", "b"), 2)
        targets = fm.enumerate_elements(th, ("c", "d"), 1)
        table = {"a": targets[0], "b": targets[-1]}

        def graft(p):
            if p[0] == "leaf":
                return table[p[1]].payload
            return (p[0],) + tuple(graft(a) for a in p[1:])

        for m in pool:
            got = fm.free_bind(th, m, lambda v: table[v]).payload
            assert got == _oracle_normalize(th, graft(m.payload))

    def test_decisive_no_from_distinct_normal_forms(self):
        th = _rewrite_complete_theory()
        a, b = fm.unit(th, "a"), fm.unit(th, "b")
        assert fm.model_equal(th, fm.apply_op(th, "mul", [a, b]), a).is_no
        assert fm.model_equal(th, fm.apply_op(th, "mul", [a, a]), a).is_yes


class TestEnumeration:
    def test_semilattice_four_elements(self):
        th = fm.semilattice()
        pool = fm.enumerate_elements(th, ("x", "y"), 2)
        assert sorted(set(p.payload for p in pool)) == \
            sorted({(), ("x",), ("y",), ("x", "y")})

    def test_magma_single_generator_depth_two(self):
        th = fm.magma()
        pool = fm.enumerate_elements(th, ("x",), 2)
        assert len(pool) == 5  # x, xx, (xx)x, x(xx), (xx)(xx)

    def test_dist_depth_one(self):
        th = fm.convex()
        pool = fm.enumerate_elements(th, ("x", "y"), 1)
        payloads = {dict(p.payload) and tuple(sorted(dict(p.payload).items()))
                    for p in pool}
        assert payloads == {
            (("x", Fraction(1)),),
            (("y", Fraction(1)),),
            (("x", Fraction(1, 2)), ("y", Fraction(1, 2))),
        }

    def test_budget_enforced(self):
        th = fm.magma()
        with pytest.raises(Exception):
            fm.enumerate_elements(th, ("a", "b", "c"), 3, max_elements=50)


class TestBuiltinLookup:
    def test_names(self):
        assert fm.builtin_theory("magma").name == "magma"
        assert fm.builtin_theory("exceptions(E=3)").signature.arity("e2") == 0
        assert fm.builtin_theory("convex(1/3)").signature.arity("mix[1/3]") == 2

    def test_unknown(self):
        from delaydist.theory import TheorySemanticError
        with pytest.raises(TheorySemanticError):
            fm.builtin_theory("frobnitz")

    def test_rendering(self):
        th = fm.semilattice()
        x, y = fm.unit(th, "x"), fm.unit(th, "y")
        assert fm.value_str(fm.apply_op(th, "union", [x, y])) == "{x, y}"
        assert fm.value_str(fm.apply_op(th, "empty", [])) == "∅"


@given(st.lists(st.sampled_from("ab"), min_size=1, max_size=6),
       st.lists(st.sampled_from("ab"), min_size=1, max_size=6))
@settings(max_examples=200, deadline=None)
def test_monoid_concat_homomorphism(u, v):
    th = fm.monoid()

    def embed(values):
        out = fm.apply_op(th, "unit", [])
        for x in values:
            out = fm.apply_op(th, "mul", [out, fm.unit(th, x)])
        return out

    joined = fm.apply_op(th, "mul", [embed(u), embed(v)])
    assert list(joined.payload) == u + v
