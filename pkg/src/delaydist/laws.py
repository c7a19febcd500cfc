"""Bounded-exhaustive checking of the composition axioms.

Given a candidate transformation ``z : S(T X) -> T(S X)`` between two
monads, the four compatibility axioms (two unit, two multiplication),
naturality, equation preservation and the composite monad laws are
checked over enumerated finite universes.  Verdicts are three valued;
every No comes with a replayable witness.  The checkers are generic in
the two monads so the same engine serves both the algebraic-over-delay
candidates and the other monad pairings in :mod:`delaydist.combos`.

Universes are bounded by a :class:`TestUniverse`: carrier size, step and
term-depth budgets.  Where a shape nests two layers of the same monad,
the budget is split across the layers (all partitions of the step budget
across delay layers, all partitions of the depth budget across model
layers), which keeps case counts at desk scale while still containing
every witness the documented failures need.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field, asdict
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from . import freemodel as fm
from .delay import (DIVERGE, Delay, Now, Verdict, YES, NO, unknown, as_verdict, bind, conjoin,
                    delay_n, dmap, join, now, reify, render_delay, strong_equal, weak_bisim)
from .lifting import DistLawCandidate, induced_candidate, lift_term
from .theory import Theory, classify_equation, predict_composability

AXIOM_ORDER = ("UnitS", "UnitT", "MultS", "MultT", "Naturality",
               "EquationPreservation", "MonadLaws")

CASE_BUDGET = 1_000_000


class UniverseBudgetError(RuntimeError):
    def __init__(self, what: str, estimate: int, budget: int):
        super().__init__(f"{what}: about {estimate} cases exceeds budget {budget}")
        self.estimate = estimate
        self.budget = budget


# ---------------------------------------------------------------------------
# configuration and report types


@dataclass(frozen=True)
class TestUniverse:
    """Bounds for one checking run.

    ``fuel=None`` derives a budget large enough that no comparison inside
    the stated bounds can run out; pass an explicit fuel to study Unknown
    verdicts.
    """

    carrier_size: int = 2
    max_steps: int = 3
    max_depth: int = 2
    relation: str = "strict"  # "strict" | "weak"
    fuel: Optional[int] = None
    include_diverge: bool = False
    case_budget: int = CASE_BUDGET

    def __post_init__(self):
        if self.relation not in ("strict", "weak"):
            raise ValueError(f"unknown relation {self.relation!r}")
        if self.carrier_size < 1 or self.carrier_size > 4:
            raise ValueError("carrier_size must be between 1 and 4")
        if self.max_steps < 0 or self.max_depth < 0:
            raise ValueError("step and depth bounds must be nonnegative")
        if self.fuel is not None and self.fuel < 1:
            raise ValueError("explicit fuel must be positive")
        if self.case_budget < 1:
            raise ValueError("case_budget must be positive")

    def derived_fuel(self, th: Optional[Theory] = None) -> int:
        if self.fuel is not None:
            return self.fuel
        max_arity = 2
        if th is not None:
            max_arity = max([op.arity for op in th.signature.ops] + [1])
        leaves = (max_arity ** self.max_depth) ** 2
        return 16 + 2 * self.max_steps * max(leaves, 4)

    def bounds_dict(self) -> dict:
        return {
            "carrierSize": self.carrier_size,
            "maxSteps": self.max_steps,
            "maxDepth": self.max_depth,
            "fuel": self.fuel,
            "includeDiverge": self.include_diverge,
        }


@dataclass
class Witness:
    input_render: str
    lhs_render: str
    rhs_render: str
    note: str = ""
    replay: Optional[Callable[[], Tuple[str, str]]] = field(default=None, repr=False,
                                                            compare=False)

    def to_json_dict(self) -> dict:
        d = {"input": self.input_render, "lhs": self.lhs_render, "rhs": self.rhs_render}
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class LawEntry:
    axiom: str
    verdict: Verdict
    cases: int
    witness: Optional[Witness] = None
    predicted: bool = False
    prediction_note: str = ""
    details: Optional[List[Tuple[str, Verdict]]] = None

    def to_json_dict(self) -> dict:
        d: dict = {"name": self.axiom, "verdict": self.verdict.kind}
        if self.verdict.is_unknown:
            d["fuelSpent"] = self.verdict.fuel_spent
        if self.witness is not None:
            d["witness"] = self.witness.to_json_dict()
        if self.verdict.is_no:
            d["predicted"] = self.predicted
            if self.prediction_note:
                d["predictionNote"] = self.prediction_note
        if self.details is not None:
            d["details"] = [{"name": n, "verdict": v.kind} if not v.is_unknown else
                            {"name": n, "verdict": v.kind, "fuelSpent": v.fuel_spent}
                            for n, v in self.details]
        return d


@dataclass
class LawReport:
    theory: str
    mode: str
    relation: str
    bounds: dict
    entries: List[LawEntry]
    elapsed_ms: float
    # presentation metadata, recomputable from (theory, mode, relation); kept
    # out of equality so JSON round-trips compare clean
    guaranteed: bool = field(default=False, compare=False)

    @property
    def case_counts(self) -> Dict[str, int]:
        return {e.axiom: e.cases for e in self.entries}

    def entry(self, axiom: str) -> LawEntry:
        for e in self.entries:
            if e.axiom == axiom:
                return e
        raise KeyError(axiom)

    @property
    def all_yes(self) -> bool:
        return all(e.verdict.is_yes for e in self.entries)

    @property
    def has_unknown(self) -> bool:
        return any(e.verdict.is_unknown for e in self.entries)

    @property
    def unexpected_failures(self) -> List[LawEntry]:
        return [e for e in self.entries if e.verdict.is_no and not e.predicted]

    def to_json_dict(self) -> dict:
        return {
            "theory": self.theory,
            "mode": self.mode,
            "relation": self.relation,
            "bounds": self.bounds,
            "axioms": [e.to_json_dict() for e in self.entries],
            "caseCounts": self.case_counts,
            "elapsedMs": self.elapsed_ms,
        }

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent, ensure_ascii=False)


def report_from_json_dict(d: dict) -> LawReport:
    entries = []
    for a in d["axioms"]:
        verdict = Verdict(a["verdict"], a.get("fuelSpent", 0))
        w = None
        if "witness" in a:
            wd = a["witness"]
            w = Witness(wd["input"], wd["lhs"], wd["rhs"], wd.get("note", ""))
        details = None
        if "details" in a:
            details = [(x["name"], Verdict(x["verdict"], x.get("fuelSpent", 0)))
                       for x in a["details"]]
        entries.append(LawEntry(a["name"], verdict, d["caseCounts"][a["name"]], w,
                                a.get("predicted", False), a.get("predictionNote", ""), details))
    return LawReport(d["theory"], d["mode"], d["relation"], d["bounds"], entries,
                     d["elapsedMs"])


# ---------------------------------------------------------------------------
# generic monad packaging for the axiom checks


@dataclass
class MonadPack:
    """Just enough monad structure to state the axioms.

    ``equal(a, b, inner_rel)`` compares two F-shaped values given a
    relation on whatever sits inside, returning a Verdict.
    """

    name: str
    unit: Callable[[Any], Any]
    mu: Callable[[Any], Any]
    fmap: Callable[[Callable[[Any], Any], Any], Any]
    equal: Callable[[Any, Any, Callable[[Any, Any], Any]], Verdict]


def delay_pack(relation: str, fuel: int) -> MonadPack:
    def equal(a, b, inner_rel):
        if relation == "strict":
            return strong_equal(a, b, fuel, value_eq=inner_rel)
        return weak_bisim(a, b, inner_rel, fuel)

    return MonadPack("delay", now, join, lambda f, d: dmap(d, f), equal)


def theory_pack(th: Theory) -> MonadPack:
    def equal(a, b, inner_rel):
        # canonical payloads embed their values, so provable equality of
        # elements over a decidably-equal value set needs no inner relation
        return fm.model_equal(th, a, b)

    return MonadPack(th.name, lambda x: fm.unit(th, x), lambda mm: fm.mu(th, mm),
                     lambda f, m: fm.fmap(th, f, m), equal)


@dataclass
class AxiomOutcome:
    verdict: Verdict
    cases: int
    witness: Optional[Witness] = None


def _scan(inputs: Iterable,
          lhs_fn: Callable[[Any], Any],
          rhs_fn: Callable[[Any], Any],
          compare: Callable[[Any, Any], Verdict],
          render_input: Callable[[Any], str],
          render_result: Callable[[Any], str]) -> AxiomOutcome:
    """Evaluate both sides on every input; first No wins, Unknowns collect."""
    cases = 0
    first_unknown: Optional[Verdict] = None
    for x in inputs:
        cases += 1
        lhs = lhs_fn(x)
        rhs = rhs_fn(x)
        v = compare(lhs, rhs)
        if v.is_no:
            def replay(x=x):
                return render_result(lhs_fn(x)), render_result(rhs_fn(x))

            w = Witness(render_input(x), render_result(lhs), render_result(rhs), replay=replay)
            return AxiomOutcome(NO, cases, w)
        if v.is_unknown and first_unknown is None:
            first_unknown = v
    if first_unknown is not None:
        return AxiomOutcome(first_unknown, cases)
    return AxiomOutcome(YES, cases)


def beck_unit_s(S: MonadPack, T: MonadPack, z, inputs, inner_rel,
                render_input=str, render_result=str) -> AxiomOutcome:
    """z(unit_S(t)) = fmap_T(unit_S)(t) for t in T X."""
    return _scan(inputs,
                 lambda t: z(S.unit(t)),
                 lambda t: T.fmap(S.unit, t),
                 lambda a, b: T.equal(a, b, lambda s1, s2: S.equal(s1, s2, inner_rel)),
                 render_input, render_result)


def beck_unit_t(S: MonadPack, T: MonadPack, z, inputs, inner_rel,
                render_input=str, render_result=str) -> AxiomOutcome:
    """z(fmap_S(unit_T)(s)) = unit_T(s) for s in S X."""
    return _scan(inputs,
                 lambda s: z(S.fmap(T.unit, s)),
                 lambda s: T.unit(s),
                 lambda a, b: T.equal(a, b, lambda s1, s2: S.equal(s1, s2, inner_rel)),
                 render_input, render_result)


def beck_mult_s(S: MonadPack, T: MonadPack, z, inputs, inner_rel,
                render_input=str, render_result=str) -> AxiomOutcome:
    """z(mu_S(M)) = fmap_T(mu_S)(z(fmap_S(z)(M))) for M in S(S(T X))."""
    return _scan(inputs,
                 lambda M: z(S.mu(M)),
                 lambda M: T.fmap(S.mu, z(S.fmap(z, M))),
                 lambda a, b: T.equal(a, b, lambda s1, s2: S.equal(s1, s2, inner_rel)),
                 render_input, render_result)


def beck_mult_t(S: MonadPack, T: MonadPack, z, inputs, inner_rel,
                render_input=str, render_result=str) -> AxiomOutcome:
    """z(fmap_S(mu_T)(M)) = mu_T(fmap_T(z)(z(M))) for M in S(T(T X))."""
    return _scan(inputs,
                 lambda M: z(S.fmap(T.mu, M)),
                 lambda M: T.mu(T.fmap(z, z(M))),
                 lambda a, b: T.equal(a, b, lambda s1, s2: S.equal(s1, s2, inner_rel)),
                 render_input, render_result)


def beck_naturality(S: MonadPack, T: MonadPack, z, inputs, inner_rel,
                    render_input=str, render_result=str) -> AxiomOutcome:
    """inputs: (f, m) pairs with m in S(T X); compares the two f-images."""
    return _scan(inputs,
                 lambda fm_pair: T.fmap(lambda s: S.fmap(fm_pair[0], s), z(fm_pair[1])),
                 lambda fm_pair: z(S.fmap(lambda t: T.fmap(fm_pair[0], t), fm_pair[1])),
                 lambda a, b: T.equal(a, b, lambda s1, s2: S.equal(s1, s2, inner_rel)),
                 render_input, render_result)


# ---------------------------------------------------------------------------
# universes for the algebraic-over-delay instantiation


def base_values(n: int) -> Tuple[str, ...]:
    return ("a", "b", "c", "d")[:n]


def delay_values(values: Sequence[Any], max_steps: int, include_diverge: bool = False) -> List[Delay]:
    out = [delay_n(k, v) for k in range(max_steps + 1) for v in values]
    if include_diverge:
        out.append(DIVERGE)
    return out


def double_delay_values(values: Sequence[Any], max_steps: int,
                        include_diverge: bool = False) -> List[Delay]:
    """Delays of delays; the step budget is split across the two layers."""
    out: List[Delay] = []
    for outer in range(max_steps + 1):
        for inner in range(max_steps + 1 - outer):
            for v in values:
                out.append(delay_n(outer, delay_n(inner, v)))
    if include_diverge:
        out.append(DIVERGE)
        out.append(delay_n(0, DIVERGE))
    return out


def enumerate_universe(th: Theory, u: TestUniverse, shape: str) -> List[Any]:
    """Enumerated inputs for one axiom shape over theory ``th``.

    Shapes: ``D`` (delays over the base carrier), ``T`` (model elements),
    ``TD`` (elements over delays), ``TTD`` and ``TDD`` (the nested
    multiplication shapes).  Raises UniverseBudgetError when the estimate
    exceeds the universe's case budget.
    """
    vals = base_values(u.carrier_size)
    budget = u.case_budget

    def enum(generators, depth):
        try:
            return fm.enumerate_elements(th, generators, depth, budget)
        except fm.EnumerationBudgetError as err:
            raise UniverseBudgetError(f"{shape} universe", err.estimate, budget) from err

    if shape == "D":
        return delay_values(vals, u.max_steps, u.include_diverge)
    if shape == "T":
        return enum(vals, u.max_depth)
    if shape == "TD":
        pool = delay_values(vals, u.max_steps, u.include_diverge)
        return enum(pool, u.max_depth)
    if shape == "TDD":
        pool = double_delay_values(vals, u.max_steps, u.include_diverge)
        return enum(pool, u.max_depth)
    if shape == "TTD":
        pool = delay_values(vals, u.max_steps, u.include_diverge)
        out: List[fm.ModelElement] = []
        seen = set()
        for outer_depth in range(u.max_depth + 1):
            inner_depth = u.max_depth - outer_depth
            inner = enum(pool, inner_depth)
            for m in enum(inner, outer_depth):
                key = (m.kind, m.payload)
                if key not in seen:
                    seen.add(key)
                    out.append(m)
            if len(out) > budget:
                raise UniverseBudgetError("TTD universe", len(out), budget)
        return out
    raise ValueError(f"unknown universe shape {shape!r}")


def _bounded_elements(th: Theory, generators, depth: int, u: TestUniverse,
                      what: str) -> List[fm.ModelElement]:
    try:
        return fm.enumerate_elements(th, generators, depth, u.case_budget)
    except fm.EnumerationBudgetError as err:
        raise UniverseBudgetError(what, err.estimate, u.case_budget) from err


def _element_rel(th: Theory):
    return lambda a, b: fm.model_equal(th, a, b)


def _render_dt(d: Delay) -> str:
    return render_delay(d, fm.value_str)


# ---------------------------------------------------------------------------
# the seven checks for an algebraic-over-delay candidate


def check_axiom(cand: DistLawCandidate, axiom: str, u: TestUniverse) -> LawEntry:
    th = cand.theory
    fuel = u.derived_fuel(th)
    S = theory_pack(th)
    T = delay_pack(u.relation, fuel)
    z = cand.apply
    ri = fm.value_str
    rr = _render_dt
    if axiom == "UnitS":
        out = beck_unit_s(S, T, z, enumerate_universe(th, u, "D"), None, ri, rr)
    elif axiom == "UnitT":
        out = beck_unit_t(S, T, z, enumerate_universe(th, u, "T"), None, ri, rr)
    elif axiom == "MultS":
        out = beck_mult_s(S, T, z, enumerate_universe(th, u, "TTD"), None, ri, rr)
    elif axiom == "MultT":
        out = beck_mult_t(S, T, z, enumerate_universe(th, u, "TDD"), None, ri, rr)
    elif axiom == "Naturality":
        out = beck_naturality(S, T, z, _naturality_inputs(th, u), None,
                              lambda p: f"f={p[0]} on {fm.value_str(p[1])}", rr)
    elif axiom == "EquationPreservation":
        return check_equation_preservation(th, cand.lift_op, u)
    elif axiom == "MonadLaws":
        return check_composite_monad_laws(cand, u)
    else:
        raise ValueError(f"unknown axiom {axiom!r}")
    return LawEntry(axiom, out.verdict, out.cases, out.witness)


class _Renaming:
    """A function between base carriers, printable for witnesses."""

    def __init__(self, table: Dict[str, str]):
        self.table = table

    def __call__(self, x):
        return self.table[x]

    def __str__(self):
        return "{" + ", ".join(f"{k}↦{v}" for k, v in self.table.items()) + "}"


def _naturality_inputs(th: Theory, u: TestUniverse) -> List[Tuple[Callable, fm.ModelElement]]:
    sizes = sorted({1, min(2, u.carrier_size), u.carrier_size})
    pairs: List[Tuple[Callable, fm.ModelElement]] = []
    for nx in sizes:
        dom = base_values(nx)
        depth = min(u.max_depth, 2)
        pool = _bounded_elements(th, delay_values(dom, min(u.max_steps, 2),
                                                  u.include_diverge), depth, u,
                                 "naturality universe")
        for ny in sizes:
            cod = base_values(ny)
            for image in itertools.product(cod, repeat=len(dom)):
                f = _Renaming(dict(zip(dom, image)))
                for m in pool:
                    pairs.append((f, m))
    if len(pairs) > u.case_budget:
        raise UniverseBudgetError("naturality universe", len(pairs), u.case_budget)
    return pairs


def check_equation_preservation(th: Theory, lift_op, u: TestUniverse) -> LawEntry:
    """Interpret both sides of every equation over delayed model values
    and compare under the universe's relation."""
    fuel = u.derived_fuel(th)
    vals = base_values(u.carrier_size)
    model_pool = _bounded_elements(th, vals, min(u.max_depth, 1), u,
                                   "equation preservation universe")
    env_pool = delay_values(model_pool, u.max_steps, u.include_diverge)
    rel = _element_rel(th)

    details: List[Tuple[str, Verdict]] = []
    witness: Optional[Witness] = None
    total = 0
    for eq in th.equations:
        estimate = len(env_pool) ** len(eq.context)
        if estimate > u.case_budget:
            raise UniverseBudgetError(f"equation '{eq.name}'", estimate, u.case_budget)
        eq_verdicts = []
        for assignment in itertools.product(env_pool, repeat=len(eq.context)):
            total += 1
            env = dict(zip(eq.context, assignment))
            lhs = lift_term(eq.lhs, env, lift_op, th)
            rhs = lift_term(eq.rhs, env, lift_op, th)
            if u.relation == "strict":
                v = strong_equal(lhs, rhs, fuel, value_eq=rel)
            else:
                v = weak_bisim(lhs, rhs, rel, fuel)
            if v.is_no and witness is None:
                env_r = ", ".join(f"{k}={_render_dt(d)}" for k, d in env.items())
                witness = Witness(f"{eq.name} with {env_r}", _render_dt(lhs), _render_dt(rhs),
                                  note=f"equation '{eq.name}' not preserved")
            eq_verdicts.append(v)
            if v.is_no:
                break
        details.append((eq.name, conjoin(eq_verdicts)))
    overall = conjoin(v for _, v in details)
    return LawEntry("EquationPreservation", overall, total, witness, details=details)


# ---------------------------------------------------------------------------
# monad laws (Kleisli form)


def check_monad_laws_kleisli(unit_fn, bind_fn, elements, value_set, k_pool, compare,
                             render=str) -> AxiomOutcome:
    """Left unit, right unit and associativity in Kleisli form.

    ``k_pool`` is a list of dicts mapping each value to a monadic result;
    associativity quantifies over pairs from the pool.
    """
    cases = 0
    first_unknown = None

    def record(v: Verdict, make_witness):
        nonlocal first_unknown
        if v.is_no:
            return AxiomOutcome(NO, cases, make_witness())
        if v.is_unknown and first_unknown is None:
            first_unknown = v
        return None

    for k in k_pool:
        for x in value_set:
            cases += 1
            lhs = bind_fn(unit_fn(x), lambda v: k[v])
            rhs = k[x]
            bad = record(compare(lhs, rhs),
                         lambda: Witness(f"left unit at {x!r}", render(lhs), render(rhs)))
            if bad:
                return bad
    for m in elements:
        cases += 1
        lhs = bind_fn(m, unit_fn)
        bad = record(compare(lhs, m),
                     lambda: Witness(f"right unit at {render(m)}", render(lhs), render(m)))
        if bad:
            return bad
    for m in elements:
        for k in k_pool:
            for h in k_pool:
                cases += 1
                lhs = bind_fn(bind_fn(m, lambda v: k[v]), lambda v: h[v])
                rhs = bind_fn(m, lambda v: bind_fn(k[v], lambda w: h[w]))
                bad = record(compare(lhs, rhs),
                             lambda: Witness(f"associativity at {render(m)}",
                                             render(lhs), render(rhs)))
                if bad:
                    return bad
    if first_unknown is not None:
        return AxiomOutcome(first_unknown, cases)
    return AxiomOutcome(YES, cases)


def composite_unit(cand: DistLawCandidate):
    th = cand.theory
    return lambda x: Now(fm.unit(th, x))


def composite_bind(cand: DistLawCandidate):
    """Kleisli extension of the composite delayed-model monad built from
    the candidate: distribute, then flatten both layers."""
    th = cand.theory

    def bnd(m: Delay, k: Callable[[Any], Delay]) -> Delay:
        def on_element(t: fm.ModelElement) -> Delay:
            mapped = fm.fmap(th, k, t)  # element whose values are delayed elements
            dd = cand.apply(mapped)
            return dmap(dd, lambda tt: fm.mu(th, tt))

        return reify(bind(m, on_element))

    return bnd


def check_composite_monad_laws(cand: DistLawCandidate, u: TestUniverse) -> LawEntry:
    """Monad laws of the composite delayed-model monad on enumerated
    inputs.  Continuation tables draw from a reduced value pool (one step,
    depth one, first few elements) to keep the product space finite."""
    th = cand.theory
    fuel = u.derived_fuel(th)
    vals = base_values(u.carrier_size)
    rel = _element_rel(th)

    def compare(d1, d2):
        if u.relation == "strict":
            return strong_equal(d1, d2, fuel, value_eq=rel)
        return weak_bisim(d1, d2, rel, fuel)

    base_pool = _bounded_elements(th, vals, min(u.max_depth, 1), u,
                                  "composite monad-law universe")
    elements = [delay_n(s, m) for s in range(min(u.max_steps, 2) + 1) for m in base_pool]
    small_models = base_pool[:3]
    k_values = [delay_n(s, m) for s in (0, 1) for m in small_models]
    k_pool = [dict(zip(vals, combo))
              for combo in itertools.product(k_values, repeat=len(vals))]
    estimate = len(elements) * len(k_pool) ** 2
    if estimate > u.case_budget:
        raise UniverseBudgetError("composite monad laws", estimate, u.case_budget)

    out = check_monad_laws_kleisli(composite_unit(cand), composite_bind(cand),
                                   elements, vals, k_pool, compare, _render_dt)
    return LawEntry("MonadLaws", out.verdict, out.cases, out.witness)


def check_delay_monad_laws(max_steps: int = 5, values: Sequence[Any] = ("a", "b", "c"),
                           fuel: int = 64) -> AxiomOutcome:
    """Monad laws of the delay monad itself up to strong equality."""
    elements = delay_values(values, max_steps, include_diverge=True)
    k_values = [delay_n(s, v) for s in (0, 1, 2) for v in values] + [DIVERGE]
    k_pool = [dict(zip(values, combo))
              for combo in itertools.islice(itertools.product(k_values, repeat=len(values)), 400)]
    return check_monad_laws_kleisli(now, bind, elements, values, k_pool,
                                    lambda a, b: strong_equal(a, b, fuel), render_delay)


# ---------------------------------------------------------------------------
# predictions and the full suite


def guaranteed_configuration(th: Theory, mode: str, relation: str) -> bool:
    """Configurations the theory's classification promises will pass."""
    p = predict_composability(th)
    if mode == "seq" and p.seq_dist_law == "guaranteed":
        return True
    if mode == "par" and relation == "weak" and p.par_setoid_law == "guaranteed":
        return True
    return False


def prediction_for_failure(th: Theory, mode: str, relation: str, axiom: str) -> str:
    """A short reason when a No verdict is the documented expectation."""
    classes = {eq.name: classify_equation(eq) for eq in th.equations}
    has_wide_op = any(op.arity >= 2 for op in th.signature.ops)
    unbalanced = [n for n, c in classes.items() if not c.balanced]
    dropping = [n for n, c in classes.items() if c.drop]
    if mode == "par" and relation == "strict" and has_wide_op and axiom in ("MultT", "MonadLaws"):
        return ("parallel lifting always miscounts steps on the second multiplication "
                "axiom when an operation takes two or more arguments")
    if axiom == "EquationPreservation":
        if mode == "seq" and unbalanced:
            return f"sequential lifting cannot preserve unbalanced equations ({', '.join(unbalanced)})"
        if dropping:
            return f"dropped variables can hide divergence ({', '.join(dropping)})"
    if not guaranteed_configuration(th, mode, relation):
        return "no general guarantee covers this configuration"
    return ""


def run_suite(th: Theory, mode, u: TestUniverse) -> LawReport:
    """Naturality, the four axioms, equation preservation and composite
    monad laws for one candidate, in a fixed order."""
    t0 = time.perf_counter()
    if isinstance(mode, DistLawCandidate):
        cand = mode
    else:
        cand = induced_candidate(th, mode)
    if u.relation == "weak":
        _validate_weak_relation(th, u)
    entries: List[LawEntry] = []
    for axiom in AXIOM_ORDER:
        entry = check_axiom(cand, axiom, u)
        if entry.verdict.is_no:
            note = prediction_for_failure(th, cand.name, u.relation, axiom)
            entry.predicted = bool(note) and not guaranteed_configuration(th, cand.name, u.relation)
            entry.prediction_note = note
        entries.append(entry)
    elapsed = (time.perf_counter() - t0) * 1000.0
    return LawReport(th.name, cand.name, u.relation, u.bounds_dict(), entries, elapsed,
                     guaranteed=guaranteed_configuration(th, cand.name, u.relation))


def _validate_weak_relation(th: Theory, u: TestUniverse) -> None:
    """Spot-check that bounded weak bisimilarity behaves like an
    equivalence on a small sample before trusting it in a suite."""
    fuel = u.derived_fuel(th)
    rel = _element_rel(th)
    sample_vals = [fm.unit(th, v) for v in base_values(u.carrier_size)]
    sample = [delay_n(s, m) for s in (0, 1, 2) for m in sample_vals] + [DIVERGE]
    for d in sample:
        if not weak_bisim(d, d, rel, fuel).is_yes:
            raise AssertionError("weak bisimilarity failed reflexivity on a sample")
    for d1, d2 in itertools.product(sample, repeat=2):
        v12 = weak_bisim(d1, d2, rel, fuel)
        v21 = weak_bisim(d2, d1, rel, fuel)
        if v12.kind != v21.kind:
            raise AssertionError("weak bisimilarity failed symmetry on a sample")
    for d1, d2, d3 in itertools.islice(itertools.product(sample, repeat=3), 2000):
        if weak_bisim(d1, d2, rel, fuel).is_yes and weak_bisim(d2, d3, rel, fuel).is_yes:
            if not weak_bisim(d1, d3, rel, fuel).is_yes:
                raise AssertionError("weak bisimilarity failed transitivity on a sample")


def render_report(report: LawReport) -> str:
    lines = [f"theory {report.theory}  lift {report.mode}  relation {report.relation}"]
    b = report.bounds
    lines.append(f"bounds: |X|={b['carrierSize']} maxSteps={b['maxSteps']} "
                 f"maxDepth={b['maxDepth']} fuel={b['fuel'] or 'auto'} "
                 f"includeDiverge={b['includeDiverge']}")
    for e in report.entries:
        flag = ""
        if e.verdict.is_no:
            flag = "  [predicted]" if e.predicted else "  [UNEXPECTED]"
        lines.append(f"  {e.axiom:<22} {str(e.verdict):<28} cases={e.cases}{flag}")
        if e.verdict.is_no and e.witness is not None:
            lines.append(f"    input: {e.witness.input_render}")
            lines.append(f"    lhs:   {e.witness.lhs_render}")
            lines.append(f"    rhs:   {e.witness.rhs_render}")
            if e.prediction_note:
                lines.append(f"    note:  {e.prediction_note}")
        if e.details:
            for name, v in e.details:
                lines.append(f"    eq {name:<18} {v}")
    lines.append(f"elapsed: {report.elapsed_ms:.1f} ms")
    return "\n".join(lines)
