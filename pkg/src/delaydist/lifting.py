"""Lifting model operations over delayed arguments.

Two structural liftings are provided.  The parallel lifting advances all
unfinished arguments together, so the lifted operation takes as many
steps as its slowest argument.  The sequential lifting strips the
leftmost unfinished argument first, so steps add up across arguments.
Either lifting induces a candidate transformation from model-of-delays
to delayed-model by interpreting an element's representative term with
lifted operations; whether the candidate is an actual distributive law
is what the axiom checkers decide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence

from . import freemodel as fm
from .delay import (DIVERGE, Delay, Deferred, Now, Step, delay_n, dmap, reify, resolve)
from .theory import Term, Theory, TheorySemanticError, Var

OpLifter = Callable[[str, List[Delay], Theory], Delay]


def _eager_ends(args: Sequence[Delay]) -> Optional[List[tuple]]:
    """Per argument (steps, end) with end Now or DIVERGE, walking only
    materialized nodes; None as soon as a suspended node shows up."""
    out = []
    for a in args:
        steps = 0
        cur = a
        while True:
            if isinstance(cur, Now) or cur is DIVERGE:
                out.append((steps, cur))
                break
            if isinstance(cur, Step):
                steps += 1
                cur = cur.tail
                continue
            ahead = cur.peek()
            if ahead is None:
                return None
            cur = ahead
    return out


def _check_arity(op: str, args: Sequence[Delay], th: Theory) -> None:
    declared = th.signature.arity(op)
    if declared is None and fm.mix_weight(op) is not None:
        declared = 2
    if declared is not None and declared != len(args):
        raise TheorySemanticError(
            f"operation '{op}' expects {declared} arguments, got {len(args)}", op)


def par_lift_op(op: str, args: Sequence[Delay], th: Theory) -> Delay:
    """All-finished: apply now.  Otherwise one step, advancing every
    unfinished argument together.  A divergent argument makes the whole
    application divergent."""
    _check_arity(op, args, th)
    ends = _eager_ends(args)
    if ends is not None:
        if any(end is DIVERGE for _, end in ends):
            return DIVERGE
        return delay_n(max((s for s, _ in ends), default=0),
                       fm.apply_op(th, op, [end.value for _, end in ends]))
    return _par(op, [resolve(a) for a in args], th)


def _par(op: str, args: List[Delay], th: Theory) -> Delay:
    if any(a is DIVERGE for a in args):
        return DIVERGE
    if all(isinstance(a, Now) for a in args):
        return Now(fm.apply_op(th, op, [a.value for a in args]))
    nexts = [a.tail if isinstance(a, Step) else a for a in args]
    return Step(Deferred(lambda: _par(op, [resolve(a) for a in nexts], th)))


def seq_lift_op(op: str, args: Sequence[Delay], th: Theory) -> Delay:
    """Strip the leftmost unfinished argument one step at a time; steps
    add up across arguments."""
    _check_arity(op, args, th)
    ends = _eager_ends(args)
    if ends is not None:
        total = 0
        vals = []
        for s, end in ends:
            if end is DIVERGE:
                return DIVERGE
            total += s
            vals.append(end.value)
        return delay_n(total, fm.apply_op(th, op, vals))
    return _seq(op, [resolve(a) for a in args], th)


def _seq(op: str, args: List[Delay], th: Theory) -> Delay:
    for i, a in enumerate(args):
        if isinstance(a, Now):
            continue
        if a is DIVERGE:
            return DIVERGE

        def advance(i=i, tail=a.tail, frozen=tuple(args)):
            rest = list(frozen)
            rest[i] = resolve(tail)
            return _seq(op, rest, th)

        return Step(Deferred(advance))
    return Now(fm.apply_op(th, op, [a.value for a in args]))


def lift_term(t: Term, env: Dict[str, Delay], mode, th: Theory) -> Delay:
    """Interpret a term over delayed values.

    ``mode`` is "seq", "par", or an op-lifting callable.  Each variable
    occurrence reads the (possibly shared) delayed value independently.
    """
    lifter = _lifter(mode)
    if isinstance(t, Var):
        if t.name not in env:
            raise TheorySemanticError(f"unbound variable '{t.name}'", t.name)
        return env[t.name]
    args = [lift_term(a, env, mode, th) for a in t.args]
    return lifter(t.op, args, th)


def _lifter(mode) -> OpLifter:
    if mode == "seq":
        return seq_lift_op
    if mode == "par":
        return par_lift_op
    if callable(mode):
        return mode
    raise ValueError(f"unknown lift mode {mode!r}")


@dataclass
class DistLawCandidate:
    """A candidate transformation from model-over-delays to delayed-model.

    ``apply`` sends an element whose values are Delays to a Delay of an
    element over the inner values; results are reified so they can be
    embedded in canonical payloads.  ``lift_op`` is the underlying
    op-level lifting, also used for term interpretation in equation
    preservation checks.
    """

    theory: Theory
    name: str
    lift_op: OpLifter

    def apply(self, m: fm.ModelElement) -> Delay:
        return self._distribute(m)

    def _distribute(self, m: fm.ModelElement) -> Delay:
        th = self.theory
        rep = fm.representative(m)

        def go(node) -> Delay:
            if node[0] == "leaf":
                d = node[1]
                if not isinstance(d, Delay):
                    raise TypeError(
                        f"distribution input must hold Delay values, found {type(d).__name__}")
                return dmap(d, lambda v: fm.unit(th, v))
            args = [go(child) for child in node[1:]]
            return self.lift_op(node[0], args, th)

        return reify(go(rep))


def induced_candidate(th: Theory, mode: str) -> DistLawCandidate:
    if mode not in ("seq", "par"):
        raise ValueError(f"induced candidates exist for 'seq' and 'par', not {mode!r}")
    return DistLawCandidate(th, mode, _lifter(mode))


def custom_candidate(th: Theory, name: str, lift_op: OpLifter) -> DistLawCandidate:
    return DistLawCandidate(th, name, lift_op)
