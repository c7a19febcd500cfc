"""Delayed computations: values guarded by zero or more computation steps.

A ``Delay`` is one of

* ``Now(v)``, a finished computation,
* ``Step(tail)``, one visible step in front of another delayed value,
* ``DIVERGE``, the computation that never finishes,

plus ``Deferred``, a lazy node whose tail is produced on demand.  Values
built by the checkers are always finite chains of ``Step`` ending in
``Now`` or ``DIVERGE``; ``Deferred`` shows up inside corecursive
definitions and is resolved away by :func:`reify`.

All observations are fuel bounded.  Comparisons are three valued
(:class:`Verdict`): strong equality counts steps exactly, weak
bisimilarity ignores finite step differences but still separates
termination from divergence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

REIFY_LIMIT = 100_000


class DelayFuelError(RuntimeError):
    """An internal observation exceeded its step budget."""


class Delay:
    __slots__ = ()

    def map(self, f: Callable[[Any], Any]) -> "Delay":
        return dmap(self, f)

    def bind(self, k: Callable[[Any], "Delay"]) -> "Delay":
        return bind(self, k)

    def __str__(self) -> str:
        return render_delay(self)


@dataclass(frozen=True, slots=True)
class Now(Delay):
    value: Any


@dataclass(frozen=True, slots=True)
class Step(Delay):
    tail: Delay


class Deferred(Delay):
    """A delayed value produced on demand.

    The thunk must be pure; its result is cached, so forcing twice yields
    the same value.  ``Deferred`` compares by identity.  Semantic
    comparisons always go through :func:`strong_equal` or
    :func:`weak_bisim`, which resolve deferred nodes as they walk.
    """

    __slots__ = ("_thunk", "_cached")

    def __init__(self, thunk: Callable[[], Delay]):
        self._thunk = thunk
        self._cached: Optional[Delay] = None

    def forced(self) -> Delay:
        if self._cached is None:
            self._cached = self._thunk()
            self._thunk = None
        return self._cached

    def peek(self) -> Optional[Delay]:
        """The cached result, or None while still suspended."""
        return self._cached

    def __repr__(self) -> str:
        return "Deferred(<suspended>)" if self._cached is None else f"Deferred({self._cached!r})"


class _Diverge(Delay):
    __slots__ = ()

    def __repr__(self) -> str:
        return "DIVERGE"


DIVERGE = _Diverge()


def now(value: Any) -> Delay:
    return Now(value)


def step(tail: Delay) -> Delay:
    if not isinstance(tail, Delay):
        raise TypeError(f"step needs a Delay tail, got {type(tail).__name__}")
    return Step(tail)


def defer(thunk: Callable[[], Delay]) -> Delay:
    return Deferred(thunk)


def diverge() -> Delay:
    return DIVERGE


def delay_n(n: int, value: Any) -> Delay:
    """step^n(now value)."""
    if n < 0:
        raise ValueError("negative step count")
    d: Delay = Now(value)
    for _ in range(n):
        d = Step(d)
    return d


def resolve(d: Delay) -> Delay:
    """Peel Deferred wrappers until a constructor is visible."""
    while isinstance(d, Deferred):
        d = d.forced()
    return d


def prepend_steps(n: int, d: Delay) -> Delay:
    for _ in range(n):
        d = Step(d)
    return d


def bind(d: Delay, k: Callable[[Any], Delay]) -> Delay:
    """Substitute into the final value, keeping every step of ``d``.

    Already-materialized prefixes (Step chains and forced Deferred nodes)
    are walked without allocating thunks; a suspension is only built at
    the first genuinely unforced node, so productivity is unaffected.
    """
    steps = 0
    cur = d
    while True:
        if isinstance(cur, Now):
            return prepend_steps(steps, k(cur.value))
        if cur is DIVERGE:
            return DIVERGE
        if isinstance(cur, Step):
            steps += 1
            cur = cur.tail
            continue
        ahead = cur.peek()
        if ahead is not None:
            cur = ahead
            continue
        pending = cur
        return prepend_steps(steps, Deferred(lambda: bind(pending.forced(), k)))


def dmap(d: Delay, f: Callable[[Any], Any]) -> Delay:
    return bind(d, lambda v: Now(f(v)))


def join(dd: Delay) -> Delay:
    """Flatten a delayed delayed value; steps of both layers add up."""
    return bind(dd, lambda inner: inner)


# ---------------------------------------------------------------------------
# observation


@dataclass(frozen=True, slots=True)
class Terminated:
    value: Any
    steps: int


class _Exhausted:
    __slots__ = ()

    def __repr__(self) -> str:
        return "EXHAUSTED"


class _KnownDivergent:
    __slots__ = ()

    def __repr__(self) -> str:
        return "KNOWN_DIVERGENT"


EXHAUSTED = _Exhausted()
KNOWN_DIVERGENT = _KnownDivergent()


def force(d: Delay, fuel: int):
    """Run for at most ``fuel`` steps.

    Returns ``Terminated(value, steps)``, ``KNOWN_DIVERGENT`` when the
    divergence marker is reached within budget, or ``EXHAUSTED``.
    """
    steps = 0
    d = resolve(d)
    while True:
        if isinstance(d, Now):
            return Terminated(d.value, steps)
        if d is DIVERGE:
            return KNOWN_DIVERGENT
        if steps >= fuel:
            return EXHAUSTED
        steps += 1
        d = resolve(d.tail)


def reify(d: Delay, limit: int = REIFY_LIMIT) -> Delay:
    """Normalise to an eager finite chain; trailing DIVERGE absorbs steps.

    Only safe on values known to be total at desk scale; raises
    DelayFuelError when the chain exceeds ``limit`` steps.
    """
    n = 0
    cur = resolve(d)
    while isinstance(cur, Step):
        n += 1
        if n > limit:
            raise DelayFuelError(f"reify exceeded {limit} steps")
        cur = resolve(cur.tail)
    if cur is DIVERGE:
        return DIVERGE
    out: Delay = cur
    for _ in range(n):
        out = Step(out)
    return out


def step_count(d: Delay, limit: int = REIFY_LIMIT) -> Optional[int]:
    """Number of steps before Now, or None for divergence."""
    n = 0
    cur = resolve(d)
    while isinstance(cur, Step):
        n += 1
        if n > limit:
            raise DelayFuelError(f"step_count exceeded {limit} steps")
        cur = resolve(cur.tail)
    return None if cur is DIVERGE else n


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True, slots=True)
class Verdict:
    kind: str  # "yes" | "no" | "unknown"
    fuel_spent: int = 0

    @property
    def is_yes(self) -> bool:
        return self.kind == "yes"

    @property
    def is_no(self) -> bool:
        return self.kind == "no"

    @property
    def is_unknown(self) -> bool:
        return self.kind == "unknown"

    def __str__(self) -> str:
        if self.kind == "unknown":
            return f"unknown(fuel_spent={self.fuel_spent})"
        return self.kind


YES = Verdict("yes")
NO = Verdict("no")


def unknown(fuel_spent: int = 0) -> Verdict:
    return Verdict("unknown", fuel_spent)


def as_verdict(x) -> Verdict:
    if isinstance(x, Verdict):
        return x
    return YES if x else NO


def conjoin(verdicts: Iterable[Verdict]) -> Verdict:
    """No dominates, then Unknown, else Yes."""
    saw_unknown = None
    for v in verdicts:
        if v.is_no:
            return v
        if v.is_unknown and saw_unknown is None:
            saw_unknown = v
    return saw_unknown if saw_unknown is not None else YES


# ---------------------------------------------------------------------------
# comparisons

ValueRel = Callable[[Any, Any], Any]  # returns bool or Verdict


def strong_equal(x: Delay, y: Delay, fuel: int, value_eq: Optional[ValueRel] = None) -> Verdict:
    """Step-exact equality: same step count and equal final values.

    Divergence equals divergence.  Unknown when fuel runs out first.
    """
    spent = 0
    x = resolve(x)
    y = resolve(y)
    while True:
        x_now = isinstance(x, Now)
        y_now = isinstance(y, Now)
        if x_now and y_now:
            if value_eq is None:
                return as_verdict(x.value == y.value)
            return as_verdict(value_eq(x.value, y.value))
        if x is DIVERGE and y is DIVERGE:
            return YES
        if x_now or y_now:
            # one side finished, the other still needs at least one step
            return NO
        if spent >= fuel:
            return unknown(spent)
        spent += 1
        if isinstance(x, Step):
            x = resolve(x.tail)
        if isinstance(y, Step):
            y = resolve(y.tail)


def weak_bisim(x: Delay, y: Delay, rel: ValueRel, fuel: int) -> Verdict:
    """Bounded weak bisimilarity over a base value relation.

    Finite step differences are ignored; termination never matches
    divergence.  Unknown when the budget runs out before a decision.
    """
    spent = 0
    x = resolve(x)
    y = resolve(y)
    while True:
        x_now = isinstance(x, Now)
        y_now = isinstance(y, Now)
        if x_now and y_now:
            return as_verdict(rel(x.value, y.value))
        if x_now:
            if y is DIVERGE:
                return NO
            if spent >= fuel:
                return unknown(spent)
            spent += 1
            y = resolve(y.tail)
            continue
        if y_now:
            if x is DIVERGE:
                return NO
            if spent >= fuel:
                return unknown(spent)
            spent += 1
            x = resolve(x.tail)
            continue
        if x is DIVERGE and y is DIVERGE:
            return YES
        # at least one Step on each side that is not Now; advance both
        if spent >= fuel:
            return unknown(spent)
        spent += 1
        if isinstance(x, Step):
            x = resolve(x.tail)
        if isinstance(y, Step):
            y = resolve(y.tail)


# ---------------------------------------------------------------------------
# rendering


def render_delay(d: Delay, value_render: Callable[[Any], str] = str, limit: int = 4096) -> str:
    """``step^n(now v)`` prints as ``n·step ▸ v``; divergence as ``⊥``."""
    n = 0
    cur = resolve(d)
    while isinstance(cur, Step):
        n += 1
        if n > limit:
            return f"{n}·step ▸ …"
        cur = resolve(cur.tail)
    if cur is DIVERGE:
        return "⊥" if n == 0 else f"{n}·step ▸ ⊥"
    return f"{n}·step ▸ {value_render(cur.value)}"
