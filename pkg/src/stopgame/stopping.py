"""Stopping times, their exhaustive enumeration, and reaction strategies.

A stopping time is an outcome-indexed vector of times whose level sets are
unions of atoms: the decision to stop at t may only use information visible
at t. A stopping strategy maps every stopping time of the opponent to one of
your own; the two non-anticipativity flavors differ in whether you may react
at the very moment the opponent acts (Type II) or only from the next step on
(Type I).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .space import FilteredSpace

StoppingTime = tuple[int, ...]

DEFAULT_STOPPING_TIME_CAP = 10**6
DEFAULT_STRATEGY_CAP = 10**7


class EnumerationOverflowError(RuntimeError):
    """An enumeration would exceed its configured cap; raised before any work."""


class StrategyKind(Enum):
    TYPE_I = "type_i"
    TYPE_II = "type_ii"
    UNCHECKED = "unchecked"


@dataclass(frozen=True)
class StoppingTimeSet:
    """All stopping times valued in {from_t..horizon}, in canonical order.

    The order is the lexicographic order of the per-atom stop/continue
    decision encoding (stop listed before every continuation), which makes
    golden tests and serialized reports stable across runs.
    """

    from_t: int
    items: tuple[StoppingTime, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {st: i for i, st in enumerate(self.items)})

    def index_of(self, st: StoppingTime) -> int:
        try:
            return self._index[tuple(st)]  # type: ignore[attr-defined]
        except KeyError:
            raise ValueError(f"{st} is not a member of this stopping-time set") from None

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[StoppingTime]:
        return iter(self.items)

    def __contains__(self, st: object) -> bool:
        return isinstance(st, tuple) and st in self._index  # type: ignore[attr-defined]


@dataclass(frozen=True)
class StoppingStrategy:
    """A total map from an ambient stopping-time set to stopping times.

    ``table[i]`` is the reply to ``ambient.items[i]``. Two strategies are
    equal iff their tables agree over the same ambient set; the kind tag is
    classification metadata and excluded from equality.
    """

    ambient: StoppingTimeSet
    table: tuple[StoppingTime, ...]
    kind: StrategyKind = field(default=StrategyKind.UNCHECKED, compare=False)

    def __post_init__(self) -> None:
        if len(self.table) != len(self.ambient.items):
            raise ValueError(
                f"table has {len(self.table)} entries for {len(self.ambient.items)} stopping times"
            )
        object.__setattr__(self, "table", tuple(tuple(entry) for entry in self.table))

    def __call__(self, sigma: StoppingTime) -> StoppingTime:
        return self.table[self.ambient.index_of(sigma)]


def is_stopping_time(times: StoppingTime, space: FilteredSpace) -> bool:
    """True iff every level set {times = t} is a union of atoms at time t."""
    if len(times) != space.n_outcomes:
        raise ValueError(f"vector has {len(times)} entries, space has {space.n_outcomes} outcomes")
    for v in times:
        if not 0 <= v <= space.horizon:
            raise ValueError(f"time {v} outside 0..{space.horizon}")
    for t in range(space.horizon + 1):
        for atom in space.atoms(t):
            stopped = [times[i] == t for i in atom]
            if any(stopped) and not all(stopped):
                return False
    return True


def count_stopping_times(space: FilteredSpace, from_t: int = 0) -> int:
    """Size of the stopping-time set from ``from_t``, via the product recursion.

    An atom at time t either stops now (one choice) or continues, in which
    case each child atom at t+1 decides independently; at the horizon only
    stopping remains.
    """
    if not 0 <= from_t <= space.horizon:
        raise ValueError(f"from_t {from_t} outside 0..{space.horizon}")

    def per_atom(t: int, atom: tuple[int, ...]) -> int:
        if t == space.horizon:
            return 1
        members = set(atom)
        total = 1
        for child in space.atoms(t + 1):
            if child and child[0] in members:
                total *= per_atom(t + 1, child)
        return 1 + total

    result = 1
    for atom in space.atoms(from_t):
        result *= per_atom(from_t, atom)
    return result


def enumerate_stopping_times(
    space: FilteredSpace, from_t: int = 0, cap: int = DEFAULT_STOPPING_TIME_CAP
) -> StoppingTimeSet:
    """Enumerate every stopping time valued in {from_t..horizon}.

    Fails fast with :class:`EnumerationOverflowError` if the count (known in
    advance from the product recursion) exceeds ``cap``.
    """
    total = count_stopping_times(space, from_t)
    if total > cap:
        raise EnumerationOverflowError(
            f"stopping-time enumeration from t={from_t} has {total} members, cap is {cap}"
        )

    def options(t: int, atom: tuple[int, ...]) -> list[dict[int, int]]:
        stop_now = {i: t for i in atom}
        if t == space.horizon:
            return [stop_now]
        members = set(atom)
        children = [c for c in space.atoms(t + 1) if c and c[0] in members]
        out = [stop_now]
        for combo in itertools.product(*(options(t + 1, c) for c in children)):
            merged: dict[int, int] = {}
            for part in combo:
                merged.update(part)
            out.append(merged)
        return out

    n = space.n_outcomes
    items: list[StoppingTime] = []
    per_atom_lists = [options(from_t, atom) for atom in space.atoms(from_t)]
    for combo in itertools.product(*per_atom_lists):
        vec = [0] * n
        for part in combo:
            for i, v in part.items():
                vec[i] = v
        items.append(tuple(vec))
    return StoppingTimeSet(from_t, tuple(items))


def _pair_ok(r1: int, r2: int, m: int, strict: bool) -> bool:
    # strict=True is the Type II reading: equal replies strictly before the
    # earlier opponent action, or both replies no earlier than it.
    if strict:
        return (r1 == r2 and r1 < m) or (min(r1, r2) >= m)
    return (r1 == r2 and r1 <= m) or (min(r1, r2) > m)


def nonanticipativity_witness(
    s: StoppingStrategy, kind: StrategyKind
) -> tuple[int, int, int] | None:
    """First (i, j, outcome) whose pair of replies violates the condition, else None.

    The condition is checked pointwise per outcome: for each pair of inputs
    and each outcome, the replies must either coincide and act no later than
    (Type I: no later than; Type II: strictly before) the earlier of the two
    inputs, or both act strictly after (Type I) / no earlier than (Type II)
    it.
    """
    if kind is StrategyKind.UNCHECKED:
        raise ValueError("kind must be TYPE_I or TYPE_II")
    strict = kind is StrategyKind.TYPE_II
    items = s.ambient.items
    n = len(items)
    for i in range(n):
        s1, r1 = items[i], s.table[i]
        for j in range(i + 1, n):
            s2, r2 = items[j], s.table[j]
            for w in range(len(s1)):
                m = s1[w] if s1[w] < s2[w] else s2[w]
                if not _pair_ok(r1[w], r2[w], m, strict):
                    return (i, j, w)
    return None


def check_nonanticipativity(s: StoppingStrategy, kind: StrategyKind) -> bool:
    """True iff the strategy satisfies the pairwise condition of the given kind."""
    return nonanticipativity_witness(s, kind) is None


def enumerate_strategies(
    ambient: StoppingTimeSet, kind: StrategyKind, cap: int = DEFAULT_STRATEGY_CAP
) -> Iterator[StoppingStrategy]:
    """Stream every strategy of the given kind over ``ambient``, in table order.

    Candidates are built entry by entry and pruned on the first violating
    pair, so invalid branches are abandoned early. The candidate-map count
    ``len(ambient) ** len(ambient)`` must be within ``cap`` before anything
    is yielded.
    """
    if kind is StrategyKind.UNCHECKED:
        raise ValueError("kind must be TYPE_I or TYPE_II")
    n = len(ambient.items)
    candidates = n**n
    if candidates > cap:
        raise EnumerationOverflowError(
            f"strategy enumeration has {n}^{n} = {candidates} candidate maps, cap is {cap}"
        )
    return _strategy_stream(ambient, kind)


def _strategy_stream(ambient: StoppingTimeSet, kind: StrategyKind) -> Iterator[StoppingStrategy]:
    items = ambient.items
    strict = kind is StrategyKind.TYPE_II
    n = len(items)
    nw = len(items[0]) if items else 0
    table: list[StoppingTime] = []

    def compatible(i: int, cand: StoppingTime) -> bool:
        s1 = items[i]
        for j in range(i):
            s2, r2 = items[j], table[j]
            for w in range(nw):
                m = s1[w] if s1[w] < s2[w] else s2[w]
                if not _pair_ok(cand[w], r2[w], m, strict):
                    return False
        return True

    def rec(i: int) -> Iterator[StoppingStrategy]:
        if i == n:
            yield StoppingStrategy(ambient=ambient, table=tuple(table), kind=kind)
            return
        for cand in items:
            if compatible(i, cand):
                table.append(cand)
                yield from rec(i + 1)
                table.pop()

    yield from rec(0)


def compose_family(
    family: tuple[StoppingTime, ...], sigma: StoppingTime, space: FilteredSpace
) -> StoppingTime:
    """Evaluate a time-indexed family at a stopping time: outcome by outcome.

    ``family[t]`` is the plan used on the event {sigma = t}; it must be a
    stopping time valued in {t..horizon}, which makes the composed vector a
    stopping time as well.
    """
    if len(family) != space.horizon + 1:
        raise ValueError(f"family has {len(family)} entries, horizon {space.horizon} needs {space.horizon + 1}")
    for t, st in enumerate(family):
        if not is_stopping_time(st, space):
            raise ValueError(f"family[{t}] is not a stopping time")
        if any(v < t for v in st):
            raise ValueError(f"family[{t}] takes a value below {t}")
    return tuple(family[sigma[w]][w] for w in range(len(sigma)))
