"""Finite filtered probability spaces with exact rational arithmetic.

A space is a finite outcome set with strictly positive probabilities and a
filtration given as refining partitions, one per time step. All arithmetic
is done with :class:`fractions.Fraction`, so conditional expectations and
value comparisons are exact; nothing in this package rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

Rational = Fraction
RandomVariable = tuple[Rational, ...]
AdaptedProcess = tuple[RandomVariable, ...]
Atom = tuple[int, ...]
Partition = tuple[Atom, ...]

ONE = Fraction(1)
ZERO = Fraction(0)


@dataclass(frozen=True)
class Violation:
    """One failed invariant, with a code, a location, and a human message."""

    code: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} {self.location} {self.message}"


@dataclass(frozen=True)
class FilteredSpace:
    """Outcomes, probabilities, and a partition filtration over times 0..horizon.

    ``filtration[t]`` is the information available at time t: a partition of
    the outcome indices into atoms. Construction normalizes atoms to sorted
    tuples and sorts atoms within each partition, so iteration order (and
    every enumeration built on top of it) is stable across runs. Validation
    is separate; see :func:`validate_space`.
    """

    horizon: int
    outcomes: tuple[tuple[str, Rational], ...]
    filtration: tuple[Partition, ...]

    def __post_init__(self) -> None:
        outcomes = tuple((str(label), Fraction(p)) for label, p in self.outcomes)
        filtration = tuple(
            tuple(sorted(tuple(sorted(int(i) for i in atom)) for atom in partition))
            for partition in self.filtration
        )
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "filtration", filtration)

    @classmethod
    def single_outcome(cls, horizon: int, label: str = "w") -> "FilteredSpace":
        """Deterministic space: one outcome, trivial partitions at every time."""
        return cls(horizon, ((label, ONE),), (((0,),),) * (horizon + 1))

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    @property
    def probabilities(self) -> tuple[Rational, ...]:
        return tuple(p for _, p in self.outcomes)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.outcomes)

    def atoms(self, t: int) -> Partition:
        if not 0 <= t <= self.horizon:
            raise ValueError(f"time {t} outside 0..{self.horizon}")
        return self.filtration[t]


def validate_space(space: FilteredSpace) -> list[Violation]:
    """Check every space invariant; an empty list means the space is valid.

    Violations are data, not exceptions: each one carries the failing
    invariant and where it failed, so a caller can report all of them at
    once.
    """
    found: list[Violation] = []
    n = space.n_outcomes

    if space.horizon < 0:
        found.append(Violation("HORIZON", "horizon", f"horizon {space.horizon} is negative"))
    if n == 0:
        found.append(Violation("OUTCOMES_EMPTY", "outcomes", "no outcomes"))

    for i, (label, p) in enumerate(space.outcomes):
        if p <= 0:
            found.append(
                Violation("PROBABILITY_POSITIVE", f"outcome[{i}]", f"probability of '{label}' is {p}, must be > 0")
            )
    mass = sum(space.probabilities, ZERO)
    if n and mass != 1:
        found.append(Violation("PROBABILITY_MASS", "outcomes", f"probabilities sum to {mass}, not 1"))

    expected_len = space.horizon + 1
    if len(space.filtration) != expected_len:
        found.append(
            Violation(
                "FILTRATION_LENGTH",
                "filtration",
                f"{len(space.filtration)} partitions given, horizon {space.horizon} needs {expected_len}",
            )
        )

    for t, partition in enumerate(space.filtration):
        seen: dict[int, int] = {}
        for a, atom in enumerate(partition):
            if not atom:
                found.append(Violation("FILTRATION_EMPTY_ATOM", f"t={t} atom[{a}]", "empty atom"))
            for idx in atom:
                if not 0 <= idx < n:
                    found.append(
                        Violation("FILTRATION_INDEX", f"t={t} atom[{a}]", f"outcome index {idx} out of range")
                    )
                else:
                    seen[idx] = seen.get(idx, 0) + 1
        for idx in range(n):
            count = seen.get(idx, 0)
            if count != 1:
                found.append(
                    Violation(
                        "FILTRATION_COVER",
                        f"t={t}",
                        f"outcome {idx} appears {count} times, must appear exactly once",
                    )
                )

    for t in range(len(space.filtration) - 1):
        coarse = space.filtration[t]
        for atom in space.filtration[t + 1]:
            if not atom:
                continue
            parents = [c for c in coarse if set(atom) & set(c)]
            if len(parents) != 1 or not set(atom) <= set(parents[0]):
                found.append(
                    Violation(
                        "FILTRATION_REFINEMENT",
                        f"t={t + 1} atom {atom}",
                        f"not contained in a single atom of the partition at t={t}",
                    )
                )

    return found


def is_measurable(x: RandomVariable, space: FilteredSpace, t: int) -> bool:
    """True iff ``x`` is constant on every atom of the partition at time t."""
    if len(x) != space.n_outcomes:
        raise ValueError(f"vector has {len(x)} entries, space has {space.n_outcomes} outcomes")
    for atom in space.atoms(t):
        first = x[atom[0]]
        if any(x[i] != first for i in atom[1:]):
            return False
    return True


def cond_exp(x: RandomVariable, space: FilteredSpace, t: int) -> RandomVariable:
    """Conditional expectation of ``x`` given the partition at time t.

    On each atom the result is the probability-weighted mean of ``x`` over
    the atom, assigned to every outcome of the atom. Exact: the result is a
    vector of Fractions with no rounding anywhere.
    """
    if len(x) != space.n_outcomes:
        raise ValueError(f"vector has {len(x)} entries, space has {space.n_outcomes} outcomes")
    probs = space.probabilities
    out: list[Rational] = [ZERO] * space.n_outcomes
    for atom in space.atoms(t):
        total = sum((probs[i] for i in atom), ZERO)
        mean = sum((probs[i] * x[i] for i in atom), ZERO) / total
        for i in atom:
            out[i] = mean
    return tuple(out)


def expectation(x: RandomVariable, space: FilteredSpace) -> Rational:
    """Unconditional expectation of ``x`` under the outcome probabilities."""
    if len(x) != space.n_outcomes:
        raise ValueError(f"vector has {len(x)} entries, space has {space.n_outcomes} outcomes")
    return sum((p * v for p, v in zip(space.probabilities, x)), ZERO)


def constant(space: FilteredSpace, value: Rational | int) -> RandomVariable:
    """The constant random variable with the given value."""
    return (Fraction(value),) * space.n_outcomes
