"""Seeded generators for random spaces, processes, and measurable payoffs.

Used by the CLI's --random flag and by the randomized verification suites.
Everything is a pure function of the provided ``random.Random`` instance, so
a fixed seed reproduces the scenario bit for bit.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .payoff import BiPayoff
from .space import AdaptedProcess, FilteredSpace, RandomVariable, cond_exp
from .stopping import count_stopping_times

_DENOMINATORS = (1, 2, 3, 4, 6)


def _random_fraction(rng: random.Random, lo: int, hi: int) -> Fraction:
    den = rng.choice(_DENOMINATORS)
    return Fraction(rng.randint(lo * den, hi * den), den)


def _random_partitions(rng: random.Random, horizon: int, n: int) -> list[list[tuple[int, ...]]]:
    # contiguous blocks over 0..n-1; a boundary, once present, stays
    boundaries = {0, n}
    if n >= 2 and rng.random() < 0.3:  # occasional non-trivial information at time 0
        boundaries.add(rng.randrange(1, n))
    partitions = []
    for t in range(horizon + 1):
        if t > 0:
            for start, end in _blocks(boundaries, n):
                if end - start >= 2 and rng.random() < 0.5:
                    boundaries.add(rng.randrange(start + 1, end))
        partitions.append([tuple(range(s, e)) for s, e in _blocks(boundaries, n)])
    return partitions


def _blocks(boundaries: set[int], n: int) -> list[tuple[int, int]]:
    cuts = sorted(boundaries)
    return [(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1)]


def random_space(
    rng: random.Random, horizon: int, n_outcomes: int, max_stopping_times: int = 64
) -> FilteredSpace:
    """A random valid space whose stopping-time count stays enumerable.

    Retries the filtration draw when the tree branches too much; falls back
    to the single-block chain, which always fits.
    """
    weights = [rng.randint(1, 9) for _ in range(n_outcomes)]
    total = sum(weights)
    outcomes = tuple((f"w{i}", Fraction(w, total)) for i, w in enumerate(weights))
    for _ in range(64):
        space = FilteredSpace(horizon, outcomes, tuple(map(tuple, _random_partitions(rng, horizon, n_outcomes))))
        if count_stopping_times(space) <= max_stopping_times:
            return space
    chain = ((tuple(range(n_outcomes)),),) * (horizon + 1)
    return FilteredSpace(horizon, outcomes, chain)


def random_rv(
    rng: random.Random, space: FilteredSpace, t: int, lo: int = -4, hi: int = 4
) -> RandomVariable:
    """A random vector measurable at time t: one draw per atom."""
    out = [Fraction(0)] * space.n_outcomes
    for atom in space.atoms(t):
        value = _random_fraction(rng, lo, hi)
        for i in atom:
            out[i] = value
    return tuple(out)


def random_adapted(
    rng: random.Random, space: FilteredSpace, lo: int = -4, hi: int = 4
) -> AdaptedProcess:
    return tuple(random_rv(rng, space, t, lo, hi) for t in range(space.horizon + 1))


def random_payoff(
    rng: random.Random, space: FilteredSpace, lo: int = -4, hi: int = 4
) -> BiPayoff:
    """A random payoff made measurable by atom-averaging each slice.

    Raw per-outcome draws are projected onto the information available at
    max(s, t) by conditional expectation, which is exactly the measurability
    the validator demands.
    """
    T, n = space.horizon, space.n_outcomes
    table = []
    for s in range(T + 1):
        row = []
        for t in range(T + 1):
            raw = tuple(_random_fraction(rng, lo, hi) for _ in range(n))
            row.append(cond_exp(raw, space, max(s, t)))
        table.append(tuple(row))
    return BiPayoff(T, tuple(table))


def random_dynkin_pair(
    rng: random.Random, space: FilteredSpace, lo: int = -4, hi: int = 4
) -> tuple[AdaptedProcess, AdaptedProcess]:
    """Adapted (f, g) with f >= g everywhere: f is g plus a nonnegative gap."""
    g = random_adapted(rng, space, lo, hi)
    gap = tuple(random_rv(rng, space, t, 0, hi - lo) for t in range(space.horizon + 1))
    f = tuple(
        tuple(g[t][k] + gap[t][k] for k in range(space.n_outcomes))
        for t in range(space.horizon + 1)
    )
    return f, g


def random_scenario_dict(horizon: int, n_outcomes: int, seed: int) -> dict:
    """A JSON-shaped scenario with a random space and an explicit random payoff."""
    from .cli import rational_str  # local import to avoid a cycle

    rng = random.Random(seed)
    space = random_space(rng, horizon, n_outcomes)
    payoff = random_payoff(rng, space)
    return {
        "name": f"random-T{horizon}-o{n_outcomes}-seed{seed}",
        "mode": "exact",
        "space": {
            "horizon": horizon,
            "outcomes": [
                {"label": label, "probability": rational_str(p)} for label, p in space.outcomes
            ],
            "filtration": [[list(atom) for atom in part] for part in space.filtration],
        },
        "payoff": {
            "generator": "explicit",
            "table": [
                [[rational_str(v) for v in slice_] for slice_ in row] for row in payoff.table
            ],
        },
    }
