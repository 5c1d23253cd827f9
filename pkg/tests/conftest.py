"""Shared spaces, independent brute-force oracles, and hypothesis strategies."""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from stopgame import (
    AdaptedProcess,
    BiPayoff,
    FilteredSpace,
    cond_exp,
    count_stopping_times,
    expectation,
    is_stopping_time,
)

F = Fraction


@pytest.fixture
def single_t1() -> FilteredSpace:
    return FilteredSpace.single_outcome(1)


@pytest.fixture
def two_coin() -> FilteredSpace:
    """Two outcomes, trivial at t=0, fully revealed at t=1."""
    return FilteredSpace(
        1,
        (("h", F(1, 2)), ("t", F(1, 2))),
        (((0, 1),), ((0,), (1,))),
    )


@pytest.fixture
def three_outcomes() -> FilteredSpace:
    """p = (1/2, 1/4, 1/4), split {0} vs {1,2} at t=1."""
    return FilteredSpace(
        1,
        (("a", F(1, 2)), ("b", F(1, 4)), ("c", F(1, 4))),
        (((0, 1, 2),), ((0,), (1, 2))),
    )


@pytest.fixture
def binary_t2() -> FilteredSpace:
    """Two outcomes, trivial at t=0, revealed from t=1 on, horizon 2."""
    return FilteredSpace(
        2,
        (("u", F(1, 2)), ("d", F(1, 2))),
        (((0, 1),), ((0,), (1,)), ((0,), (1,))),
    )


def balanced_tree(horizon: int, probs: tuple[Fraction, ...] | None = None) -> FilteredSpace:
    """Binary path tree: 2**horizon outcomes, split one level per step."""
    n = 2**horizon
    if probs is None:
        probs = (F(1, n),) * n
    filtration = []
    for t in range(horizon + 1):
        width = n // (2**t)
        filtration.append(tuple(tuple(range(i, i + width)) for i in range(0, n, width)))
    outcomes = tuple((f"w{i}", probs[i]) for i in range(n))
    return FilteredSpace(horizon, outcomes, tuple(filtration))


def brute_force_stopping_times(space: FilteredSpace, from_t: int = 0) -> set[tuple[int, ...]]:
    """All adapted time vectors valued in {from_t..T}, by filtering everything."""
    T = space.horizon
    out = set()
    for vec in itertools.product(range(from_t, T + 1), repeat=space.n_outcomes):
        if is_stopping_time(vec, space):
            out.add(vec)
    return out


def classical_dynkin_value(f: AdaptedProcess, g: AdaptedProcess, space: FilteredSpace) -> Fraction:
    """Stop-first game value, computed directly from (f, g) and nothing else."""
    T, n = space.horizon, space.n_outcomes
    r = tuple(g[T])
    for t in range(T - 1, -1, -1):
        cont = cond_exp(r, space, t)
        r = tuple(min(f[t][k], max(g[t][k], cont[k])) for k in range(n))
    return expectation(r, space)


def scale_shift_payoff(u: BiPayoff, alpha: Fraction, beta: Fraction) -> BiPayoff:
    table = tuple(
        tuple(tuple(alpha * v + beta for v in slice_) for slice_ in row) for row in u.table
    )
    return BiPayoff(u.horizon, table)


# ---------------------------------------------------------------------------
# hypothesis strategies


@st.composite
def spaces(draw, max_horizon: int = 3, max_outcomes: int = 6, max_stopping_times: int = 64):
    """Random valid filtered spaces with enumerable stopping-time sets.

    The filtration is encoded by the time each inter-outcome boundary
    appears; boundaries never disappear, so refinement holds by
    construction.
    """
    n = draw(st.integers(1, max_outcomes))
    horizon = draw(st.integers(0, max_horizon))
    appear = [draw(st.integers(0, horizon + 1)) for _ in range(n - 1)]
    weights = [draw(st.integers(1, 9)) for _ in range(n)]
    total = sum(weights)
    outcomes = tuple((f"w{i}", F(w, total)) for i, w in enumerate(weights))
    filtration = []
    for t in range(horizon + 1):
        cuts = [0] + [i + 1 for i, a in enumerate(appear) if a <= t] + [n]
        filtration.append(tuple(tuple(range(cuts[i], cuts[i + 1])) for i in range(len(cuts) - 1)))
    space = FilteredSpace(horizon, outcomes, tuple(filtration))
    if count_stopping_times(space) > max_stopping_times:
        # coarsen by keeping the chain filtration, which always fits
        space = FilteredSpace(horizon, outcomes, ((tuple(range(n)),),) * (horizon + 1))
    return space


@st.composite
def rationals(draw, lo: int = -4, hi: int = 4):
    num = draw(st.integers(lo * 6, hi * 6))
    den = draw(st.sampled_from([1, 2, 3, 6]))
    return F(num, den)


@st.composite
def random_variables(draw, space: FilteredSpace):
    return tuple(draw(rationals()) for _ in range(space.n_outcomes))
