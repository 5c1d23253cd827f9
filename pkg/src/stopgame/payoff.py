"""Two-sided payoff tables and the named generator families.

The payoff ``U(s, t, w)`` depends on both players' stopping decisions and
stays live until the later of the two: the slice at (s, t) must be
measurable at time max(s, t). The first index is the minimizer's time, the
second the maximizer's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .space import (
    AdaptedProcess,
    FilteredSpace,
    Rational,
    RandomVariable,
    Violation,
    expectation,
    is_measurable,
)
from .stopping import StoppingTime

EXACT = "exact"
FLOAT = "float"


class ModeError(RuntimeError):
    """A non-exact construction was requested while in exact mode."""


@dataclass(frozen=True)
class BiPayoff:
    """Payoff values indexed by (minimizer time, maximizer time, outcome)."""

    horizon: int
    table: tuple[tuple[RandomVariable, ...], ...]

    def __post_init__(self) -> None:
        table = tuple(
            tuple(tuple(Fraction(v) for v in slice_) for slice_ in row) for row in self.table
        )
        object.__setattr__(self, "table", table)

    def at(self, s: int, t: int) -> RandomVariable:
        return self.table[s][t]


@dataclass(frozen=True)
class UtilityFn:
    """Scalar transform applied to a payoff spread.

    ``identity`` and ``piecewise_linear`` (knots with rational coordinates,
    linear extrapolation with the end slopes) stay inside the rationals and
    work in exact mode. ``exponential`` is 1 - exp(-rate * x) and is float
    mode only.
    """

    name: str
    rate: Rational | None = None
    knots: tuple[tuple[Rational, Rational], ...] = ()
    slope_left: Rational = Fraction(1)
    slope_right: Rational = Fraction(1)

    def __post_init__(self) -> None:
        if self.name not in ("identity", "piecewise_linear", "exponential"):
            raise ValueError(f"unknown utility '{self.name}'")
        if self.name == "piecewise_linear":
            knots = tuple((Fraction(a), Fraction(b)) for a, b in self.knots)
            if not knots:
                raise ValueError("piecewise_linear needs at least one knot")
            if any(knots[i][0] >= knots[i + 1][0] for i in range(len(knots) - 1)):
                raise ValueError("piecewise_linear knots must have strictly increasing x")
            object.__setattr__(self, "knots", knots)
            object.__setattr__(self, "slope_left", Fraction(self.slope_left))
            object.__setattr__(self, "slope_right", Fraction(self.slope_right))
        if self.name == "exponential":
            if self.rate is None:
                raise ValueError("exponential needs a rate")
            object.__setattr__(self, "rate", Fraction(self.rate))

    @property
    def exact(self) -> bool:
        return self.name != "exponential"

    def __call__(self, x: Rational, mode: str = EXACT) -> Rational:
        if self.name == "identity":
            return x
        if self.name == "piecewise_linear":
            knots = self.knots
            if x <= knots[0][0]:
                return knots[0][1] + self.slope_left * (x - knots[0][0])
            if x >= knots[-1][0]:
                return knots[-1][1] + self.slope_right * (x - knots[-1][0])
            for (x0, y0), (x1, y1) in zip(knots, knots[1:]):
                if x0 <= x <= x1:
                    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            raise AssertionError("unreachable")
        if mode != FLOAT:
            raise ModeError("exponential utility is float mode only")
        return Fraction(1.0 - math.exp(-float(self.rate) * float(x)))


IDENTITY = UtilityFn("identity")


def validate_payoff(u: BiPayoff, space: FilteredSpace) -> list[Violation]:
    """Check measurability of every slice; dimension mismatches raise."""
    T = space.horizon
    if u.horizon != T:
        raise ValueError(f"payoff horizon {u.horizon} does not match space horizon {T}")
    if len(u.table) != T + 1 or any(len(row) != T + 1 for row in u.table):
        raise ValueError("payoff table is not (horizon+1) x (horizon+1)")
    n = space.n_outcomes
    found: list[Violation] = []
    for s in range(T + 1):
        for t in range(T + 1):
            slice_ = u.table[s][t]
            if len(slice_) != n:
                raise ValueError(f"slice ({s},{t}) has {len(slice_)} entries, space has {n} outcomes")
            level = max(s, t)
            for atom in space.atoms(level):
                first = slice_[atom[0]]
                if any(slice_[i] != first for i in atom[1:]):
                    found.append(
                        Violation(
                            "PAYOFF_MEASURABILITY",
                            f"(s={s}, t={t}) atom {atom}",
                            f"values not constant on an atom at time {level}",
                        )
                    )
    return found


def _require_adapted(p: AdaptedProcess, space: FilteredSpace, name: str) -> AdaptedProcess:
    p = tuple(tuple(Fraction(v) for v in row) for row in p)
    if len(p) != space.horizon + 1:
        raise ValueError(f"{name} has {len(p)} entries, horizon {space.horizon} needs {space.horizon + 1}")
    for t, row in enumerate(p):
        if not is_measurable(row, space, t):
            raise ValueError(f"{name}[{t}] is not measurable at time {t}")
    return p


def pad_process(p: AdaptedProcess, space: FilteredSpace) -> AdaptedProcess:
    """Extend a short process to the horizon by freezing its last value."""
    p = tuple(tuple(Fraction(v) for v in row) for row in p)
    if not p:
        raise ValueError("cannot pad an empty process")
    if len(p) > space.horizon + 1:
        raise ValueError(f"process has {len(p)} entries, longer than horizon {space.horizon} allows")
    return p + (p[-1],) * (space.horizon + 1 - len(p))


def gen_dynkin(f: AdaptedProcess, g: AdaptedProcess, space: FilteredSpace) -> BiPayoff:
    """Stop-first payoff: the minimizer's leg pays f before the maximizer acts,
    the maximizer's leg pays g otherwise. Requires f >= g everywhere."""
    f = _require_adapted(f, space, "f")
    g = _require_adapted(g, space, "g")
    T = space.horizon
    for t in range(T + 1):
        for w in range(space.n_outcomes):
            if f[t][w] < g[t][w]:
                raise ValueError(f"f >= g violated at t={t}, outcome {w}: {f[t][w]} < {g[t][w]}")
    table = tuple(
        tuple(f[s] if s < t else g[t] for t in range(T + 1)) for s in range(T + 1)
    )
    return BiPayoff(T, table)


def gen_distance(space: FilteredSpace) -> BiPayoff:
    """Deterministic |s - t| payoff: each player wants to stop far from the other."""
    T, n = space.horizon, space.n_outcomes
    table = tuple(
        tuple((Fraction(abs(s - t)),) * n for t in range(T + 1)) for s in range(T + 1)
    )
    return BiPayoff(T, table)


def gen_mismatch(space: FilteredSpace) -> BiPayoff:
    """Deterministic indicator payoff: 1 when the two stop at different times."""
    T, n = space.horizon, space.n_outcomes
    table = tuple(
        tuple((Fraction(0 if s == t else 1),) * n for t in range(T + 1)) for s in range(T + 1)
    )
    return BiPayoff(T, table)


def gen_utility_spread(
    f: AdaptedProcess,
    g: AdaptedProcess,
    utility: UtilityFn,
    space: FilteredSpace,
    mode: str = EXACT,
    pad_to_horizon: bool = False,
) -> BiPayoff:
    """Utility of the spread between a long leg stopped by the first player
    and a short leg stopped by the second: U(s, t, w) = utility(f_s(w) - g_t(w)).

    With ``pad_to_horizon`` a shorter process is extended by freezing its
    last value, so legs with different maturities share one horizon.
    """
    if mode == EXACT and not utility.exact:
        raise ModeError(f"utility '{utility.name}' is not exact; use float mode")
    if pad_to_horizon:
        f = pad_process(f, space)
        g = pad_process(g, space)
    f = _require_adapted(f, space, "f")
    g = _require_adapted(g, space, "g")
    T, n = space.horizon, space.n_outcomes
    table = tuple(
        tuple(
            tuple(utility(f[s][w] - g[t][w], mode) for w in range(n))
            for t in range(T + 1)
        )
        for s in range(T + 1)
    )
    return BiPayoff(T, table)


def gen_market_entry(
    first_mover: AdaptedProcess, second_mover_discount: AdaptedProcess, space: FilteredSpace
) -> BiPayoff:
    """Entry-timing payoff: the earlier entry time drives revenue, the later
    one drives the cost reduction enjoyed by the follower.

    One concrete measurable form: U(s, t, w) = first_mover at min(s, t) minus
    second_mover_discount at max(s, t).
    """
    first_mover = _require_adapted(first_mover, space, "first_mover")
    second_mover_discount = _require_adapted(second_mover_discount, space, "second_mover_discount")
    T, n = space.horizon, space.n_outcomes
    table = tuple(
        tuple(
            tuple(first_mover[min(s, t)][w] - second_mover_discount[max(s, t)][w] for w in range(n))
            for t in range(T + 1)
        )
        for s in range(T + 1)
    )
    return BiPayoff(T, table)


@dataclass(frozen=True)
class PayoffSpec:
    """Declarative payoff description, the JSON-facing form used by the CLI."""

    generator: str
    table: tuple[tuple[RandomVariable, ...], ...] | None = None
    f: AdaptedProcess | None = None
    g: AdaptedProcess | None = None
    utility: UtilityFn | None = None
    first_mover: AdaptedProcess | None = None
    second_mover_discount: AdaptedProcess | None = None
    pad_to_horizon: bool = False


def build_payoff(spec: PayoffSpec, space: FilteredSpace, mode: str = EXACT) -> BiPayoff:
    """Materialize a payoff table from its declarative description."""
    gen = spec.generator
    if gen == "explicit":
        if spec.table is None:
            raise ValueError("explicit payoff needs a table")
        return BiPayoff(space.horizon, spec.table)
    if gen == "dynkin":
        if spec.f is None or spec.g is None:
            raise ValueError("dynkin payoff needs f and g")
        return gen_dynkin(spec.f, spec.g, space)
    if gen == "distance":
        return gen_distance(space)
    if gen == "mismatch":
        return gen_mismatch(space)
    if gen == "utility_spread":
        if spec.f is None or spec.g is None:
            raise ValueError("utility_spread payoff needs f and g")
        return gen_utility_spread(
            spec.f, spec.g, spec.utility or IDENTITY, space, mode=mode, pad_to_horizon=spec.pad_to_horizon
        )
    if gen == "market_entry":
        if spec.first_mover is None or spec.second_mover_discount is None:
            raise ValueError("market_entry payoff needs first_mover and second_mover_discount")
        return gen_market_entry(spec.first_mover, spec.second_mover_discount, space)
    raise ValueError(f"unknown payoff generator '{gen}'")


def realized_payoff(u: BiPayoff, rho: StoppingTime, tau: StoppingTime) -> RandomVariable:
    """The payoff vector when the minimizer follows rho and the maximizer tau."""
    return tuple(u.table[rho[w]][tau[w]][w] for w in range(len(rho)))


def expected_payoff(
    u: BiPayoff, rho: StoppingTime, tau: StoppingTime, space: FilteredSpace
) -> Rational:
    """E[U(rho, tau)] for a concrete stopping-time pair."""
    return expectation(realized_payoff(u, rho, tau), space)
