"""Backward-induction solver for the two-sided stopping game.

The game is reduced to a stop-or-continue game between two value processes:
``v1[t]`` is what the minimizer can guarantee once the maximizer is frozen
at t, ``v2[t]`` what the maximizer can extract once the minimizer is frozen
at t (never less than ``v1[t]``). The reduced game's value process ``v`` and
its earliest hitting rules, together with the per-time reaction families,
assemble into explicit optimal strategies for both players.

Everything here is exact: the hitting rules compare Fractions for equality,
which is why no floating point is allowed anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass

from .payoff import BiPayoff, expected_payoff, validate_payoff
from .space import (
    AdaptedProcess,
    FilteredSpace,
    Rational,
    cond_exp,
    expectation,
    validate_space,
)
from .stopping import (
    StoppingStrategy,
    StoppingTime,
    StoppingTimeSet,
    StrategyKind,
    compose_family,
)


@dataclass(frozen=True)
class GameSolution:
    """Solved game: value processes, stopping rules, and reaction families.

    ``rho_u[t]`` is the minimizer's optimal stop from t on against an
    opponent frozen at t (valued in {t..T}); ``tau_u[t]`` the maximizer's
    optimal stop strictly after a minimizer frozen at t (valued in
    {t+1..T} for t < T, and T at the horizon). ``rho_d`` / ``tau_d`` are
    the earliest times the reduced-game value touches ``v2`` / ``v1``.
    """

    space: FilteredSpace
    payoff: BiPayoff
    v1: AdaptedProcess
    v2: AdaptedProcess
    v: AdaptedProcess
    rho_d: StoppingTime
    tau_d: StoppingTime
    rho_u: tuple[StoppingTime, ...]
    tau_u: tuple[StoppingTime, ...]
    value: Rational


def lower_process(
    u: BiPayoff, space: FilteredSpace
) -> tuple[AdaptedProcess, tuple[StoppingTime, ...]]:
    """Minimizer's standing values and earliest optimal reactions.

    For each t, run the min-Snell recursion on the column U(., t) backward
    from the horizon: W_s = min(U(s, t), E_s[W_{s+1}]). Then v1[t] = W_t and
    rho_u[t] stops at the first s >= t where the envelope touches the
    payoff.
    """
    T, n = space.horizon, space.n_outcomes
    v1: list[tuple[Rational, ...]] = []
    rho_u: list[StoppingTime] = []
    for t in range(T + 1):
        w = u.table[T][t]
        stop = [T] * n
        for s in range(T - 1, t - 1, -1):
            cont = cond_exp(w, space, s)
            stay = u.table[s][t]
            vals: list[Rational] = []
            for k in range(n):
                if stay[k] <= cont[k]:
                    vals.append(stay[k])
                    stop[k] = s
                else:
                    vals.append(cont[k])
            w = tuple(vals)
        v1.append(w)
        rho_u.append(tuple(stop))
    return tuple(v1), tuple(rho_u)


def upper_process(
    u: BiPayoff, space: FilteredSpace, v1: AdaptedProcess
) -> tuple[AdaptedProcess, tuple[StoppingTime, ...]]:
    """Maximizer's standing values and earliest optimal reactions.

    For each t < T, run the max-Snell recursion on the row U(t, .) over
    times strictly after t, take its time-t conditional expectation, and
    floor the result at v1[t]. tau_u[t] stops at the first s >= t+1 where
    the sup-envelope touches the payoff; at the horizon both players are
    forced to T.
    """
    T, n = space.horizon, space.n_outcomes
    v2: list[tuple[Rational, ...]] = []
    tau_u: list[StoppingTime] = []
    for t in range(T):
        z = u.table[t][T]
        stop = [T] * n
        for s in range(T - 1, t, -1):
            cont = cond_exp(z, space, s)
            stay = u.table[t][s]
            vals: list[Rational] = []
            for k in range(n):
                if stay[k] >= cont[k]:
                    vals.append(stay[k])
                    stop[k] = s
                else:
                    vals.append(cont[k])
            z = tuple(vals)
        y = cond_exp(z, space, t)
        v2.append(tuple(max(y[k], v1[t][k]) for k in range(n)))
        tau_u.append(tuple(stop))
    v2.append(u.table[T][T])
    tau_u.append((T,) * n)
    return tuple(v2), tuple(tau_u)


def dynkin_value(
    v1: AdaptedProcess, v2: AdaptedProcess, space: FilteredSpace
) -> tuple[AdaptedProcess, StoppingTime, StoppingTime]:
    """Value process of the reduced stop-first game and its hitting rules.

    Backward recursion v[t] = min(v2[t], max(v1[t], E_t[v[t+1]])) with
    terminal value v1[T]. rho_d stops the first time v meets v2, tau_d the
    first time v meets v1; both are reached by the horizon because the two
    processes coincide there.
    """
    T, n = space.horizon, space.n_outcomes
    for t in range(T + 1):
        for k in range(n):
            if v1[t][k] > v2[t][k]:
                raise ValueError(f"lower process exceeds upper process at t={t}, outcome {k}")
    v: list[tuple[Rational, ...]] = [()] * (T + 1)
    v[T] = tuple(v1[T])
    for t in range(T - 1, -1, -1):
        cont = cond_exp(v[t + 1], space, t)
        v[t] = tuple(min(v2[t][k], max(v1[t][k], cont[k])) for k in range(n))
    rho_d = tuple(next(s for s in range(T + 1) if v[s][k] == v2[s][k]) for k in range(n))
    tau_d = tuple(next(s for s in range(T + 1) if v[s][k] == v1[s][k]) for k in range(n))
    return tuple(v), rho_d, tau_d


def solve(u: BiPayoff, space: FilteredSpace) -> GameSolution:
    """Validate, run the three backward passes, and assemble the solution."""
    problems = validate_space(space)
    if problems:
        raise ValueError("invalid space: " + "; ".join(str(p) for p in problems))
    problems = validate_payoff(u, space)
    if problems:
        raise ValueError("invalid payoff: " + "; ".join(str(p) for p in problems))
    v1, rho_u = lower_process(u, space)
    v2, tau_u = upper_process(u, space, v1)
    v, rho_d, tau_d = dynkin_value(v1, v2, space)
    return GameSolution(
        space=space,
        payoff=u,
        v1=v1,
        v2=v2,
        v=v,
        rho_d=rho_d,
        tau_d=tau_d,
        rho_u=rho_u,
        tau_u=tau_u,
        value=expectation(v[0], space),
    )


def build_rho_star(sol: GameSolution, ambient: StoppingTimeSet) -> StoppingStrategy:
    """Minimizer's full reaction strategy.

    Against an opponent that acts while the minimizer would still be
    waiting, reply with the reaction family evaluated at the opponent's
    time; once the opponent outlasts rho_d, stop there. The result
    satisfies the Type II condition: it may react at the very moment the
    opponent acts.
    """
    n = sol.space.n_outcomes
    rows: list[StoppingTime] = []
    for tau in ambient.items:
        reaction = compose_family(sol.rho_u, tau, sol.space)
        rows.append(
            tuple(sol.rho_d[k] if tau[k] > sol.rho_d[k] else reaction[k] for k in range(n))
        )
    return StoppingStrategy(ambient=ambient, table=tuple(rows), kind=StrategyKind.TYPE_II)


def build_tau_star(
    sol: GameSolution, rho: StoppingStrategy, ambient: StoppingTimeSet | None = None
) -> StoppingTime:
    """Maximizer's best reply to a whole minimizer strategy.

    Probe the strategy at tau_d: where it lets tau_d through, play tau_d;
    where it undercuts, switch to the reaction family evaluated at the
    strategy's reply. Returns a stopping time, not a strategy, because the
    inner player moves second.
    """
    amb = ambient if ambient is not None else rho.ambient
    sigma = rho.table[amb.index_of(sol.tau_d)]
    reaction = compose_family(sol.tau_u, sigma, sol.space)
    n = sol.space.n_outcomes
    return tuple(sol.tau_d[k] if sol.tau_d[k] <= sigma[k] else reaction[k] for k in range(n))


def build_tau_starstar(sol: GameSolution, ambient: StoppingTimeSet) -> StoppingStrategy:
    """Maximizer's full reaction strategy, reacting only from the next step.

    Play tau_d against opponents who last at least that long; against an
    earlier stop, reply with the reaction family, which always waits at
    least one step past the opponent. The result satisfies the Type I
    condition.
    """
    n = sol.space.n_outcomes
    rows: list[StoppingTime] = []
    for rho in ambient.items:
        reaction = compose_family(sol.tau_u, rho, sol.space)
        rows.append(
            tuple(sol.tau_d[k] if rho[k] >= sol.tau_d[k] else reaction[k] for k in range(n))
        )
    return StoppingStrategy(ambient=ambient, table=tuple(rows), kind=StrategyKind.TYPE_I)


def build_rho_starstar(
    sol: GameSolution, tau: StoppingStrategy, ambient: StoppingTimeSet | None = None
) -> StoppingTime:
    """Minimizer's best reply to a whole maximizer strategy.

    Probe the strategy at rho_d: where the reply comes strictly later, stop
    at rho_d; otherwise follow the reaction family evaluated at the reply.
    """
    amb = ambient if ambient is not None else tau.ambient
    sigma = tau.table[amb.index_of(sol.rho_d)]
    reaction = compose_family(sol.rho_u, sigma, sol.space)
    n = sol.space.n_outcomes
    return tuple(sol.rho_d[k] if sol.rho_d[k] < sigma[k] else reaction[k] for k in range(n))


def corollary_identities(
    sol: GameSolution, ambient: StoppingTimeSet, eps: Rational = 0
) -> bool:
    """Closed-form check of the equilibrium play along the constructed pair.

    Materializes the minimizer strategy, the maximizer's best reply to it,
    and the minimizer's realized action; both must match their closed
    forms in terms of rho_d, tau_d and the reaction families, and the
    realized expected payoff must equal the game value.
    """
    n = sol.space.n_outcomes
    rho_star = build_rho_star(sol, ambient)
    tau_reply = build_tau_star(sol, rho_star, ambient)
    rho_realized = rho_star.table[ambient.index_of(tau_reply)]
    ru_at_taud = compose_family(sol.rho_u, sol.tau_d, sol.space)
    tu_at_rhod = compose_family(sol.tau_u, sol.rho_d, sol.space)
    want_rho = tuple(
        sol.rho_d[k] if sol.tau_d[k] > sol.rho_d[k] else ru_at_taud[k] for k in range(n)
    )
    want_tau = tuple(
        sol.tau_d[k] if sol.tau_d[k] <= sol.rho_d[k] else tu_at_rhod[k] for k in range(n)
    )
    if rho_realized != want_rho or tau_reply != want_tau:
        return False
    realized = expected_payoff(sol.payoff, rho_realized, tau_reply, sol.space)
    return abs(realized - sol.value) <= eps
