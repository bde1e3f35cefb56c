"""Finite-game machinery: payoff tensors, iterated deletion of strictly
dominated strategies, evolutionary stability, and the reward-regime game
between uniformly-distributed and power-law-concentrated mining rewards.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import TooLarge

_TENSOR_CAP = 1_000_000  # payoff entries an exhaustive pass may touch


@dataclass(frozen=True)
class PayoffMatrix:
    """n-player finite game. u[s1, ..., sn, i] is player i's payoff at the
    pure profile (s1, ..., sn); strategies[i] names player i's options."""

    strategies: tuple[tuple[str, ...], ...]
    u: np.ndarray

    def __init__(self, strategies, u):
        strategies = tuple(tuple(s) for s in strategies)
        u = np.asarray(u, dtype=float)
        expected = tuple(len(s) for s in strategies) + (len(strategies),)
        if u.shape != expected:
            raise ValueError(f"payoff tensor shape {u.shape} != {expected}")
        if not np.isfinite(u).all():
            raise ValueError("payoffs must be finite")
        if u.size > _TENSOR_CAP:
            raise TooLarge("payoff tensor too large for exhaustive analysis")
        object.__setattr__(self, "strategies", strategies)
        object.__setattr__(self, "u", u)
        u.setflags(write=False)

    @property
    def num_players(self) -> int:
        return len(self.strategies)

    def payoff(self, player: int, profile: tuple[int, ...]) -> float:
        return float(self.u[tuple(profile) + (player,)])


def is_pure_nash(matrix: PayoffMatrix, profile: tuple[int, ...]) -> bool:
    """No player gains by a unilateral switch to any of its strategies."""
    profile = tuple(profile)
    for i in range(matrix.num_players):
        here = matrix.payoff(i, profile)
        for alt in range(len(matrix.strategies[i])):
            trial = profile[:i] + (alt,) + profile[i + 1:]
            if matrix.payoff(i, trial) > here + 1e-12:
                return False
    return True


@dataclass(frozen=True)
class Elimination:
    round: int
    player: int
    removed: str
    dominated_by: str


@dataclass(frozen=True)
class IdsdsResult:
    surviving: tuple[tuple[str, ...], ...]  # per player, labels that remain
    survivors: tuple[tuple[str, ...], ...]  # full surviving profiles (labels)
    trace: tuple[Elimination, ...]
    unique_survivor: tuple[str, ...] | None
    is_dominant_equilibrium: bool
    nash_verified: bool


def idsds(matrix: PayoffMatrix) -> IdsdsResult:
    """Iterated deletion of strictly dominated strategies, to fixpoint.

    A strategy is removed when some other remaining strategy yields strictly
    more against every remaining opponent combination. When one profile
    survives, it is flagged a dominant-strategy equilibrium and re-checked
    with the direct Nash test on the original game.
    """
    alive: list[list[int]] = [list(range(len(s))) for s in matrix.strategies]
    trace: list[Elimination] = []
    round_no = 0
    changed = True
    while changed:
        changed = False
        round_no += 1
        for i in range(matrix.num_players):
            others = [alive[j] for j in range(matrix.num_players) if j != i]
            removed_now = []
            for s in list(alive[i]):
                dominator = None
                for t in alive[i]:
                    if t == s:
                        continue
                    if all(matrix.payoff(i, _insert(ctx, i, t))
                           > matrix.payoff(i, _insert(ctx, i, s))
                           for ctx in itertools.product(*others)):
                        dominator = t
                        break
                if dominator is not None:
                    removed_now.append((s, dominator))
            for s, t in removed_now:
                if len(alive[i]) == 1:
                    break
                alive[i].remove(s)
                trace.append(Elimination(round_no, i, matrix.strategies[i][s],
                                         matrix.strategies[i][t]))
                changed = True
    surviving = tuple(tuple(matrix.strategies[i][s] for s in alive[i])
                      for i in range(matrix.num_players))
    survivor_profiles = tuple(itertools.product(*surviving))
    unique = survivor_profiles[0] if len(survivor_profiles) == 1 else None
    nash_ok = False
    if unique is not None:
        idx = tuple(alive[i][0] for i in range(matrix.num_players))
        nash_ok = is_pure_nash(matrix, idx)
    return IdsdsResult(surviving=surviving, survivors=survivor_profiles, trace=tuple(trace),
                       unique_survivor=unique, is_dominant_equilibrium=unique is not None,
                       nash_verified=nash_ok)


def _insert(ctx: tuple[int, ...], i: int, s: int) -> tuple[int, ...]:
    return ctx[:i] + (s,) + ctx[i:]


# ---------------------------------------------------------------------------
# Evolutionary stability
# ---------------------------------------------------------------------------


def _payoff_fn(u):
    if callable(u):
        return u
    return lambda a, b: float(u[(a, b)])


def is_ess(u, strategies, candidate, *, epsilon0: float = 0.1,
           grid_points: int = 12) -> bool:
    """Evolutionary stability of `candidate` in a symmetric two-player game.

    For every mutant s' the resident must either beat it against residents
    outright, or tie there and strictly beat it against mutants. The implied
    mixed-population inequality is then re-verified numerically for invasion
    shares epsilon on a grid in [1e-3, epsilon0].
    """
    pay = _payoff_fn(u)
    strategies = tuple(strategies)
    if candidate not in strategies:
        raise ValueError("candidate must be one of the strategies")
    resident = pay(candidate, candidate)
    for mutant in strategies:
        if mutant == candidate:
            continue
        against_resident = pay(mutant, candidate)
        if resident > against_resident:
            pass  # strict Nash against this mutant
        elif resident == against_resident and pay(candidate, mutant) > pay(mutant, mutant):
            pass  # tie broken by performance against the mutant itself
        else:
            return False
        # Numeric re-verification on an invasion-share grid. Stability only
        # needs SOME positive barrier, so when the mutant does better in
        # mutant-heavy mixes the grid stays below the analytic barrier
        # A / (A - B) instead of sweeping all the way to epsilon0.
        gap_resident = resident - against_resident
        gap_mutant = pay(candidate, mutant) - pay(mutant, mutant)
        hi = epsilon0
        if gap_mutant < 0:
            hi = min(hi, 0.5 * gap_resident / (gap_resident - gap_mutant))
        lo = min(1e-3, hi / 2)
        for eps in np.linspace(lo, hi, grid_points):
            fit_resident = (1 - eps) * resident + eps * pay(candidate, mutant)
            fit_mutant = (1 - eps) * against_resident + eps * pay(mutant, mutant)
            if not fit_resident > fit_mutant:
                return False
    return True


# ---------------------------------------------------------------------------
# Reward-regime game
# ---------------------------------------------------------------------------

UDCE = "UDCE"
PLFC = "PLFC"


def zipf_shares(population: int, exponent: float) -> np.ndarray:
    """Rank-ordered power-law reward shares summing to one."""
    weights = np.arange(1, population + 1, dtype=float) ** (-exponent)
    return weights / weights.sum()


def calibrate_power_law(population: int, top_count: int, top_share: float) -> float:
    """Exponent at which the top_count largest holders own top_share of the
    rewards (e.g. 16 miners holding 90%)."""
    if not 0 < top_share < 1 or not 0 < top_count < population:
        raise ValueError("need 0 < top_share < 1 and 0 < top_count < population")

    def gap(s):
        return float(zipf_shares(population, s)[:top_count].sum()) - top_share

    return float(brentq(gap, 1e-3, 16.0, xtol=1e-12))


def udce_vs_plfc_game(miner_count: int, pow_cost_model, reward_r: float, *,
                      share_model: str = "zipf", population: int = 10_000,
                      top_count: int = 16, top_share: float = 0.9,
                      exponent: float | None = None,
                      udce_cost: float = 0.0) -> PayoffMatrix:
    """Entrant's choice between reward regimes, as a finite game.

    Each of miner_count prospective miners picks the uniformly-rewarding
    chain or the power-law-concentrated one; payoffs are expected rewards
    against the existing population minus operating cost, so they depend
    only on the miner's own choice. Share models:

    * "zipf": the concentrated chain seats an entrant at the bottom of a
      calibrated power-law ladder; the uniform chain pays 1/population.
    * "winner_take_all": one winner among the miner_count entrants, so both
      regimes pay reward_r/miner_count before costs.
    * "uniform": the concentrated chain degenerates to uniform shares,
      leaving costs as the only difference (with zero cost the payoffs tie
      and nothing is dominated).
    """
    if miner_count < 2:
        raise ValueError("the game needs at least two miners")
    if 2 ** miner_count * miner_count > _TENSOR_CAP:
        raise TooLarge("miner count too large for an explicit payoff tensor")
    pow_cost = float(pow_cost_model(miner_count)) if callable(pow_cost_model) \
        else float(pow_cost_model)
    if share_model == "zipf":
        s = exponent if exponent is not None else calibrate_power_law(
            population, top_count, top_share)
        plfc_share = float(zipf_shares(population, s)[-1])
        udce_share = 1.0 / population
    elif share_model == "winner_take_all":
        plfc_share = udce_share = 1.0 / miner_count
    elif share_model == "uniform":
        plfc_share = udce_share = 1.0 / population
    else:
        raise ValueError(f"unknown share model {share_model!r}")
    udce_pay = reward_r * udce_share - udce_cost
    plfc_pay = reward_r * plfc_share - pow_cost
    shape = (2,) * miner_count + (miner_count,)
    u = np.empty(shape)
    for profile in itertools.product((0, 1), repeat=miner_count):
        for i, choice in enumerate(profile):
            u[profile + (i,)] = udce_pay if choice == 0 else plfc_pay
    return PayoffMatrix(strategies=((UDCE, PLFC),) * miner_count, u=u)
