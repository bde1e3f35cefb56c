"""Mining as a congestion game: win probabilities, the exact potential,
certified equilibria, and the anarchy cost ratio."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from zkpoi.econ.congestion import (
    Allocation,
    CongestionInstance,
    deviation_certificate,
    miner_utility,
    all_nash_allocations,
    potential,
    price_of_crypto_anarchy,
    puzzle_win_prob,
    solve_congestion_nash,
    total_mining_cost,
)
from zkpoi.errors import DegenerateBaseline, Infeasible, TooLarge, ZeroMiners


def instance(k=2, n=2, mu=1.0, gamma=0.0, deadline=1.0, m=1):
    return CongestionInstance(k=k, n_miners=n, mu=mu, gamma=gamma,
                              deadline=deadline, m=m)


# ---------------------------------------------------------------------------
# Win probabilities
# ---------------------------------------------------------------------------


class TestWinProbability:
    def test_single_miner_spot(self):
        assert puzzle_win_prob(1, 1.0, 1.0) == pytest.approx(0.6321205588285577, abs=1e-15)

    def test_two_miner_spot(self):
        assert puzzle_win_prob(2, 1.0, 1.0) == pytest.approx(0.43233235838169365, abs=1e-15)

    @given(st.integers(1, 40), st.floats(0.0, 8.0), st.floats(0.0, 4.0))
    def test_matches_oracle(self, l, mu, deadline):
        assert puzzle_win_prob(l, mu, deadline) == pytest.approx(
            oracles.win_prob(l, mu, deadline), rel=1e-12, abs=1e-15)

    @given(st.integers(1, 30), st.floats(0.01, 5.0))
    def test_dilution_and_coverage(self, l, mu):
        """Each miner's chance falls with crowding, the puzzle's total
        solve chance rises (until it saturates at certainty)."""
        p_now = puzzle_win_prob(l, mu, 1.0)
        p_next = puzzle_win_prob(l + 1, mu, 1.0)
        assert p_next < p_now
        assert (l + 1) * p_next >= l * p_now
        if mu * (l + 1) < 20:  # away from coverage saturating at 1.0
            assert (l + 1) * p_next > l * p_now

    def test_zero_miners_raise(self):
        with pytest.raises(ZeroMiners):
            puzzle_win_prob(0, 1.0, 1.0)

    def test_zero_rate_means_zero_chance(self):
        assert puzzle_win_prob(3, 0.0, 1.0) == 0.0


class TestUtilityAndInstance:
    def test_utility_is_clipped_at_zero(self):
        inst = instance(k=1, n=1, gamma=5.0)
        assert miner_utility(inst, Allocation.single((1,)), 0) == 0.0

    def test_utility_on_empty_slot_raises(self):
        inst = instance()
        with pytest.raises(ZeroMiners):
            miner_utility(inst, Allocation.single((0, 2)), 0)

    def test_parameter_grids_coerce(self):
        inst = CongestionInstance(k=2, n_miners=3, mu=[1.0, 2.0], gamma=0.1)
        assert inst.mu == ((1.0,), (2.0,))
        assert inst.gamma == ((0.1,), (0.1,))
        full = CongestionInstance(k=2, n_miners=3, mu=[[1.0, 2.0], [3.0, 4.0]],
                                  gamma=0.0, m=2)
        assert full.mu[1][0] == 3.0

    def test_bad_grids_rejected(self):
        with pytest.raises(ValueError):
            CongestionInstance(k=2, n_miners=3, mu=[1.0, 2.0, 3.0], gamma=0.0)
        with pytest.raises(ValueError):
            CongestionInstance(k=2, n_miners=3, mu=-1.0, gamma=0.0)
        with pytest.raises(ValueError):
            CongestionInstance(k=0, n_miners=3, mu=1.0, gamma=0.0)
        with pytest.raises(ValueError):
            CongestionInstance(k=1, n_miners=3, mu=1.0, gamma=0.0, deadline=0.0)

    def test_allocation_shapes(self):
        alloc = Allocation.single((2, 0, 1))
        assert alloc.total == 3
        assert alloc.puzzle_loads() == (2, 0, 1)
        assert alloc.flat() == (2, 0, 1)
        with pytest.raises(ValueError):
            Allocation.single((-1, 2))


# ---------------------------------------------------------------------------
# The potential function
# ---------------------------------------------------------------------------


class TestPotential:
    def test_balanced_spot(self):
        inst = instance()
        assert potential(inst, Allocation.single((1, 1))) == pytest.approx(
            oracles.PHI_1_1, abs=1e-15)

    def test_lopsided_spot(self):
        inst = instance()
        assert potential(inst, Allocation.single((2, 0))) == pytest.approx(
            oracles.PHI_2_0, abs=1e-15)

    @settings(max_examples=80, deadline=None)
    @given(st.lists(st.integers(0, 5), min_size=1, max_size=4), st.data())
    def test_matches_oracle(self, loads, data):
        k = len(loads)
        rates = [data.draw(st.floats(0.1, 3.0)) for _ in range(k)]
        costs = [data.draw(st.floats(0.0, 0.5)) for _ in range(k)]
        inst = CongestionInstance(k=k, n_miners=sum(loads), mu=rates, gamma=costs)
        ours = potential(inst, Allocation.single(loads))
        theirs = oracles.potential_direct(loads, rates, costs, 1.0)
        assert ours == pytest.approx(theirs, abs=1e-12)

    @settings(max_examples=80, deadline=None)
    @given(st.lists(st.integers(0, 4), min_size=2, max_size=4), st.data())
    def test_exact_difference_property(self, loads, data):
        """Moving one miner changes the potential by exactly that miner's
        utility change — the property that certifies the argmax."""
        k = len(loads)
        rates = [data.draw(st.floats(0.1, 3.0)) for _ in range(k)]
        inst = CongestionInstance(k=k, n_miners=sum(loads) + 1, mu=rates, gamma=0.0)
        src = next((i for i, l in enumerate(loads) if l > 0), None)
        if src is None:
            return
        dst = (src + 1) % k
        before = list(loads)
        after = list(loads)
        after[src] -= 1
        after[dst] += 1
        phi_delta = (potential(inst, Allocation.single(after))
                     - potential(inst, Allocation.single(before)))
        util_delta = (puzzle_win_prob(after[dst], rates[dst], 1.0)
                      - puzzle_win_prob(before[src], rates[src], 1.0))
        assert phi_delta == pytest.approx(util_delta, abs=1e-12)

    def test_multi_provider_potential_undefined(self):
        inst = instance(m=2)
        with pytest.raises(ValueError):
            potential(inst, Allocation(((1, 0), (0, 1))))


# ---------------------------------------------------------------------------
# Equilibrium solving
# ---------------------------------------------------------------------------


class TestSolver:
    def test_worked_example_balances_miners(self):
        inst = instance(k=2, n=2, mu=1.0, gamma=0.01)
        solution = solve_congestion_nash(inst)
        assert solution.allocation.puzzle_loads() == (1, 1)
        assert solution.direction == "argmax"
        assert solution.potential_value == pytest.approx(oracles.PHI_1_1 - 2 * 0.01,
                                                         abs=1e-12)
        assert all(d.delta <= 1e-12 for d in solution.certificate)

    def test_lopsided_allocation_rejected(self):
        inst = instance(k=2, n=2, mu=1.0, gamma=0.01)
        assert deviation_certificate(inst, Allocation.single((2, 0))) is None

    def test_empty_market(self):
        solution = solve_congestion_nash(instance(n=0))
        assert solution.allocation.total == 0

    def test_negative_population_infeasible(self):
        with pytest.raises(Infeasible):
            solve_congestion_nash(instance(n=-1))

    def test_oversized_instance_rejected(self):
        with pytest.raises(TooLarge):
            solve_congestion_nash(instance(k=10, n=100, m=2))

    def test_expensive_puzzle_stays_empty(self):
        inst = CongestionInstance(k=2, n_miners=3, mu=1.0, gamma=[0.0, 10.0])
        solution = solve_congestion_nash(inst)
        assert solution.allocation.puzzle_loads()[1] == 0

    def test_costly_mining_attracts_nobody(self):
        inst = instance(k=2, n=4, gamma=2.0)  # cost above any win probability
        solution = solve_congestion_nash(inst)
        assert solution.allocation.total == 0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 3), st.integers(0, 5), st.data())
    def test_nash_sets_match_oracle(self, k, n, data):
        rates = [data.draw(st.floats(0.2, 2.0)) for _ in range(k)]
        costs = [data.draw(st.floats(0.0, 0.4)) for _ in range(k)]
        inst = CongestionInstance(k=k, n_miners=n, mu=rates, gamma=costs)
        ours = {a.puzzle_loads() for a in all_nash_allocations(inst)}
        theirs = {tuple(loads) for loads in oracles.enumerate_allocations(n, k)
                  if oracles.allocation_is_nash(loads, rates, costs, 1.0, n)}
        assert ours == theirs

    def test_solver_result_is_in_the_nash_set(self):
        inst = CongestionInstance(k=3, n_miners=5, mu=[1.0, 0.5, 2.0],
                                  gamma=[0.05, 0.0, 0.2])
        solution = solve_congestion_nash(inst)
        nash_loads = {a.puzzle_loads() for a in all_nash_allocations(inst)}
        assert solution.allocation.puzzle_loads() in nash_loads

    def test_multi_provider_split_is_stable(self):
        inst = instance(k=1, n=2, mu=1.0, gamma=0.01, m=2)
        solution = solve_congestion_nash(inst)
        assert solution.direction == "scan"
        assert solution.potential_value is None
        assert solution.allocation.total == 2
        assert deviation_certificate(inst, solution.allocation) is not None

    def test_single_provider_reduction(self):
        """An M=2 instance with a dead second provider solves like M=1."""
        dead = CongestionInstance(k=2, n_miners=2, mu=[[1.0, 0.0], [1.0, 0.0]],
                                  gamma=0.01, m=2)
        flat = instance(k=2, n=2, mu=1.0, gamma=0.01)
        a = solve_congestion_nash(dead).allocation.puzzle_loads()
        b = solve_congestion_nash(flat).allocation.puzzle_loads()
        assert a == b


# ---------------------------------------------------------------------------
# Price of crypto-anarchy
# ---------------------------------------------------------------------------


class TestAnarchyRatio:
    def worked_instance(self):
        return instance(k=2, n=2, mu=1.0, gamma=0.1)

    def test_worked_ratio(self):
        ratio = price_of_crypto_anarchy(self.worked_instance(), zkpoi_cost=0.01)
        assert ratio == pytest.approx(20.0, abs=1e-9)

    def test_ratio_uses_worst_equilibrium(self):
        inst = self.worked_instance()
        nash = all_nash_allocations(inst)
        worst = max(total_mining_cost(inst, a) for a in nash)
        assert price_of_crypto_anarchy(inst, zkpoi_cost=0.01) == worst / 0.01

    def test_zero_baseline_rejected(self):
        with pytest.raises(DegenerateBaseline):
            price_of_crypto_anarchy(self.worked_instance(), zkpoi_cost=0.0)

    def test_custom_cost_function(self):
        inst = self.worked_instance()
        headcount = lambda i, a: float(a.total)
        assert price_of_crypto_anarchy(inst, cost_fn=headcount, zkpoi_cost=1.0) == 2.0

    def test_scales_inversely_with_baseline(self):
        inst = self.worked_instance()
        a = price_of_crypto_anarchy(inst, zkpoi_cost=0.01)
        b = price_of_crypto_anarchy(inst, zkpoi_cost=0.02)
        assert a == pytest.approx(2 * b, rel=1e-12)
