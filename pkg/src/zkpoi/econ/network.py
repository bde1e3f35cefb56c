"""Two-sided network effects between competing payment networks.

Merchants pick the network with more customers, customers the one with more
merchants, each with its own elasticity. The product of the elasticities
separates two regimes: above one, an early advantage compounds into
winner-take-all; below one, shares equalize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import BothSidesEmpty, DegenerateRatio, IndistinguishableNetworks

EXPECTATION_MODES = ("current", "expected")


@dataclass(frozen=True)
class NetworkState:
    """Counts on both sides of networks A and B, the customer-arrival
    probability lam, and the two elasticities (alpha: customers reacting to
    merchant counts, beta: merchants reacting to customer counts)."""

    m_a: float
    m_b: float
    c_a: float
    c_b: float
    lam: float
    alpha: float
    beta: float
    expectation_mode: str = "current"

    def __post_init__(self):
        for name in ("m_a", "m_b", "c_a", "c_b"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 < self.lam < 1.0:
            raise ValueError("lam must lie in (0, 1)")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("elasticities must be > 0")
        if self.expectation_mode not in EXPECTATION_MODES:
            raise ValueError(f"expectation_mode must be one of {EXPECTATION_MODES}")


def _attraction(count_a: float, count_b: float, exponent: float,
                side: str) -> tuple[float, float]:
    if exponent == 0.0:
        return 0.5, 0.5
    if count_a == 0.0 and count_b == 0.0:
        raise BothSidesEmpty(f"both networks have zero {side}; probabilities undefined")
    wa, wb = count_a ** exponent, count_b ** exponent
    return wa / (wa + wb), wb / (wa + wb)


def join_probabilities(state: NetworkState,
                       ) -> tuple[tuple[float, float], tuple[float, float]]:
    """((merchant->A, merchant->B), (customer->A, customer->B)).

    Merchants weigh customer counts to the power beta, customers weigh
    merchant counts to the power alpha. In "expected" mode each side's
    counts are first advanced by their one-step expected increment (the
    current-count probabilities times the arrival split), modeling joiners
    who anticipate the next arrival rather than react to the present.
    """
    merch = _attraction(state.c_a, state.c_b, state.beta, "customers")
    cust = _attraction(state.m_a, state.m_b, state.alpha, "merchants")
    if state.expectation_mode == "expected":
        exp_c = (state.c_a + state.lam * cust[0], state.c_b + state.lam * cust[1])
        exp_m = (state.m_a + (1 - state.lam) * merch[0],
                 state.m_b + (1 - state.lam) * merch[1])
        merch = _attraction(exp_c[0], exp_c[1], state.beta, "customers")
        cust = _attraction(exp_m[0], exp_m[1], state.alpha, "merchants")
    return merch, cust


def simulate_network_growth(state: NetworkState, steps: int, seed: int) -> np.ndarray:
    """Agent-by-agent growth: each step one arrival is a customer with
    probability lam (else a merchant) and joins a network per
    join_probabilities. Returns an array of shape (steps+1, 4) holding
    (m_a, m_b, c_a, c_b) per step, starting with the initial state."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    rng = np.random.default_rng(seed)
    current = state
    path = np.empty((steps + 1, 4))
    path[0] = (current.m_a, current.m_b, current.c_a, current.c_b)
    for t in range(1, steps + 1):
        merch, cust = join_probabilities(current)
        if rng.random() < current.lam:
            if rng.random() < cust[0]:
                current = replace(current, c_a=current.c_a + 1)
            else:
                current = replace(current, c_b=current.c_b + 1)
        else:
            if rng.random() < merch[0]:
                current = replace(current, m_a=current.m_a + 1)
            else:
                current = replace(current, m_b=current.m_b + 1)
        path[t] = (current.m_a, current.m_b, current.c_a, current.c_b)
    return path


# ---------------------------------------------------------------------------
# Ratio dynamics
# ---------------------------------------------------------------------------


def _ratio_rhs(x: float, z: float, lam: float, alpha: float, beta: float,
               ) -> tuple[float, float]:
    """Stated mean-field dynamics of the merchant ratio x = m_a/m_b and the
    customer ratio z = c_a/c_b: each ratio relaxes toward the other side's
    attraction ratio."""
    return (1 - lam) * (z ** beta - x), lam * (x ** alpha - z)


def state_ratios(state: NetworkState) -> tuple[float, float]:
    if state.m_b <= 0 or state.c_b <= 0:
        raise DegenerateRatio("ratio dynamics need positive B-side counts")
    return state.m_a / state.m_b, state.c_a / state.c_b


def ratio_ode_step(state, dt: float) -> tuple[float, float]:
    """One classical 4th-order fixed-step advance of the ratio dynamics.

    Accepts a NetworkState (ratios derived from counts) or a bare
    (merchant_ratio, customer_ratio) pair; returns the updated ratios.
    """
    if isinstance(state, NetworkState):
        x, z = state_ratios(state)
        lam, alpha, beta = state.lam, state.alpha, state.beta
    else:
        raise TypeError("ratio_ode_step expects a NetworkState")
    if dt < 0:
        raise ValueError("dt must be >= 0")
    return _rk4(x, z, lam, alpha, beta, dt)


def _rk4(x, z, lam, alpha, beta, dt):
    if x < 0 or z < 0:
        raise DegenerateRatio("ratios must be >= 0")
    k1 = _ratio_rhs(x, z, lam, alpha, beta)
    k2 = _ratio_rhs(x + dt * k1[0] / 2, z + dt * k1[1] / 2, lam, alpha, beta)
    k3 = _ratio_rhs(x + dt * k2[0] / 2, z + dt * k2[1] / 2, lam, alpha, beta)
    k4 = _ratio_rhs(x + dt * k3[0], z + dt * k3[1], lam, alpha, beta)
    x1 = x + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    z1 = z + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return x1, z1


def integrate_ratio_ode(state: NetworkState, t_end: float, dt: float = 1e-3,
                        ) -> tuple[float, float]:
    """Advance the ratio dynamics to t_end with fixed steps (the final step
    shrinks to land exactly on t_end)."""
    x, z = state_ratios(state)
    if t_end < 0 or dt <= 0:
        raise ValueError("need t_end >= 0 and dt > 0")
    remaining = t_end
    while remaining > 0:
        h = min(dt, remaining)
        x, z = _rk4(x, z, state.lam, state.alpha, state.beta, h)
        remaining -= h
    return x, z


# ---------------------------------------------------------------------------
# Elasticity estimation and overtaking
# ---------------------------------------------------------------------------


def sample_static_joins(state: NetworkState, n_joins: int, seed: int,
                        ) -> tuple[int, int, int, int]:
    """Joins drawn against frozen counts (a short observation window):
    (customer joins to A, customer total, merchant joins to A, merchant
    total)."""
    rng = np.random.default_rng(seed)
    merch, cust = join_probabilities(state)
    cust_a = cust_total = merch_a = merch_total = 0
    for _ in range(n_joins):
        if rng.random() < state.lam:
            cust_total += 1
            cust_a += rng.random() < cust[0]
        else:
            merch_total += 1
            merch_a += rng.random() < merch[0]
    return cust_a, cust_total, merch_a, merch_total


def _log_ratio_elasticity(frac_a: float, count_a: float, count_b: float,
                          what: str) -> float:
    if count_a <= 0 or count_b <= 0 or count_a == count_b:
        raise IndistinguishableNetworks(
            f"{what} counts must be positive and different to identify the elasticity")
    if not 0.0 < frac_a < 1.0:
        raise ValueError("observed join share must lie strictly inside (0, 1)")
    return (math.log(frac_a) - math.log(1.0 - frac_a)) / (math.log(count_a) - math.log(count_b))


def estimate_elasticities(customer_joins: tuple[int, int], merchant_joins: tuple[int, int],
                          state: NetworkState) -> tuple[float, float]:
    """(alpha_hat, beta_hat) from observed join tallies against the counts
    held during the observation window.

    customer_joins / merchant_joins: (joins to A, total joins) per side. The
    log-odds of joining A divided by the log count ratio recovers each
    elasticity; equal counts make the denominator zero and the elasticity
    unidentifiable.
    """
    cust_a, cust_total = customer_joins
    merch_a, merch_total = merchant_joins
    if cust_total <= 0 or merch_total <= 0:
        raise ValueError("need at least one observed join on each side")
    alpha_hat = _log_ratio_elasticity(cust_a / cust_total, state.m_a, state.m_b,
                                      "merchant")
    beta_hat = _log_ratio_elasticity(merch_a / merch_total, state.c_a, state.c_b,
                                     "customer")
    return alpha_hat, beta_hat


def overtake_analysis(m_incumbent: float, lam: float, e_c_new: float,
                      e_c_old: float) -> dict:
    """Steps a challenger needs to out-accumulate an incumbent's merchant
    head start, and whether the offered utility gap clears it."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    if m_incumbent < 0:
        raise ValueError("incumbent merchant count must be >= 0")
    steps_needed = (m_incumbent + 1) / (1 - lam)
    return {"steps_needed": steps_needed,
            "condition_holds": (e_c_new - e_c_old) > steps_needed}
