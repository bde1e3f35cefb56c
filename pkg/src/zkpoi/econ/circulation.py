"""Stationary decentralized-market output under partial token circulation.

With CRRA utility u(q) = q^(1-eta)/(1-eta) and effort cost
w(q) = q^(1+alpha)/(1+alpha), the efficient trade solves u' = w' (q* = 1).
Discounting pushes the full-circulation stationary output to
q_hat(1) = beta^(1/(eta+alpha)); when only a fraction delta of newly minted
tokens circulates, the liquidity premium condition
1/beta = delta * q^-(eta+alpha) + (1 - delta) pushes output lower still, so
full circulation Pareto-dominates partial circulation.
"""

from __future__ import annotations

from dataclasses import dataclass

from scipy.optimize import brentq

from ..errors import DomainError, ExponentSingularity, ZeroVolume

_CROSS_CHECK_TOL = 1e-9


@dataclass(frozen=True)
class CirculationParams:
    """beta_disc: discount factor; eta: utility curvature; alpha_eff: effort
    convexity; delta: circulating fraction of new tokens; sigma: match
    probability; theta: buyer bargaining share."""

    beta_disc: float
    eta: float
    alpha_eff: float
    delta: float
    sigma: float = 0.5
    theta: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.beta_disc < 1.0:
            raise ValueError("beta_disc must lie in (0, 1)")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if self.alpha_eff < 0.0:
            raise ValueError("alpha_eff must be >= 0")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")


def _delta_condition_root(beta: float, eta: float, alpha: float, delta: float) -> float:
    target = 1.0 / beta

    def gap(q):
        return delta * q ** (-(eta + alpha)) + (1.0 - delta) - target

    # gap decreases in q and is negative at 1; halve the lower bracket until
    # it turns positive so even far-sub-unity roots stay bracketed
    lo = 0.5
    while gap(lo) <= 0.0:
        lo *= 0.5
        if lo == 0.0:
            raise DomainError("circulation condition root underflowed the bracket")
    return float(brentq(gap, lo, 1.0 + 1e-12, xtol=1e-15))


def stationary_dm_output(params: CirculationParams) -> dict:
    """Closed-form stationary outputs, cross-checked by a root-finder.

    Returns q_star (efficient trade, always 1 under the CRRA forms),
    q_hat_full (full circulation), q_hat_delta (fraction-delta circulation),
    and whether full circulation strictly Pareto-dominates. Raises
    DomainError if the closed forms disagree with the bracketing root-finder
    beyond 1e-9 or the ordering q_hat_delta <= q_hat_full < q_star breaks.
    """
    beta, eta, alpha, delta = (params.beta_disc, params.eta,
                               params.alpha_eff, params.delta)
    ex = 1.0 / (eta + alpha)
    q_star = 1.0  # q^-eta = q^alpha has the unit root for any valid exponents
    q_hat_full = beta ** ex
    # at delta = 1 the two conditions coincide; reuse the full-circulation
    # value so the equality is exact rather than float-noise strict
    if delta == 1.0:
        q_hat_delta = q_hat_full
    else:
        q_hat_delta = (delta / (1.0 / beta - 1.0 + delta)) ** ex

    root_full = _delta_condition_root(beta, eta, alpha, 1.0)
    root_delta = root_full if delta == 1.0 else _delta_condition_root(beta, eta, alpha, delta)
    if abs(root_full - q_hat_full) > _CROSS_CHECK_TOL:
        raise DomainError("full-circulation closed form disagrees with the root-finder")
    if abs(root_delta - q_hat_delta) > _CROSS_CHECK_TOL:
        raise DomainError("partial-circulation closed form disagrees with the root-finder")
    if not (q_hat_delta <= q_hat_full < q_star):
        raise DomainError("stationary outputs violate q_hat(delta) <= q_hat(1) < q*")
    if delta < 1.0 and not q_hat_delta < q_hat_full:
        raise DomainError("partial circulation failed to reduce output strictly")
    return {"q_star": q_star, "q_hat_full": q_hat_full, "q_hat_delta": q_hat_delta,
            "pareto_dominates": q_hat_delta < q_hat_full}


def gamma_dynamics(gamma0: float, eta: float, alpha_eff: float, steps: int,
                   ) -> list[float]:
    """Token-premium recursion gamma_{t+1} = gamma_t ** (rho / (rho - 1))
    with rho = (1 + alpha) / (eta + alpha). gamma = 1 is the stationary
    point; below it the sequence collapses toward zero."""
    if gamma0 <= 0:
        raise ValueError("gamma0 must be > 0")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    rho = (1.0 + alpha_eff) / (eta + alpha_eff)
    if rho == 1.0:
        raise ExponentSingularity("the recursion exponent degenerates at rho = 1")
    exponent = rho / (rho - 1.0)
    seq = [float(gamma0)]
    for _ in range(steps):
        seq.append(seq[-1] ** exponent)
    return seq


def fee_balance(omega_cost: float, volume: float) -> float:
    """Per-payment fee that finances a total cost over a transaction volume.
    The buyer/seller incidence split does not change the fee itself, since
    the two shares add back to the whole."""
    if volume <= 0:
        raise ZeroVolume("transaction volume must be > 0")
    return omega_cost / volume
