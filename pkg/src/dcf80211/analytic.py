"""Closed-form backoff analysis and the coupled fixed-point system.

The transmission probability tau of a saturated station follows from the
stationary distribution of its backoff chain; coupling it with the
collision, capture and channel-error probabilities of N identical
stations gives a scalar fixed-point problem solved here by damped
iteration with a bisection fallback.  Throughput then weighs the payload
delivered per slot against the expected slot duration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.optimize import brentq

from .capture import CaptureParams, capture_total
from .params import AccessMode, MacParams, SlotDurations, slot_durations

__all__ = [
    "ModelSolution",
    "SolverError",
    "tau_two_way",
    "tau_four_way",
    "tau_four_way_transcribed",
    "solve_system",
    "throughput",
    "bianchi_s_max",
    "bianchi_baseline",
]

RESIDUAL_TOL = 1e-10
MAX_ITERATIONS = 100_000
_DAMPING = 0.5
# The iteration aims well below the contract tolerance because downstream
# quantities like p_col amplify tau error by roughly n.
_TARGET_TOL = 5e-14
# Damped iteration gets this many sweeps before the solver falls back to
# bisection on the scalar residual.
_ITERATION_BUDGET = 2_000


class SolverError(RuntimeError):
    """Fixed-point solver failed; carries the last iterate and residual."""

    def __init__(self, message: str, tau: float, residual: float):
        super().__init__(f"{message} (tau={tau!r}, residual={residual!r})")
        self.tau = tau
        self.residual = residual


@dataclass(frozen=True)
class ModelSolution:
    """Fixed point of the coupled system plus the resulting throughput."""

    tau: float
    p_col: float
    p_cap: float
    p_eq: float
    p_e: float
    p_t: float
    p_s: float
    s_mbps: float
    residual: float
    iterations: int


def _stage_weighted_sum(p_eq: float, mac: MacParams) -> float:
    # sum_{i=0}^{m-1} p_eq^i * (W_i + 1); each term is the (unnormalised)
    # expected slot occupancy of stage i.  Evaluated as a direct sum so the
    # classic (1 - 2 p_eq) denominator never appears: p_eq = 0.5 is regular.
    total = 0.0
    p_pow = 1.0
    for i in range(mac.max_stage):
        total += p_pow * (mac.window(i) + 1)
        p_pow *= p_eq
    return total


def tau_two_way(p_eq: float, mac: MacParams) -> float:
    """Transmission probability of the basic-access backoff chain.

    Equals 2(1-2p)/[(1-2p)(W+1) + pW(1-(2p)^m)] wherever that form is
    defined, but stays finite and exact at p_eq = 0.5 and p_eq = 1.
    """
    if not 0.0 <= p_eq <= 1.0:
        raise ValueError("p_eq must be in [0, 1]")
    m = mac.max_stage
    inv_tau = (
        0.5 * (1.0 - p_eq) * _stage_weighted_sum(p_eq, mac)
        + 0.5 * p_eq**m * (mac.window(m) + 1)
    )
    return 1.0 / inv_tau


def tau_four_way(p_eq: float, p_col: float, p_e: float, mac: MacParams) -> float:
    """Transmission probability of the RTS/CTS backoff chain.

    Identical to the two-way form except that each stage also holds a
    data-transmit state, reached after a contention win with probability
    1 - p_col; its stationary mass adds the extra (1 - p_col) term.
    The expression matches the enumerated-chain oracle to solver
    precision (see tests); tau counts contention attempts only.
    """
    if not 0.0 <= p_eq <= 1.0:
        raise ValueError("p_eq must be in [0, 1]")
    if abs(p_eq - (p_col + p_e - p_e * p_col)) > 1e-9:
        raise ValueError("p_eq inconsistent with (p_col, p_e)")
    m = mac.max_stage
    inv_tau = (
        (1.0 - p_col)
        + 0.5 * (1.0 - p_eq) * _stage_weighted_sum(p_eq, mac)
        + 0.5 * p_eq**m * (mac.window(m) + 1)
    )
    return 1.0 / inv_tau


def tau_four_way_transcribed(p_eq: float, p_col: float, p_e: float, mac: MacParams) -> float:
    """Literal published closed form for the four-way tau.

    Kept verbatim (including the removable 1-2p_eq singularity) so the
    validation report can quantify its deviation from the chain oracle;
    production code uses :func:`tau_four_way`.
    """
    w = mac.w_min
    m = mac.max_stage
    p_x = 1.0 - 2.0 * p_eq
    denom = (
        2.0 * (1.0 - p_eq) * w * (1.0 - (2.0 * p_eq) ** (m - 1)) * p_eq
        + p_x * (1.0 - p_col) * ((1.0 - p_e) * (w + 1) + 2.0)
        + p_x * (1.0 - p_eq ** (m - 1)) * p_eq
        + (2**m * w + 1) * p_x * p_eq**m
    )
    return 2.0 * p_x / denom


def _tau_update(tau: float, n: int, mac: MacParams, mode: AccessMode,
                p_e: float, cp: CaptureParams) -> tuple[float, float, float, float]:
    """One sweep of the coupled equations: tau -> (tau', p_col, p_cap, p_eq)."""
    p_cap = capture_total(n, tau, cp)
    p_col = 1.0 - (1.0 - tau) ** (n - 1) - p_cap
    p_col = min(max(p_col, 0.0), 1.0)
    p_eq = p_col + p_e - p_e * p_col
    if mode is AccessMode.FOUR_WAY:
        tau_next = tau_four_way(p_eq, p_col, p_e, mac)
    else:
        tau_next = tau_two_way(p_eq, mac)
    return tau_next, p_col, p_cap, p_eq


def solve_system(
    n: int,
    mac: MacParams,
    mode: AccessMode,
    p_e: float,
    cp: CaptureParams,
    payload_bytes: int = 1024,
) -> ModelSolution:
    """Solve the coupled (tau, p_col, p_cap, p_eq) system for n stations.

    Damped fixed-point iteration (lambda = 0.5) from tau = 2/(W+1); if it
    has not met the 1e-10 residual after its budget, the monotone scalar
    residual tau - F(tau) is bisected instead.  Raises SolverError if
    neither converges.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p_e <= 1.0:
        raise ValueError("p_e must be in [0, 1]")

    def update(tau: float):
        return _tau_update(tau, n, mac, mode, p_e, cp)

    tau = 2.0 / (mac.w_min + 1.0)
    iterations = 0
    residual = math.inf
    for _ in range(min(_ITERATION_BUDGET, MAX_ITERATIONS)):
        iterations += 1
        tau_next = update(tau)[0]
        residual = abs(tau - tau_next)
        if residual <= _TARGET_TOL:
            tau = tau_next
            break
        tau = (1.0 - _DAMPING) * tau + _DAMPING * tau_next
    if residual > RESIDUAL_TOL:
        # Oscillation: bisect tau - F(tau), which is monotone increasing
        # (F composes decreasing maps of tau).
        lo, hi = 1e-12, 1.0 - 1e-12
        f_lo = lo - update(lo)[0]
        f_hi = hi - update(hi)[0]
        if f_lo > 0.0 or f_hi < 0.0:
            raise SolverError("residual has no sign change to bisect", tau, residual)
        while iterations < MAX_ITERATIONS:
            iterations += 1
            mid = 0.5 * (lo + hi)
            f_mid = mid - update(mid)[0]
            if f_mid > 0.0:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-15:
                break
        tau = 0.5 * (lo + hi)
        residual = abs(tau - update(tau)[0])
        if residual > RESIDUAL_TOL:
            raise SolverError("fixed point not reached", tau, residual)

    _, p_col, p_cap, p_eq = update(tau)
    p_t = 1.0 - (1.0 - tau) ** n
    p_s = ((n * tau * (1.0 - tau) ** (n - 1)) + p_cap) / p_t if p_t > 0 else 0.0
    solution = ModelSolution(
        tau=tau, p_col=p_col, p_cap=p_cap, p_eq=p_eq, p_e=p_e,
        p_t=p_t, p_s=p_s, s_mbps=0.0, residual=residual, iterations=iterations,
    )
    sd = slot_durations(mac, mode, payload_bytes)
    return replace(solution, s_mbps=throughput(solution, n, sd))


def throughput(sol: ModelSolution, n: int, sd: SlotDurations) -> float:
    """Saturation throughput in Mbps: payload bits delivered per unit slot time.

    S = Pt*Ps*(1-Pe)*E[PL] / [(1-Pt)*sigma + Pt*(1-Ps)*Tc
                              + Pt*Ps*(1-Pe)*Ts + Pt*Ps*Pe*Te]
    """
    p_t, p_s, p_e = sol.p_t, sol.p_s, sol.p_e
    denom = (
        (1.0 - p_t) * sd.sigma
        + p_t * (1.0 - p_s) * sd.t_c
        + p_t * p_s * (1.0 - p_e) * sd.t_s
        + p_t * p_s * p_e * sd.t_e
    )
    if not denom > 0.0:
        raise ArithmeticError(f"expected slot time must be positive, got {denom}")
    return p_t * p_s * (1.0 - p_e) * sd.e_pl_bits / denom


def bianchi_s_max(mac: MacParams, mode: AccessMode, payload_bytes: int) -> float:
    """Maximum throughput under a window-optimised backoff, independent of N.

    S_m = E[PL] / (T_s + sigma*K + T_c*(K*(e^(1/K) - 1) - 1)) with
    K = sqrt(T_c / (2*sigma)); T_c -> 0 degenerates to E[PL]/T_s.
    """
    sd = slot_durations(mac, mode, payload_bytes)
    if sd.t_c == 0.0:
        return sd.e_pl_bits / sd.t_s
    k = math.sqrt(sd.t_c / (2.0 * sd.sigma))
    denom = sd.t_s + sd.sigma * k + sd.t_c * (k * (math.exp(1.0 / k) - 1.0) - 1.0)
    return sd.e_pl_bits / denom


def bianchi_baseline(
    n: int,
    mac: MacParams,
    mode: AccessMode,
    payload_bytes: int = 1024,
) -> tuple[float, float, float]:
    """Ideal-channel, no-capture reference solution: (tau, p, s_mbps).

    Deliberately a separate implementation path from solve_system: the
    published two-equation system in its literal form, rooted with Brent's
    method, for regression-testing the general solver's degenerate limit.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    w = mac.w_min
    m = mac.max_stage

    def tau_of_p(p: float) -> float:
        if abs(1.0 - 2.0 * p) < 1e-12:
            # Removable singularity: (1-(2p)^m)/(1-2p) -> m at p = 1/2.
            return 2.0 / (w + 1.0 + p * w * m)
        return (2.0 * (1.0 - 2.0 * p)
                / ((1.0 - 2.0 * p) * (w + 1.0) + p * w * (1.0 - (2.0 * p) ** m)))

    if n == 1:
        tau, p = tau_of_p(0.0), 0.0
    else:
        def residual_fn(tau: float) -> float:
            return tau - tau_of_p(1.0 - (1.0 - tau) ** (n - 1))

        tau = brentq(residual_fn, 1e-12, 1.0 - 1e-12, xtol=1e-15, rtol=8.9e-16)
        p = 1.0 - (1.0 - tau) ** (n - 1)

    p_t = 1.0 - (1.0 - tau) ** n
    p_s = n * tau * (1.0 - tau) ** (n - 1) / p_t if p_t > 0 else 0.0
    sd = slot_durations(mac, mode, payload_bytes)
    denom = (1.0 - p_t) * sd.sigma + p_t * (1.0 - p_s) * sd.t_c + p_t * p_s * sd.t_s
    s_mbps = p_t * p_s * sd.e_pl_bits / denom
    return tau, p, s_mbps
