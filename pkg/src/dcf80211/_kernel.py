"""Compiled inner loop of the slot simulator.

Mirrors dcf80211.sim.step_slot exactly: same SplitMix64 arithmetic, same
draw order (collision powers by ascending station id, then the data-error
uniform, then backoff redraws by ascending id), same truncation when
mapping uniforms to counters.  tests/test_sim.py asserts bit-identical
counters between this kernel and the pure-Python reference.
"""

from __future__ import annotations

import math

import numpy as np
from numba import int64, njit, uint64

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(uint64(uint64), cache=True, nogil=True)
def _mix64(z):
    z = (z ^ (z >> _S30)) * _C1
    z = (z ^ (z >> _S27)) * _C2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def run_slots(state, stages, counters, mean_powers, fers,
              w_min, max_stage, threshold,
              t_s, t_c, t_e, sigma, n_slots):
    """Advance the chain by n_slots slots; mutate stages/counters in place.

    Returns (state, idle, successes, captures, collisions, channel_errors)
    where successes are single-transmitter deliveries and captures are
    collision slots resolved by capture that then delivered.
    """
    n = stages.shape[0]
    powers = np.empty(n, np.float64)
    txbuf = np.empty(n, np.int64)
    idle = int64(0)
    successes = int64(0)
    captures = int64(0)
    collisions = int64(0)
    channel_errors = int64(0)
    done = int64(0)
    while done < n_slots:
        mn = counters[0]
        for j in range(1, n):
            if counters[j] < mn:
                mn = counters[j]
        if mn > 0:
            jump = mn
            if jump > n_slots - done:
                jump = n_slots - done
            for j in range(n):
                counters[j] -= jump
            idle += jump
            done += jump
            continue
        ntx = 0
        for j in range(n):
            if counters[j] == 0:
                txbuf[ntx] = j
                ntx += 1
        done += 1
        winner = int64(-1)
        if ntx == 1:
            winner = txbuf[0]
        else:
            total = 0.0
            for k in range(ntx):
                state = state + _GOLDEN
                u = np.float64(_mix64(state) >> _S11) * _INV_2_53
                p = -mean_powers[txbuf[k]] * math.log1p(-u)
                powers[k] = p
                total += p
            best = -1.0
            for k in range(ntx):
                p = powers[k]
                if p > threshold * (total - p) and p > best:
                    best = p
                    winner = txbuf[k]
        delivered = False
        if winner >= 0:
            state = state + _GOLDEN
            u = np.float64(_mix64(state) >> _S11) * _INV_2_53
            if u < fers[winner]:
                channel_errors += 1
            else:
                delivered = True
                if ntx > 1:
                    captures += 1
                else:
                    successes += 1
        else:
            collisions += 1
        for k in range(ntx):
            j = txbuf[k]
            if delivered and j == winner:
                stages[j] = 0
            elif stages[j] < max_stage:
                stages[j] += 1
            window = (int64(1) << stages[j]) * w_min
            state = state + _GOLDEN
            u = np.float64(_mix64(state) >> _S11) * _INV_2_53
            counters[j] = int64(u * window)
    return state, idle, successes, captures, collisions, channel_errors
