"""Exact stationary distribution of the backoff Markov chain.

Builds the full transition matrix over (stage, counter) states and solves
pi P = pi directly.  This is the ground-truth oracle the closed-form
transmission-probability expressions are checked against: the chain
definition is authoritative, the algebra is derived from it.
"""

from __future__ import annotations

from typing import Dict, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .params import AccessMode, MacParams

__all__ = ["stationary_chain_oracle"]

MAX_STATES = 100_000

State = Tuple[int, int]


def stationary_chain_oracle(
    mac: MacParams,
    mode: AccessMode,
    p_col: float,
    p_e: float,
) -> tuple[float, Dict[State, float]]:
    """Solve the backoff chain exactly; return (tau, stationary pmf).

    States are (stage i, counter k).  Two-way chains use k in [0, W_i-1]
    and fail with the combined probability p_eq = p_col + p_e - p_e*p_col.
    Four-way chains add a transmit state k = -1 per stage, entered after a
    contention win (prob 1 - p_col) and left successfully with prob
    1 - p_e.  tau sums the contention states b_{i,0} only.
    """
    for name, p in (("p_col", p_col), ("p_e", p_e)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must be in [0, 1]")
    m = mac.max_stage
    windows = [mac.window(i) for i in range(m + 1)]
    has_tx = 1 if mode is AccessMode.FOUR_WAY else 0
    n_states = sum(w + has_tx for w in windows)
    if n_states > MAX_STATES:
        raise ValueError(f"chain too large to enumerate: {n_states} > {MAX_STATES}")

    offsets = np.cumsum([0] + [w + has_tx for w in windows[:-1]])

    def idx(i: int, k: int) -> int:
        # k = -1 is the transmit state (four-way only), stored first.
        return int(offsets[i]) + has_tx + k

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []

    def add(src: int, dst: int, p: float) -> None:
        if p != 0.0:
            rows.append(src)
            cols.append(dst)
            vals.append(p)

    def add_uniform(src: int, stage: int, p: float) -> None:
        w = windows[stage]
        for k in range(w):
            add(src, idx(stage, k), p / w)

    p_eq = p_col + p_e - p_e * p_col
    for i in range(m + 1):
        nxt = min(i + 1, m)
        for k in range(1, windows[i]):
            add(idx(i, k), idx(i, k - 1), 1.0)
        if mode is AccessMode.FOUR_WAY:
            add(idx(i, 0), idx(i, -1), 1.0 - p_col)
            add_uniform(idx(i, 0), nxt, p_col)
            add_uniform(idx(i, -1), 0, 1.0 - p_e)
            add_uniform(idx(i, -1), nxt, p_e)
        else:
            add_uniform(idx(i, 0), 0, 1.0 - p_eq)
            add_uniform(idx(i, 0), nxt, p_eq)

    transition = sp.coo_matrix((vals, (rows, cols)), shape=(n_states, n_states)).tocsr()
    # pi (P - I) = 0 with the last balance equation swapped for sum(pi) = 1.
    system = (transition.T - sp.identity(n_states, format="csr")).tolil()
    system[n_states - 1, :] = 1.0
    rhs = np.zeros(n_states)
    rhs[n_states - 1] = 1.0
    pi = spla.spsolve(system.tocsr(), rhs)

    pmf: Dict[State, float] = {}
    for i in range(m + 1):
        if mode is AccessMode.FOUR_WAY:
            pmf[(i, -1)] = float(pi[idx(i, -1)])
        for k in range(windows[i]):
            pmf[(i, k)] = float(pi[idx(i, k)])
    tau = float(sum(pi[idx(i, 0)] for i in range(m + 1)))
    return tau, pmf
