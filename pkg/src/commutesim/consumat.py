"""CONSUMAT decision engine.

Each decision period an agent compares the satisfaction of its current mode
with its aspiration threshold and its uncertainty with its tolerance; the
resulting quadrant picks one of four strategies:

==============  ================  =================
                U <= U*           U > U*
==============  ================  =================
S >= S*         repeat            imitate
S <  S*         deliberate        inquire
==============  ================  =================

The functions accept scalars or NumPy arrays; the ``*_all`` variants are the
population-wide versions used by the simulation loop.
"""

from __future__ import annotations

import numpy as np

from .network import SocialGraph, neighbors
from .types import N_MODES, Mode, Strategy


def compute_satisfaction(weights, x):
    """Weighted mean of attribute satisfactions, in [0, 1].

    The weighted sum is divided by the total weight, so scaling ``weights`` by a
    positive constant does not change the result.
    """
    w = np.asarray(weights, dtype=float)
    x = np.asarray(x, dtype=float)
    total = w.sum(axis=-1)
    if np.any(total <= 0):
        raise ValueError("weights must have a positive sum")
    s = (w * x).sum(axis=-1) / total
    return float(s) if np.ndim(s) == 0 else s


def uncertainty(ua, collectivism, experience, peer_share):
    """``ua * (coll * (1 - peer_share) + (1 - coll) * (1 - experience))``."""
    u = np.asarray(ua) * (np.asarray(collectivism) * (1.0 - np.asarray(peer_share))
                          + (1.0 - np.asarray(collectivism)) * (1.0 - np.asarray(experience)))
    return float(u) if np.ndim(u) == 0 else u


def compute_uncertainty(agent, mode: Mode, peer_share: float) -> float:
    """Uncertainty of ``agent`` about ``mode`` given the share of its neighbours using it."""
    return uncertainty(agent.uncertainty_avoidance, agent.collectivism,
                       agent.experience[int(mode)], peer_share)


def select_strategy(s, s_star, u, u_star):
    """Quadrant dispatch; thresholds count as met at equality."""
    satisfied = np.asarray(s) >= np.asarray(s_star)
    certain = np.asarray(u) <= np.asarray(u_star)
    k = np.where(satisfied,
                 np.where(certain, Strategy.REPEAT, Strategy.IMITATE),
                 np.where(certain, Strategy.DELIBERATE, Strategy.INQUIRE))
    if np.ndim(k) == 0:
        return Strategy(int(k))
    return k.astype(np.int8)


def decide_mode(agent, strategy: Strategy, graph: SocialGraph, neighbor_modes,
                satisfaction, available, rng: np.random.Generator | None = None) -> Mode:
    """Mode chosen by one agent for the next period.

    ``neighbor_modes`` maps agent id to current mode (any indexable),
    ``satisfaction`` holds the agent's satisfaction with each of the three modes
    and ``available`` is a boolean mask over modes.
    """
    current = Mode(int(agent.current_mode))
    available = np.asarray(available, dtype=bool)
    sat = np.asarray(satisfaction, dtype=float)
    strategy = Strategy(int(strategy))
    if strategy is Strategy.REPEAT:
        return current

    if strategy is Strategy.IMITATE:
        counts = np.zeros(N_MODES, dtype=int)
        for j in neighbors(graph, agent.id):
            counts[int(neighbor_modes[j])] += 1
        counts = np.where(available, counts, -1)
        tied = np.flatnonzero(counts == counts.max())
        if current in tied:
            return current
        if len(tied) == 1:
            return Mode(int(tied[0]))
        rng = rng if rng is not None else np.random.default_rng()
        return Mode(int(tied[int(rng.random() * len(tied))]))

    if strategy is Strategy.INQUIRE:
        used = np.zeros(N_MODES, dtype=bool)
        for j in neighbors(graph, agent.id):
            used[int(neighbor_modes[j])] = True
        candidates = np.flatnonzero(used & available)
        if len(candidates) == 0:
            return current
        best = int(candidates[np.argmax(sat[candidates])])
        return Mode(best) if sat[best] > sat[current] else current

    # deliberate
    candidates = np.flatnonzero(available)
    best_value = sat[candidates].max()
    if sat[current] >= best_value and available[current]:
        return current
    return Mode(int(candidates[np.argmax(sat[candidates])]))


def update_experience(experience, mode_used, smoothing: float = 0.8):
    """Exponential smoothing toward the indicator of the mode just used."""
    e = np.asarray(experience, dtype=float)
    used = np.zeros_like(e)
    if e.ndim == 1:
        used[int(mode_used)] = 1.0
    else:
        used[np.arange(len(e)), np.asarray(mode_used)] = 1.0
    return smoothing * e + (1.0 - smoothing) * used


# ---------------------------------------------------------------------------
# population-wide versions

def neighbor_mode_counts(adjacency, modes: np.ndarray) -> np.ndarray:
    """(n, 3) count of each agent's neighbours per mode."""
    onehot = np.zeros((len(modes), N_MODES))
    onehot[np.arange(len(modes)), modes] = 1.0
    return np.asarray(adjacency @ onehot).round().astype(np.int64)


def decide_modes_all(modes: np.ndarray, strategies: np.ndarray, counts: np.ndarray,
                     satisfaction: np.ndarray, available: np.ndarray,
                     u: np.ndarray) -> np.ndarray:
    """Synchronous decision round for every agent.

    ``u`` holds one uniform draw per agent for imitation tie-breaks, so a round
    consumes the same amount of randomness whatever the strategies are.
    """
    n = len(modes)
    rows = np.arange(n)
    new = modes.copy()
    sat_cur = satisfaction[rows, modes]

    # imitate
    c = np.where(available, counts, -1)
    tied = c == c.max(axis=1, keepdims=True)
    n_tied = tied.sum(axis=1)
    pick = np.minimum((u * n_tied).astype(int), n_tied - 1)
    order = np.cumsum(tied, axis=1) - 1
    chosen = np.argmax(tied & (order == pick[:, None]), axis=1)
    imitated = np.where(tied[rows, modes], modes, chosen)
    m = strategies == Strategy.IMITATE
    new[m] = imitated[m]

    # inquire
    cand = (counts > 0) & available
    masked = np.where(cand, satisfaction, -np.inf)
    best = np.argmax(masked, axis=1)
    best_val = masked[rows, best]
    inquired = np.where(best_val > sat_cur, best, modes)
    m = strategies == Strategy.INQUIRE
    new[m] = inquired[m]

    # deliberate
    masked = np.where(available, satisfaction, -np.inf)
    best = np.argmax(masked, axis=1)
    keep = available[rows, modes] & (sat_cur >= masked[rows, best])
    deliberated = np.where(keep, modes, best)
    m = strategies == Strategy.DELIBERATE
    new[m] = deliberated[m]
    return new
