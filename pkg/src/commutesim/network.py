"""Homophilous preferential-attachment social network."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .types import ConfigError


@dataclass
class SocialGraph:
    n: int
    edges: np.ndarray            # (E, 2) int, src < dst
    m_per_node: int = 0
    homophily: float = 0.0
    _indptr: np.ndarray = field(init=False, repr=False)
    _indices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(self.edges):
            if np.any(self.edges[:, 0] == self.edges[:, 1]):
                raise ValueError("self-loops are not allowed")
            if self.edges.min() < 0 or self.edges.max() >= self.n:
                raise ValueError("edge endpoint out of range")
        lo = np.minimum(self.edges[:, 0], self.edges[:, 1])
        hi = np.maximum(self.edges[:, 0], self.edges[:, 1])
        if len(np.unique(lo * self.n + hi)) != len(self.edges):
            raise ValueError("duplicate edges")
        adj = self.adjacency()
        self._indptr, self._indices = adj.indptr, adj.indices

    @classmethod
    def from_edges(cls, n: int, edges) -> "SocialGraph":
        return cls(n=n, edges=np.asarray(list(edges), dtype=np.int64).reshape(-1, 2))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric 0/1 adjacency matrix."""
        e = self.edges
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        data = np.ones(len(rows), dtype=np.int32)
        adj = sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        adj.sort_indices()
        return adj

    def degree(self) -> np.ndarray:
        return np.diff(self._indptr)

    def neighbors(self, i: int) -> list[int]:
        return neighbors(self, i)

    def to_csv(self, path=None) -> str:
        text = "src,dst\n" + "".join(f"{a},{b}\n" for a, b in self.edges)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def neighbors(g: SocialGraph, i: int) -> list[int]:
    if not 0 <= i < g.n:
        raise KeyError(f"agent {i} is not in the graph")
    return g._indices[g._indptr[i]:g._indptr[i + 1]].tolist()


def build_network(ses, m: int = 2, homophily: float = 0.0, rng: np.random.Generator | None = None,
                  bonus: float = 3.0) -> SocialGraph:
    """Grow a preferential-attachment graph biased toward same-SES ties.

    ``ses`` is a population, a sequence of agents, or an array of group labels.
    The first ``m`` nodes form a clique; every later node links to ``m`` distinct
    earlier nodes drawn without replacement with weight
    ``degree * (1 + homophily * bonus)`` for same-group candidates and
    ``degree`` otherwise.
    """
    ses = _ses_array(ses)
    n = len(ses)
    if m < 1:
        raise ConfigError("network.m", "must be >= 1")
    if m >= n:
        raise ConfigError("network.m", f"m={m} must be smaller than the number of agents ({n})")
    if not 0.0 <= homophily <= 1.0:
        raise ConfigError("network.homophily", "must lie in [0, 1]")
    if rng is None:
        rng = np.random.default_rng()

    same_factor = 1.0 + homophily * bonus
    degree = np.zeros(n)
    edges = np.empty((m * (m - 1) // 2 + m * (n - m), 2), dtype=np.int64)
    k = 0
    for a in range(m):
        for b in range(a + 1, m):
            edges[k] = (a, b)
            k += 1
    degree[:m] = m - 1

    # Each group keeps a list of edge endpoints, so a node appears once per unit
    # of degree: a uniform pick from a group's list is degree-proportional, and
    # choosing the group by (factor x total degree) reproduces the attachment law.
    groups = np.unique(ses)
    gidx = np.searchsorted(groups, ses)
    ends = [np.empty(2 * len(edges), dtype=np.int64) for _ in groups]
    fill = np.zeros(len(groups), dtype=np.int64)

    def push(node):
        g = gidx[node]
        ends[g][fill[g]] = node
        fill[g] += 1

    for a, b in edges[:k]:
        push(a)
        push(b)
    positive = int(np.count_nonzero(degree[:m]))

    for i in range(m, n):
        if positive <= m:
            w = degree[:i] * np.where(ses[:i] == ses[i], same_factor, 1.0)
            targets = _weighted_sample_without_replacement(w, m, rng)
        else:
            gw = fill * np.where(groups == ses[i], same_factor, 1.0)
            gcum = np.cumsum(gw)
            chosen: list[int] = []
            while len(chosen) < m:
                g = min(int(np.searchsorted(gcum, rng.random() * gcum[-1], side="right")), len(gw) - 1)
                j = int(ends[g][int(rng.random() * fill[g])])
                if j not in chosen:
                    chosen.append(j)
            targets = np.sort(np.array(chosen, dtype=np.int64))
        edges[k:k + m, 0] = targets
        edges[k:k + m, 1] = i
        k += m
        positive += int(np.count_nonzero(degree[targets] == 0)) + 1
        degree[targets] += 1
        degree[i] = m
        for j in targets:
            push(j)
            push(i)
    return SocialGraph(n=n, edges=edges, m_per_node=m, homophily=homophily)


def _weighted_sample_without_replacement(w: np.ndarray, m: int, rng) -> np.ndarray:
    # successive draws, rejecting repeats: same law as removing each pick and renormalising
    cum = np.cumsum(w)
    total = cum[-1]
    if total <= 0:
        return np.sort(rng.choice(len(w), size=m, replace=False))
    nonzero = np.flatnonzero(w)
    if len(nonzero) <= m:
        rest = rng.choice(np.flatnonzero(w == 0), size=m - len(nonzero), replace=False)
        return np.sort(np.concatenate([nonzero, rest]))
    chosen: list[int] = []
    while len(chosen) < m:
        j = int(np.searchsorted(cum, rng.random() * total, side="right"))
        j = min(j, len(w) - 1)
        if w[j] > 0 and j not in chosen:
            chosen.append(j)
    return np.sort(np.array(chosen, dtype=np.int64))


def assortativity_by_ses(g: SocialGraph, ses) -> float:
    """Fraction of edges joining two agents of the same socioeconomic group."""
    if g.n_edges == 0:
        raise ValueError("graph has no edges")
    ses = _ses_array(ses)
    return float(np.mean(ses[g.edges[:, 0]] == ses[g.edges[:, 1]]))


def _ses_array(ses) -> np.ndarray:
    if hasattr(ses, "ses") and isinstance(getattr(ses, "ses"), np.ndarray):
        return ses.ses
    arr = list(ses)
    if arr and hasattr(arr[0], "ses"):
        return np.array([int(a.ses) for a in arr])
    return np.asarray(arr, dtype=int)
