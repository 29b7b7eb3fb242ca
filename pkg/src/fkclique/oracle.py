"""Brute-force oracles: exact biclique search, good-clique enumeration, and
the quasipolynomial list algorithm.

These are the ground truth that certificates and decoders are validated
against, so they favor obviousness over speed and refuse inputs too large to
enumerate honestly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .graphs import BipartiteGraph, Graph, cut_graph

__all__ = [
    "OracleSizeError",
    "BicliqueWitness",
    "max_biclique_left",
    "max_biclique_witness",
    "enumerate_kcliques",
    "exact_good_clique_list",
    "quasi_brute_force",
    "default_brute_force_c",
]

MAX_LEFT_ENUM = 20          # 2^20 left subsets is the hard ceiling
MAX_CLIQUES = 200_000


class OracleSizeError(ValueError):
    """Raised when an instance is too large for exhaustive search."""


@dataclass(frozen=True)
class BicliqueWitness:
    """A concrete biclique: every (u, v) in left x right is an edge."""

    left: frozenset[int]
    right: frozenset[int]

    def check(self, H: BipartiteGraph) -> bool:
        return all(H.has_edge(u, v) for u in self.left for v in self.right)


def _common_right_masks(H: BipartiteGraph) -> list[int]:
    """common[s] = bitmask of right vertices adjacent to every left vertex in
    the subset encoded by bitmask s."""
    k = H.left_size
    full = (1 << H.right_size) - 1
    masks = H.left_neighbor_masks
    common = [full] * (1 << k)
    for s in range(1, 1 << k):
        low = s & -s
        common[s] = common[s ^ low] & masks[low.bit_length() - 1]
    return common


def max_biclique_left(H: BipartiteGraph, k: int) -> int:
    """Largest ell such that H contains an ell x (k-ell) biclique with
    k-ell >= 1, or 0 if there is none.

    Enumerates all left subsets, so left_size is capped at MAX_LEFT_ENUM.
    """
    ell, _ = max_biclique_witness(H, k)
    return ell


def max_biclique_witness(H: BipartiteGraph, k: int) -> tuple[int, BicliqueWitness | None]:
    if H.left_size > MAX_LEFT_ENUM:
        raise OracleSizeError(f"left side {H.left_size} exceeds {MAX_LEFT_ENUM}")
    if k > H.left_size + H.right_size:
        raise OracleSizeError("k exceeds total vertex count")
    common = _common_right_masks(H)
    best = 0
    best_subset = 0
    for s in range(1, 1 << H.left_size):
        ell = s.bit_count()
        if ell <= best or ell > k - 1:
            continue
        if common[s].bit_count() >= k - ell:
            best = ell
            best_subset = s
    if best == 0:
        return 0, None
    left = frozenset(i for i in range(H.left_size) if best_subset >> i & 1)
    rights = [i for i in range(H.right_size) if common[best_subset] >> i & 1]
    right = frozenset(rights[: k - best])
    return best, BicliqueWitness(left, right)


def _has_wide_biclique(common: list[int], left_size: int, k: int, ell: int) -> bool:
    """True iff some biclique has more than ell left vertices, at least one
    right vertex, and total size k."""
    for s in range(1, 1 << left_size):
        width = s.bit_count()
        if ell < width <= k - 1 and common[s].bit_count() >= k - width:
            return True
    return False


def enumerate_kcliques(G: Graph, k: int, limit: int = MAX_CLIQUES) -> list[frozenset[int]]:
    """All k-cliques of G in lexicographic order of their sorted vertex lists."""
    if G.n > 64:
        raise OracleSizeError(f"n={G.n} too large for clique enumeration")
    adj = G.adjacency_masks
    out: list[frozenset[int]] = []
    full = (1 << G.n) - 1

    def rec(current: list[int], cand: int, need: int) -> None:
        if need == 0:
            out.append(frozenset(current))
            if len(out) > limit:
                raise OracleSizeError(f"more than {limit} cliques")
            return
        if cand.bit_count() < need:
            return
        c = cand
        while c:
            low = c & -c
            v = low.bit_length() - 1
            c ^= low
            # only extend upwards to avoid duplicates
            rec(current + [v], c & adj[v], need - 1)

    rec([], full, k)
    return out


def exact_good_clique_list(G: Graph, k: int, ell: int) -> list[frozenset[int]]:
    """All k-cliques S of G whose cut graph has no biclique with more than ell
    left vertices, at least one right vertex, and total size k."""
    if k > MAX_LEFT_ENUM:
        raise OracleSizeError(f"k={k} exceeds {MAX_LEFT_ENUM} for goodness checks")
    result = []
    for S in enumerate_kcliques(G, k):
        H = cut_graph(G, S)
        common = _common_right_masks(H)
        if not _has_wide_biclique(common, H.left_size, k, ell):
            result.append(S)
    return result


def default_brute_force_c(n: int, target: int = 2) -> float:
    """Smallest c with ceil(c * log2(n)) == target."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return (target - 1 + 1e-9) / math.log2(n)


def quasi_brute_force(G: Graph, k: int, c: float) -> list[frozenset[int]]:
    """Quasipolynomial list algorithm.

    Enumerates all q-cliques U with q = ceil(c * log2 n), keeps
    U + commonNeighborhood(U) whenever that union is a k-clique, then greedily
    drops any clique intersecting an earlier one in more than q vertices
    (candidates are scanned in lexicographic order, so the kept clique of a
    conflicting pair is the lexicographically smaller one).
    """
    if G.n < 2:
        raise ValueError("graph too small")
    q = math.ceil(c * math.log2(G.n))
    if q < 1:
        raise ValueError("ceil(c log2 n) must be >= 1")
    adj = G.adjacency_masks
    candidates: set[frozenset[int]] = set()
    for U in enumerate_kcliques(G, q):
        common = (1 << G.n) - 1
        for u in U:
            common &= adj[u]
        union = set(U)
        cm = common
        while cm:
            low = cm & -cm
            union.add(low.bit_length() - 1)
            cm ^= low
        if len(union) == k and G.is_clique(union):
            candidates.add(frozenset(union))
    kept: list[frozenset[int]] = []
    for S in sorted(candidates, key=sorted):
        if all(len(S & T) <= q for T in kept):
            kept.append(S)
    return kept
