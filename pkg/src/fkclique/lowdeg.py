"""Exact truncated likelihood-ratio norms for the planted-biclique testing
problem, with Monte-Carlo cross-validation.

The planted model forces all edges inside S x P, reduces the S x (not P)
density so left degrees match the null model, and leaves everything else at
density p.  Character moments factor over right vertices, so the norm
decomposes over "shapes": (left count L, right count R, right-degree
multiset d).  All shape contributions are rational once the character scale
a = sqrt((1-p)/p) is squared out, so the norm is computed exactly.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "ShapeTerm",
    "LowDegReport",
    "chi_moment",
    "count_bipartite_shapes",
    "lr_norm_squared",
    "monte_carlo_moment",
]

MAX_TRUNCATION_DEGREE = 12


def _check_admissible(k: int, n: int, ell: int, p) -> None:
    if not (1 <= k and 1 <= n and 0 <= ell <= k):
        raise ValueError("need k, n >= 1 and 0 <= ell <= k")
    if not 0 < p < 1:
        raise ValueError("need 0 < p < 1 for the character view")
    if n <= k - ell:
        raise ValueError("need n > k - ell")
    if n * p < k - ell:
        raise ValueError("adjusted edge probability would be negative")


def _moment_rational(L: int, degrees, k: int, n: int, ell: int, pf: Fraction) -> Fraction:
    """Rational part of the planted character moment.

    The full moment is a^(sum of degrees) times this value, with
    a = sqrt((1-p)/p).  Single-edge right vertices cancel exactly.
    """
    q = Fraction(k - ell, n)
    c = q / (1 - q)
    out = Fraction(ell, k) ** L
    for d in degrees:
        out *= q + (1 - q) * (-c) ** d
    return out


def chi_moment(L: int, degrees, k: int, n: int, ell: int, p: float) -> float:
    """Planted-model expectation of the character of an edge set with L left
    vertices and right-degree sequence `degrees`.

    Exact value
        (ell/k)^L * prod_i [ q * a^{d_i} + (1-q) * (-(q/(1-q)) * a)^{d_i} ]
    with q = (k-ell)/n and a = sqrt((1-p)/p); it is exactly 0 whenever some
    d_i equals 1.
    """
    degrees = tuple(int(d) for d in degrees)
    if L < 1 or any(d < 1 for d in degrees):
        raise ValueError("need L >= 1 and all degrees >= 1")
    _check_admissible(k, n, ell, p)
    pf = Fraction(p)
    rational = _moment_rational(L, degrees, k, n, ell, pf)
    a = math.sqrt((1.0 - p) / p)
    return float(rational) * a ** sum(degrees)


def count_bipartite_shapes(L: int, R: int, degrees) -> int:
    """Number of bipartite graphs on labeled vertex sets of sizes L and R with
    right-degree sequence `degrees` and every left degree >= 1.

    Inclusion-exclusion over which left vertices are isolated:
        sum_j (-1)^j C(L, j) prod_i C(L - j, d_i).
    """
    degrees = tuple(int(d) for d in degrees)
    if L < 1 or R < 1 or len(degrees) != R:
        raise ValueError("need L, R >= 1 and one degree per right vertex")
    total = 0
    for j in range(L + 1):
        prod = math.comb(L, j)
        for d in degrees:
            prod *= math.comb(L - j, d)
            if prod == 0:
                break
        total += (-1) ** j * prod
    return total


def _distinct_arrangements(degrees) -> int:
    mult = Counter(degrees)
    out = math.factorial(len(degrees))
    for m in mult.values():
        out //= math.factorial(m)
    return out


def _partitions(total: int, parts: int, cap: int):
    """Descending sequences of `parts` integers >= 1 summing to `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    lo = -(-total // parts)  # ceil: largest part at least the average
    for first in range(min(cap, total - parts + 1), lo - 1, -1):
        for rest in _partitions(total - first, parts - 1, first):
            yield (first,) + rest


@dataclass(frozen=True)
class ShapeTerm:
    """One (L, R, degree-multiset) aggregate of the norm decomposition.

    `count` is the number of edge subsets realizing the shape, vertex
    placements included, so `contribution = count * moment**2`.
    """

    L: int
    R: int
    degrees: tuple[int, ...]
    count: int
    moment: float
    contribution: float
    contribution_exact: Fraction

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "R": self.R,
            "degrees": list(self.degrees),
            "count": self.count,
            "moment": self.moment,
            "contribution": self.contribution,
            "contribution_exact": str(self.contribution_exact),
        }


@dataclass(frozen=True)
class LowDegReport:
    k: int
    n: int
    ell: int
    p: float
    D: int
    terms: tuple[ShapeTerm, ...]
    norm_sq_minus_one: float
    norm_sq_minus_one_exact: Fraction

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "ell": self.ell,
            "p": self.p,
            "D": self.D,
            "norm_sq_minus_one": self.norm_sq_minus_one,
            "norm_sq_minus_one_exact": str(self.norm_sq_minus_one_exact),
            "terms": [t.to_json() for t in self.terms],
        }


def lr_norm_squared(k: int, n: int, ell: int, p: float, D: int) -> LowDegReport:
    """Exact squared norm of (degree-D truncated likelihood ratio) - 1.

    Sums count * moment^2 over all shapes with 0 < |edge set| <= D.  Shapes
    are canonicalized by sorting degree sequences descending; `count` folds in
    the C(k, L) * C(n, R) vertex placements and the arrangements of the degree
    multiset over the chosen right vertices.
    """
    _check_admissible(k, n, ell, p)
    if D > MAX_TRUNCATION_DEGREE:
        raise ValueError(f"D={D} exceeds enumeration budget {MAX_TRUNCATION_DEGREE}")
    pf = Fraction(p)
    ratio = (1 - pf) / pf  # a^2, exactly
    a = math.sqrt((1.0 - p) / p)
    terms = []
    total = Fraction(0)
    for e in range(1, D + 1):
        for R in range(1, min(e, n) + 1):
            for degrees in _partitions(e, R, e):
                for L in range(1, min(e, k) + 1):
                    graphs = count_bipartite_shapes(L, R, degrees)
                    if graphs == 0:
                        continue
                    count = (
                        math.comb(k, L)
                        * math.comb(n, R)
                        * _distinct_arrangements(degrees)
                        * graphs
                    )
                    rational = _moment_rational(L, degrees, k, n, ell, pf)
                    moment = float(rational) * a ** e
                    exact = count * rational * rational * ratio ** e
                    total += exact
                    terms.append(
                        ShapeTerm(L, R, degrees, count, moment, float(exact), exact)
                    )
    return LowDegReport(k, n, ell, p, D, tuple(terms), float(total), total)


def monte_carlo_moment(
    alpha, k: int, n: int, ell: int, p: float, samples: int, seed: int
) -> tuple[float, float]:
    """Monte-Carlo estimate of the planted character moment of the edge set
    `alpha` (pairs of (left, right) indices), with its standard error.

    Characters are a on present edges and -1/a on absent ones with
    a = sqrt((1-p)/p); at p = 1/2 this is the plain +-1 convention.
    """
    alpha = [(int(u), int(v)) for u, v in alpha]
    if samples < 1:
        raise ValueError("need samples >= 1")
    _check_admissible(k, n, ell, p)
    if any(not (0 <= u < k and 0 <= v < n) for u, v in alpha):
        raise ValueError("edge indices out of range")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    lefts = sorted({u for u, _ in alpha})
    rights = sorted({v for _, v in alpha})
    lpos = {u: i for i, u in enumerate(lefts)}
    rpos = {v: i for i, v in enumerate(rights)}
    adjusted = (n * p - (k - ell)) / (n - (k - ell))
    a = math.sqrt((1.0 - p) / p)

    in_s = rng.random((samples, len(lefts))) < (ell / k)
    in_p = rng.random((samples, len(rights))) < ((k - ell) / n)
    chi = np.ones(samples)
    for u, v in alpha:
        su = in_s[:, lpos[u]]
        pv = in_p[:, rpos[v]]
        prob = np.where(su & pv, 1.0, np.where(su, adjusted, p))
        present = rng.random(samples) < prob
        chi *= np.where(present, a, -1.0 / a)
    estimate = float(chi.mean())
    stderr = float(chi.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("inf")
    return estimate, stderr
