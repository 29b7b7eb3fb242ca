"""Graph containers, seeded samplers, and semi-random instance generation.

All samplers are pure functions of their parameters and a 64-bit seed.
Seeding uses counter-based Philox streams split per generation phase, so the
adversarial phases see the earlier phases' output but never share generator
state with them.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "Graph",
    "BipartiteGraph",
    "AdversaryPlan",
    "DeleteAllCut",
    "DeleteRandomCutFraction",
    "DegreeFlatten",
    "DisjointPlantedCopies",
    "FullCliqueOnComplementSubset",
    "ErdosRenyiRewrite",
    "FKInstance",
    "sample_er_bipartite",
    "sample_fk",
    "cut_graph",
    "sample_planted_biclique",
    "complete_graph",
    "read_graph_edgelist",
    "write_graph_edgelist",
    "read_bipartite_edgelist",
    "write_bipartite_edgelist",
    "instance_to_json",
    "instance_from_json",
]


def _phase_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent counter-based substreams, one per generation phase."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _canonical_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


# ----------------------------------------------------------------------------
# Containers
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 0..n-1.

    Edges are stored canonically as pairs (i, j) with i < j.  Adjacency is
    cached as per-vertex bitmasks, which keeps common-neighborhood queries
    cheap at the desk scales (n up to a few thousand) this library targets.
    """

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(f"edge ({u},{v}) out of range or not canonical")

    @staticmethod
    def from_edges(n: int, edges) -> Graph:
        canon = frozenset(_canonical_edge(u, v) for u, v in edges if u != v)
        return Graph(n, canon)

    @cached_property
    def adjacency_masks(self) -> list[int]:
        """Per-vertex neighbor sets as Python-int bitmasks."""
        masks = [0] * self.n
        for u, v in self.edges:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return masks

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        return _canonical_edge(u, v) in self.edges

    def degree(self, u: int) -> int:
        return self.adjacency_masks[u].bit_count()

    def num_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, u: int) -> list[int]:
        return _mask_to_vertices(self.adjacency_masks[u])

    def is_clique(self, vertices) -> bool:
        vs = sorted(set(vertices))
        masks = self.adjacency_masks
        for a_idx, u in enumerate(vs):
            for v in vs[a_idx + 1:]:
                if not masks[u] >> v & 1:
                    return False
        return True

    def signed_matrix(self) -> np.ndarray:
        """The {+1,-1} adjacency matrix (zero diagonal)."""
        a = -np.ones((self.n, self.n))
        np.fill_diagonal(a, 0.0)
        for u, v in self.edges:
            a[u, v] = 1.0
            a[v, u] = 1.0
        return a


def _mask_to_vertices(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def complete_graph(n: int) -> Graph:
    return Graph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


@dataclass(frozen=True)
class BipartiteGraph:
    """Bipartite graph with `left_size` left and `right_size` right vertices.

    Edges are (left, right) index pairs.  `p` is the nominal edge density used
    by the p-biased character view; it is recorded by the samplers and may be
    overridden per call.
    """

    left_size: int
    right_size: int
    edges: frozenset[tuple[int, int]]
    p: float | None = None

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < self.left_size and 0 <= v < self.right_size):
                raise ValueError(f"bipartite edge ({u},{v}) out of range")

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edges

    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency01(self) -> np.ndarray:
        a = np.zeros((self.left_size, self.right_size))
        for u, v in self.edges:
            a[u, v] = 1.0
        return a

    def signed_matrix(self) -> np.ndarray:
        """Entries +1 on edges, -1 on non-edges."""
        return 2.0 * self.adjacency01 - 1.0

    def p_biased_matrix(self, p: float | None = None) -> np.ndarray:
        """Entries sqrt((1-p)/p) on edges and -sqrt(p/(1-p)) on non-edges.

        This is the mean-zero unit-variance encoding of the adjacency under
        density p.  Requires 0 < p < 1.
        """
        p = self.p if p is None else p
        if p is None:
            raise ValueError("no density p stored on graph and none given")
        if not 0.0 < p < 1.0:
            raise ValueError("p-biased view needs 0 < p < 1")
        hi = np.sqrt((1.0 - p) / p)
        lo = -np.sqrt(p / (1.0 - p))
        return np.where(self.adjacency01 > 0.5, hi, lo)

    def right_degrees(self) -> np.ndarray:
        return self.adjacency01.sum(axis=0).astype(int)

    def max_right_degree(self) -> int:
        if self.right_size == 0:
            return 0
        return int(self.right_degrees().max(initial=0))

    @cached_property
    def left_neighbor_masks(self) -> list[int]:
        """Right-side neighborhoods of left vertices as bitmasks."""
        masks = [0] * self.left_size
        for u, v in self.edges:
            masks[u] |= 1 << v
        return masks


# ----------------------------------------------------------------------------
# Adversary strategies
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class DeleteAllCut:
    """Delete every edge with exactly one endpoint in the planted set."""


@dataclass(frozen=True)
class DeleteRandomCutFraction:
    """Delete each cut edge independently with probability `fraction`."""

    fraction: float

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("fraction must lie in [0, 1]")


@dataclass(frozen=True)
class DegreeFlatten:
    """Delete cut edges from the highest-cut-degree planted vertices until all
    planted vertices have equal cut degree.

    Ties between planted vertices are broken by smallest index; within a
    vertex, the cut edge to the largest-index outside neighbor goes first.
    This is the concrete adaptive adversary used to defeat degree heuristics.
    """


@dataclass(frozen=True)
class DisjointPlantedCopies:
    """Add `count` vertex-disjoint k-cliques inside the complement of the
    planted set, mimicking extra copies of the generation process."""

    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")


@dataclass(frozen=True)
class FullCliqueOnComplementSubset:
    """Add a clique on a uniformly random subset of the complement."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("size must be >= 1")


@dataclass(frozen=True)
class ErdosRenyiRewrite:
    """Replace the whole induced subgraph on the complement with a fresh
    Erdos-Renyi draw of density q."""

    q: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must lie in [0, 1]")


DeletionStrategy = DeleteAllCut | DeleteRandomCutFraction | DegreeFlatten
AdditionStrategy = DisjointPlantedCopies | FullCliqueOnComplementSubset | ErdosRenyiRewrite


@dataclass(frozen=True)
class AdversaryPlan:
    """Deletion phase (cut edges only) plus addition phase (complement only).

    Either phase may be None.  Deletion strategies may only remove edges with
    exactly one endpoint in the planted set; addition strategies may only
    rewrite edges with both endpoints outside it.
    """

    deletion: DeletionStrategy | None = None
    addition: AdditionStrategy | None = None

    def to_json(self) -> dict:
        def enc(rule):
            if rule is None:
                return None
            name = type(rule).__name__
            params = {k: v for k, v in vars(rule).items()}
            return {"strategy": name, **params}

        return {"deletion": enc(self.deletion), "addition": enc(self.addition)}

    @staticmethod
    def from_json(obj: dict) -> AdversaryPlan:
        kinds = {
            cls.__name__: cls
            for cls in (
                DeleteAllCut,
                DeleteRandomCutFraction,
                DegreeFlatten,
                DisjointPlantedCopies,
                FullCliqueOnComplementSubset,
                ErdosRenyiRewrite,
            )
        }

        def dec(entry):
            if entry is None:
                return None
            params = {k: v for k, v in entry.items() if k != "strategy"}
            return kinds[entry["strategy"]](**params)

        return AdversaryPlan(dec(obj.get("deletion")), dec(obj.get("addition")))


@dataclass(frozen=True)
class FKInstance:
    """A generated semi-random instance with its hidden planted set.

    The planted set is carried for evaluation only; recovery code paths must
    not read it.
    """

    graph: Graph
    planted: frozenset[int]
    n: int
    k: int
    p: float
    plan: AdversaryPlan
    seed: int

    def __post_init__(self):
        if len(self.planted) != self.k:
            raise ValueError("planted set size differs from k")
        if not self.graph.is_clique(self.planted):
            raise ValueError("planted set is not a clique in the graph")


# ----------------------------------------------------------------------------
# Samplers
# ----------------------------------------------------------------------------


def sample_er_bipartite(k: int, m: int, p: float, seed: int) -> BipartiteGraph:
    """Bipartite Erdos-Renyi graph with k left vertices, m right vertices, and
    each of the k*m edges present independently with probability p."""
    if k < 0 or m < 0:
        raise ValueError("sizes must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = _phase_rngs(seed, 1)[0]
    if k == 0 or m == 0:
        return BipartiteGraph(k, m, frozenset(), p=p)
    mask = rng.random((k, m)) < p
    us, vs = np.nonzero(mask)
    edges = frozenset(zip(us.tolist(), vs.tolist()))
    return BipartiteGraph(k, m, edges, p=p)


def _er_graph_edges(n: int, p: float, rng: np.random.Generator) -> set[tuple[int, int]]:
    if n < 2:
        return set()
    mask = rng.random((n, n)) < p
    iu = np.triu_indices(n, k=1)
    sel = mask[iu]
    us, vs = iu[0][sel], iu[1][sel]
    return set(zip(us.tolist(), vs.tolist()))


def sample_fk(n: int, k: int, p: float, plan: AdversaryPlan | None, seed: int) -> FKInstance:
    """Sample a semi-random planted-clique instance.

    Phase 1 plants a uniformly random k-clique in G(n, p).  Phase 2 applies
    the plan's deletion strategy to edges crossing the planted set.  Phase 3
    applies the addition strategy inside the complement.  Each phase draws
    from its own substream of `seed`.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    plan = plan or AdversaryPlan()
    _validate_plan(plan, n, k)
    rng1, rng2, rng3 = _phase_rngs(seed, 3)

    planted = frozenset(int(v) for v in rng1.choice(n, size=k, replace=False))
    edges = _er_graph_edges(n, p, rng1)
    planted_sorted = sorted(planted)
    for i, u in enumerate(planted_sorted):
        for v in planted_sorted[i + 1:]:
            edges.add((u, v))

    edges = _apply_deletion(plan.deletion, edges, planted, rng2)
    edges = _apply_addition(plan.addition, edges, planted, n, k, rng3)

    graph = Graph(n, frozenset(edges))
    return FKInstance(graph, planted, n, k, p, plan, seed)


def _validate_plan(plan: AdversaryPlan, n: int, k: int) -> None:
    add = plan.addition
    if isinstance(add, FullCliqueOnComplementSubset) and add.size > n - k:
        raise ValueError("complement clique size exceeds complement size")
    if isinstance(add, DisjointPlantedCopies) and add.count * k > n - k:
        raise ValueError("disjoint copies do not fit in the complement")


def _cut_edges(edges: set[tuple[int, int]], planted: frozenset[int]) -> list[tuple[int, int]]:
    return sorted(e for e in edges if (e[0] in planted) != (e[1] in planted))


def _apply_deletion(rule, edges, planted, rng):
    edges = set(edges)
    if rule is None:
        return edges
    cut = _cut_edges(edges, planted)
    if isinstance(rule, DeleteAllCut):
        edges.difference_update(cut)
    elif isinstance(rule, DeleteRandomCutFraction):
        if cut:
            drop = rng.random(len(cut)) < rule.fraction
            edges.difference_update(e for e, d in zip(cut, drop) if d)
    elif isinstance(rule, DegreeFlatten):
        cut_nbrs = {u: set() for u in planted}
        for a, b in cut:
            u, v = (a, b) if a in planted else (b, a)
            cut_nbrs[u].add(v)
        while True:
            degs = {u: len(s) for u, s in cut_nbrs.items()}
            hi, lo = max(degs.values()), min(degs.values())
            if hi == lo:
                break
            u = min(v for v, d in degs.items() if d == hi)
            v = max(cut_nbrs[u])
            cut_nbrs[u].discard(v)
            edges.discard(_canonical_edge(u, v))
    else:
        raise TypeError(f"unknown deletion strategy {rule!r}")
    return edges


def _apply_addition(rule, edges, planted, n, k, rng):
    edges = set(edges)
    if rule is None:
        return edges
    complement = sorted(set(range(n)) - planted)
    if isinstance(rule, FullCliqueOnComplementSubset):
        chosen = sorted(rng.choice(len(complement), size=rule.size, replace=False).tolist())
        verts = [complement[i] for i in chosen]
        for i, u in enumerate(verts):
            for v in verts[i + 1:]:
                edges.add(_canonical_edge(u, v))
    elif isinstance(rule, DisjointPlantedCopies):
        perm = rng.permutation(len(complement)).tolist()
        for c in range(rule.count):
            verts = sorted(complement[i] for i in perm[c * k: (c + 1) * k])
            for i, u in enumerate(verts):
                for v in verts[i + 1:]:
                    edges.add(_canonical_edge(u, v))
    elif isinstance(rule, ErdosRenyiRewrite):
        edges = {e for e in edges if e[0] in planted or e[1] in planted}
        sub = _er_graph_edges(len(complement), rule.q, rng)
        for i, j in sub:
            edges.add(_canonical_edge(complement[i], complement[j]))
    else:
        raise TypeError(f"unknown addition strategy {rule!r}")
    return edges


def cut_graph(G: Graph, S) -> BipartiteGraph:
    """Bipartite graph between S (left, in sorted order) and its complement
    (right, in sorted order), keeping exactly the crossing edges of G."""
    left = sorted(set(S))
    if any(not 0 <= v < G.n for v in left):
        raise ValueError("S contains out-of-range vertices")
    right = sorted(set(range(G.n)) - set(left))
    lpos = {v: i for i, v in enumerate(left)}
    rpos = {v: i for i, v in enumerate(right)}
    edges = set()
    for u, v in G.edges:
        if u in lpos and v in rpos:
            edges.add((lpos[u], rpos[v]))
        elif v in lpos and u in rpos:
            edges.add((lpos[v], rpos[u]))
    return BipartiteGraph(len(left), len(right), frozenset(edges))


def sample_planted_biclique(
    k: int, n: int, ell: int, p: float, seed: int
) -> tuple[BipartiteGraph, frozenset[int], frozenset[int]]:
    """Sample from the edge-adjusted planted-biclique distribution.

    S takes each left vertex independently with probability ell/k, P each
    right vertex with probability (k-ell)/n.  Edges inside S x P are forced;
    edges in S x (complement of P) appear with the reduced probability
    (n*p - (k-ell)) / (n - (k-ell)) so left degrees match the null model;
    everything else stays at density p.
    """
    if not 0 <= ell <= k:
        raise ValueError("need 0 <= ell <= k")
    if k < 1 or n < 1:
        raise ValueError("need k, n >= 1")
    if n == k - ell:
        raise ValueError("degenerate parameters: n equals k - ell")
    adjusted = (n * p - (k - ell)) / (n - (k - ell))
    if adjusted < 0.0 or adjusted > 1.0:
        raise ValueError(f"adjusted edge probability {adjusted:.4f} outside [0, 1]")
    rng = _phase_rngs(seed, 1)[0]
    in_s = rng.random(k) < (ell / k)
    in_p = rng.random(n) < ((k - ell) / n)
    prob = np.full((k, n), p)
    prob[np.ix_(in_s, in_p)] = 1.0
    prob[np.ix_(in_s, ~in_p)] = adjusted
    mask = rng.random((k, n)) < prob
    us, vs = np.nonzero(mask)
    H = BipartiteGraph(k, n, frozenset(zip(us.tolist(), vs.tolist())), p=p)
    S = frozenset(int(i) for i in np.nonzero(in_s)[0])
    P = frozenset(int(i) for i in np.nonzero(in_p)[0])
    return H, S, P


# ----------------------------------------------------------------------------
# File formats
# ----------------------------------------------------------------------------


def write_graph_edgelist(G: Graph, path: str | Path) -> None:
    lines = [f"{G.n} {G.num_edges()}"]
    lines += [f"{u} {v}" for u, v in sorted(G.edges)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_graph_edgelist(path: str | Path) -> Graph:
    tokens = Path(path).read_text().split()
    n, m = int(tokens[0]), int(tokens[1])
    flat = [int(t) for t in tokens[2:2 + 2 * m]]
    edges = [(flat[2 * i], flat[2 * i + 1]) for i in range(m)]
    return Graph.from_edges(n, edges)


def write_bipartite_edgelist(H: BipartiteGraph, path: str | Path) -> None:
    lines = [f"{H.left_size} {H.right_size} {H.num_edges()}"]
    lines += [f"{u} {v}" for u, v in sorted(H.edges)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_bipartite_edgelist(path: str | Path, p: float | None = None) -> BipartiteGraph:
    tokens = Path(path).read_text().split()
    k, m, e = int(tokens[0]), int(tokens[1]), int(tokens[2])
    flat = [int(t) for t in tokens[3:3 + 2 * e]]
    edges = frozenset((flat[2 * i], flat[2 * i + 1]) for i in range(e))
    return BipartiteGraph(k, m, edges, p=p)


def instance_to_json(inst: FKInstance, include_solution: bool = True) -> dict:
    obj = {
        "format": "fk-instance",
        "params": {"n": inst.n, "k": inst.k, "p": inst.p},
        "plan": inst.plan.to_json(),
        "seed": inst.seed,
        "edges": [list(e) for e in sorted(inst.graph.edges)],
    }
    if include_solution:
        # kept under a separate key that decoding paths never read
        obj["solution"] = {"planted": sorted(inst.planted)}
    return obj


def instance_from_json(obj: dict) -> tuple[Graph, dict, frozenset[int] | None]:
    """Load (graph, params, planted-or-None) from the instance JSON format.

    The planted set is returned separately so callers can keep evaluation
    strictly apart from recovery.
    """
    params = dict(obj["params"])
    params["plan"] = AdversaryPlan.from_json(obj.get("plan") or {})
    params["seed"] = obj.get("seed")
    graph = Graph.from_edges(params["n"], [tuple(e) for e in obj["edges"]])
    sol = obj.get("solution")
    planted = frozenset(sol["planted"]) if sol else None
    return graph, params, planted


def load_instance(path: str | Path) -> tuple[Graph, dict, frozenset[int] | None]:
    return instance_from_json(json.loads(Path(path).read_text()))


def save_instance(inst: FKInstance, path: str | Path, include_solution: bool = True) -> None:
    Path(path).write_text(json.dumps(instance_to_json(inst, include_solution), indent=2) + "\n")
