"""Dispersive chains: which ``|m, n>`` states the resonant effective
Hamiltonian connects.

Along a chain the photon number follows ``n_m = n_base + k (m^2 - m_min^2)``
with ``m_min = 0`` for integer J and ``1/2`` for half-integer J.  Edge
weights are read off the effective Hamiltonian itself, so the graph and the
operator can be cross-checked.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CutoffTooSmall
from .hamiltonians import ModelConfig, build_effective_dsc, build_effective_half_integer
from .hilbert import HalfIntLike, SpinBosonBasis, as_twice

Node = tuple[Fraction, int]

# coupling used for off-resonant graphs; the structure does not depend on it
OFF_RESONANT_G = 1.2


@dataclass(frozen=True)
class ResonanceTable:
    """Phase rate ``(2m + 1) k`` (units of omega) picked up by ``J-`` landing on ``m``."""

    twice_j: int
    k: int
    rows: tuple[tuple[Fraction, int], ...]

    @property
    def rates(self) -> list[int]:
        return [rate for _, rate in self.rows]


def resonance_table(J: HalfIntLike, k: int) -> ResonanceTable:
    if k < 1:
        raise ValueError("k must be >= 1")
    tj = as_twice(J)
    rows = tuple((Fraction(tm, 2), (tm + 1) * k) for tm in range(-tj, tj + 1, 2))
    return ResonanceTable(tj, int(k), rows)


def _node_id(node: Node) -> str:
    return f"{node[0]},{node[1]}"


@dataclass
class ChainGraph:
    twice_j: int
    k: int | None
    n_max: int
    nodes: list[Node]
    edges: list[tuple[Node, Node, float]]
    components: list[list[Node]] = field(default_factory=list)

    @property
    def J(self) -> Fraction:
        return Fraction(self.twice_j, 2)

    def edge_set(self) -> set[frozenset]:
        return {frozenset((a, b)) for a, b, _ in self.edges}

    def adjacency(self) -> dict[Node, list[Node]]:
        adj: dict[Node, list[Node]] = {node: [] for node in self.nodes}
        for a, b, _ in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return {node: sorted(nbrs) for node, nbrs in adj.items()}

    def photon_numbers(self) -> list[int]:
        return [n for _, n in sorted(self.nodes)]

    def to_json(self) -> dict:
        return {
            "J": str(self.J),
            "k": self.k,
            "n_max": self.n_max,
            "nodes": [{"id": _node_id(v), "m": str(v[0]), "n": v[1]} for v in sorted(self.nodes)],
            "edges": [
                {"source": _node_id(a), "target": _node_id(b), "weight": w} for a, b, w in self.edges
            ],
            "adjacency": {
                _node_id(v): [_node_id(u) for u in nbrs] for v, nbrs in sorted(self.adjacency().items())
            },
            "components": [[_node_id(v) for v in sorted(comp)] for comp in self.components],
        }

    def to_dot(self, name: str = "chains") -> str:
        lines = [f"graph {name} {{", "  rankdir=LR;", "  node [shape=box];"]
        linked = {v for a, b, _ in self.edges for v in (a, b)}
        for v in sorted(self.nodes):
            style = "" if v in linked else " [shape=point]"
            lines.append(f'  "{_node_id(v)}"{style};')
        for a, b, w in self.edges:
            lines.append(f'  "{_node_id(a)}" -- "{_node_id(b)}" [label="{w:.4g}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _effective_operator(twice_j: int, k: int | None, n_max: int, omega0: float) -> tuple[np.ndarray, SpinBosonBasis]:
    g = math.sqrt(k) if k else OFF_RESONANT_G
    cfg = ModelConfig(omega0=omega0, g=g, J=Fraction(twice_j, 2), n_max=n_max)
    if twice_j % 2:
        h = build_effective_half_integer(cfg, k)
    elif k:
        h = build_effective_dsc(cfg, k)
    else:
        # integer J away from resonance: nothing survives the first-order average
        h = np.zeros((cfg.basis.dim, cfg.basis.dim), dtype=complex)
    return h, cfg.basis


def photon_offset(twice_m: int, twice_j: int, k: int) -> int:
    """``k (m^2 - m_min^2)``, exact."""
    m_min_sq4 = twice_j % 2
    return k * (twice_m * twice_m - m_min_sq4) // 4


def rule_edges(twice_j: int, k: int | None, n_max: int):
    """Candidate edges ``((m, n), (m+1, n'))`` from the photon-offset rule.

    Some candidates carry zero weight in the effective Hamiltonian, when
    ``n`` hits a zero of the Laguerre factor.
    """
    for tm in range(-twice_j, twice_j, 2):
        if k:
            step = photon_offset(tm + 2, twice_j, k) - photon_offset(tm, twice_j, k)
        elif tm == -1:
            step = 0
        else:
            continue
        for n in range(n_max + 1):
            n_up = n + step
            if 0 <= n_up <= n_max:
                yield (Fraction(tm, 2), n), (Fraction(tm + 2, 2), n_up)


def _weighted(edges, h: np.ndarray, basis: SpinBosonBasis):
    out = []
    for a, b in edges:
        w = abs(h[basis.index(*a), basis.index(*b)])
        if w != 0.0:
            out.append((a, b, float(w)))
    return out


def _components(nodes: list[Node], edges) -> list[list[Node]]:
    pos = {v: i for i, v in enumerate(nodes)}
    rows = [pos[a] for a, b, _ in edges]
    cols = [pos[b] for a, b, _ in edges]
    adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(nodes), len(nodes)))
    n_comp, labels = connected_components(adj, directed=False)
    comps: list[list[Node]] = [[] for _ in range(n_comp)]
    for v, lab in zip(nodes, labels):
        comps[lab].append(v)
    return sorted((sorted(c) for c in comps), key=lambda c: (c[0][1], c[0][0]))


def build_chain_graph(
    J: HalfIntLike, k: int, n_base: int, n_max: int, omega0: float = 1.0
) -> ChainGraph:
    """The single chain whose lowest rung (``m = m_min``) holds ``n_base`` photons.

    Rungs that would need a negative photon number are dropped (partial
    chain); rungs above ``n_max`` raise :class:`CutoffTooSmall`.
    """
    tj = as_twice(J)
    offsets = {tm: photon_offset(tm, tj, k) for tm in range(-tj, tj + 1, 2)}
    top = n_base + max(offsets.values())
    if top > n_max:
        raise CutoffTooSmall(f"chain reaches n={top} above n_max={n_max}", suggested_n_max=top)
    nodes = [(Fraction(tm, 2), n_base + off) for tm, off in offsets.items() if n_base + off >= 0]
    node_set = set(nodes)
    h, basis = _effective_operator(tj, k, n_max, omega0)
    cand = [
        ((Fraction(tm, 2), n_base + offsets[tm]), (Fraction(tm + 2, 2), n_base + offsets[tm + 2]))
        for tm in range(-tj, tj, 2)
    ]
    edges = _weighted([(a, b) for a, b in cand if a in node_set and b in node_set], h, basis)
    return ChainGraph(tj, k, n_max, nodes, edges, _components(nodes, edges))


def chain_partition(J: HalfIntLike, k: int | None, n_max: int, omega0: float = 1.0) -> ChainGraph:
    """Split the whole truncated space into chains.

    ``k=None`` is the off-resonant case: no chains for integer J and only
    the ``m = -1/2 <-> +1/2`` pairs for half-integer J.
    """
    tj = as_twice(J)
    basis = SpinBosonBasis(tj, n_max)
    nodes = [basis.label(i) for i in range(basis.dim)]
    h, basis = _effective_operator(tj, k, n_max, omega0)
    edges = _weighted(rule_edges(tj, k, n_max), h, basis)
    return ChainGraph(tj, k, n_max, nodes, edges, _components(nodes, edges))


def effective_edges(h: np.ndarray, basis: SpinBosonBasis) -> set[frozenset]:
    """Nonzero off-diagonal pattern of ``h`` as undirected node pairs."""
    rows, cols = np.nonzero(np.triu(h, 1))
    return {frozenset((basis.label(r), basis.label(c))) for r, c in zip(rows, cols)}


def decoupled_states(J: HalfIntLike, k: int | None, n_max: int) -> set[Node]:
    """States the first-order effective dynamics leaves untouched."""
    graph = chain_partition(J, k, n_max)
    return {comp[0] for comp in graph.components if len(comp) == 1}
