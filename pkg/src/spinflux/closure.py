"""Commutator closure of a seed observable and its real evolution generator.

Coefficients of ``U^dag P U = sum_j gamma_j(t) P_j`` obey ``dgamma/dt = A gamma``
with ``A[j, k]`` the coefficient of ``P_j`` in ``i [H, P_k]``.  For a Hermitian
Pauli sum with real weights ``A`` is real and antisymmetric.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .pauli import DimensionError, PauliString, PauliSum, commutator

IMAG_TOL = 1e-12
DEFAULT_MAX_NODES = 4096


class ClosureError(RuntimeError):
    """Closure construction could not produce a valid real generator."""


class ClosureOverflowError(ClosureError):
    pass


class ImaginaryResidueError(ClosureError):
    pass


@dataclass(frozen=True)
class Edge:
    """Pictorial edge: ``weight`` is ``A[source, target] / 2``.

    The orientation puts the ``+`` sign on the source's equation, so
    ``dgamma_source/dt`` gains ``+2 * weight * gamma_target`` and the target
    gains ``-2 * weight * gamma_source``. ``terms`` lists the Hamiltonian
    strings that produced the edge with their structural sign.
    """

    source: int
    target: int
    weight: float
    terms: tuple[tuple[PauliString, int], ...]


@dataclass(frozen=True)
class ClosureGraph:
    nodes: tuple[PauliString, ...]
    edges: tuple[Edge, ...]
    hamiltonian: PauliSum
    rates: Mapping[tuple[int, int], float]
    seed_index: int = 0

    @property
    def seed(self) -> PauliString:
        return self.nodes[self.seed_index]

    def __len__(self) -> int:
        return len(self.nodes)

    def index(self, string: PauliString) -> int:
        return self.nodes.index(string)

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if i in (e.source, e.target))

    def is_path(self) -> bool:
        """True when the undirected graph is a single simple path."""
        n = len(self.nodes)
        if len(self.edges) != n - 1:
            return False
        degrees = [self.degree(i) for i in range(n)]
        if n == 1:
            return True
        if sorted(degrees)[:2] != [1, 1] or max(degrees) > 2:
            return False
        return _connected(n, self.edges)


def _connected(n: int, edges) -> bool:
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for e in edges:
        adj[e.source].append(e.target)
        adj[e.target].append(e.source)
    seen = {0}
    todo = [0]
    while todo:
        for m in adj[todo.pop()]:
            if m not in seen:
                seen.add(m)
                todo.append(m)
    return len(seen) == n


@dataclass(frozen=True)
class GeneratorMatrix:
    matrix: np.ndarray
    nodes: tuple[PauliString, ...]

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def is_antisymmetric(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.matrix + self.matrix.T), initial=0.0) <= tol)


def _heisenberg_rates(h: PauliSum, p: PauliString) -> list[tuple[PauliString, PauliString, complex]]:
    """Per-term contributions ``(term, target, i * coeff * [term, p] phase)``."""
    out = []
    for s, c in h.items():
        comm = commutator(s, p)
        if comm is not None:
            out.append((s, comm.string, 1j * comm.coefficient * c))
    return out


def build_closure(h: PauliSum, seed: PauliString, max_nodes: int = DEFAULT_MAX_NODES) -> ClosureGraph:
    """Breadth-first closure of ``seed`` under ``i [h, .]``.

    Children of a node are visited in lexicographic order of their letter
    strings, which fixes node indices for a given ``(h, seed)``.
    """
    if h.num_qubits != seed.num_qubits:
        raise DimensionError(f"{h.num_qubits}-qubit Hamiltonian with {seed.num_qubits}-qubit seed")
    if max_nodes < 1:
        raise ValueError("max_nodes must be >= 1")
    index = {seed: 0}
    nodes = [seed]
    rates: dict[tuple[int, int], float] = {}
    signs: dict[tuple[int, int], list[tuple[PauliString, int]]] = {}
    queue = deque([seed])
    while queue:
        p = queue.popleft()
        k = index[p]
        acc: dict[PauliString, complex] = {}
        contrib: dict[PauliString, list[tuple[PauliString, int]]] = {}
        for term, target, rate in _heisenberg_rates(h, p):
            acc[target] = acc.get(target, 0j) + rate
            coeff = h.coefficient(term)
            contrib.setdefault(target, []).append((term, 1 if (rate / coeff).real > 0 else -1))
        for target in sorted(acc):
            value = acc[target]
            if abs(value.imag) > IMAG_TOL:
                raise ImaginaryResidueError(
                    f"generator entry {target} <- {p} has imaginary part {value.imag:.3e}"
                )
            if value.real == 0.0:
                continue
            if target not in index:
                if len(nodes) >= max_nodes:
                    raise ClosureOverflowError(
                        f"closure of {seed} exceeds the node budget of {max_nodes}"
                    )
                index[target] = len(nodes)
                nodes.append(target)
                queue.append(target)
            j = index[target]
            rates[(j, k)] = value.real
            signs[(j, k)] = contrib[target]
    return ClosureGraph(tuple(nodes), _pictorial_edges(rates, signs), h, rates)


def _pictorial_edges(rates, signs) -> tuple[Edge, ...]:
    pairs = sorted({(min(j, k), max(j, k)) for j, k in rates})
    edges = []
    for a, b in pairs:
        key = (a, b) if (a, b) in rates else (b, a)
        row, col = key
        terms = signs[key]
        if terms and terms[0][1] < 0:
            row, col = col, row
            terms = [(s, -sg) for s, sg in terms]
            weight = -rates[key] / 2.0
        else:
            weight = rates[key] / 2.0
        edges.append(Edge(row, col, weight, tuple(terms)))
    return tuple(edges)


def generator_matrix(g: ClosureGraph) -> GeneratorMatrix:
    """Dense ``A`` with ``dgamma_j/dt = sum_k A[j, k] gamma_k``."""
    a = np.zeros((len(g.nodes), len(g.nodes)))
    for (j, k), v in g.rates.items():
        a[j, k] = v
    return GeneratorMatrix(a, g.nodes)


def is_closed(h: PauliSum, nodes) -> bool:
    """Whether ``[h, p]`` stays in the span of ``nodes`` for every ``p``."""
    pool = set(nodes)
    for p in nodes:
        acc: dict[PauliString, complex] = {}
        for _, target, rate in _heisenberg_rates(h, p):
            acc[target] = acc.get(target, 0j) + rate
        if any(v != 0 and t not in pool for t, v in acc.items()):
            return False
    return True


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _edge_label(edge: Edge, labels: Mapping[PauliString, str] | None) -> str:
    if labels and all(s in labels for s, _ in edge.terms):
        parts = []
        for i, (s, sign) in enumerate(edge.terms):
            sym = labels[s]
            if sign < 0:
                parts.append(f"-{sym}")
            else:
                parts.append(sym if i == 0 else f"+{sym}")
        return "".join(parts)
    return repr(float(edge.weight))


def export_dot(g: ClosureGraph, labels: Mapping[PauliString, str] | None = None, name: str = "closure") -> str:
    """Graphviz digraph of the closure.

    Edge labels use ``labels`` (Hamiltonian string -> symbol such as ``"J3"``)
    when every contributing term has one, otherwise the numeric weight.
    Weights omit the factor ``2i`` of the commutator.
    """
    lines = [f"digraph {name} {{"]
    for i, p in enumerate(g.nodes):
        attrs = f"label={_dot_quote(str(p))}"
        if i == g.seed_index:
            attrs += ", shape=box"
        lines.append(f"  n{i} [{attrs}];")
    for e in g.edges:
        lines.append(f"  n{e.source} -> n{e.target} [label={_dot_quote(_edge_label(e, labels))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
