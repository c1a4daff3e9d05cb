"""Communication graphs induced by feedback matrices.

Agents are indexed from 0 in the Python API. An edge ``(j, i)`` means agent
``j`` sends its state to agent ``i``, i.e. ``F[i, j] != 0``. File formats
(DOT, scenario JSON) use 1-based agent numbers.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import numeric

DEFAULT_TAU_REL = 1e-9


@dataclass(frozen=True)
class CommGraph:
    n: int
    edges: frozenset
    tau: float

    def has_edge(self, src: int, dst: int) -> bool:
        return (src, dst) in self.edges

    def entry_absent(self, i: int, j: int) -> bool:
        """True when ``F[i, j]`` counts as zero (agent i ignores agent j)."""
        return (j, i) not in self.edges

    def successors(self) -> list[list[int]]:
        out = [[] for _ in range(self.n)]
        for src, dst in sorted(self.edges):
            out[src].append(dst)
        return out

    def in_degree(self, node: int) -> int:
        return sum(1 for _, dst in self.edges if dst == node)

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {name} {{", f'  graph [tau="{self.tau!r}"];']
        lines += [f"  {k + 1};" for k in range(self.n)]
        lines += [f"  {src + 1} -> {dst + 1};" for src, dst in sorted(self.edges)]
        lines.append("}")
        return "\n".join(lines) + "\n"


def extract_graph(F, tau_rel: float = DEFAULT_TAU_REL) -> CommGraph:
    """Graph with edge (j, i) iff ``|F[i, j]| > tau_rel * max(1, |F|_max)``.

    A non-square F (fewer inputs than agents, inputs on the leading agents)
    is read as if padded with zero rows.
    """
    F = np.asarray(F)
    if tau_rel < 0:
        raise ValueError("tau_rel must be non-negative")
    m, n = F.shape
    if m > n:
        raise ValueError(f"F has more rows than columns: {F.shape}")
    tau = tau_rel * max(1.0, numeric.max_abs(F))
    rows, cols = np.nonzero(np.abs(F) > tau)
    edges = frozenset((int(j), int(i)) for i, j in zip(rows, cols) if i != j)
    return CommGraph(n=n, edges=edges, tau=tau)


def _reach(succ, sources, removed=None) -> set:
    seen = {s for s in sources if s != removed}
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for v in succ[u]:
            if v != removed and v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def roots(g: CommGraph) -> set:
    """Nodes from which every node is reachable along edge direction."""
    succ = g.successors()
    return {r for r in range(g.n) if len(_reach(succ, [r])) == g.n}


def has_spanning_tree(g: CommGraph) -> bool:
    return bool(roots(g))


def is_2_rooted(g: CommGraph, r1: int, r2: int) -> bool:
    """Every node v outside {r1, r2} stays reachable from the remaining roots
    after deleting any single node other than v."""
    if r1 == r2:
        return False
    succ = g.successors()
    targets = set(range(g.n)) - {r1, r2}
    for removed in [None, *range(g.n)]:
        reach = _reach(succ, [r1, r2], removed)
        if not (targets - {removed}) <= reach:
            return False
    return True


def root_pairs(g: CommGraph) -> list[tuple[int, int]]:
    return [(a, b) for a, b in combinations(range(g.n), 2) if is_2_rooted(g, a, b)]
