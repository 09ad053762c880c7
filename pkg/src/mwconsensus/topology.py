"""Undirected communication graphs with agent roles.

Agents are numbered 1..n.  Edges are stored canonically as ``(min, max)``
pairs; weights on them are shared by both endpoints.  Roles are fixed for
the lifetime of a run: an agent is either ``legitimate`` (follows the
protocol, infers nothing) or ``adversarial`` (follows the protocol but
records everything it sees).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidAgent, InvalidInput, InvalidQuery
from .linalg import DEFAULT_TOL, sym_eigen

LEGITIMATE = "legitimate"
ADVERSARIAL = "adversarial"


def canonical_edge(edge: tuple[int, int]) -> tuple[int, int]:
    i, j = edge
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Topology:
    """Undirected graph on agents 1..n with per-agent roles."""

    n: int
    edges: frozenset[tuple[int, int]]
    roles: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InvalidInput("a network needs at least two agents")
        if len(self.roles) != self.n:
            raise InvalidInput(f"expected {self.n} roles, got {len(self.roles)}")
        for role in self.roles:
            if role not in (LEGITIMATE, ADVERSARIAL):
                raise InvalidInput(f"unknown role {role!r}")
        for i, j in self.edges:
            if i == j:
                raise InvalidInput(f"self-loop on agent {i}")
            if not (1 <= i < j <= self.n):
                raise InvalidInput(f"edge ({i}, {j}) is not canonical or out of range")

    @staticmethod
    def build(
        n: int,
        edges: Iterable[tuple[int, int]],
        adversaries: Iterable[int] = (),
    ) -> "Topology":
        """Construct from an edge list and the set of adversarial agents."""
        adv = set(adversaries)
        for a in adv:
            if not (1 <= a <= n):
                raise InvalidAgent(f"adversarial agent {a} out of range 1..{n}")
        roles = tuple(ADVERSARIAL if i in adv else LEGITIMATE for i in range(1, n + 1))
        canon = frozenset(canonical_edge(tuple(e)) for e in edges)
        return Topology(n=n, edges=canon, roles=roles)

    def _check_agent(self, i: int) -> None:
        if not (1 <= i <= self.n):
            raise InvalidAgent(f"agent {i} out of range 1..{self.n}")

    def role(self, i: int) -> str:
        self._check_agent(i)
        return self.roles[i - 1]

    def neighbors(self, i: int) -> frozenset[int]:
        self._check_agent(i)
        return frozenset(j if a == i else a for a, j in self.edges if i in (a, j))

    def is_connected(self) -> bool:
        """Every agent reachable from agent 1 by breadth-first search."""
        seen = {1}
        frontier = [1]
        while frontier:
            nxt = []
            for i in frontier:
                for j in self.neighbors(i):
                    if j not in seen:
                        seen.add(j)
                        nxt.append(j)
            frontier = nxt
        return len(seen) == self.n

    def adversaries(self) -> frozenset[int]:
        return frozenset(i for i in range(1, self.n + 1) if self.roles[i - 1] == ADVERSARIAL)

    def legitimate_agents(self) -> frozenset[int]:
        return frozenset(i for i in range(1, self.n + 1) if self.roles[i - 1] == LEGITIMATE)

    def legitimate_neighbor_exists(self, b: int) -> bool:
        """True iff legitimate agent ``b`` has at least one legitimate neighbor."""
        if self.role(b) != LEGITIMATE:
            raise InvalidQuery(f"agent {b} is not legitimate")
        return any(self.role(j) == LEGITIMATE for j in self.neighbors(b))

    def with_adversaries(self, adversaries: Iterable[int]) -> "Topology":
        return Topology.build(self.n, self.edges, adversaries)


def has_positive_spanning_tree(
    topology: Topology,
    weights: Mapping[tuple[int, int], np.ndarray],
    tol: float = DEFAULT_TOL,
) -> bool:
    """Whether the positive-definite-weighted edges connect all agents.

    An edge counts as positive definite when the smallest eigenvalue of its
    weight exceeds ``tol`` relative to the largest one.  A spanning tree of
    such edges exists iff the subgraph they form is connected on all n
    agents.
    """
    pd_edges = []
    for edge in topology.edges:
        W = np.asarray(weights[edge], dtype=float)
        w, _ = sym_eigen(W, tol)
        scale = float(np.max(np.abs(w))) if w.size else 0.0
        if scale > 0.0 and w.min() > tol * scale:
            pd_edges.append(edge)
    if not pd_edges:
        return False
    sub = Topology.build(topology.n, pd_edges)
    return sub.is_connected()
