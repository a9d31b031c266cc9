"""Structural invariants of the reaction graph.

Ranks and orthogonal complements are exact (rational); the rate constants
are never consulted here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import linalg
from .model import ZERO, Complex, ReactionNetwork


def complexes(network: ReactionNetwork) -> list[Complex]:
    """Distinct complexes in first-appearance order (reactant before product)."""
    seen: dict[Complex, None] = {}
    for r in network.reactions:
        seen.setdefault(r.reactant)
        seen.setdefault(r.product)
    return list(seen)


def reaction_graph(network: ReactionNetwork) -> tuple[list[Complex], list[list[int]]]:
    """Complexes and successor lists (indices into the complex list)."""
    cx = complexes(network)
    pos = {c: i for i, c in enumerate(cx)}
    succ: list[list[int]] = [[] for _ in cx]
    for r in network.reactions:
        succ[pos[r.reactant]].append(pos[r.product])
    return cx, succ


def tarjan_scc(n: int, successors: Callable[[int], Iterable[int]] | Sequence[Sequence[int]]) -> list[list[int]]:
    """Strongly connected components of a digraph on vertices ``0..n-1``.

    Iterative Tarjan with an explicit call stack, so deep graphs do not hit
    the recursion limit. Components come out in reverse topological order
    (sinks of the condensation first).
    """
    succ = successors if callable(successors) else successors.__getitem__
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def weak_components(n: int, edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


@dataclass(frozen=True)
class NetworkSummary:
    complex_count: int
    linkage_count: int
    stoich_dim: int
    deficiency: int
    weakly_reversible: bool
    conservative: bool
    conservation_vector: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if self.deficiency != self.complex_count - self.stoich_dim - self.linkage_count:
            raise ValueError("inconsistent deficiency")
        if self.deficiency < 0:
            raise ArithmeticError(f"negative deficiency {self.deficiency}")


def strong_components(network: ReactionNetwork) -> list[frozenset[Complex]]:
    cx, succ = reaction_graph(network)
    return [frozenset(cx[i] for i in comp) for comp in tarjan_scc(len(cx), succ)]


def linkage_classes(network: ReactionNetwork) -> list[frozenset[Complex]]:
    cx, succ = reaction_graph(network)
    edges = [(i, j) for i, js in enumerate(succ) for j in js]
    return [frozenset(cx[i] for i in comp) for comp in weak_components(len(cx), edges)]


def stoichiometric_dimension(network: ReactionNetwork) -> int:
    if not network.reactions:
        return 0
    return linalg.rank(network.stoichiometry().tolist())


def is_weakly_reversible(network: ReactionNetwork) -> bool:
    return len(strong_components(network)) == len(linkage_classes(network))


def conservation_vector(network: ReactionNetwork) -> tuple[Fraction, ...] | None:
    """A strictly positive vector orthogonal to every reaction vector, if any."""
    w = linalg.strictly_positive_kernel_vector(network.stoichiometry().tolist(), network.d)
    return None if w is None else tuple(w)


def summarize(network: ReactionNetwork) -> NetworkSummary:
    cx, succ = reaction_graph(network)
    edges = [(i, j) for i, js in enumerate(succ) for j in js]
    n_strong = len(tarjan_scc(len(cx), succ))
    n_weak = len(weak_components(len(cx), edges))
    dim = stoichiometric_dimension(network)
    w = conservation_vector(network)
    return NetworkSummary(
        complex_count=len(cx),
        linkage_count=n_weak,
        stoich_dim=dim,
        deficiency=len(cx) - dim - n_weak,
        weakly_reversible=n_strong == n_weak,
        conservative=w is not None,
        conservation_vector=w,
    )


@dataclass(frozen=True)
class ZeroSplit:
    zero_part: ReactionNetwork
    rest: ReactionNetwork
    zero_species: tuple[int, ...]
    zero_indices: tuple[int, ...]
    rest_indices: tuple[int, ...]


def zero_split(network: ReactionNetwork) -> ZeroSplit:
    """Split off the linkage class containing the zero complex.

    When the zero complex does not occur, the zero part is empty.
    """
    zero_class: frozenset[Complex] = frozenset()
    for comp in linkage_classes(network):
        if ZERO in comp:
            zero_class = comp
            break
    zi = tuple(i for i, r in enumerate(network.reactions) if r.reactant in zero_class)
    ri = tuple(i for i in range(len(network.reactions)) if i not in set(zi))
    species: set[int] = set()
    for c in zero_class:
        species |= c.support
    return ZeroSplit(
        zero_part=network.subnetwork(zi),
        rest=network.subnetwork(ri),
        zero_species=tuple(sorted(species)),
        zero_indices=zi,
        rest_indices=ri,
    )
