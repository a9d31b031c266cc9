"""Reachability and communicating classes on a truncated lattice.

The ambient space N_0^d is cut to the box {0..N}^d. Transitions leaving
the box are recorded (for boundary flags) but never followed, so every
negative answer here is relative to the box.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .model import ReactionNetwork, reaction_vector

DEFAULT_STATE_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    pass


def state_budget() -> int:
    env = os.environ.get("CRN_STATE_BUDGET")
    return int(env) if env else DEFAULT_STATE_BUDGET


@dataclass(frozen=True)
class Box:
    """The state box {0..cap}^d with mixed-radix state indexing."""

    cap: int
    d: int

    def __post_init__(self):
        if self.cap < 1:
            raise ValueError("box cap must be >= 1")
        if self.d < 0:
            raise ValueError("dimension must be >= 0")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cap + 1,) * self.d

    @property
    def size(self) -> int:
        return (self.cap + 1) ** self.d

    def check_budget(self, budget: int | None = None) -> None:
        budget = state_budget() if budget is None else budget
        if self.size > budget:
            raise BudgetExceeded(f"box has {self.size} states, budget is {budget}")

    def contains(self, state: Sequence[int]) -> bool:
        return len(state) == self.d and all(0 <= s <= self.cap for s in state)

    def index(self, state: Sequence[int]) -> int:
        if not self.contains(state):
            raise ValueError(f"state {tuple(state)} outside box {{0..{self.cap}}}^{self.d}")
        if self.d == 0:
            return 0
        return int(np.ravel_multi_index(tuple(int(s) for s in state), self.shape))

    def state(self, index: int) -> tuple[int, ...]:
        if self.d == 0:
            return ()
        return tuple(int(s) for s in np.unravel_index(index, self.shape))

    def all_states(self) -> np.ndarray:
        """All states, shape (size, d), in index order."""
        if self.d == 0:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.indices(self.shape, dtype=np.int64).reshape(self.d, -1)
        return grids.T.copy()


@dataclass(frozen=True)
class ReachSet:
    mask: np.ndarray
    touched_boundary: bool

    def __contains__(self, index: int) -> bool:
        return bool(self.mask[index])

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)


class LatticeGraph:
    """Enabled-transition digraph of a network restricted to a box.

    ``src, dst, rxn`` list every in-box transition; ``exits[i]`` is True
    when some enabled reaction at state ``i`` would leave the box.
    """

    def __init__(self, network: ReactionNetwork, box: Box):
        if box.d != network.d:
            raise ValueError(f"box dimension {box.d} does not match {network.d} species")
        box.check_budget()
        self.network = network
        self.box = box
        states = box.all_states()
        self.states = states
        n = box.size
        exits = np.zeros(n, dtype=bool)
        srcs, dsts, rxns = [], [], []
        radix = np.array([(box.cap + 1) ** (box.d - 1 - k) for k in range(box.d)], dtype=np.int64)
        for k, r in enumerate(network.reactions):
            y = r.reactant.dense(box.d)
            delta = reaction_vector(r, box.d)
            enabled = (states >= y).all(axis=1)
            target = states + delta
            inside = ((target >= 0) & (target <= box.cap)).all(axis=1)
            exits |= enabled & ~inside
            ok = np.flatnonzero(enabled & inside)
            srcs.append(ok)
            dsts.append(target[ok] @ radix)
            rxns.append(np.full(len(ok), k, dtype=np.int64))
        self.src = np.concatenate(srcs) if srcs else np.zeros(0, dtype=np.int64)
        self.dst = np.concatenate(dsts) if dsts else np.zeros(0, dtype=np.int64)
        self.rxn = np.concatenate(rxns) if rxns else np.zeros(0, dtype=np.int64)
        self.exits = exits
        self.adjacency = sparse.csr_matrix(
            (np.ones(len(self.src), dtype=np.int8), (self.src, self.dst)), shape=(n, n)
        )

    def reach_set(self, state: Sequence[int]) -> ReachSet:
        start = self.box.index(state)
        order = csgraph.breadth_first_order(self.adjacency, start, directed=True, return_predecessors=False)
        mask = np.zeros(self.box.size, dtype=bool)
        mask[order] = True
        return ReachSet(mask, bool(self.exits[order].any()))

    def reachable(self, frm: Sequence[int], to: Sequence[int]) -> bool:
        target = self.box.index(to)
        return target in self.reach_set(frm)


def reachable(network: ReactionNetwork, frm: Sequence[int], to: Sequence[int], box: Box) -> bool:
    """Whether ``to`` can be reached from ``frm`` without leaving the box."""
    for s in (frm, to):
        if not box.contains(s):
            raise ValueError(f"state {tuple(s)} outside the box")
    return LatticeGraph(network, box).reachable(frm, to)


CLOSED, OPEN, BOUNDARY = "closed", "open", "boundary"


@dataclass
class ClassDecomposition:
    """Communicating classes of the truncated chain.

    ``labels[i]`` is the class of state ``i``; classes are numbered by
    their smallest member index. A class touching the box edge through an
    enabled reaction is ``boundary`` regardless of its in-box exits.
    """

    box: Box
    labels: np.ndarray
    statuses: list[str]
    leaks_inside: np.ndarray
    class_edges: set[tuple[int, int]]

    @property
    def n_classes(self) -> int:
        return len(self.statuses)

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)

    def member_states(self, k: int) -> list[tuple[int, ...]]:
        return [self.box.state(i) for i in self.members(k)]

    def class_of(self, state: Sequence[int]) -> int:
        return int(self.labels[self.box.index(state)])

    def status_of(self, state: Sequence[int]) -> str:
        return self.statuses[self.class_of(state)]


def _normalize_labels(raw: np.ndarray) -> np.ndarray:
    _, first = np.unique(raw, return_index=True)
    order = np.argsort(first)
    remap = np.empty(len(order), dtype=np.int64)
    remap[raw[first[order]]] = np.arange(len(order))
    return remap[raw]


def classes(network: ReactionNetwork, box: Box, lattice: LatticeGraph | None = None) -> ClassDecomposition:
    lattice = lattice or LatticeGraph(network, box)
    _, raw = csgraph.connected_components(lattice.adjacency, directed=True, connection="strong")
    labels = _normalize_labels(raw)
    n_cls = int(labels.max()) + 1 if len(labels) else 0
    ls, ld = labels[lattice.src], labels[lattice.dst]
    cross = ls != ld
    leaks = np.zeros(n_cls, dtype=bool)
    leaks[ls[cross]] = True
    at_edge = np.zeros(n_cls, dtype=bool)
    at_edge[labels[lattice.exits]] = True
    statuses = [BOUNDARY if at_edge[k] else OPEN if leaks[k] else CLOSED for k in range(n_cls)]
    edges = set(zip(ls[cross].tolist(), ld[cross].tolist()))
    return ClassDecomposition(box, labels, statuses, leaks, edges)


@dataclass(frozen=True)
class EssentialVerdict:
    status: str  # "yes" | "no" | "inconclusive"
    witness: tuple[tuple[int, ...], ...] = ()
    box_cap: int = 0
    n_classes: int = 0
    reason: str = ""


def essential_verdict(
    network: ReactionNetwork, box: Box, decomposition: ClassDecomposition | None = None
) -> EssentialVerdict:
    """Essentialness on the box.

    ``no`` when an open class lies fully inside the box (witness: its
    states). ``inconclusive`` when a boundary class also leaks inside the
    box, since the leak may be a truncation artefact. ``yes`` otherwise.
    """
    dec = decomposition or classes(network, box)
    for k, st in enumerate(dec.statuses):
        if st == OPEN:
            return EssentialVerdict("no", tuple(dec.member_states(k)), box.cap, dec.n_classes,
                                    "open class strictly inside the box")
    for k, st in enumerate(dec.statuses):
        if st == BOUNDARY and dec.leaks_inside[k]:
            return EssentialVerdict("inconclusive", tuple(dec.member_states(k)), box.cap, dec.n_classes,
                                    "boundary class leaks to another class inside the box")
    return EssentialVerdict("yes", (), box.cap, dec.n_classes, "no open class inside the box")


@dataclass(frozen=True)
class EmbeddingResult:
    holds: bool
    counterexample: tuple[tuple[int, ...], tuple[int, ...]] | None
    pairs_checked: int
    seed: int


def check_embedding(
    net1: ReactionNetwork,
    net2: ReactionNetwork,
    box: Box,
    sample_pairs: int = 200,
    seed: int = 0,
    targets_per_source: int = 8,
) -> EmbeddingResult:
    """Sampled check that every pair reachable for ``net1`` is reachable for ``net2``.

    The origin is probed first and unit vectors are tried as targets
    before random ones, so the simplest counterexamples surface first.
    """
    if net1.species != net2.species:
        raise ValueError("networks must share the same species list")
    g1, g2 = LatticeGraph(net1, box), LatticeGraph(net2, box)
    rng = np.random.default_rng(seed)
    d = box.d
    units = [tuple(int(j == i) for j in range(d)) for i in range(d)]
    checked = 0
    first = True
    while checked < sample_pairs:
        x = (0,) * d if first else tuple(int(s) for s in rng.integers(0, box.cap + 1, size=d))
        first = False
        r1, r2 = g1.reach_set(x), g2.reach_set(x)
        pool = r1.indices
        targets = [box.index(u) for u in units if box.index(u) in r1]
        if len(pool):
            targets += rng.choice(pool, size=min(targets_per_source, len(pool)), replace=False).tolist()
        for z in targets[: max(1, targets_per_source)]:
            checked += 1
            if z not in r2:
                return EmbeddingResult(False, (x, box.state(z)), checked, seed)
            if checked >= sample_pairs:
                break
    return EmbeddingResult(True, None, checked, seed)


def quotient_dot(dec: ClassDecomposition, max_classes: int = 500) -> str:
    """Graphviz DOT text for the quotient digraph of classes."""
    if dec.n_classes > max_classes:
        raise ValueError(f"{dec.n_classes} classes is too many for a DOT export")
    colors = {CLOSED: "palegreen", OPEN: "lightsalmon", BOUNDARY: "lightgrey"}
    lines = ["digraph classes {", "  node [style=filled];"]
    for k, st in enumerate(dec.statuses):
        members = dec.members(k)
        rep = dec.box.state(int(members[0]))
        label = f"{rep}" + (f" (+{len(members) - 1})" if len(members) > 1 else "")
        lines.append(f'  c{k} [label="{label}", fillcolor={colors[st]}];')
    for a, b in sorted(dec.class_edges):
        lines.append(f"  c{a} -> c{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
