"""Monomerization and endotacticity decisions.

For first-order networks endotacticity is decided exactly: a network is
endotactic iff its monomerization is weakly reversible with deficiency
zero. For higher order only refutation by sampled directions is offered.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import graph
from .model import (
    ZERO,
    Complex,
    MassAction,
    NetworkError,
    Reaction,
    ReactionNetwork,
    format_reaction,
    is_first_order,
    reaction_vector,
)


class InternalConsistencyError(RuntimeError):
    """Two independent routes to the same fact disagreed."""


def _require_first_order(network: ReactionNetwork) -> None:
    if not is_first_order(network):
        raise NetworkError("network has molecularity > 1; only first-order networks are supported here")


def pumped_species(network: ReactionNetwork) -> frozenset[int]:
    """Species whose count can become positive starting from the empty state.

    Support closure: a reaction fires from a state supported on S whenever
    supp(reactant) is inside S, and a first-order network can pump any
    supported species to any count by repeating its producing chain.
    """
    support: set[int] = set()
    changed = True
    while changed:
        changed = False
        for r in network.reactions:
            if r.reactant.support <= support and not r.product.support <= support:
                support |= r.product.support
                changed = True
    return frozenset(support)


@dataclass(frozen=True)
class Monomerization:
    network: ReactionNetwork
    pumped_species: frozenset[int]
    monomolecular_core: tuple[Reaction, ...]


def monomerize(network: ReactionNetwork) -> Monomerization:
    _require_first_order(network)
    core = [i for i, r in enumerate(network.reactions) if r.molecularity == 1]
    K = pumped_species(network)
    rx = [network.reactions[i] for i in core] + [Reaction(ZERO, Complex.unit(k)) for k in sorted(K)]
    kin = [network.kinetics[i] for i in core] + [MassAction(1.0)] * len(K)
    mono = ReactionNetwork(network.species, tuple(rx), tuple(kin), network.name)
    return Monomerization(mono, K, tuple(network.reactions[i] for i in core))


def is_endotactic_first_order(network: ReactionNetwork) -> bool:
    mono = monomerize(network)
    s = graph.summarize(mono.network)
    if s.weakly_reversible and s.deficiency != 0:
        raise InternalConsistencyError(
            f"weakly reversible first-order network with deficiency {s.deficiency}"
        )
    return s.weakly_reversible and s.deficiency == 0


@dataclass(frozen=True)
class Violation:
    """A direction u and a reaction from a u-maximal reactant pointing outward."""

    direction: tuple[Fraction, ...]
    reaction_index: int
    direction_index: int


def _dot(u: Sequence[Fraction], vec) -> Fraction:
    return sum((ui * int(vi) for ui, vi in zip(u, vec)), Fraction(0))


def _as_direction(u) -> tuple[Fraction, ...]:
    return tuple(Fraction(x).limit_denominator(10**12) if isinstance(x, float) else Fraction(x) for x in u)


def default_directions(network: ReactionNetwork, n_random: int = 64) -> list[tuple[Fraction, ...]]:
    """All +-e_i, +-(e_i +- e_j), then seeded pseudo-random rational directions.

    The random part is seeded from a digest of the network structure so the
    list is reproducible across runs and platforms.
    """
    d = network.d
    dirs: list[tuple[Fraction, ...]] = []

    def unit(i, s=1):
        v = [Fraction(0)] * d
        v[i] = Fraction(s)
        return v

    for i in range(d):
        for s in (1, -1):
            dirs.append(tuple(unit(i, s)))
    for i in range(d):
        for j in range(i + 1, d):
            for si in (1, -1):
                for sj in (1, -1):
                    v = unit(i, si)
                    v[j] = Fraction(sj)
                    dirs.append(tuple(v))
    digest = hashlib.sha256(repr([(r.reactant.terms, r.product.terms) for r in network.reactions]).encode())
    rng = random.Random(int.from_bytes(digest.digest()[:8], "big"))
    for _ in range(n_random):
        dirs.append(tuple(Fraction(rng.randint(-12, 12), rng.randint(1, 6)) for _ in range(d)))
    vecs = [reaction_vector(r, d) for r in network.reactions]
    return [u for u in dirs if any(_dot(u, v) != 0 for v in vecs)]


def _check_direction(network: ReactionNetwork, u: tuple[Fraction, ...], vecs) -> tuple[int | None, bool]:
    """First outward reaction from a u-maximal reactant, and strong-evidence flag."""
    d = network.d
    active = [i for i, v in enumerate(vecs) if _dot(u, v) != 0]
    if not active:
        raise ValueError(f"direction {u} is orthogonal to every reaction vector")
    levels = {i: _dot(u, network.reactions[i].reactant.dense(d)) for i in active}
    top = max(levels.values())
    maximal = [i for i in active if levels[i] == top]
    outward = next((i for i in maximal if _dot(u, vecs[i]) > 0), None)
    inward = any(_dot(u, vecs[i]) < 0 for i in maximal)
    return outward, inward


def endotactic_witness_search(
    network: ReactionNetwork, directions: Sequence[Sequence] | None = None
) -> Violation | None:
    """Look for a direction that refutes endotacticity.

    Returns the first violation in direction order. ``None`` is
    inconclusive for networks of order two or more.
    """
    vecs = [reaction_vector(r, network.d) for r in network.reactions]
    dirs = default_directions(network) if directions is None else [_as_direction(u) for u in directions]
    for k, u in enumerate(dirs):
        outward, _ = _check_direction(network, u, vecs)
        if outward is not None:
            return Violation(u, outward, k)
    return None


def strong_endotactic_evidence(network: ReactionNetwork, directions: Sequence[Sequence] | None = None) -> bool:
    """True iff every sampled direction has some u-maximal reactant with an inward reaction.

    Necessary evidence only; there is no exact decision for strong endotacticity.
    """
    vecs = [reaction_vector(r, network.d) for r in network.reactions]
    dirs = default_directions(network) if directions is None else [_as_direction(u) for u in directions]
    return all(_check_direction(network, u, vecs)[1] for u in dirs)


def endotactic_verdict(network: ReactionNetwork) -> str:
    """'yes' / 'no' for first order; 'refuted(u, reaction)' / 'inconclusive' otherwise."""
    if not network.reactions:
        return "yes"
    if is_first_order(network):
        return "yes" if is_endotactic_first_order(network) else "no"
    v = endotactic_witness_search(network)
    if v is None:
        return "inconclusive"
    u = ",".join(str(x) for x in v.direction)
    return f"refuted(({u}), {format_reaction(network.reactions[v.reaction_index], network.species)})"


@dataclass(frozen=True)
class JKLSets:
    J: frozenset[int]
    K: frozenset[int]
    L: frozenset[int]
    support: frozenset[int]
    box_cap: int
    l_semantics: str = "forall"
    notes: tuple[str, ...] = field(default=())

    @property
    def holds(self) -> bool:
        """K nonempty and K | L == J == supp C0."""
        return bool(self.K) and (self.K | self.L) == self.J == self.support


def jkl_sets(network: ReactionNetwork, box_cap: int = 10) -> JKLSets:
    """J, K, L for the zero component, by truncated-lattice reachability.

    L uses the literal for-all reading over K. Reachability is relative to
    the box ``{0..box_cap}^d``.
    """
    from . import statespace

    _require_first_order(network)
    split = graph.zero_split(network)
    if not split.zero_indices:
        raise NetworkError("zero component is empty")
    d = network.d
    cap = max(box_cap, 1 + max(c for r in network.reactions for cx in (r.reactant, r.product) for _, c in cx.terms))
    box = statespace.Box(cap, d)
    lattice = statespace.LatticeGraph(network, box)
    origin = (0,) * d

    def unit(i):
        return tuple(int(j == i) for j in range(d))

    c0 = [c for c in graph.complexes(split.zero_part)]
    support = frozenset().union(*(c.support for c in c0))
    J = frozenset(j for j in range(d) if lattice.reachable(unit(j), origin))
    from_origin = lattice.reach_set(origin)
    K = frozenset().union(
        *(c.support for c in c0 if box.index(c.dense(d)) in from_origin)
    )
    reach_from_k = {k: lattice.reach_set(unit(k)) for k in K}
    L = frozenset(
        ell for ell in J - K if all(box.index(unit(ell)) in reach_from_k[k] for k in K)
    )
    notes = []
    pumped = pumped_species(network)
    K_closure = frozenset().union(*(c.support for c in c0 if c.support <= pumped))
    if K_closure != K:
        notes.append(f"K by support closure {sorted(K_closure)} differs from K by reachability {sorted(K)}")
    if from_origin.touched_boundary:
        notes.append("reachability from the origin touched the box boundary; K is box-relative")
    return JKLSets(J, K, L, support, cap, notes=tuple(notes))
