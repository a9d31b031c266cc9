"""Core domain types: complexes, reactions, kinetics and networks.

Species are named at the text boundary and indexed densely (0-based)
everywhere else; the ordered species tuple of a network fixes the
coordinate system of every vector and matrix downstream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np


class NetworkError(ValueError):
    """Raised for structurally invalid networks."""


@dataclass(frozen=True, order=True)
class Complex:
    """Sparse non-negative integer combination of species.

    ``terms`` holds ``(species_index, coefficient)`` pairs sorted by index,
    with every coefficient >= 1. The empty tuple is the zero complex.
    """

    terms: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        idx = [i for i, _ in self.terms]
        if idx != sorted(set(idx)):
            raise NetworkError(f"complex terms must have sorted unique indices: {self.terms}")
        if any(c < 1 for _, c in self.terms) or any(i < 0 for i in idx):
            raise NetworkError(f"complex coefficients must be >= 1: {self.terms}")

    @classmethod
    def from_dense(cls, vec: Sequence[int]) -> "Complex":
        return cls(tuple((i, int(c)) for i, c in enumerate(vec) if c))

    @classmethod
    def from_mapping(cls, coeffs: Mapping[int, int]) -> "Complex":
        return cls(tuple(sorted((int(i), int(c)) for i, c in coeffs.items() if c)))

    @classmethod
    def unit(cls, i: int, coeff: int = 1) -> "Complex":
        return cls(((i, coeff),))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def norm(self) -> int:
        """Molecularity (l1-norm)."""
        return sum(c for _, c in self.terms)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.terms)

    def coeff(self, i: int) -> int:
        for j, c in self.terms:
            if j == i:
                return c
        return 0

    def dense(self, d: int) -> np.ndarray:
        out = np.zeros(d, dtype=np.int64)
        for i, c in self.terms:
            out[i] = c
        return out

    def key(self, d: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self.dense(d))

    def shifted(self, offset: Sequence[int]) -> "Complex":
        return Complex.from_dense(self.dense(len(offset)) + np.asarray(offset, dtype=np.int64))


ZERO = Complex()


@dataclass(frozen=True)
class Reaction:
    reactant: Complex
    product: Complex

    def __post_init__(self):
        if self.reactant == self.product:
            raise NetworkError("reactant and product must differ")

    @property
    def molecularity(self) -> int:
        return self.reactant.norm


@dataclass(frozen=True)
class MassAction:
    """Stochastic mass-action kinetics ``rate * x^(y falling)``."""

    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and np.isfinite(self.rate)):
            raise NetworkError(f"mass-action rate must be positive and finite, got {self.rate}")


@dataclass(frozen=True)
class Tabulated:
    """Generic kinetics given by a finite table with a positive default.

    The value at a state ``x >= y`` is ``table.get(x, default)``; states not
    dominating the reactant get 0, so genericity holds by construction.
    """

    table: tuple[tuple[tuple[int, ...], float], ...] = ()
    default: float = 1.0

    def __post_init__(self):
        if not self.default > 0 or any(not val > 0 for _, val in self.table):
            raise NetworkError("tabulated propensities must be positive where enabled")

    @classmethod
    def from_dict(cls, table: Mapping[tuple[int, ...], float], default: float = 1.0) -> "Tabulated":
        return cls(tuple(sorted((tuple(k), float(v)) for k, v in table.items())), float(default))

    def value(self, state: tuple[int, ...]) -> float:
        for k, v in self.table:
            if k == state:
                return v
        return self.default


Kinetics = Union[MassAction, Tabulated]


def falling_factorial(x: Sequence[int], y: Complex) -> int:
    """Descending factorial x^(y) = prod_i x_i (x_i - 1) ... (x_i - y_i + 1)."""
    out = 1
    for i, c in y.terms:
        xi = int(x[i])
        for ell in range(c):
            out *= xi - ell
            if out == 0:
                return 0
    return out


@dataclass(frozen=True)
class ReactionNetwork:
    """A reaction network with attached per-reaction kinetics.

    Construct through :meth:`build` to get duplicate merging and the
    catalytic-species check; the raw constructor only validates shapes.
    """

    species: tuple[str, ...]
    reactions: tuple[Reaction, ...] = ()
    kinetics: tuple[Kinetics, ...] = ()
    name: str = ""
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.reactions) != len(self.kinetics):
            raise NetworkError("one kinetics entry per reaction required")
        if len(set(self.species)) != len(self.species):
            raise NetworkError("duplicate species names")
        d = len(self.species)
        for r in self.reactions:
            for cx in (r.reactant, r.product):
                if cx.terms and cx.terms[-1][0] >= d:
                    raise NetworkError("complex refers to a species outside the species list")
        if len(set(self.reactions)) != len(self.reactions):
            raise NetworkError("duplicate reactions; use ReactionNetwork.build to merge them")

    @classmethod
    def build(
        cls,
        species: Sequence[str],
        reactions: Sequence[Reaction],
        kinetics: Sequence[Kinetics | float],
        name: str = "",
        strict: bool = False,
        notes: Sequence[str] = (),
    ) -> "ReactionNetwork":
        """Validate and normalize a network.

        Duplicate reactions are merged by summing their propensities, as in
        the joint of two systems. Purely catalytic species raise in
        ``strict`` mode and are recorded as a note otherwise.
        """
        kin = [MassAction(float(k)) if not isinstance(k, (MassAction, Tabulated)) else k for k in kinetics]
        if len(kin) != len(reactions):
            raise NetworkError("one kinetics entry per reaction required")
        merged: dict[Reaction, Kinetics] = {}
        notes = list(notes)
        for r, k in zip(reactions, kin):
            if r in merged:
                merged[r] = _sum_kinetics(merged[r], k)
                msg = f"duplicate reaction merged with summed rate: {format_reaction(r, species)}"
                warnings.warn(msg, stacklevel=2)
                notes.append(msg)
            else:
                merged[r] = k
        net = cls(tuple(species), tuple(merged), tuple(merged.values()), name, tuple(notes))
        cat = net.catalytic_species()
        if cat:
            names = ", ".join(species[i] for i in cat)
            if strict:
                raise NetworkError(f"purely catalytic species: {names}")
            net = net.with_notes(f"purely catalytic species kept as-is: {names}")
        return net

    @property
    def d(self) -> int:
        return len(self.species)

    def __len__(self) -> int:
        return len(self.reactions)

    def with_notes(self, *extra: str) -> "ReactionNetwork":
        return ReactionNetwork(self.species, self.reactions, self.kinetics, self.name, self.notes + extra)

    def index(self, name: str) -> int:
        return self.species.index(name)

    def rate(self, i: int) -> float:
        k = self.kinetics[i]
        if not isinstance(k, MassAction):
            raise NetworkError(f"reaction {i} does not have mass-action kinetics")
        return k.rate

    @property
    def is_mass_action(self) -> bool:
        return all(isinstance(k, MassAction) for k in self.kinetics)

    def stoichiometry(self) -> np.ndarray:
        """Reaction vectors as rows, shape (n_reactions, d)."""
        if not self.reactions:
            return np.zeros((0, self.d), dtype=np.int64)
        return np.array([reaction_vector(r, self.d) for r in self.reactions], dtype=np.int64)

    def reactant_matrix(self) -> np.ndarray:
        if not self.reactions:
            return np.zeros((0, self.d), dtype=np.int64)
        return np.array([r.reactant.dense(self.d) for r in self.reactions], dtype=np.int64)

    def catalytic_species(self) -> list[int]:
        """Species present in some reaction but never changed by any."""
        used = set()
        for r in self.reactions:
            used |= r.reactant.support | r.product.support
        if not used:
            return []
        N = self.stoichiometry()
        return sorted(i for i in used if not N[:, i].any())

    def subnetwork(self, indices: Sequence[int], name: str = "") -> "ReactionNetwork":
        indices = list(indices)
        for i in indices:
            if not 0 <= i < len(self.reactions):
                raise IndexError(f"reaction index {i} out of range")
        return ReactionNetwork(
            self.species,
            tuple(self.reactions[i] for i in indices),
            tuple(self.kinetics[i] for i in indices),
            name or self.name,
        )

    def reindexed(self, species: Sequence[str]) -> "ReactionNetwork":
        """Express the network over a larger species list (names must be a superset)."""
        species = tuple(species)
        pos = [species.index(s) for s in self.species]

        def remap(cx: Complex) -> Complex:
            return Complex.from_mapping({pos[i]: c for i, c in cx.terms})

        rx = tuple(Reaction(remap(r.reactant), remap(r.product)) for r in self.reactions)
        return ReactionNetwork(species, rx, self.kinetics, self.name, self.notes)

    def reaction_index(self, reaction: Reaction) -> int:
        return self.reactions.index(reaction)


def _sum_kinetics(a: Kinetics, b: Kinetics) -> Kinetics:
    if isinstance(a, MassAction) and isinstance(b, MassAction):
        return MassAction(a.rate + b.rate)
    raise NetworkError("cannot sum propensities of different kinetics variants")


def propensity(network: ReactionNetwork, reaction_index: int, state: Sequence[int]) -> float:
    """Propensity of one reaction at ``state``; zero unless ``state >= reactant``."""
    if not 0 <= reaction_index < len(network.reactions):
        raise IndexError(f"reaction index {reaction_index} out of range")
    if len(state) != network.d:
        raise ValueError(f"state has dimension {len(state)}, network has {network.d} species")
    y = network.reactions[reaction_index].reactant
    if any(state[i] < c for i, c in y.terms):
        return 0.0
    k = network.kinetics[reaction_index]
    if isinstance(k, MassAction):
        return k.rate * falling_factorial(state, y)
    return k.value(tuple(int(s) for s in state))


def reaction_vector(reaction: Reaction, d: int) -> np.ndarray:
    return reaction.product.dense(d) - reaction.reactant.dense(d)


def molecularity(network: ReactionNetwork) -> int:
    if not network.reactions:
        raise NetworkError("molecularity of an empty network is undefined")
    return max(r.molecularity for r in network.reactions)


def is_first_order(network: ReactionNetwork) -> bool:
    return all(r.molecularity <= 1 for r in network.reactions)


def join(net1: ReactionNetwork, net2: ReactionNetwork) -> ReactionNetwork:
    """Joint of two systems: union of reactions, shared reactions sum propensities.

    Species are merged by name, keeping the order of ``net1`` followed by
    new species of ``net2``.
    """
    species = list(net1.species) + [s for s in net2.species if s not in net1.species]
    a, b = net1.reindexed(species), net2.reindexed(species)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ReactionNetwork.build(
            species,
            a.reactions + b.reactions,
            a.kinetics + b.kinetics,
            name=net1.name or net2.name,
        )


def format_complex(cx: Complex, species: Sequence[str]) -> str:
    if cx.is_zero:
        return "0"
    return " + ".join(species[i] if c == 1 else f"{c}{species[i]}" for i, c in cx.terms)


def format_reaction(r: Reaction, species: Sequence[str]) -> str:
    return f"{format_complex(r.reactant, species)} -> {format_complex(r.product, species)}"
