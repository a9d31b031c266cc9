"""Net flow matrices, Hurwitz tests, Lyapunov vectors and drift checks.

The linear certificate for first-order networks is exact. For higher
order the drift is split into a first-order core and an excess; the excess
is either settled exactly (every extra reaction decreasing, or decreasing
along ``v``, or the excess vanishing identically) or checked on a grid plus
rays, in which case the certificate is labeled ``grid+ray``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np
import sympy

from . import graph, linalg
from .endotactic import InternalConsistencyError, is_endotactic_first_order
from .model import (
    MassAction,
    NetworkError,
    ReactionNetwork,
    is_first_order,
    propensity,
    reaction_vector,
)
from .statespace import Box

SLACK = 0.5
STRICT_TOL = 1e-9
SUBLINEAR_TOL = 1e-6
N_RANDOM_RAYS = 64
RAY_REACH = 8

CERTIFIED, VIOLATED, INCONCLUSIVE = "certified", "violated", "inconclusive"


@dataclass(frozen=True)
class NetFlow:
    """``A[i, j]`` sums ``rate * (y'_j - y_j)`` over reactions out of ``e_i``;
    ``b[i]`` sums ``rate * y'_i`` over reactions out of 0."""

    A: np.ndarray
    b: np.ndarray
    species: tuple[int, ...]

    def is_metzler(self) -> bool:
        return is_metzler(self.A)


def is_metzler(A) -> bool:
    A = np.asarray(A, dtype=float)
    off = A[~np.eye(len(A), dtype=bool)]
    return bool((off >= 0).all())


def net_flow(network: ReactionNetwork, species_subset: Sequence[int] | None = None) -> NetFlow:
    sub = tuple(range(network.d)) if species_subset is None else tuple(species_subset)
    pos = {s: k for k, s in enumerate(sub)}
    n = len(sub)
    A = np.zeros((n, n))
    b = np.zeros(n)
    for i, r in enumerate(network.reactions):
        if r.molecularity >= 2:
            raise NetworkError("net flow matrix needs a first-order network")
        if not isinstance(network.kinetics[i], MassAction):
            raise NetworkError("net flow matrix needs mass-action kinetics")
        k = network.rate(i)
        outside = [s for s in r.reactant.support | r.product.support if s not in pos]
        if outside:
            raise NetworkError(f"reaction {i} involves species {outside} outside the subset")
        if r.reactant.is_zero:
            for s, c in r.product.terms:
                b[pos[s]] += k * c
        else:
            (src, _), = r.reactant.terms
            row = pos[src]
            A[row, row] -= k
            for s, c in r.product.terms:
                A[row, pos[s]] += k * c
    return NetFlow(A, b, sub)


def _square(A) -> list[list[Fraction]]:
    F = linalg.to_fractions(np.asarray(A, dtype=object).tolist() if hasattr(A, "shape") else A)
    if any(len(row) != len(F) for row in F):
        raise ValueError("matrix must be square")
    return F


def hurwitz_by_minors(A) -> bool:
    """M-matrix test: every leading principal minor of -A is positive."""
    F = _square(A)
    return all(m > 0 for m in linalg.leading_principal_minors([[-x for x in row] for row in F]))


def hurwitz_by_feasibility(A) -> bool:
    """Metzler A is Hurwitz iff some v > 0 has A v < 0."""
    F = _square(A)
    return linalg.strict_lyapunov_vector(F) is not None


def is_hurwitz(A) -> bool:
    """Hurwitz stability of a Metzler matrix, decided two ways that must agree."""
    F = _square(A)
    if not F:
        return True
    if any(F[i][j] < 0 for i in range(len(F)) for j in range(len(F)) if i != j):
        raise ValueError("matrix is not Metzler")
    a = hurwitz_by_minors(F)
    b = hurwitz_by_feasibility(F)
    if a != b:
        raise InternalConsistencyError(f"Hurwitz routes disagree: minors={a}, feasibility={b}")
    return a


def _eps_vector(F: list[list[Fraction]], v0: list[Fraction]) -> list[Fraction] | None:
    # (I - eps A^-1) 1 with I the all-ones matrix equals n 1 + eps v0
    n = len(F)
    eps = Fraction(1)
    for _ in range(64):
        w = [n + eps * x for x in v0]
        Aw = [sum(a * x for a, x in zip(row, w)) for row in F]
        if all(x > 0 for x in w) and all(x < 0 for x in Aw):
            return w
        eps /= 2
    return None


def find_lyapunov_vector(A, exact: bool = False):
    """``v0 = -A^-1 1`` for Hurwitz Metzler A, else None.

    When ``A 1 <= 0`` the all-ones-matrix construction is run as well and
    must also yield a valid vector.
    """
    F = _square(A)
    if not is_hurwitz(F):
        return None
    n = len(F)
    try:
        v0 = linalg.solve(F, [-1] * n)
    except ZeroDivisionError as exc:
        raise InternalConsistencyError("Hurwitz matrix reported singular") from exc
    if not all(x > 0 for x in v0):
        raise InternalConsistencyError(f"-A^-1 1 is not positive: {v0}")
    if all(sum(row) <= 0 for row in F) and _eps_vector(F, v0) is None:
        raise InternalConsistencyError("epsilon construction failed although A 1 <= 0")
    return v0 if exact else np.array([float(x) for x in v0])


def drift(network: ReactionNetwork, v: Sequence[float], x: Sequence[int]) -> float:
    if len(v) != network.d or len(x) != network.d:
        raise ValueError("dimension mismatch")
    total = 0.0
    for i, r in enumerate(network.reactions):
        lam = propensity(network, i, x)
        if lam:
            total += lam * float(np.dot(v, reaction_vector(r, network.d)))
    return total


def _propensities(network: ReactionNetwork, idx: int, states: np.ndarray) -> np.ndarray:
    r = network.reactions[idx]
    k = network.kinetics[idx]
    if isinstance(k, MassAction):
        out = np.full(len(states), k.rate)
        for s, c in r.reactant.terms:
            col = states[:, s].astype(float)
            for ell in range(c):
                out *= np.maximum(col - ell, 0.0)
        return out
    return np.array([propensity(network, idx, tuple(x)) for x in states.tolist()])


def drift_many(
    network: ReactionNetwork, v: Sequence[float], states: np.ndarray, indices: Sequence[int] | None = None
) -> np.ndarray:
    """Drift of ``V = v.x`` at each row of ``states``, optionally over a subset of reactions."""
    states = np.asarray(states, dtype=np.int64).reshape(-1, network.d)
    v = np.asarray(v, dtype=float)
    out = np.zeros(len(states))
    for i in range(len(network.reactions)) if indices is None else indices:
        step = float(v @ reaction_vector(network.reactions[i], network.d))
        if step:
            out += step * _propensities(network, i, states)
    return out


def state_symbols(network: ReactionNetwork) -> tuple[sympy.Symbol, ...]:
    return tuple(sympy.Symbol(s, nonnegative=True, integer=True) for s in network.species)


def rate_symbols(network: ReactionNetwork) -> tuple[sympy.Symbol, ...]:
    return tuple(sympy.Symbol(f"kappa_{i}", positive=True) for i in range(len(network.reactions)))


def _rational(x) -> sympy.Rational:
    return sympy.Rational(Fraction(x).numerator, Fraction(x).denominator)


def drift_polynomial(
    network: ReactionNetwork,
    v: Sequence,
    indices: Sequence[int] | None = None,
    symbolic_rates: bool = False,
) -> sympy.Expr:
    """Expanded drift polynomial in the species symbols (mass action only).

    Rates and ``v`` enter as exact rationals; with ``symbolic_rates`` the
    rate of reaction ``i`` is the symbol ``kappa_i``.
    """
    xs = state_symbols(network)
    ks = rate_symbols(network)
    expr = sympy.Integer(0)
    for i in range(len(network.reactions)) if indices is None else indices:
        r = network.reactions[i]
        if not isinstance(network.kinetics[i], MassAction):
            raise NetworkError("symbolic drift needs mass-action kinetics")
        step = sum((_rational(vj) * int(dj) for vj, dj in zip(v, reaction_vector(r, network.d))), sympy.Integer(0))
        if step == 0:
            continue
        lam = ks[i] if symbolic_rates else _rational(network.rate(i))
        for s, c in r.reactant.terms:
            for ell in range(c):
                lam *= xs[s] - ell
        expr += lam * step
    return sympy.expand(expr)


@dataclass(frozen=True)
class LyapunovCertificate:
    """``drift(x) <= -margin * v.x`` whenever ``v.x > exceptional_radius + inert_weight * m(x)``.

    ``m(x)`` is the ``v``-mass on ``inert_species``: species outside the
    zero component whose counts the core does not pull down. With no inert
    species the guarantee is the usual one outside a finite set.
    """

    v: tuple[float, ...]
    margin: float
    exceptional_radius: float
    method: str
    inert_species: tuple[int, ...] = ()
    inert_weight: float = 0.0

    def __post_init__(self):
        if not all(x > 0 for x in self.v):
            raise ValueError("certificate vector must be positive")
        if not self.margin > 0:
            raise ValueError("certificate margin must be positive")
        if self.exceptional_radius < 0:
            raise ValueError("exceptional radius must be non-negative")

    @property
    def exact(self) -> bool:
        return self.method != "grid+ray"

    def covers(self, x: Sequence[int]) -> bool:
        """Whether the certificate asserts the drift bound at ``x``."""
        V = float(np.dot(self.v, x))
        m = sum(self.v[i] * x[i] for i in self.inert_species)
        return V > self.exceptional_radius + self.inert_weight * m


@dataclass
class DriftVerdict:
    status: str
    certificate: LyapunovCertificate | None = None
    witness_state: tuple[int, ...] | None = None
    witness_value: float | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)
    excess_polynomial: sympy.Expr | None = None
    method: str = ""

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    @property
    def violated(self) -> bool:
        return self.status == VIOLATED


def _vector(v, d: int, zero_species: Sequence[int]) -> list:
    v = list(v.tolist() if hasattr(v, "tolist") else v)
    if len(v) == len(zero_species) and len(v) != d:
        full = [1] * d
        for s, x in zip(zero_species, v):
            full[s] = x
        v = full
    if len(v) != d:
        raise ValueError(f"v has length {len(v)}, expected {d} or {len(zero_species)}")
    if not all(x > 0 for x in v):
        raise ValueError("v must be strictly positive")
    return v


def _is_exact(v) -> bool:
    return all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in v)


def _negative(values: Sequence[Fraction], exact: bool) -> list[bool]:
    return [x < 0 if exact else x < -STRICT_TOL for x in values]


def _rest_conservative(split: graph.ZeroSplit) -> bool:
    return graph.conservation_vector(split.rest) is not None if split.rest.reactions else True


def verify_drift_linear(network: ReactionNetwork, v) -> DriftVerdict:
    """Exact linear drift check for a first-order mass-action network.

    ``v`` may cover all species or only the zero component, in which case
    the remaining species get weight 1.
    """
    if not is_first_order(network):
        raise NetworkError("verify_drift_linear needs a first-order network")
    split = graph.zero_split(network)
    v = _vector(v, network.d, split.zero_species)
    exact = _is_exact(v)
    flow = net_flow(network)
    F = linalg.to_fractions(flow.A.tolist())
    vf = [Fraction(x) for x in v]
    Av = [sum(a * x for a, x in zip(row, vf)) for row in F]
    neg = _negative(Av, exact)
    zero = set(split.zero_species)
    diag = {"Av": [float(x) for x in Av], "zero_species": list(split.zero_species)}
    inert = []
    for i in range(network.d):
        if neg[i]:
            continue
        if i in zero or abs(Av[i]) > (0 if exact else STRICT_TOL):
            unit = tuple(int(j == i) for j in range(network.d))
            diag["row"] = i
            return DriftVerdict(VIOLATED, witness_state=unit, witness_value=float(Av[i]),
                                diagnostics=diag, method="linear")
        inert.append(i)
    if inert and not _rest_conservative(split):
        diag["reason"] = "species outside the zero component are not pulled down and their part is not conservative"
        return DriftVerdict(INCONCLUSIVE, diagnostics=diag, method="linear")
    core = [i for i in range(network.d) if i not in inert]
    rate = min((-Av[i] / vf[i] for i in core), default=None)
    if rate is None:
        diag["reason"] = "no species is pulled down"
        return DriftVerdict(INCONCLUSIVE, diagnostics=diag, method="linear")
    margin = (1 - SLACK) * float(rate)
    bv = float(sum(Fraction(bi) * x for bi, x in zip(flow.b.tolist(), vf)))
    cert = LyapunovCertificate(
        tuple(float(x) for x in v), margin, bv / (SLACK * margin), "linear",
        tuple(inert), 1 / SLACK if inert else 0.0,
    )
    diag["b_dot_v"] = bv
    if inert:
        diag["rest_conservative"] = True
    return DriftVerdict(CERTIFIED, cert, diagnostics=diag, method="linear")


def _digest_seed(network: ReactionNetwork) -> int:
    h = hashlib.sha256(repr([(r.reactant.terms, r.product.terms) for r in network.reactions]).encode())
    return int.from_bytes(h.digest()[:8], "big")


def sample_rays(network: ReactionNetwork, n_random: int = N_RANDOM_RAYS) -> np.ndarray:
    """Non-negative integer directions: every e_i, every 1 + e_i, then seeded random ones."""
    d = network.d
    rays = [np.eye(d, dtype=np.int64)[i] for i in range(d)]
    rays += [np.ones(d, dtype=np.int64) + np.eye(d, dtype=np.int64)[i] for i in range(d)]
    rng = np.random.default_rng(_digest_seed(network))
    while len(rays) < 2 * d + n_random:
        u = rng.integers(0, 5, size=d)
        if u.any():
            rays.append(u)
    return np.array(rays, dtype=np.int64)


def _ray_levels(grid_radius: int) -> list[int]:
    levels, L = [], grid_radius
    while L <= RAY_REACH * grid_radius:
        levels.append(L)
        L *= 2
    return levels


def _ray_points(ray: np.ndarray, levels: Sequence[int]) -> np.ndarray:
    top = int(ray.max())
    return np.array([ray * max(1, L // top) for L in levels], dtype=np.int64)


def _classify_ratios(r: np.ndarray) -> str:
    """'sublinear', 'superlinear' or 'linear' from ratios at doubling radii."""
    if r[-1] <= SUBLINEAR_TOL:
        return "sublinear"
    if len(r) >= 3 and r[-1] > 1.5 * r[-2] > 0 and r[-2] > r[-3]:
        return "superlinear"
    if len(r) >= 3 and r[-1] < 0.75 * r[-2] and r[-2] < 0.75 * r[-3]:
        return "sublinear"
    return "linear"


def _grid_states(network: ReactionNetwork, grid_radius: int) -> np.ndarray:
    box = Box(grid_radius, network.d)
    box.check_budget()
    return box.all_states()


def _heuristic(
    network: ReactionNetwork,
    v: np.ndarray,
    margin: float,
    grid_radius: int,
    extra: Sequence[int] | None,
    diag: dict,
) -> DriftVerdict | float:
    """Grid + ray stage shared by the SUB and direct checks.

    Returns the exceptional radius when the drift bound holds outside a
    grid-contained set, else a non-certified verdict.
    """
    levels = _ray_levels(grid_radius)
    if extra is not None:
        for ray in sample_rays(network):
            pts = _ray_points(ray, levels)
            E = drift_many(network, v, pts, extra)
            kind = _classify_ratios(E / pts.sum(axis=1))
            if kind == "superlinear":
                diag["ray"] = ray.tolist()
                return DriftVerdict(VIOLATED, witness_state=tuple(int(s) for s in pts[-1]),
                                    witness_value=float(E[-1]), diagnostics=diag, method="grid+ray")
            if kind != "sublinear":
                diag["ray"] = ray.tolist()
                diag["reason"] = "excess is not sublinear along a sampled ray"
                return DriftVerdict(INCONCLUSIVE, diagnostics=diag, method="grid+ray")
    for ray in sample_rays(network):
        pts = _ray_points(ray, levels)[1:]
        D = drift_many(network, v, pts)
        bad = D > -margin * (pts @ v) + STRICT_TOL
        if bad.any():
            k = int(np.argmax(bad))
            diag["ray"] = ray.tolist()
            diag["reason"] = "drift bound fails along a ray beyond the grid"
            return DriftVerdict(INCONCLUSIVE, witness_state=tuple(int(s) for s in pts[k]),
                                witness_value=float(D[k]), diagnostics=diag, method="grid+ray")
    states = _grid_states(network, grid_radius)
    D = drift_many(network, v, states)
    V = states @ v
    bad = D > -margin * V + STRICT_TOL
    diag["grid_states"] = int(len(states))
    diag["grid_violations"] = int(bad.sum())
    if bad.any() and (states[bad].max(axis=1) >= grid_radius).any():
        k = int(np.flatnonzero(bad & (states.max(axis=1) >= grid_radius))[0])
        diag["reason"] = "violation set reaches the edge of the grid"
        return DriftVerdict(INCONCLUSIVE, witness_state=tuple(int(s) for s in states[k]),
                            witness_value=float(D[k]), diagnostics=diag, method="grid+ray")
    return float(V[bad].max()) + 1 if bad.any() else 0.0


def _core_indices(network: ReactionNetwork, core) -> list[int]:
    if isinstance(core, ReactionNetwork):
        try:
            idx = [network.reactions.index(r) for r in core.reactions]
        except ValueError as exc:
            raise ValueError("core is not a sub-network of the network") from exc
    else:
        idx = [int(i) for i in core]
        if any(not 0 <= i < len(network.reactions) for i in idx):
            raise ValueError("core is not a sub-network of the network")
    if len(set(idx)) != len(idx):
        raise ValueError("core lists a reaction twice")
    return idx


def verify_drift_sub(network: ReactionNetwork, core, v=None, grid_radius: int = 20) -> DriftVerdict:
    """Drift check with a first-order endotactic core.

    ``v`` covers all species or only the core's zero component (other
    species then get weight 1); when omitted it is synthesized from the
    core's net flow matrix.
    """
    idx = _core_indices(network, core)
    core_net = network.subnetwork(idx)
    if not is_first_order(core_net):
        raise ValueError("core must be first order")
    if not is_endotactic_first_order(core_net):
        raise ValueError("core is not endotactic")
    split = graph.zero_split(core_net)
    Z = split.zero_species
    core0 = [idx[i] for i in split.zero_indices]
    flow = net_flow(network.subnetwork(core0), Z)
    if v is None:
        v0 = find_lyapunov_vector(flow.A)
        if v0 is None:
            return DriftVerdict(INCONCLUSIVE, diagnostics={"reason": "core net flow matrix is not Hurwitz"},
                                method="core")
        v = _vector(v0, network.d, Z)
    else:
        v = _vector(v, network.d, Z)
    vz = np.array([float(v[s]) for s in Z])
    Av = flow.A @ vz
    diag: dict[str, Any] = {
        "core": idx,
        "core_zero_part": core0,
        "A0v0": Av.tolist(),
        "v_outside_zero_part_is_one": all(float(v[s]) == 1.0 for s in range(network.d) if s not in Z),
    }
    if not (Av < -STRICT_TOL).all():
        diag["reason"] = "A0 v0 is not componentwise negative"
        return DriftVerdict(INCONCLUSIVE, diagnostics=diag, method="core")
    rate = float(np.min(-Av / vz))
    margin = (1 - SLACK) * rate
    extras = [i for i in range(len(network.reactions)) if i not in set(core0)]
    inert = tuple(s for s in range(network.d) if s not in Z)
    if inert:
        diag["rest_conservative"] = _rest_conservative(graph.zero_split(network))
    vf = np.array([float(x) for x in v])
    poly = None
    if network.is_mass_action:
        poly = drift_polynomial(network, v, extras)

    def certified(method: str, radius: float) -> DriftVerdict:
        cert = LyapunovCertificate(tuple(vf.tolist()), margin, radius, method, inert, 1 / SLACK if inert else 0.0)
        return DriftVerdict(CERTIFIED, cert, diagnostics=diag, excess_polynomial=poly, method=method)

    exact_radius = float(flow.b @ vz) / (SLACK * margin)
    steps = [network.reactions[i].product.dense(network.d) - network.reactions[i].reactant.dense(network.d)
             for i in extras]
    if all((s <= 0).all() for s in steps):
        return certified("decreasing", exact_radius)
    vq = [Fraction(x) for x in v]
    if all(sum((a * int(b) for a, b in zip(vq, s)), Fraction(0)) <= 0 for s in steps):
        return certified("v-decreasing", exact_radius)
    if poly is not None and poly == 0:
        return certified("zero-excess", exact_radius)
    out = _heuristic(network, vf, margin, grid_radius, extras, diag)
    if isinstance(out, DriftVerdict):
        out.excess_polynomial = poly
        return out
    return certified("grid+ray", out)


def verify_drift_direct(network: ReactionNetwork, v, grid_radius: int = 20) -> DriftVerdict:
    """Heuristic drift check of ``V = v.x`` with no core.

    The decay rate is read off the ray samples at the outermost radius,
    halved, and then checked on the grid and along every ray.
    """
    v = np.asarray([float(x) for x in v])
    if len(v) != network.d:
        raise ValueError(f"v has length {len(v)}, expected {network.d}")
    if not (v > 0).all():
        raise ValueError("v must be strictly positive")
    levels = _ray_levels(grid_radius)
    worst, diag = -np.inf, {}
    for ray in sample_rays(network):
        pts = _ray_points(ray, levels)
        r = drift_many(network, v, pts) / (pts @ v)
        if r[-1] > 0 and _classify_ratios(r) == "superlinear":
            diag["ray"] = ray.tolist()
            return DriftVerdict(VIOLATED, witness_state=tuple(int(s) for s in pts[-1]),
                                witness_value=float(r[-1] * (pts[-1] @ v)), diagnostics=diag, method="grid+ray")
        worst = max(worst, float(r[-1]))
    diag["ray_decay_rate"] = -worst
    if not worst < -STRICT_TOL:
        diag["reason"] = "drift is not eventually negative along every sampled ray"
        return DriftVerdict(INCONCLUSIVE, diagnostics=diag, method="grid+ray")
    margin = (1 - SLACK) * -worst
    out = _heuristic(network, v, margin, grid_radius, None, diag)
    if isinstance(out, DriftVerdict):
        return out
    cert = LyapunovCertificate(tuple(v.tolist()), margin, out, "grid+ray")
    return DriftVerdict(CERTIFIED, cert, diagnostics=diag, method="grid+ray")
