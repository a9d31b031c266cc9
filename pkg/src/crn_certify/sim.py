"""Gillespie simulation, truncated stationary laws and decay diagnostics."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg
from scipy.stats import binom, poisson

from .model import MassAction, ReactionNetwork, propensity
from .statespace import Box, LatticeGraph, classes

DEFAULT_EVENT_CAP = 10_000_000
DENSE_LIMIT = 50_000

COMPLETED, ABSORBED, EVENT_CAP = "completed", "absorbed", "event_cap_reached"


def replica_rng(seed: int, replica: int = 0) -> np.random.Generator:
    """Counter-based stream keyed by (seed, replica); independent of run order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(replica)])))


@dataclass
class SimulationTrace:
    species: tuple[str, ...]
    x0: tuple[int, ...]
    times: np.ndarray
    reactions: np.ndarray
    t_final: float
    termination: str
    deltas: np.ndarray = field(repr=False)

    @property
    def n_events(self) -> int:
        return len(self.times)

    def states(self) -> np.ndarray:
        """State after each event, with the initial state as row 0."""
        steps = self.deltas[self.reactions] if self.n_events else np.zeros((0, len(self.x0)), dtype=np.int64)
        return np.vstack([np.array(self.x0, dtype=np.int64), np.array(self.x0) + np.cumsum(steps, axis=0)])

    @property
    def final_state(self) -> tuple[int, ...]:
        return tuple(int(s) for s in self.states()[-1])

    def state_at(self, times: Sequence[float]) -> np.ndarray:
        idx = np.searchsorted(self.times, np.asarray(times, dtype=float), side="right")
        return self.states()[idx]

    def occupancy(self, state: Sequence[int]) -> float:
        """Fraction of ``[0, t_final]`` spent in ``state``."""
        if self.t_final <= 0:
            return 0.0
        edges = np.concatenate([[0.0], self.times, [self.t_final]])
        hold = np.diff(edges)
        hit = (self.states() == np.asarray(state)).all(axis=1)
        return float(hold[hit].sum() / self.t_final)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("time,reaction," + ",".join(self.species) + "\n")
        states = self.states()
        buf.write("0,," + ",".join(str(int(s)) for s in states[0]) + "\n")
        for t, r, x in zip(self.times.tolist(), self.reactions.tolist(), states[1:].tolist()):
            buf.write(f"{t:.17g},{r}," + ",".join(str(s) for s in x) + "\n")
        return buf.getvalue()


class _Propensities:
    """Fast propensity evaluation for the SSA inner loop."""

    def __init__(self, network: ReactionNetwork):
        self.network = network
        self.terms = [r.reactant.terms for r in network.reactions]
        self.rates = [k.rate if isinstance(k, MassAction) else None for k in network.kinetics]

    def __call__(self, x: list[int]) -> list[float]:
        out = []
        for i, (terms, k) in enumerate(zip(self.terms, self.rates)):
            if k is None:
                out.append(propensity(self.network, i, x))
                continue
            a = k
            for s, c in terms:
                xs = x[s]
                if xs < c:
                    a = 0.0
                    break
                for ell in range(c):
                    a *= xs - ell
            out.append(a)
        return out


def ssa_run(
    network: ReactionNetwork,
    x0: Sequence[int],
    t_end: float,
    seed: int,
    event_cap: int = DEFAULT_EVENT_CAP,
    replica: int = 0,
) -> SimulationTrace:
    """Gillespie direct method up to ``t_end``, absorption, or ``event_cap`` events."""
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if len(x0) != network.d or any(int(s) < 0 for s in x0):
        raise ValueError(f"invalid initial state {tuple(x0)}")
    rng = replica_rng(seed, replica)
    props = _Propensities(network)
    deltas = network.stoichiometry() if network.reactions else np.zeros((0, network.d), dtype=np.int64)
    steps = deltas.tolist()
    x = [int(s) for s in x0]
    t = 0.0
    times: list[float] = []
    rxns: list[int] = []
    termination = COMPLETED
    while True:
        a = props(x)
        total = sum(a)
        if total <= 0:
            termination = ABSORBED
            break
        if len(times) >= event_cap:
            termination = EVENT_CAP
            break
        t_next = t + rng.exponential(1.0 / total)
        if t_next > t_end:
            break
        u = rng.random() * total
        acc, k = 0.0, len(a) - 1
        for i, ai in enumerate(a):
            acc += ai
            if u < acc:
                k = i
                break
        while a[k] == 0:  # guard against rounding landing on a disabled reaction
            k -= 1
        t = t_next
        times.append(t)
        rxns.append(k)
        for s, dv in enumerate(steps[k]):
            x[s] += dv
    t_final = t_end if termination == COMPLETED else t
    return SimulationTrace(
        network.species, tuple(int(s) for s in x0), np.array(times, dtype=float),
        np.array(rxns, dtype=np.int64), t_final, termination, deltas,
    )


@dataclass
class Distribution:
    box: Box
    p: np.ndarray
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.p.shape != (self.box.size,):
            raise ValueError("probability vector does not match the box")
        if (self.p < -1e-12).any() or abs(self.p.sum() - 1) > 1e-9:
            raise ValueError("not a probability vector")

    def prob(self, state: Sequence[int]) -> float:
        return float(self.p[self.box.index(state)])

    def mean(self) -> np.ndarray:
        return self.p @ self.box.all_states()

    def marginal(self, i: int) -> np.ndarray:
        return self.p.reshape(self.box.shape).sum(axis=tuple(j for j in range(self.box.d) if j != i))

    def to_csv(self, species: Sequence[str] | None = None) -> str:
        names = list(species) if species else [f"x{i}" for i in range(self.box.d)]
        buf = io.StringIO()
        buf.write(",".join(names) + ",probability\n")
        for x, q in zip(self.box.all_states().tolist(), self.p.tolist()):
            buf.write(",".join(str(s) for s in x) + f",{q:.17g}\n")
        return buf.getvalue()


def generator(network: ReactionNetwork, box: Box, lattice: LatticeGraph | None = None) -> sparse.csr_matrix:
    """Rate matrix on the box with box-exiting transitions dropped."""
    lattice = lattice or LatticeGraph(network, box)
    rates = np.zeros(len(lattice.src))
    states = lattice.states
    for k in range(len(network.reactions)):
        sel = lattice.rxn == k
        if sel.any():
            rates[sel] = _rates_at(network, k, states[lattice.src[sel]])
    n = box.size
    Q = sparse.csr_matrix((rates, (lattice.src, lattice.dst)), shape=(n, n))
    Q = Q - sparse.diags(np.asarray(Q.sum(axis=1)).ravel())
    return Q.tocsr()


def _rates_at(network: ReactionNetwork, k: int, states: np.ndarray) -> np.ndarray:
    kin = network.kinetics[k]
    if isinstance(kin, MassAction):
        out = np.full(len(states), kin.rate)
        for s, c in network.reactions[k].reactant.terms:
            for ell in range(c):
                out *= states[:, s] - ell
        return out
    return np.array([propensity(network, k, tuple(x)) for x in states.tolist()])


def _solve_stationary(Q: sparse.csr_matrix) -> np.ndarray:
    n = Q.shape[0]
    if n == 1:
        return np.ones(1)
    if n <= DENSE_LIMIT:
        M = Q.T.tolil()
        M[n - 1, :] = np.ones(n)
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        pi = splinalg.spsolve(M.tocsc(), rhs)
        if not np.all(np.isfinite(pi)):
            raise np.linalg.LinAlgError("singular stationary system")
        return pi
    lam = float(-Q.diagonal().min()) * 1.05
    P = (sparse.identity(n, format="csr") + Q / lam).T.tocsr()
    pi = np.full(n, 1.0 / n)
    for _ in range(200_000):
        nxt = P @ pi
        nxt /= nxt.sum()
        if np.abs(nxt - pi).max() < 1e-14:
            pi = nxt
            break
        pi = nxt
    return pi


def truncated_stationary(
    network: ReactionNetwork, box: Box, anchor: Sequence[int] | None = None
) -> Distribution:
    """Stationary law of the box-truncated chain on the class of ``anchor`` (default origin).

    The class must not leak to other classes inside the box. Reported
    diagnostics: residual ``|pi Q|_inf`` and the mass on states with a
    box-exiting transition (truncation proxy).
    """
    anchor = tuple(anchor) if anchor is not None else (0,) * network.d
    lattice = LatticeGraph(network, box)
    dec = classes(network, box, lattice)
    k = dec.class_of(anchor)
    if dec.leaks_inside[k]:
        raise ValueError(f"class of {anchor} is not closed inside the box")
    members = dec.members(k)
    Q = generator(network, box, lattice)
    Qc = Q[members][:, members]
    pi_c = _solve_stationary(Qc)
    pi_c = np.clip(pi_c, 0.0, None)
    pi_c /= pi_c.sum()
    residual = float(np.abs(Qc.T @ pi_c).max())
    pi = np.zeros(box.size)
    pi[members] = pi_c
    diag = {
        "residual": residual,
        "boundary_mass": float(pi[lattice.exits].sum()),
        "class_size": int(len(members)),
        "anchor": list(anchor),
    }
    return Distribution(box, pi, diag)


def poisson_product(mean: Sequence[float], box: Box) -> Distribution:
    mean = np.asarray(mean, dtype=float)
    if len(mean) != box.d or not (mean > 0).all():
        raise ValueError("mean must be positive with one entry per box dimension")
    p = np.ones(1)
    ks = np.arange(box.cap + 1)
    for m in mean:
        marg = poisson.pmf(ks, m)
        p = np.outer(p, marg / marg.sum()).ravel()
    return Distribution(box, p)


def tv_distance(p: Distribution, q: Distribution) -> float:
    if p.box != q.box:
        raise ValueError("distributions live on different boxes")
    return float(0.5 * np.abs(p.p - q.p).sum())


def mc_noise_floor(pi: np.ndarray, n: int) -> float:
    """Expected TV between ``pi`` and an n-sample empirical law.

    Sums the exact binomial mean absolute deviation of every cell.
    """
    k = np.arange(n + 1)
    total = 0.0
    for p in pi[pi > 0]:
        total += float((binom.pmf(k, n, p) * np.abs(k - n * p)).sum())
    return 0.5 * total / n


def spectral_gap(network: ReactionNetwork, box: Box, anchor: Sequence[int] | None = None) -> float:
    """Smallest non-zero |Re eigenvalue| of the truncated generator on the anchor class."""
    anchor = tuple(anchor) if anchor is not None else (0,) * network.d
    lattice = LatticeGraph(network, box)
    dec = classes(network, box, lattice)
    members = dec.members(dec.class_of(anchor))
    Q = generator(network, box, lattice)[members][:, members].toarray()
    ev = np.sort(np.abs(np.linalg.eigvals(Q).real))
    return float(ev[1]) if len(ev) > 1 else 0.0


def exp_rate_estimate(
    network: ReactionNetwork,
    x0: Sequence[int],
    box: Box,
    time_grid: Sequence[float],
    replicas: int = 256,
    seed: int = 0,
    window: tuple[float, float] = (0.02, 0.5),
    event_cap: int = DEFAULT_EVENT_CAP,
) -> tuple[float, dict[str, Any]]:
    """Slope of log TV(law at t, pi) over the part of the grid inside the window.

    The lower window edge is raised to three times the Monte-Carlo noise floor
    for the given replica count, and only the first contiguous stretch of
    grid points inside the window is fitted. Replicas leaving the box count as mass
    outside the box. Raises ValueError when fewer than three grid points
    fall inside the window.
    """
    times = np.asarray(time_grid, dtype=float)
    pi = truncated_stationary(network, box)
    floor = mc_noise_floor(pi.p, replicas)
    lo, hi = max(window[0], 3 * floor), window[1]
    counts = np.zeros((len(times), box.size))
    escaped = np.zeros(len(times))
    for r in range(replicas):
        tr = ssa_run(network, x0, float(times.max()), seed, event_cap, replica=r)
        for j, x in enumerate(tr.state_at(times)):
            if box.contains(x):
                counts[j, box.index(x)] += 1
            else:
                escaped[j] += 1
    emp = counts / replicas
    tv = 0.5 * (np.abs(emp - pi.p).sum(axis=1) + escaped / replicas)
    # first contiguous stretch inside the window; later re-entries are noise
    inside = (tv >= lo) & (tv <= hi)
    sel = np.zeros(len(tv), dtype=bool)
    start = int(np.argmax(inside)) if inside.any() else len(tv)
    for j in range(start, len(tv)):
        if not inside[j]:
            break
        sel[j] = True
    diag: dict[str, Any] = {
        "times": times.tolist(),
        "tv": tv.tolist(),
        "window": [lo, hi],
        "noise_floor": floor,
        "escaped_fraction": float(escaped[-1] / replicas),
        "boundary_mass": pi.diagnostics["boundary_mass"],
        "replicas": replicas,
        "seed": seed,
    }
    if sel.sum() < 3:
        raise ValueError(f"fit window {lo:.3g}..{hi:.3g} holds {int(sel.sum())} grid points; need 3")
    t, y = times[sel], np.log(tv[sel])
    slope, icpt = np.polyfit(t, y, 1)
    pred = slope * t + icpt
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    diag["r_squared"] = 1 - ss_res / ss_tot if ss_tot > 0 else 1.0
    diag["fit_points"] = int(sel.sum())
    return float(slope), diag


def replay_check(network: ReactionNetwork, trace: SimulationTrace) -> bool:
    """Every event was enabled at its pre-event state and times increase strictly."""
    if trace.n_events and not (np.diff(trace.times) > 0).all():
        return False
    states = trace.states()
    for x, k in zip(states[:-1].tolist(), trace.reactions.tolist()):
        if propensity(network, k, x) <= 0:
            return False
    return True

