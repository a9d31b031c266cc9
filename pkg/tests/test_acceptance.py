"""Acceptance criteria, one test each, at the stated tolerances.

Each test prints a single ``CRITERION n: PASS|FAIL`` line. Run directly
(``python3 tests/test_acceptance.py``) for just the summary lines.
"""

import itertools
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import sympy

sys.path.insert(0, str(Path(__file__).parent))

from conftest import load  # noqa: E402

from crn_certify import endotactic as en  # noqa: E402
from crn_certify import graph, linalg, sim  # noqa: E402
from crn_certify import stability as stab  # noqa: E402
from crn_certify import statespace as ss  # noqa: E402
from crn_certify.model import Complex, Reaction, ReactionNetwork, propensity  # noqa: E402
from crn_certify.parser import parse  # noqa: E402

RESULTS: dict[int, tuple[bool, str]] = {}


def report(n: int, ok: bool, detail: str, capsys=None) -> None:
    RESULTS[n] = (ok, detail)
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} | {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


def bifurcation(k11, k21, k12, k22) -> ReactionNetwork:
    return parse(
        "species: S1, S2\n"
        f"S2 -> 0 : {k22}\nS2 -> S1 + S2 : {k12}\n0 -> S1 : 1\n0 -> S2 : 1\n"
        f"S1 -> 0 : {k11}\nS1 -> S1 + S2 : {k21}\n"
    )


def random_network(rng: np.random.Generator, first_order: bool, max_d: int = 3) -> ReactionNetwork:
    d = int(rng.integers(1, max_d + 1))
    reactions = []
    for _ in range(int(rng.integers(1, 7))):
        if first_order:
            src = int(rng.integers(-1, d))
            y = Complex() if src < 0 else Complex.unit(src)
        else:
            y = Complex.from_dense(rng.integers(0, 3, size=d))
        z = Complex.from_dense(rng.integers(0, 3, size=d))
        if y != z and Reaction(y, z) not in reactions:
            reactions.append(Reaction(y, z))
    if not reactions:
        reactions.append(Reaction(Complex(), Complex.unit(0)))
    rates = rng.choice([0.5, 1.0, 2.0], size=len(reactions)).tolist()
    return ReactionNetwork.build([f"S{i + 1}" for i in range(d)], reactions, rates)


def random_metzler(rng: np.random.Generator) -> list[list[Fraction]]:
    n = int(rng.integers(1, 7))
    return [
        [Fraction(int(rng.integers(-16, 17)) if i == j else int(rng.integers(0, 17)), int(rng.integers(1, 9)))
         for j in range(n)]
        for i in range(n)
    ]


def test_criterion_1_bifurcation_threshold(capsys):
    t0 = time.perf_counter()
    mismatches = 0
    for k in itertools.product([0.5, 1, 2], repeat=4):
        A = stab.net_flow(bifurcation(*k)).A
        mismatches += stab.is_hurwitz(A) != (k[0] * k[3] > k[1] * k[2])
    dt = time.perf_counter() - t0
    report(1, mismatches == 0 and dt < 1.0, f"81 networks, {mismatches} mismatches, {dt:.3f} s", capsys)


def test_criterion_2_endotactic_corpus(capsys):
    yes = {
        "cycle": load("cycle"),
        "birth_death": load("birth_death"),
        "copies core": load("copies").subnetwork([0, 1, 2]),
        "directional core": load("directional"),
    }
    no = {
        "bifurcation": bifurcation(1, 1, 1, 1),
        "pure inflow": parse("species: S1, S2\n0 -> S1 + S2 : 1"),
    }
    wrong = [k for k, n in yes.items() if not en.is_endotactic_first_order(n)]
    wrong += [k for k, n in no.items() if en.is_endotactic_first_order(n)]
    report(2, not wrong, f"{len(yes)} yes + {len(no)} no, mismatches: {wrong or 'none'}", capsys)


def test_criterion_3_cycle_lyapunov_vector(capsys):
    net = load("cycle")
    A = stab.net_flow(net).A
    F = linalg.to_fractions(A.tolist())
    A1 = [sum(row) for row in F]
    exact_ok = A1 == [0, -1]
    violated = stab.verify_drift_linear(net, [1, 1]).violated
    v0 = stab.find_lyapunov_vector(A)
    strict = v0 is not None and bool((A @ v0 < -1e-9).all())
    cert = stab.verify_drift_linear(net, v0).certified if v0 is not None else False
    ok = exact_ok and violated and strict and cert
    report(3, ok, f"A1={A1}, v=1 violated={violated}, v0={None if v0 is None else v0.tolist()}, "
                  f"A v0<0={strict}, certified={cert}", capsys)


def test_criterion_4_essentialness(capsys):
    t0 = time.perf_counter()
    parts = {}
    parts["death branch no"] = ss.essential_verdict(load("death_branch"), ss.Box(10, 3)).status == "no"
    so = load("second_order")
    dec = ss.classes(so, ss.Box(10, 2))
    members = dec.member_states(dec.class_of((0, 1)))
    parts["(0,1) closed singleton"] = dec.status_of((0, 1)) == ss.CLOSED and members == [(0, 1)]
    corpus = ["cycle", "birth_death", "chain", "directional"]
    parts["endotactic corpus yes"] = all(
        ss.essential_verdict(load(n), ss.Box(cap, load(n).d)).status == "yes" for n in corpus for cap in (10, 20)
    )
    dt = time.perf_counter() - t0
    ok = all(parts.values()) and dt < 30
    detail = ", ".join(f"{k}: {v}" for k, v in parts.items())
    detail += f", (0,1) status={dec.status_of((0, 1))}, {dt:.2f} s"
    report(4, ok, detail, capsys)


def test_criterion_5_embedding(capsys):
    rng = np.random.default_rng(5)
    holds = 0
    for _ in range(20):
        net = random_network(rng, first_order=True)
        mono = en.monomerize(net).network
        holds += ss.check_embedding(net, mono, ss.Box(8, net.d), sample_pairs=200).holds
    inflow = parse("species: S1, S2\n0 -> S1 + S2 : 1")
    back = ss.check_embedding(en.monomerize(inflow).network, inflow, ss.Box(8, 2))
    ok = holds == 20 and not back.holds and back.counterexample == ((0, 0), (1, 0))
    report(5, ok, f"{holds}/20 embeddings hold, reverse counterexample {back.counterexample}", capsys)


def test_criterion_6_drift_certificates(capsys):
    parts = {}
    vs = stab.verify_drift_sub(load("virtual_source"), [0, 1, 2])
    parts["virtual source zero excess"] = vs.certified and vs.excess_polynomial == 0
    cp = stab.verify_drift_sub(load("copies"), [0, 1, 2])
    parts["copies"] = cp.certified and np.isfinite(cp.certificate.exceptional_radius)
    tc = stab.verify_drift_sub(load("three_copies"), [0, 1, 2], [2, 1])
    parts["3copies"] = tc.certified and np.isfinite(tc.certificate.exceptional_radius)
    net = load("open")
    v = np.array([2.0, 1.0, 4.0, 2.0])
    states = ss.Box(15, 4).all_states()
    D = stab.drift_many(net, v, states)
    bad = int((D > 5 - 0.25 * (states @ v) + 1e-9).sum())
    parts["open bound on {0..15}^4"] = bad == 0
    swap = load("swap")
    x1, x2 = stab.state_symbols(swap)
    k = stab.rate_symbols(swap)
    expect = -k[5] * x1 * (x1 - 1) + k[3] * x1 - k[2] * x2 + k[0]
    parts["swap polynomial"] = sympy.expand(stab.drift_polynomial(swap, [1, 1], symbolic_rates=True) - expect) == 0
    ok = all(parts.values())
    detail = ", ".join(f"{k}: {v}" for k, v in parts.items())
    detail += f", open: {bad} grid violations, drift(0)={D[0]:g}"
    report(6, ok, detail, capsys)


def test_criterion_7_product_poisson(capsys):
    t0 = time.perf_counter()
    net = load("chain")
    f = stab.net_flow(net)
    c = np.linalg.solve(f.A.T, -f.b)
    box = ss.Box(25, 2)
    d = sim.truncated_stationary(net, box)
    tv = sim.tv_distance(d, sim.poisson_product(c, box))
    res = d.diagnostics["residual"]
    dt = time.perf_counter() - t0
    ok = np.allclose(c, [1, 1]) and tv < 1e-4 and res < 1e-8 and dt < 10
    report(7, ok, f"c={c.tolist()}, TV={tv:.2e}, residual={res:.2e}, {dt:.2f} s", capsys)


def test_criterion_8_decay_rate(capsys):
    net = load("birth_death")
    box = ss.Box(30, 1)
    gap = sim.spectral_gap(net, box)
    rate, diag = sim.exp_rate_estimate(net, (8,), box, np.linspace(0, 8, 33), replicas=256, seed=0)
    ok = -1.3 <= rate <= -0.7 and diag["r_squared"] > 0.9
    report(8, ok, f"slope={rate:.3f}, R2={diag['r_squared']:.3f}, oracle gap={gap:.6f}, "
                  f"window={[round(w, 3) for w in diag['window']]}", capsys)


def test_criterion_9_property_suites(capsys):
    rng = np.random.default_rng(9)
    parts = {}
    ok_a = True
    for _ in range(30):
        net = random_network(rng, first_order=False)
        seed = int(rng.integers(0, 2**31))
        a = sim.ssa_run(net, (2,) * net.d, 5.0, seed, event_cap=2000)
        b = sim.ssa_run(net, (2,) * net.d, 5.0, seed, event_cap=2000)
        ok_a &= a.to_csv() == b.to_csv()
    parts["a seed determinism"] = ok_a
    ok_b = True
    for _ in range(50):
        net = random_network(rng, first_order=False)
        for x in itertools.product(range(4), repeat=net.d):
            for i, r in enumerate(net.reactions):
                ok_b &= (propensity(net, i, x) > 0) == all(x[s] >= c for s, c in r.reactant.terms)
    parts["b genericity"] = ok_b
    parts["c deficiency >= 0"] = all(
        graph.summarize(random_network(rng, first_order=False, max_d=4)).deficiency >= 0 for _ in range(300)
    )
    parts["d Hurwitz routes agree (1000)"] = all(
        stab.hurwitz_by_minors(A) == stab.hurwitz_by_feasibility(A)
        for A in (random_metzler(rng) for _ in range(1000))
    )
    parts["e K|L = J = supp C0"] = all(
        en.jkl_sets(load(n)).holds for n in ["cycle", "birth_death", "chain", "directional"]
    )
    ok = all(parts.values())
    report(9, ok, ", ".join(f"{k}: {v}" for k, v in parts.items()), capsys)


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            t(None)
        except AssertionError:
            failed += 1
    print(f"{len(tests) - failed}/{len(tests)} criteria pass")
