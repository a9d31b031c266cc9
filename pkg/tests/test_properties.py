import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from crn_certify import endotactic as en
from crn_certify import graph, sim
from crn_certify import stability as stab
from crn_certify import statespace as ss
from crn_certify.model import propensity

from strategies import metzler, networks, reversible_monomolecular

FAST = settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@FAST
@given(networks(), st.integers(0, 2**31), st.integers(0, 50))
def test_ssa_bytes_depend_only_on_seed(net, seed, replica):
    x0 = (2,) * net.d
    a = sim.ssa_run(net, x0, 5.0, seed, event_cap=2000, replica=replica)
    b = sim.ssa_run(net, x0, 5.0, seed, event_cap=2000, replica=replica)
    assert a.to_csv() == b.to_csv()
    assert sim.replay_check(net, a)


@FAST
@given(networks())
def test_propensity_generic(net):
    for x in itertools.product(range(4), repeat=net.d):
        for i, r in enumerate(net.reactions):
            dominates = all(x[s] >= c for s, c in r.reactant.terms)
            assert (propensity(net, i, x) > 0) == dominates


@settings(max_examples=300, deadline=None)
@given(networks(max_d=4, max_reactions=8))
def test_deficiency_nonnegative(net):
    s = graph.summarize(net)
    assert s.deficiency >= 0
    assert s.deficiency == s.complex_count - s.stoich_dim - s.linkage_count


@settings(max_examples=300, deadline=None)
@given(metzler())
def test_hurwitz_routes_agree(A):
    assert stab.hurwitz_by_minors(A) == stab.hurwitz_by_feasibility(A)


@settings(max_examples=300, deadline=None)
@given(metzler())
def test_hurwitz_iff_lyapunov_vector(A):
    h = stab.is_hurwitz(A)
    v = stab.find_lyapunov_vector(A)
    assert h == (v is not None)
    if v is not None:
        M = np.array([[float(x) for x in row] for row in A])
        assert (v > 1e-9).all()
        assert (M @ v < -1e-9).all()
        exact = stab.find_lyapunov_vector(A, exact=True)
        assert all(sum(a * x for a, x in zip(row, exact)) < 0 for row in A)


@settings(max_examples=200, deadline=None)
@given(metzler(), st.sampled_from([0.25, 0.5, 3, 7]))
def test_hurwitz_scale_invariant(A, alpha):
    from fractions import Fraction

    scaled = [[Fraction(alpha) * x for x in row] for row in A]
    assert stab.is_hurwitz(scaled) == stab.is_hurwitz(A)


@settings(max_examples=200, deadline=None)
@given(metzler())
def test_hurwitz_matches_eigenvalues_when_clear(A):
    M = np.array([[float(x) for x in row] for row in A])
    top = np.linalg.eigvals(M).real.max()
    assume(abs(top) > 1e-6)
    assert stab.is_hurwitz(A) == (top < 0)


@FAST
@given(networks(max_d=3, max_reactions=5))
def test_symbolic_drift_equals_direct(net):
    v = [1 + i for i in range(net.d)]
    poly = stab.drift_polynomial(net, v)
    xs = stab.state_symbols(net)
    for x in itertools.product(range(5), repeat=net.d):
        sym = float(poly.subs(dict(zip(xs, x))))
        assert sym == pytest.approx(stab.drift(net, v, x), rel=1e-9, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(networks(max_d=2, max_reactions=5, first_order=True))
def test_linear_certificate_sound_on_box(net):
    split = graph.zero_split(net)
    assume(split.zero_species)
    A = stab.net_flow(split.zero_part, split.zero_species).A
    v0 = stab.find_lyapunov_vector(A)
    assume(v0 is not None)
    verdict = stab.verify_drift_linear(net, v0)
    assume(verdict.certified)
    cert = verdict.certificate
    states = ss.Box(50, net.d).all_states()
    D = stab.drift_many(net, cert.v, states)
    V = states @ np.array(cert.v)
    covered = np.array([cert.covers(x) for x in states.tolist()])
    assert (D[covered] <= -cert.margin * V[covered] + 1e-9).all()


@settings(max_examples=60, deadline=None)
@given(networks(max_d=3, max_reactions=5, first_order=True))
def test_network_embeds_in_monomerization(net):
    mono = en.monomerize(net).network
    assert ss.check_embedding(net, mono, ss.Box(5, net.d), sample_pairs=40).holds


@settings(max_examples=60, deadline=None)
@given(reversible_monomolecular())
def test_endotactic_networks_essential(net):
    assert ss.essential_verdict(net, ss.Box(8, net.d)).status == "yes"


@settings(max_examples=60, deadline=None)
@given(reversible_monomolecular())
def test_jkl_on_random_endotactic(net):
    assert en.is_endotactic_first_order(net)
    s = en.jkl_sets(net, box_cap=6)
    assert s.K | s.L == s.J == s.support


@settings(max_examples=30, deadline=None)
@given(reversible_monomolecular(max_d=2))
def test_weakly_reversible_first_order_is_product_poisson(net):
    assume(graph.zero_split(net).zero_species == tuple(range(net.d)))
    f = stab.net_flow(net)
    c = np.linalg.solve(f.A.T, -f.b)
    assume((c > 0).all() and c.max() < 3)
    box = ss.Box(25, net.d)
    d = sim.truncated_stationary(net, box)
    assert d.diagnostics["residual"] < 1e-8
    assert sim.tv_distance(d, sim.poisson_product(c, box)) < 1e-4
