import numpy as np
import pytest

from crn_certify import graph, statespace as ss
from crn_certify.endotactic import monomerize
from crn_certify.parser import parse

from conftest import load


def test_box_indexing_roundtrip():
    box = ss.Box(4, 3)
    for i in range(box.size):
        assert box.index(box.state(i)) == i
    assert box.all_states().shape == (125, 3)
    with pytest.raises(ValueError):
        box.index((5, 0, 0))


def test_budget(monkeypatch):
    monkeypatch.setenv("CRN_STATE_BUDGET", "100")
    with pytest.raises(ss.BudgetExceeded):
        ss.LatticeGraph(load("chain"), ss.Box(20, 2))


def test_reachability():
    net = load("death_branch")
    box = ss.Box(5, 3)
    assert ss.reachable(net, (2, 1, 0), (0, 0, 1), box)
    assert not ss.reachable(net, (0, 0, 1), (0, 1, 0), box)


def test_exits_are_recorded_not_followed():
    net = parse("0 -> A : 1")
    g = ss.LatticeGraph(net, ss.Box(3, 1))
    assert g.exits.tolist() == [False, False, False, True]
    assert g.reach_set((0,)).touched_boundary


def test_essential_no_for_death_branch():
    net = load("death_branch")
    v = ss.essential_verdict(net, ss.Box(10, 3))
    assert v.status == "no" and v.witness


def test_second_order_example_has_no_absorbing_state():
    net = load("second_order")
    dec = ss.classes(net, ss.Box(10, 2))
    # 0 -> S2 is enabled everywhere, so (0, 1) moves on to (0, 2)
    assert dec.status_of((0, 1)) == ss.OPEN
    assert dec.member_states(dec.class_of((0, 1))) == [(0, 1)]


@pytest.mark.parametrize("name", ["cycle", "birth_death", "chain", "directional"])
@pytest.mark.parametrize("cap", [10, 20])
def test_endotactic_networks_essential(name, cap):
    net = load(name)
    assert ss.essential_verdict(net, ss.Box(cap, net.d)).status == "yes"


def test_classes_match_own_tarjan():
    net = load("second_order")
    box = ss.Box(8, 2)
    g = ss.LatticeGraph(net, box)
    dec = ss.classes(net, box, g)
    succ = [[] for _ in range(box.size)]
    for a, b in zip(g.src.tolist(), g.dst.tolist()):
        succ[a].append(b)
    ours = {frozenset(c) for c in graph.tarjan_scc(box.size, succ)}
    theirs = {frozenset(dec.members(k).tolist()) for k in range(dec.n_classes)}
    assert ours == theirs


def test_labels_numbered_by_first_member():
    dec = ss.classes(load("death_branch"), ss.Box(3, 3))
    firsts = [int(dec.members(k)[0]) for k in range(dec.n_classes)]
    assert firsts == sorted(firsts)


def test_embedding_and_counterexample():
    net = parse("species: S1, S2\n0 -> S1 + S2 : 1")
    mono = monomerize(net).network
    box = ss.Box(8, 2)
    assert ss.check_embedding(net, mono, box).holds
    back = ss.check_embedding(mono, net, box)
    assert not back.holds and back.counterexample == ((0, 0), (1, 0))


def test_quotient_dot():
    dec = ss.classes(load("death_branch"), ss.Box(2, 3))
    dot = ss.quotient_dot(dec)
    assert dot.startswith("digraph") and "->" in dot
