import pytest

from crn_certify import endotactic as en
from crn_certify.model import Complex, NetworkError
from crn_certify.parser import parse

from conftest import load


@pytest.mark.parametrize("name", ["cycle", "birth_death", "chain", "directional"])
def test_first_order_endotactic(name):
    assert en.is_endotactic_first_order(load(name))


@pytest.mark.parametrize("name", ["bifurcation", "bifurcation_stable"])
def test_bifurcation_network_not_endotactic(name):
    assert not en.is_endotactic_first_order(load(name))


def test_monomerization_of_pure_inflow():
    net = parse("species: S1, S2\n0 -> S1 + S2 : 1")
    mono = en.monomerize(net)
    assert mono.pumped_species == {0, 1}
    assert set(mono.network.reactions) == {
        en.Reaction(Complex(), Complex.unit(0)),
        en.Reaction(Complex(), Complex.unit(1)),
    }
    assert not en.is_endotactic_first_order(net)


def test_pumped_species_stops_at_unreachable():
    net = parse("species: A, B, C\n0 -> A : 1\nA -> B : 1\nC -> 0 : 1")
    assert en.pumped_species(net) == {0, 1}


def test_higher_order_rejected():
    with pytest.raises(NetworkError):
        en.is_endotactic_first_order(load("copies"))


def test_refutation_of_higher_order():
    v = en.endotactic_witness_search(load("virtual_source"))
    assert v is not None
    net = load("virtual_source")
    r = net.reactions[v.reaction_index]
    # the offending reaction points outward along the direction
    assert sum(u * int(x) for u, x in zip(v.direction, r.product.dense(2) - r.reactant.dense(2))) > 0
    assert en.endotactic_verdict(net).startswith("refuted(")


def test_verdict_strings():
    assert en.endotactic_verdict(load("cycle")) == "yes"
    assert en.endotactic_verdict(load("bifurcation")) == "no"


def test_orthogonal_direction_rejected():
    with pytest.raises(ValueError):
        en.endotactic_witness_search(parse("A <-> B : 1, 1"), directions=[(1, 1)])


def test_default_directions_reproducible():
    net = load("copies")
    assert en.default_directions(net) == en.default_directions(net)


@pytest.mark.parametrize("name", ["cycle", "birth_death", "chain", "directional"])
def test_jkl_condition_on_endotactic_corpus(name):
    s = en.jkl_sets(load(name))
    assert s.holds
    assert s.K | s.L == s.J == s.support


def test_jkl_values_for_cycle():
    s = en.jkl_sets(load("cycle"))
    assert s.J == {0, 1} and s.K == {0, 1} and s.L == set()


def test_jkl_for_linear_chain():
    # only S1 is produced directly; S2 is reached through S1
    s = en.jkl_sets(parse("species: S1, S2\n0 -> S1 : 1\nS1 -> S2 : 1\nS2 -> 0 : 1"))
    assert s.J == {0, 1} and s.K == {0, 1}


@pytest.mark.parametrize("name", ["cycle", "birth_death", "chain", "directional", "death_branch"])
def test_k_routes_agree(name):
    assert not any("differs" in n for n in en.jkl_sets(load(name)).notes)
