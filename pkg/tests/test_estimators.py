import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rall_net.costs import CostParams
from rall_net.estimators import (ROUTERS, BPRRouter, LQIRouter, RALLRouter, ShortestPathRouter,
                                 make_router)
from rall_net.exceptions import UnknownAlgorithm, Unreachable
from rall_net.routing import FlowOrdering, RoutingTable, route
from rall_net.topology import generate_topology
from rall_net.validation import check_routes, check_topology

from conftest import make_topo


@pytest.fixture(scope="module")
def topo():
    return generate_topology(20, 50.0, 15.0, seed=13)


def test_params_round_trip():
    r = RALLRouter(w_p=0.3, w_l=0.7, th_lqi=180)
    params = r.get_params()
    assert params["w_p"] == 0.3 and params["th_lqi"] == 180
    twin = clone(r)
    assert twin.get_params() == params
    r.set_params(th_lqi=200)
    assert r.th_lqi == 200


@pytest.mark.parametrize("name", sorted(ROUTERS))
def test_fit_matches_functional_api(name, topo):
    router = make_router(name).fit(topo)
    expected = route(topo, name)
    assert router.routing_table_.node_sequences() == expected.node_sequences()
    assert router.predict() == [expected.paths[s].nodes for s in sorted(expected.paths)]
    assert 0 < router.score() <= 1


def test_predict_subset(topo):
    router = ShortestPathRouter().fit(topo)
    (seq,) = router.predict([5])
    assert seq[0] == 5 and seq[-1] == topo.sink
    with pytest.raises(KeyError):
        router.predict([topo.sink])


def test_not_fitted():
    with pytest.raises(NotFittedError):
        LQIRouter().predict()


def test_accepts_json(topo):
    a = BPRRouter(k=3).fit(topo.to_json())
    b = BPRRouter(k=3).fit(topo)
    assert a.predict() == b.predict()


def test_make_router_forwards_settings():
    r = make_router("rall", CostParams(0.2, 0.8, 190), FlowOrdering("random", 4))
    assert (r.w_p, r.w_l, r.th_lqi, r.ordering, r.ordering_seed) == (0.2, 0.8, 190, "random", 4)
    with pytest.raises(UnknownAlgorithm):
        make_router("ospf")


def test_costs_exposed(topo):
    r = RALLRouter().fit(topo)
    assert sum(r.costs_.node_load.values()) == r.routing_table_.total_hops


class TestValidation:
    def test_disconnected_rejected(self):
        with pytest.raises(Unreachable):
            check_topology(make_topo({(0, 1): 200, (2, 0): 200}))

    def test_wrong_type(self):
        with pytest.raises(TypeError):
            check_topology(42)

    def test_routes_from_json(self, topo):
        table = route(topo, "rall")
        back = check_routes(table.to_json(), topo)
        assert back.node_sequences() == table.node_sequences()

    def test_routes_mismatched_lqi(self, topo):
        doc = route(topo, "path").to_dict()
        first = next(iter(doc["paths"]))
        doc["paths"][first][0][2] = (doc["paths"][first][0][2] + 1) % 256
        with pytest.raises(ValueError):
            check_routes(RoutingTable.from_dict(doc), topo)
