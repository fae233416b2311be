"""Scikit-learn style routers.

Each router is configured through ``__init__`` keyword arguments (so
``get_params``/``set_params``/``clone`` work), learns a routing table in
``fit(topology)`` and answers route queries with ``predict(sources)``::

    router = RALLRouter(w_p=0.5, w_l=0.5).fit(topology)
    router.predict([3, 7])          # node sequences from 3 and 7 to the sink
    router.score(topology)          # Jain index of the per-node loads
"""

from __future__ import annotations

from typing import Iterable, List, Optional, Tuple

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .costs import DEFAULT_TH_LQI, CostParams
from .exceptions import UnknownAlgorithm
from .metrics import jain_index, routing_loads
from .routing import FlowOrdering, RoutingTable, balanced_lqi, bpr, lqi_baseline, path_baseline, rall
from .validation import check_topology


class BaseRouter(BaseEstimator):
    """Common fit/predict/score plumbing; subclasses implement ``_route``."""

    def _route(self, topology) -> RoutingTable:
        raise NotImplementedError

    def _ordering(self) -> FlowOrdering:
        return FlowOrdering(self.ordering, self.ordering_seed)

    def fit(self, X, y=None):
        topology = check_topology(X)
        self.routing_table_ = self._route(topology)
        self.n_nodes_ = topology.n_nodes
        self.sink_ = topology.sink
        return self

    def predict(self, X: Optional[Iterable[int]] = None) -> List[Tuple[int, ...]]:
        check_is_fitted(self, "routing_table_")
        paths = self.routing_table_.paths
        sources = sorted(paths) if X is None else list(X)
        missing = [s for s in sources if s not in paths]
        if missing:
            raise KeyError(f"no route for nodes {missing}")
        return [paths[s].nodes for s in sources]

    def score(self, X=None, y=None) -> float:
        check_is_fitted(self, "routing_table_")
        return jain_index(routing_loads(self.routing_table_, self.n_nodes_, self.sink_))


class RALLRouter(BaseRouter):
    def __init__(self, w_p=0.5, w_l=0.5, th_lqi=DEFAULT_TH_LQI, p_const=None,
                 ordering="nearest_first", ordering_seed=None, update_loads=True):
        self.w_p = w_p
        self.w_l = w_l
        self.th_lqi = th_lqi
        self.p_const = p_const
        self.ordering = ordering
        self.ordering_seed = ordering_seed
        self.update_loads = update_loads

    def _route(self, topology):
        params = CostParams(self.w_p, self.w_l, self.th_lqi, self.p_const)
        table = rall(topology, params, self._ordering(), self.update_loads)
        self.costs_ = table.costs
        return table


class BalancedLQIRouter(BaseRouter):
    def __init__(self, th_lqi=DEFAULT_TH_LQI, p_const=None, ordering="nearest_first",
                 ordering_seed=None):
        self.th_lqi = th_lqi
        self.p_const = p_const
        self.ordering = ordering
        self.ordering_seed = ordering_seed

    def _route(self, topology):
        table = balanced_lqi(topology, self.th_lqi, self._ordering(), self.p_const)
        self.costs_ = table.costs
        return table


class BPRRouter(BaseRouter):
    def __init__(self, k=5, ordering="nearest_first", ordering_seed=None):
        self.k = k
        self.ordering = ordering
        self.ordering_seed = ordering_seed

    def _route(self, topology):
        return bpr(topology, self.k, self._ordering())


class ShortestPathRouter(BaseRouter):
    def _route(self, topology):
        return path_baseline(topology)


class LQIRouter(BaseRouter):
    def __init__(self, th_lqi=DEFAULT_TH_LQI):
        self.th_lqi = th_lqi

    def _route(self, topology):
        return lqi_baseline(topology, self.th_lqi)


ROUTERS = {
    "rall": RALLRouter,
    "balanced_lqi": BalancedLQIRouter,
    "bpr": BPRRouter,
    "path": ShortestPathRouter,
    "lqi": LQIRouter,
}


def make_router(name: str, params: Optional[CostParams] = None, ordering: FlowOrdering = FlowOrdering(),
                k: int = 5) -> BaseRouter:
    """Router for ``name`` configured from shared cost/ordering settings."""
    if name not in ROUTERS:
        raise UnknownAlgorithm(f"unknown algorithm {name!r}; choose from {', '.join(ROUTERS)}")
    params = params or CostParams()
    order = {"ordering": ordering.strategy, "ordering_seed": ordering.seed}
    if name == "rall":
        return RALLRouter(params.w_p, params.w_l, params.th_lqi, params.p_const, **order)
    if name == "balanced_lqi":
        return BalancedLQIRouter(params.th_lqi, params.p_const, **order)
    if name == "bpr":
        return BPRRouter(k, **order)
    if name == "lqi":
        return LQIRouter(params.th_lqi)
    return ShortestPathRouter()
