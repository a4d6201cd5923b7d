"""Placing one chain onto the network: beam search per candidate path, plus a
myopic greedy baseline.

The beam search treats the chain as a stage sequence.  The state space of
every stage is the node set of one candidate source-to-destination path (the
"corridor"); hosts need not advance monotonically along it.  The route
between two consecutive hosts is not forced to follow the corridor: it is the
first entry of the ranked shortest-path set between the hosts that keeps the
partial placement feasible (link bandwidth with traversal multiplicity, and
the running delay within budget).  After each stage the partial placements
are ranked by payoff, ties broken by fewer hops then lexicographic host
sequence, and truncated to the beam width; truncation keeps a prefix of a
fixed total order, so a wider beam never does worse.
"""

from __future__ import annotations

from dataclasses import dataclass

from .costing import ContextView, Strategy, StrategyProfile, Weights, evaluate_strategy
from .energy import Mode
from .topology import NetworkGraph, Path
from .workload import UserRequest


@dataclass(frozen=True)
class PlacementConfig:
    num_paths: int = 8  # candidate source-destination paths per request
    beam_width: int | None = 4  # partial placements kept per stage; None = unlimited
    weights: Weights = Weights()

    def __post_init__(self):
        if self.num_paths < 1:
            raise ValueError("need at least one candidate path")
        if self.beam_width is not None and self.beam_width < 1:
            raise ValueError("beam width must be >= 1 (or None for unlimited)")


class _Beam:
    """A partial placement: hosts so far plus running cost accumulators."""

    __slots__ = (
        "hosts",
        "routes",
        "bw_units",
        "power_w",
        "delay_ms",
        "hops",
        "payoff",
        "used_cpu",
        "used_mem",
        "used_bw",
        "idle_paid",
    )

    def __init__(self, hosts, routes, bw_units, power_w, delay_ms, hops, payoff, used_cpu, used_mem, used_bw, idle_paid):
        self.hosts = hosts
        self.routes = routes
        self.bw_units = bw_units
        self.power_w = power_w
        self.delay_ms = delay_ms
        self.hops = hops
        self.payoff = payoff
        self.used_cpu = used_cpu
        self.used_mem = used_mem
        self.used_bw = used_bw
        self.idle_paid = idle_paid


def _pick_route(routes, free_bw, used_bw, bandwidth, delay_so_far, exec_time, max_delay):
    """First ranked route that fits the bandwidth headroom and delay budget.

    Routes are ranked by delay, so once the budget is blown no later entry
    can fit.  A route may traverse one link several times; every traversal
    consumes bandwidth.
    """
    for route in routes:
        new_delay = delay_so_far + route.total_delay + exec_time
        if new_delay > max_delay:
            return None, 0.0
        if route.links:
            needed: dict = {}
            for link_index in route.links:
                needed[link_index] = needed.get(link_index, 0.0) + bandwidth
            ok = True
            for link_index, amount in needed.items():
                if free_bw[link_index] - used_bw[link_index] < amount - 1e-9:
                    ok = False
                    break
            if not ok:
                continue
        return route, new_delay
    return None, 0.0


def viterbi_place(
    request: UserRequest,
    path: Path,
    view: ContextView,
    graph: NetworkGraph,
    config: PlacementConfig,
) -> Strategy | None:
    """Best placement of `request` with hosts restricted to `path`'s nodes.

    Returns None when every partial placement dies (no feasible completion).
    """
    if path.nodes[0] != request.source or path.nodes[-1] != request.destination:
        raise ValueError("candidate path must join the request endpoints")
    corridor = sorted(set(path.nodes))
    vnfs = request.vnfs
    edges = request.edges
    n_nodes = len(graph.nodes)
    n_links = len(graph.links)
    weights = config.weights
    inv_bw_total = 1.0 / graph.total_bandwidth if graph.total_bandwidth else 0.0
    inv_pw_total = 1.0 / graph.total_p_max
    inv_delay = 1.0 / request.max_delay
    serves_self = request.duration_slots >= 2
    # idle ownership only matters for single-slot requests under once-only charging
    track_idle = view.idle_charge == "once" and not serves_self

    route_table: dict = {}

    def routes_between(a, b):
        key = (a, b)
        hit = route_table.get(key)
        if hit is None:
            hit = graph.k_shortest_paths(a, b, config.num_paths).paths
            route_table[key] = hit
        return hit

    beam = [
        _Beam(
            (request.source,),
            (),
            0.0,
            0.0,
            0.0,
            0,
            1.0,
            [0.0] * n_nodes,
            [0.0] * n_nodes,
            [0.0] * n_links,
            [False] * n_nodes if track_idle else None,
        )
    ]
    for stage in range(1, len(vnfs)):
        vnf = vnfs[stage]
        bandwidth = edges[stage - 1].bandwidth
        candidates = (request.destination,) if stage == len(vnfs) - 1 else corridor
        grown = []
        for state in beam:
            prev = state.hosts[-1]
            for node_id in candidates:
                if not vnf.is_pseudo:
                    if view.mode[node_id] is Mode.OFF_UNAVAILABLE:
                        continue
                    if view.free_cpu[node_id] - state.used_cpu[node_id] < vnf.cpu - 1e-9:
                        continue
                    if view.free_mem[node_id] - state.used_mem[node_id] < vnf.memory - 1e-9:
                        continue
                route, new_delay = _pick_route(
                    routes_between(prev, node_id),
                    view.free_bw,
                    state.used_bw,
                    bandwidth,
                    state.delay_ms,
                    vnf.exec_time,
                    request.max_delay,
                )
                if route is None:
                    continue
                bw_units = state.bw_units + bandwidth * route.hop_count
                power_w = state.power_w
                used_cpu = state.used_cpu
                used_mem = state.used_mem
                idle_paid = state.idle_paid
                if not vnf.is_pseudo:
                    mode = view.mode[node_id]
                    serves = serves_self or view.serves_next[node_id]
                    if mode is Mode.OFF_AVAILABLE:
                        if not serves:
                            power_w += view.p_max[node_id]
                    elif mode is Mode.IDLE and not serves:
                        power_w += vnf.cpu * view.power_coeff[node_id]
                        if view.idle_charge == "per_vnf":
                            power_w += view.p_idle[node_id]
                        elif not (view.idle_charged[node_id] or idle_paid[node_id]):
                            power_w += view.p_idle[node_id]
                            idle_paid = list(idle_paid)
                            idle_paid[node_id] = True
                    else:
                        power_w += vnf.cpu * view.power_coeff[node_id]
                    used_cpu = list(used_cpu)
                    used_cpu[node_id] += vnf.cpu
                    used_mem = list(used_mem)
                    used_mem[node_id] += vnf.memory
                used_bw = state.used_bw
                if route.links:
                    used_bw = list(used_bw)
                    for link_index in route.links:
                        used_bw[link_index] += bandwidth
                payoff = (
                    1.0
                    - weights.bw * (bw_units * inv_bw_total)
                    - weights.power * (power_w * inv_pw_total)
                    - weights.delay * (new_delay * inv_delay)
                )
                grown.append(
                    _Beam(
                        state.hosts + (node_id,),
                        state.routes + (route,),
                        bw_units,
                        power_w,
                        new_delay,
                        state.hops + route.hop_count,
                        payoff,
                        used_cpu,
                        used_mem,
                        used_bw,
                        idle_paid,
                    )
                )
        if not grown:
            return None
        grown.sort(key=lambda s: (-s.payoff, s.hops, s.hosts))
        beam = grown if config.beam_width is None else grown[: config.beam_width]
    best = beam[0]
    cost = evaluate_strategy(request, best.hosts, best.routes, graph, view, weights)
    return Strategy(request.id, best.hosts, best.routes, True, cost)


def best_response(
    request: UserRequest,
    profile: StrategyProfile,
    graph: NetworkGraph,
    config: PlacementConfig,
) -> Strategy | None:
    """Payoff-maximal strategy over all candidate paths, others held fixed.

    Candidate paths with identical node sets explore identical placements, so
    duplicates are skipped.  Ties between paths break toward fewer total hops
    and then the lexicographically smallest host sequence.  None means the
    request stays unallocated.
    """
    view = ContextView.build(graph, profile, exclude=request.id)
    best: Strategy | None = None
    seen_corridors = set()
    for path in graph.candidate_sd_paths(request.source, request.destination, config.num_paths).paths:
        corridor = frozenset(path.nodes)
        if corridor in seen_corridors:
            continue
        seen_corridors.add(corridor)
        candidate = viterbi_place(request, path, view, graph, config)
        if candidate is None:
            continue
        if best is None:
            best = candidate
            continue
        c_hops = sum(r.hop_count for r in candidate.routes)
        b_hops = sum(r.hop_count for r in best.routes)
        if (candidate.payoff, -c_hops, best.hosts) > (best.payoff, -b_hops, candidate.hosts):
            best = candidate
    return best


def greedy_place(
    request: UserRequest,
    profile: StrategyProfile,
    graph: NetworkGraph,
    config: PlacementConfig,
) -> Strategy | None:
    """One-pass placement: each VNF takes the cheapest feasible node right now.

    Candidate nodes are the union of all candidate-path corridors; the cost
    of a node is the weighted increment it adds (bandwidth of the connecting
    route, attributed power, execution plus transit time), considering only
    the first feasible ranked route from the previous host.  Ties break
    toward the smallest node id.  No backtracking: any dead end fails the
    whole request.
    """
    view = ContextView.build(graph, profile, exclude=request.id)
    weights = config.weights
    candidates: set = set()
    for path in graph.candidate_sd_paths(request.source, request.destination, config.num_paths).paths:
        candidates.update(path.nodes)
    candidate_order = sorted(candidates)
    inv_bw_total = 1.0 / graph.total_bandwidth if graph.total_bandwidth else 0.0
    inv_pw_total = 1.0 / graph.total_p_max
    inv_delay = 1.0 / request.max_delay
    serves_self = request.duration_slots >= 2

    hosts = [request.source]
    routes = []
    delay_ms = 0.0
    used_cpu = [0.0] * len(graph.nodes)
    used_mem = [0.0] * len(graph.nodes)
    used_bw = [0.0] * len(graph.links)
    idle_paid = [False] * len(graph.nodes)
    for stage in range(1, len(request.vnfs)):
        vnf = request.vnfs[stage]
        bandwidth = request.edges[stage - 1].bandwidth
        stage_candidates = (request.destination,) if stage == len(request.vnfs) - 1 else candidate_order
        best_node = None
        best_route = None
        best_delay = 0.0
        best_cost = None
        for node_id in stage_candidates:
            if not vnf.is_pseudo:
                if view.mode[node_id] is Mode.OFF_UNAVAILABLE:
                    continue
                if view.free_cpu[node_id] - used_cpu[node_id] < vnf.cpu - 1e-9:
                    continue
                if view.free_mem[node_id] - used_mem[node_id] < vnf.memory - 1e-9:
                    continue
            route, new_delay = _pick_route(
                graph.k_shortest_paths(hosts[-1], node_id, config.num_paths).paths,
                view.free_bw,
                used_bw,
                bandwidth,
                delay_ms,
                vnf.exec_time,
                request.max_delay,
            )
            if route is None:
                continue
            power_w = 0.0
            if not vnf.is_pseudo:
                mode = view.mode[node_id]
                serves = serves_self or view.serves_next[node_id]
                if mode is Mode.OFF_AVAILABLE:
                    power_w = 0.0 if serves else view.p_max[node_id]
                elif mode is Mode.IDLE and not serves:
                    power_w = vnf.cpu * view.power_coeff[node_id]
                    if view.idle_charge == "per_vnf" or not (view.idle_charged[node_id] or idle_paid[node_id]):
                        power_w += view.p_idle[node_id]
                else:
                    power_w = vnf.cpu * view.power_coeff[node_id]
            step_cost = (
                weights.bw * (bandwidth * route.hop_count * inv_bw_total)
                + weights.power * (power_w * inv_pw_total)
                + weights.delay * ((route.total_delay + vnf.exec_time) * inv_delay)
            )
            if best_cost is None or step_cost < best_cost - 1e-15:
                best_cost = step_cost
                best_node = node_id
                best_route = route
                best_delay = new_delay
        if best_node is None:
            return None
        if not vnf.is_pseudo:
            used_cpu[best_node] += vnf.cpu
            used_mem[best_node] += vnf.memory
            if view.mode[best_node] is Mode.IDLE and not (serves_self or view.serves_next[best_node]):
                idle_paid[best_node] = True
        for link_index in best_route.links:
            used_bw[link_index] += bandwidth
        hosts.append(best_node)
        routes.append(best_route)
        delay_ms = best_delay
    cost = evaluate_strategy(request, tuple(hosts), tuple(routes), graph, view, weights)
    return Strategy(request.id, tuple(hosts), tuple(routes), True, cost)
