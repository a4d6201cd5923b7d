"""Normalized deployment costs, payoffs, and the joint constraint checker.

A strategy's payoff is ``(1 - a1*bw - a2*power - a3*delay) * z`` with the
three cost terms normalized by network-wide totals (total link bandwidth,
total server peak power, the request's delay budget).  The network payoff is
the plain sum of stored per-request payoffs in request-id order; because
committed strategies keep the cost breakdown computed when they were placed,
swapping one request's strategy changes the sum by exactly that request's
payoff difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .energy import Mode, ServerState, vnf_power_attribution
from .topology import NetworkGraph, Path
from .workload import UserRequest


@dataclass(frozen=True)
class Weights:
    """Preference weights for (bandwidth, power, delay); must sum to 1."""

    bw: float = 1.0 / 3.0
    power: float = 1.0 / 3.0
    delay: float = 1.0 / 3.0

    def __post_init__(self):
        if min(self.bw, self.power, self.delay) < 0:
            raise ValueError("weights must be non-negative")
        if abs(self.bw + self.power + self.delay - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")


@dataclass(frozen=True)
class CostBreakdown:
    bw: float
    power: float
    delay: float
    payoff: float


@dataclass(frozen=True)
class Strategy:
    """One request's complete placement decision.

    ``hosts[i]`` is the satellite of the i-th chain entry (pseudo endpoints
    pinned to source/destination); ``routes[j]`` carries the traffic of chain
    edge j.  An unallocated strategy has empty hosts/routes and payoff 0.
    """

    request_id: int
    hosts: tuple
    routes: tuple
    allocated: bool
    cost: CostBreakdown | None = None

    @classmethod
    def unallocated(cls, request_id: int) -> "Strategy":
        return cls(request_id, (), (), False, None)

    @property
    def payoff(self) -> float:
        return self.cost.payoff if self.allocated and self.cost is not None else 0.0

    def same_placement(self, other: "Strategy") -> bool:
        if self.allocated != other.allocated:
            return False
        return self.hosts == other.hosts and tuple(r.nodes for r in self.routes) == tuple(
            r.nodes for r in other.routes
        )


@dataclass(frozen=True)
class CommittedPlacement:
    """A request placed in an earlier slot that is still holding resources."""

    request: UserRequest
    strategy: Strategy
    start_slot: int
    end_slot: int  # last slot (inclusive) the request occupies


@dataclass
class SlotContext:
    """Everything about the current slot that placement decisions read."""

    slot: int
    server_states: dict  # node id -> ServerState
    committed: list = field(default_factory=list)  # CommittedPlacement, still running
    idle_charge: str = "once"  # or "per_vnf"


@dataclass
class StrategyProfile:
    """Joint strategies of one slot's requests plus the slot context."""

    requests: dict  # request id -> UserRequest
    strategies: dict  # request id -> Strategy
    context: SlotContext

    @classmethod
    def empty(cls, requests, context: SlotContext) -> "StrategyProfile":
        by_id = {r.id: r for r in requests}
        return cls(by_id, {rid: Strategy.unallocated(rid) for rid in by_id}, context)

    def with_strategy(self, strategy: Strategy) -> "StrategyProfile":
        strategies = dict(self.strategies)
        strategies[strategy.request_id] = strategy
        return StrategyProfile(self.requests, strategies, self.context)

    def allocated_ids(self) -> list:
        return sorted(rid for rid, s in self.strategies.items() if s.allocated)


class ContextView:
    """Resource headroom and server conditions as one request sees them.

    Aggregates still-running prior commitments and the other requests'
    current strategies into flat per-node / per-link arrays so that placement
    search touches nothing but list lookups.
    """

    __slots__ = (
        "free_cpu",
        "free_mem",
        "free_bw",
        "mode",
        "serves_next",
        "idle_charged",
        "params",
        "p_idle",
        "p_max",
        "power_coeff",
        "capacity_cpu",
        "idle_charge",
    )

    @classmethod
    def build(cls, graph: NetworkGraph, profile: StrategyProfile, exclude: int | None = None) -> "ContextView":
        view = cls()
        ctx = profile.context
        n = len(graph.nodes)
        view.free_cpu = [node.capacity["cpu"] for node in graph.nodes]
        view.free_mem = [node.capacity["memory"] for node in graph.nodes]
        view.free_bw = [link.bandwidth for link in graph.links]
        view.mode = [ctx.server_states[node.id].mode for node in graph.nodes]
        view.serves_next = [False] * n
        view.idle_charged = [False] * n
        view.params = [node.power for node in graph.nodes]
        view.p_idle = [node.power.p_idle for node in graph.nodes]
        view.p_max = [node.power.p_max for node in graph.nodes]
        view.capacity_cpu = [node.capacity["cpu"] for node in graph.nodes]
        view.power_coeff = [
            (node.power.p_max - node.power.p_idle) / node.capacity["cpu"] for node in graph.nodes
        ]
        view.idle_charge = ctx.idle_charge

        def consume(request: UserRequest, strategy: Strategy, keeps_running: bool):
            for i, vnf in enumerate(request.vnfs):
                if vnf.is_pseudo:
                    continue
                host = strategy.hosts[i]
                view.free_cpu[host] -= vnf.cpu
                view.free_mem[host] -= vnf.memory
                if keeps_running:
                    view.serves_next[host] = True
                if view.mode[host] is Mode.IDLE:
                    view.idle_charged[host] = True
            for edge, route in zip(request.edges, strategy.routes):
                for link_index in route.links:
                    view.free_bw[link_index] -= edge.bandwidth

        for placement in ctx.committed:
            consume(placement.request, placement.strategy, placement.end_slot >= ctx.slot + 1)
        for rid, strategy in profile.strategies.items():
            if rid == exclude or not strategy.allocated:
                continue
            consume(profile.requests[rid], strategy, profile.requests[rid].duration_slots >= 2)
        return view


# -- cost components -------------------------------------------------------


def bandwidth_units(strategy: Strategy, request: UserRequest) -> float:
    total = 0.0
    for edge, route in zip(request.edges, strategy.routes):
        total += edge.bandwidth * route.hop_count
    return total


def bandwidth_cost(strategy: Strategy, request: UserRequest, graph: NetworkGraph) -> float:
    """Bandwidth consumed by the chosen routes over the network total."""
    if graph.total_bandwidth == 0:  # linkless graph: only zero-hop routes exist
        return 0.0
    return bandwidth_units(strategy, request) / graph.total_bandwidth


def delay_cost(strategy: Strategy, request: UserRequest) -> float:
    """End-to-end time (execution plus transit) over the delay budget."""
    total = 0.0
    for vnf in request.vnfs:
        total += vnf.exec_time
    for route in strategy.routes:
        total += route.total_delay
    return total / request.max_delay


def energy_power_watts(strategy: Strategy, request: UserRequest, view: ContextView) -> float:
    """Power charged to the request's VNFs, walked in chain order.

    On an idle server the baseline draw is charged to the first VNF landing
    there this slot (across requests) unless the view was built with
    ``idle_charge == 'per_vnf'``.
    """
    total = 0.0
    idle_paid = set()
    serves_self = request.duration_slots >= 2
    for i, vnf in enumerate(request.vnfs):
        if vnf.is_pseudo:
            continue
        host = strategy.hosts[i]
        mode = view.mode[host]
        serves = serves_self or view.serves_next[host]
        already = view.idle_charged[host] or host in idle_paid
        total += vnf_power_attribution(
            mode,
            serves,
            vnf.cpu,
            view.capacity_cpu[host],
            view.params[host],
            idle_already_charged=already,
            idle_charge=view.idle_charge,
        )
        if mode is Mode.IDLE and not serves:
            idle_paid.add(host)
    return total


def energy_cost(strategy: Strategy, request: UserRequest, graph: NetworkGraph, view: ContextView) -> float:
    """Attributed power over the network's total peak power."""
    return energy_power_watts(strategy, request, view) / graph.total_p_max


def user_payoff(bw: float, power: float, delay: float, weights: Weights, allocated: bool = True) -> float:
    if not allocated:
        return 0.0
    return 1.0 - weights.bw * bw - weights.power * power - weights.delay * delay


def evaluate_strategy(
    request: UserRequest,
    hosts: tuple,
    routes: tuple,
    graph: NetworkGraph,
    view: ContextView,
    weights: Weights,
) -> CostBreakdown:
    """Canonical cost breakdown of a complete placement."""
    probe = Strategy(request.id, hosts, routes, True, None)
    bw = bandwidth_cost(probe, request, graph)
    power = energy_cost(probe, request, graph, view)
    delay = delay_cost(probe, request)
    return CostBreakdown(bw, power, delay, user_payoff(bw, power, delay, weights))


def network_payoff(profile: StrategyProfile, weights: Weights | None = None) -> float:
    """Sum of stored payoffs in request-id order (the potential function)."""
    total = 0.0
    for rid in sorted(profile.strategies):
        total += profile.strategies[rid].payoff
    return total


# -- feasibility -----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    constraint: str
    entity: object
    detail: str


def check_feasibility(profile: StrategyProfile, graph: NetworkGraph) -> list:
    """Every violated constraint in the joint placement; empty means feasible.

    Covers: one host per VNF with pinned endpoints, one connecting route per
    chain edge, node cpu/memory capacity (current strategies plus running
    prior commitments), per-link bandwidth with traversal multiplicity, the
    delay budget, hosting on a restartable server only, and the idle/off
    timing legality of every server state.
    """
    violations = []
    ctx = profile.context
    cpu_used = {node.id: 0.0 for node in graph.nodes}
    mem_used = {node.id: 0.0 for node in graph.nodes}
    bw_used = {link.index: 0.0 for link in graph.links}

    def account(request: UserRequest, strategy: Strategy):
        for i, vnf in enumerate(request.vnfs):
            if not vnf.is_pseudo:
                cpu_used[strategy.hosts[i]] += vnf.cpu
                mem_used[strategy.hosts[i]] += vnf.memory
        for edge, route in zip(request.edges, strategy.routes):
            for link_index in route.links:
                bw_used[link_index] += edge.bandwidth

    active = [(p.request, p.strategy) for p in ctx.committed]
    for rid in sorted(profile.strategies):
        strategy = profile.strategies[rid]
        if not strategy.allocated:
            continue
        request = profile.requests[rid]
        active.append((request, strategy))

        if len(strategy.hosts) != len(request.vnfs):
            violations.append(Violation("vnf_assignment", rid, "host count != VNF count"))
            continue
        if strategy.hosts[0] != request.source or strategy.hosts[-1] != request.destination:
            violations.append(Violation("vnf_assignment", rid, "endpoints not pinned"))
        if len(strategy.routes) != len(request.edges):
            violations.append(Violation("route_selection", rid, "route count != edge count"))
            continue
        for j, route in enumerate(strategy.routes):
            a, b = strategy.hosts[j], strategy.hosts[j + 1]
            if route.nodes[0] != a or route.nodes[-1] != b:
                violations.append(Violation("route_selection", (rid, j), "route does not connect hosts"))
            if a == b and route.hop_count != 0:
                violations.append(Violation("route_selection", (rid, j), "co-located hosts need a zero-hop route"))
        if delay_cost(strategy, request) > 1.0 + 1e-12:
            violations.append(Violation("delay_budget", rid, "end-to-end time exceeds the budget"))
        for i, vnf in enumerate(request.vnfs):
            if vnf.is_pseudo:
                continue
            if ctx.server_states[strategy.hosts[i]].mode is Mode.OFF_UNAVAILABLE:
                violations.append(
                    Violation("server_unavailable", (rid, i), "host cannot serve in this slot")
                )

    for request, strategy in active:
        account(request, strategy)
    for node in graph.nodes:
        if cpu_used[node.id] > node.capacity["cpu"] + 1e-9:
            violations.append(Violation("node_capacity", node.id, f"cpu {cpu_used[node.id]} over capacity"))
        if mem_used[node.id] > node.capacity["memory"] + 1e-9:
            violations.append(Violation("node_capacity", node.id, f"memory {mem_used[node.id]} over capacity"))
    for link in graph.links:
        if bw_used[link.index] > link.bandwidth + 1e-9:
            violations.append(Violation("link_bandwidth", link.index, f"bandwidth {bw_used[link.index]} over capacity"))

    for node_id in sorted(ctx.server_states):
        state = ctx.server_states[node_id]
        params = graph.nodes[node_id].power
        if state.mode is Mode.IDLE and ctx.slot - state.idle_since > params.t_idle_max:
            violations.append(Violation("idle_time", node_id, "idle longer than the idle threshold"))
        if state.mode is Mode.OFF_AVAILABLE and ctx.slot - state.off_since < params.t_off_min:
            violations.append(Violation("off_time", node_id, "available before the minimum off time"))
    return violations


def breakdown_rows(profile: StrategyProfile) -> list:
    """Tidy per-request cost rows for CSV export."""
    rows = []
    for rid in sorted(profile.strategies):
        s = profile.strategies[rid]
        c = s.cost or CostBreakdown(0.0, 0.0, 0.0, 0.0)
        rows.append(
            {
                "request_id": rid,
                "bw": c.bw,
                "power": c.power,
                "delay": c.delay,
                "payoff": s.payoff,
                "allocated": s.allocated,
            }
        )
    return rows


def breakdown_csv(profile: StrategyProfile) -> str:
    lines = ["request_id,bw,power,delay,payoff,allocated"]
    for row in breakdown_rows(profile):
        lines.append(
            f"{row['request_id']},{row['bw']!r},{row['power']!r},{row['delay']!r},"
            f"{row['payoff']!r},{row['allocated']}"
        )
    return "\n".join(lines) + "\n"
