"""Experiment drivers: batch allocation, slotted on-line simulation, and the
two-factor orthogonal parameter sweep, with tidy CSV/JSON emission.

All runs are pure functions of (config, seed): workloads derive from
``(seed, slot)``, sweep repetitions from ``(seed, request_count, repetition)``
via numpy seed sequences, so any cell of any experiment can be replayed in
isolation.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from statistics import fmean

import numpy as np

from .costing import (
    CommittedPlacement,
    SlotContext,
    StrategyProfile,
    Weights,
    check_feasibility,
    network_payoff,
)
from .energy import Mode, PowerParams, ServerFleet, ServerState
from .game import GameConfig, pgra_run
from .placement import PlacementConfig, best_response, greedy_place
from .topology import NetworkGraph, build_constellation
from .workload import WorkloadRanges, generate_requests

ALGORITHMS = ("pgra", "viterbi", "greedy")


@dataclass
class SimulationConfig:
    """Everything a run needs; round-trips through JSON (see `to_json`)."""

    planes: int = 3
    sats_per_plane: int = 2
    intra_plane_km: float = 600.0
    inter_plane_km: float = 400.0
    link_bandwidth: float = 100.0
    cpu: float = 112.0
    memory: float = 192.0
    p_idle: float = 49.9
    p_max: float = 415.0
    t_idle_max: int = 3
    t_off_min: int = 1
    ranges: WorkloadRanges = WorkloadRanges()
    weights: Weights = Weights()
    num_paths: int = 8
    beam_width: int | None = 4
    k_max: int = 100
    epsilon: float = 1e-9
    idle_charge: str = "once"
    mode: str = "batch"
    requests: int = 10
    slots: int = 50
    requests_per_slot: tuple = (5, 10)
    validate_each_step: bool = False

    def __post_init__(self):
        if self.mode not in ("batch", "online"):
            raise ValueError("mode must be 'batch' or 'online'")
        if self.idle_charge not in ("once", "per_vnf"):
            raise ValueError("idle_charge must be 'once' or 'per_vnf'")

    def with_nodes(self, total: int) -> "SimulationConfig":
        if total % self.planes:
            raise ValueError(f"{total} satellites do not divide into {self.planes} planes")
        return replace(self, sats_per_plane=total // self.planes)

    def power_params(self) -> PowerParams:
        return PowerParams(self.p_idle, self.p_max, self.t_idle_max, self.t_off_min)

    def build_graph(self) -> NetworkGraph:
        return build_constellation(
            self.planes,
            self.sats_per_plane,
            self.intra_plane_km,
            self.inter_plane_km,
            {"cpu": self.cpu, "memory": self.memory},
            self.power_params(),
            self.link_bandwidth,
        )

    def placement_config(self) -> PlacementConfig:
        return PlacementConfig(self.num_paths, self.beam_width, self.weights)

    def game_config(self) -> GameConfig:
        return GameConfig(self.k_max, self.epsilon, self.placement_config())

    def to_json(self) -> str:
        doc = {
            "planes": self.planes,
            "sats_per_plane": self.sats_per_plane,
            "intra_plane_km": self.intra_plane_km,
            "inter_plane_km": self.inter_plane_km,
            "link_bandwidth": self.link_bandwidth,
            "cpu": self.cpu,
            "memory": self.memory,
            "p_idle": self.p_idle,
            "p_max": self.p_max,
            "t_idle_max": self.t_idle_max,
            "t_off_min": self.t_off_min,
            "ranges": {
                "vnf_count": list(self.ranges.vnf_count),
                "cpu": list(self.ranges.cpu),
                "memory": list(self.ranges.memory),
                "exec_time": list(self.ranges.exec_time),
                "bandwidth": list(self.ranges.bandwidth),
                "duration": list(self.ranges.duration),
            },
            "weights": {"bw": self.weights.bw, "power": self.weights.power, "delay": self.weights.delay},
            "num_paths": self.num_paths,
            "beam_width": self.beam_width,
            "k_max": self.k_max,
            "epsilon": self.epsilon,
            "idle_charge": self.idle_charge,
            "mode": self.mode,
            "requests": self.requests,
            "slots": self.slots,
            "requests_per_slot": list(self.requests_per_slot),
            "validate_each_step": self.validate_each_step,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SimulationConfig":
        doc = json.loads(text)
        ranges = doc.pop("ranges", None)
        weights = doc.pop("weights", None)
        cfg = cls(**doc)
        if ranges is not None:
            cfg.ranges = WorkloadRanges(**{k: tuple(v) for k, v in ranges.items()})
        if weights is not None:
            cfg.weights = Weights(**weights)
        cfg.requests_per_slot = tuple(cfg.requests_per_slot)
        return cfg


@dataclass(frozen=True)
class SlotMetrics:
    slot: int
    algorithm: str
    seed: int
    phi: float
    allocated_fraction: float
    mean_bw: float
    mean_power: float
    mean_delay: float
    iterations: int


def _fresh_context(graph: NetworkGraph, config: SimulationConfig, slot: int = 0) -> SlotContext:
    states = {n.id: ServerState(Mode.IDLE, idle_since=slot) for n in graph.nodes}
    return SlotContext(slot, states, [], config.idle_charge)


def _allocate(algorithm, requests, graph, context, config: SimulationConfig):
    """Run one allocation round; returns (profile, iterations used)."""
    if algorithm == "pgra":
        on_commit = None
        if config.validate_each_step:

            def on_commit(profile):
                violations = check_feasibility(profile, graph)
                if violations:
                    raise AssertionError(f"infeasible committed profile: {violations[:3]}")

        profile, trace = pgra_run(requests, graph, context, config.game_config(), on_commit=on_commit)
        return profile, trace.iterations
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    place = best_response if algorithm == "viterbi" else greedy_place
    profile = StrategyProfile.empty(requests, context)
    pcfg = config.placement_config()
    for rid in sorted(profile.requests):
        strategy = place(profile.requests[rid], profile, graph, pcfg)
        if strategy is not None:
            profile.strategies[rid] = strategy
    return profile, 1


def _metrics(profile: StrategyProfile, slot, algorithm, seed, iterations) -> SlotMetrics:
    allocated = [profile.strategies[rid] for rid in profile.allocated_ids()]
    total = len(profile.strategies)
    fraction = 1.0 if total == 0 else len(allocated) / total
    if allocated:
        mean_bw = fmean(s.cost.bw for s in allocated)
        mean_power = fmean(s.cost.power for s in allocated)
        mean_delay = fmean(s.cost.delay for s in allocated)
    else:
        mean_bw = mean_power = mean_delay = 0.0
    return SlotMetrics(
        slot=slot,
        algorithm=algorithm,
        seed=seed,
        phi=network_payoff(profile),
        allocated_fraction=fraction,
        mean_bw=mean_bw,
        mean_power=mean_power,
        mean_delay=mean_delay,
        iterations=iterations,
    )


def run_batch(config: SimulationConfig, algorithm: str, seed: int, graph: NetworkGraph | None = None) -> SlotMetrics:
    """One slot, one batch of requests, one allocation algorithm."""
    if graph is None:
        graph = config.build_graph()
    context = _fresh_context(graph, config)
    requests = generate_requests(
        config.requests, graph, config.ranges, seed, slot=0, d=config.num_paths
    )
    profile, iterations = _allocate(algorithm, requests, graph, context, config)
    if config.validate_each_step:
        violations = check_feasibility(profile, graph)
        if violations:
            raise AssertionError(f"infeasible final profile: {violations[:3]}")
    return _metrics(profile, 0, algorithm, seed, iterations)


class OnlineSimulation:
    """Slot-stepped simulation: expiry, server-state advance, placement.

    Per slot: release requests whose lifetime ended, advance every server
    state machine under the surviving occupancy, place the new arrivals with
    the survivors as fixed context, then switch freshly loaded servers on
    (restarts spend the slot in setup).  A per-slot audit timeline of
    (slot, node, mode, power) accumulates on the fleet.
    """

    def __init__(self, config: SimulationConfig, graph: NetworkGraph | None = None):
        self.config = config
        self.graph = graph if graph is not None else config.build_graph()
        self.fleet = ServerFleet({n.id: n.power for n in self.graph.nodes})
        self.running: list = []
        self.next_id = 0

    def _nodes_serving(self) -> set:
        serving = set()
        for placement in self.running:
            for i, vnf in enumerate(placement.request.vnfs):
                if not vnf.is_pseudo:
                    serving.add(placement.strategy.hosts[i])
        return serving

    def step(self, slot: int, new_requests: list, algorithm: str, seed: int) -> SlotMetrics:
        self.running = [p for p in self.running if p.end_slot >= slot]
        if slot > 0:
            self.fleet.advance(self._nodes_serving(), slot)
        context = SlotContext(slot, dict(self.fleet.states), list(self.running), self.config.idle_charge)
        profile, iterations = _allocate(algorithm, new_requests, self.graph, context, self.config)
        if self.config.validate_each_step:
            violations = check_feasibility(profile, self.graph)
            if violations:
                raise AssertionError(f"slot {slot}: infeasible profile: {violations[:3]}")
        for rid in profile.allocated_ids():
            request = profile.requests[rid]
            self.running.append(
                CommittedPlacement(request, profile.strategies[rid], slot, slot + request.duration_slots - 1)
            )
        self.fleet.mark_service(self._nodes_serving())
        allocated_cpu: dict = {}
        for placement in self.running:
            for i, vnf in enumerate(placement.request.vnfs):
                if not vnf.is_pseudo:
                    host = placement.strategy.hosts[i]
                    allocated_cpu[host] = allocated_cpu.get(host, 0.0) + vnf.cpu
        self.fleet.record(slot, allocated_cpu, {n.id: n.capacity["cpu"] for n in self.graph.nodes})
        return _metrics(profile, slot, algorithm, seed, iterations)


def run_online(config: SimulationConfig, algorithm: str, seed: int, graph: NetworkGraph | None = None) -> list:
    """Time-slotted run; per slot, a fresh uniform batch of arrivals."""
    sim = OnlineSimulation(config, graph)
    lo, hi = config.requests_per_slot
    results = []
    for slot in range(config.slots):
        count_rng = np.random.default_rng(np.random.SeedSequence([seed, slot, 1]))
        count = int(count_rng.integers(lo, hi + 1))
        arrivals = generate_requests(
            count, sim.graph, config.ranges, seed, slot=slot, d=config.num_paths, start_id=sim.next_id
        )
        sim.next_id += count
        results.append(sim.step(slot, arrivals, algorithm, seed))
    return results


# -- parameter sweep ---------------------------------------------------------


@dataclass
class TaguchiResult:
    """L16-style sweep output: one row per (paths, beam) cell and request
    count, plus per-factor main effects (mean over rows sharing a level)."""

    rows: list  # dicts: number, d, beam, requests, mean_phi
    effects: dict  # factor -> {level -> {requests -> mean phi}}

    def to_csv_text(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["number", "d", "beam", "requests", "mean_phi"])
        for row in self.rows:
            writer.writerow([row["number"], row["d"], row["beam"], row["requests"], repr(row["mean_phi"])])
        return out.getvalue()

    def to_json_text(self) -> str:
        return json.dumps({"rows": self.rows, "effects": self.effects}, indent=2, sort_keys=True)


def derive_seed(master: int, *parts: int) -> int:
    """Stable sub-seed for one experiment cell."""
    state = np.random.SeedSequence([master, *parts]).generate_state(1, np.uint64)[0]
    return int(state % (2**63))


def run_taguchi(
    config: SimulationConfig,
    d_levels=(1, 2, 4, 8),
    b_levels=(1, 2, 4, 8),
    m_values=(10, 20, 30),
    repetitions: int = 10,
    seed: int = 0,
    graph: NetworkGraph | None = None,
) -> TaguchiResult:
    """Full-factorial sweep of candidate-path count and beam width.

    Repetition seeds depend only on (seed, request count, repetition), so
    every (d, beam) cell sees the same workloads and cells are directly
    comparable.
    """
    if graph is None:
        graph = config.build_graph()
    rows = []
    number = 0
    for d in d_levels:
        for beam in b_levels:
            cell_cfg = replace(config, num_paths=d, beam_width=beam)
            for m in m_values:
                phis = []
                for rep in range(repetitions):
                    run_cfg = replace(cell_cfg, requests=m)
                    phis.append(run_batch(run_cfg, "pgra", derive_seed(seed, m, rep), graph=graph).phi)
                rows.append(
                    {"number": number, "d": d, "beam": beam, "requests": m, "mean_phi": fmean(phis)}
                )
            number += 1
    effects: dict = {"d": {}, "beam": {}}
    for factor in effects:
        for level in sorted({row[factor] for row in rows}):
            per_m: dict = {}
            for m in m_values:
                cells = [row["mean_phi"] for row in rows if row[factor] == level and row["requests"] == m]
                per_m[m] = fmean(cells)
            effects[factor][level] = per_m
    return TaguchiResult(rows, effects)


# -- emission ----------------------------------------------------------------

CSV_HEADER = [
    "slot",
    "algorithm",
    "seed",
    "phi",
    "allocated_fraction",
    "mean_bw",
    "mean_power",
    "mean_delay",
    "iterations",
]


def metrics_rows(results: list) -> list:
    return [
        {
            "slot": m.slot,
            "algorithm": m.algorithm,
            "seed": m.seed,
            "phi": m.phi,
            "allocated_fraction": m.allocated_fraction,
            "mean_bw": m.mean_bw,
            "mean_power": m.mean_power,
            "mean_delay": m.mean_delay,
            "iterations": m.iterations,
        }
        for m in results
    ]


def emit_text(results: list, fmt: str) -> str:
    if not results:
        raise ValueError("nothing to emit")
    rows = metrics_rows(results)
    if fmt == "json":
        return json.dumps(rows, indent=2)
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row["slot"],
                    row["algorithm"],
                    row["seed"],
                    repr(row["phi"]),
                    repr(row["allocated_fraction"]),
                    repr(row["mean_bw"]),
                    repr(row["mean_power"]),
                    repr(row["mean_delay"]),
                    row["iterations"],
                ]
            )
        return out.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def emit(results: list, fmt: str, path: str) -> str:
    """Write metrics to `path`; bit-stable for fixed inputs."""
    text = emit_text(results, fmt)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def parse_metrics_json(text: str) -> list:
    return [SlotMetrics(**row) for row in json.loads(text)]
