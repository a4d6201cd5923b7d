"""Best-response dynamics with single-winner commits (the PGRA allocator).

Each iteration, every request computes its best response against an immutable
snapshot of the others' strategies.  Among the requests whose proposal is a
genuine change and improves their own payoff, exactly one commits: the one
with the largest improvement (ties to the smallest request id).  Because
committed cost breakdowns stay frozen, a unilateral strategy swap moves the
network payoff by exactly the deviator's payoff change, so every commit
raises the network payoff and the dynamics terminate at a profile where no
request can improve by changing only its own strategy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from .costing import StrategyProfile, SlotContext, Strategy, network_payoff
from .placement import PlacementConfig, best_response
from .topology import NetworkGraph


@dataclass(frozen=True)
class GameConfig:
    k_max: int = 100
    epsilon: float = 1e-9
    placement: PlacementConfig = PlacementConfig()

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    winner: int | None
    phi_before: float
    phi_after: float
    improvement: float
    proposals: int  # improving change proposals this iteration


@dataclass
class GameTrace:
    rows: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.rows)

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "winner", "phi", "improvement"])
            for row in self.rows:
                writer.writerow(
                    [row.iteration, "" if row.winner is None else row.winner, repr(row.phi_after), repr(row.improvement)]
                )


def pgra_run(
    requests: list,
    graph: NetworkGraph,
    context: SlotContext,
    config: GameConfig,
    on_commit=None,
) -> tuple:
    """Run the dynamics for one slot's requests; returns (profile, trace).

    All strategies start unallocated.  The run stops when no request proposes
    an improving change (payoff gain above epsilon) or after ``k_max``
    iterations.  ``on_commit``, when given, is called with the profile after
    every committed iteration (used by validation harnesses).
    """
    profile = StrategyProfile.empty(requests, context)
    trace = GameTrace()
    order = sorted(profile.requests)
    for k in range(config.k_max):
        phi_before = network_payoff(profile)
        best_improvement = 0.0
        winner: Strategy | None = None
        proposals = 0
        for rid in order:
            request = profile.requests[rid]
            current = profile.strategies[rid]
            proposal = best_response(request, profile, graph, config.placement)
            if proposal is None or proposal.same_placement(current):
                continue
            improvement = proposal.payoff - current.payoff
            if improvement <= config.epsilon:
                continue
            proposals += 1
            if winner is None or improvement > best_improvement:
                best_improvement = improvement
                winner = proposal
        if winner is None:
            trace.rows.append(IterationRecord(k, None, phi_before, phi_before, 0.0, 0))
            break
        profile.strategies[winner.request_id] = winner
        phi_after = network_payoff(profile)
        trace.rows.append(
            IterationRecord(k, winner.request_id, phi_before, phi_after, best_improvement, proposals)
        )
        if on_commit is not None:
            on_commit(profile)
    return profile, trace


def is_nash(profile: StrategyProfile, graph: NetworkGraph, config: GameConfig) -> bool:
    """True when no request has an improving unilateral change left.

    A best response that merely re-prices the current placement under a
    shifted context is not a deviation; only a structurally different
    proposal with a payoff gain above epsilon counts.
    """
    for rid in sorted(profile.requests):
        current = profile.strategies[rid]
        proposal = best_response(profile.requests[rid], profile, graph, config.placement)
        if proposal is None or proposal.same_placement(current):
            continue
        if proposal.payoff > current.payoff + config.epsilon:
            return False
    return True


def potential_identity_check(profile: StrategyProfile, request_id: int, alternative: Strategy) -> float:
    """|network payoff change - deviator payoff change| for one swap.

    Zero (to float cancellation) because all other stored payoffs are held
    fixed while one strategy is replaced.
    """
    current = profile.strategies[request_id]
    phi_before = network_payoff(profile)
    phi_after = network_payoff(profile.with_strategy(alternative))
    return abs((phi_after - phi_before) - (alternative.payoff - current.payoff))
