"""Virtual-path engine: amplitudes multiplied along a path, then summed.

For every assignment of one outcome per measurement event the engine
computes a complex amplitude as the product of evolution matrix elements
between consecutive branch states.  Reduction to probabilities follows the
record bookkeeping: paths that agree on every RETAINED outcome but differ
on ERASED ones are indistinguishable at the end of the experiment, so their
amplitudes are added before squaring; RETAINED outcomes distinguish paths,
so their probabilities are added.

Scalar path amplitudes exist only when the final state of every subsystem
is pinned by its last measurement.  ``enumerate_paths`` therefore requires:

* every subsystem is measured at least once,
* no unitary acts on a subsystem after its last measurement,
* a measurement on several subsystems jointly is the last event on all of
  its targets (its basis may be entangled, so no later event may split it).

These hold for all built-in scenarios; the dilation oracle has no such
restriction and can be used as a fallback for anything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import ATOL_PROB, ATOL_STRUCT, apply_to_slots, insert_slots, project_slots
from .scenario import Scenario, UnitaryEvent, require_valid

_MAX_PATHS = 1 << 20

# (agent, outcome label) per retained event, in time order
OutcomeTuple = tuple[tuple[str, str], ...]


class PathEngineError(ValueError):
    """Scenario outside the scalar-amplitude engine's supported class."""


@dataclass(frozen=True)
class VirtualPath:
    """One outcome label per measurement event, with its amplitude."""

    branches: tuple[tuple[int, str], ...]  # (event index, label), time order
    amplitude: complex

    @property
    def is_zero(self) -> bool:
        return abs(self.amplitude) <= ATOL_STRUCT


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities over the retained-record outcome tuples."""

    weights: dict[OutcomeTuple, float] = field(repr=False)
    regime_tag: str = ""

    def agents(self) -> tuple[str, ...]:
        key = next(iter(self.weights))
        return tuple(agent for agent, _ in key)

    def probability(self, selection: dict[str, str]) -> float:
        """Marginal probability of a partial agent -> label selection."""
        unknown = set(selection) - set(self.agents())
        if unknown:
            raise ValueError(f"unknown agent {sorted(unknown)[0]!r} in distribution")
        for agent, label in selection.items():
            if not any((agent, label) in key for key in self.weights):
                raise ValueError(f"unknown label {label!r} for agent {agent!r}")
        total = 0.0
        for key, w in self.weights.items():
            if all((agent, selection[agent]) in key for agent in selection):
                total += w
        return total

    def total(self) -> float:
        return float(sum(self.weights.values()))


@dataclass(frozen=True)
class ImplicationResult:
    given: tuple[str, str]
    then: tuple[str, str]
    holds: bool
    counter_probability: float


@dataclass(frozen=True)
class RealPathGraph:
    """Layered network of distinguishable outcomes with edge probabilities."""

    layers: tuple[tuple[str, tuple[str, ...]], ...]  # (agent, labels) per layer
    edges: tuple[tuple[int, str, str, float, bool], ...]
    # (source layer, source label, target label, weight, vanishing)


def _engine_preconditions(s: Scenario) -> None:
    measured: dict[int, int] = {}  # subsystem slot -> last covering event index
    for i, e in s.measurements():
        for slot in s.slots(e.targets):
            measured[slot] = i
    unmeasured = [sub.name for k, sub in enumerate(s.subsystems) if k not in measured]
    if unmeasured:
        raise PathEngineError(
            f"subsystem {unmeasured[0]!r} is never measured; "
            f"path amplitudes need every subsystem pinned by a final measurement"
        )
    for i, e in enumerate(s.events):
        if isinstance(e, UnitaryEvent):
            late = [t for t in e.targets if measured[s.subsystem_index(t)] < i]
            if late:
                raise PathEngineError(
                    f"unitary at time {e.time_index} acts on {late[0]!r} "
                    f"after its last measurement"
                )
    for i, e in s.measurements():
        if len(e.targets) < 2:
            continue
        for j, f in enumerate(s.events):
            if j > i and set(f.targets) & set(e.targets):
                raise PathEngineError(
                    f"joint measurement by {e.agent!r} is followed by another "
                    f"event on its targets; entangled branch states cannot be split"
                )


def _final_reference(s: Scenario, assignment: dict[int, str]) -> np.ndarray:
    """Unit tensor pinning every subsystem to its last measured outcome."""
    last_cover: dict[int, int] = {}
    for i, e in s.measurements():
        for slot in s.slots(e.targets):
            last_cover[slot] = i
    pieces = []  # (slots, tensor)
    for i in sorted(set(last_cover.values())):
        e = s.events[i]
        v = e.basis.vector(assignment[i])
        pieces.append((s.slots(e.targets), v.amps.reshape(v.dims)))
    out = np.ones(())
    slot_order: list[int] = []
    for slots, tens in pieces:
        out = np.multiply.outer(out, tens)
        slot_order.extend(slots)
    return np.moveaxis(out, range(len(slot_order)), slot_order)


def path_amplitude(branches, s: Scenario) -> complex:
    """Product of evolution matrix elements along one branch assignment.

    ``branches`` is an iterable of (event index, label) covering every
    measurement event of the scenario.
    """
    require_valid(s)
    _engine_preconditions(s)
    assignment = dict(branches)
    expected = {i for i, _ in s.measurements()}
    if set(assignment) != expected:
        raise PathEngineError(
            f"branch assignment covers events {sorted(assignment)}, "
            f"expected {sorted(expected)}"
        )
    return _amplitude(s, assignment)


def _scalarize(s: Scenario, assignment: dict[int, str], state: np.ndarray) -> complex:
    """Contract the walked state against its final-outcome reference tensor."""
    ref = _final_reference(s, assignment)
    amp = complex(np.vdot(ref, state))
    residual = float(np.linalg.norm(state)) ** 2 - abs(amp) ** 2
    if residual > 1e-10:
        raise PathEngineError(
            f"path state is not pinned by the final measurements "
            f"(residual population {residual:.3g}); scenario outside engine class"
        )
    return amp


def _amplitude(s: Scenario, assignment: dict[int, str]) -> complex:
    state = s.initial.as_tensor()
    for i, e in enumerate(s.events):
        slots = s.slots(e.targets)
        if isinstance(e, UnitaryEvent):
            state = apply_to_slots(e.op.entries, e.op.dims, slots, state)
        else:
            v = e.basis.vector(assignment[i])
            rem = project_slots(v.amps, v.dims, slots, state)
            state = insert_slots(v.amps, v.dims, slots, rem)
    return _scalarize(s, assignment, state)


def enumerate_paths(s: Scenario) -> tuple[VirtualPath, ...]:
    """All virtual paths (one outcome per measurement event) with amplitudes.

    Paths with |amplitude| <= 1e-12 are kept and flagged via ``is_zero``.
    Prefixes are shared while walking the event sequence, so the cost is the
    path tree, not paths x events.
    """
    require_valid(s)
    _engine_preconditions(s)
    measurements = s.measurements()
    n_paths = math.prod(len(e.labels) for _, e in measurements)
    if n_paths > _MAX_PATHS:
        raise PathEngineError(f"{n_paths} virtual paths exceed the enumeration cap")

    out: list[VirtualPath] = []
    events = s.events

    def walk(idx: int, state: np.ndarray, branches: tuple[tuple[int, str], ...]):
        if idx == len(events):
            out.append(VirtualPath(branches, _scalarize(s, dict(branches), state)))
            return
        e = events[idx]
        slots = s.slots(e.targets)
        if isinstance(e, UnitaryEvent):
            walk(idx + 1, apply_to_slots(e.op.entries, e.op.dims, slots, state), branches)
            return
        for label in e.labels:
            v = e.basis.vector(label)
            rem = project_slots(v.amps, v.dims, slots, state)
            nxt = insert_slots(v.amps, v.dims, slots, rem)
            walk(idx + 1, nxt, branches + ((idx, label),))

    walk(0, s.initial.as_tensor(), ())
    return tuple(out)


def regime_tag_for(s: Scenario) -> str:
    retained = ",".join(e.agent for _, e in s.retained())
    erased = ",".join(e.agent for _, e in s.erased())
    return f"retained={retained}" + (f"; erased={erased}" if erased else "")


def reduce(paths, s: Scenario) -> OutcomeDistribution:
    """Group by retained outcomes, add amplitudes over erased branches, square.

    Weights below 1e-12 are clamped to exact 0 so vanishing outcomes print
    as 0.  The result sums to 1 within 1e-9.
    """
    retained = {i for i, e in s.retained()}
    sums: dict[OutcomeTuple, complex] = {}
    for p in paths:
        key = tuple(
            (s.events[i].agent, label) for i, label in p.branches if i in retained
        )
        sums[key] = sums.get(key, 0.0) + p.amplitude
    weights = {}
    for key, amp in sums.items():
        w = abs(amp) ** 2
        weights[key] = 0.0 if w <= ATOL_STRUCT else w
    dist = OutcomeDistribution(weights, regime_tag_for(s))
    total = dist.total()
    if abs(total - 1.0) > ATOL_PROB:
        raise PathEngineError(f"probabilities sum to {total!r}, expected 1")
    return dist


def distribution(s: Scenario) -> OutcomeDistribution:
    """Convenience: reduce(enumerate_paths(s), s)."""
    return reduce(enumerate_paths(s), s)


def marginal(d: OutcomeDistribution, keep) -> OutcomeDistribution:
    """Sum out every agent not in ``keep``; total probability is preserved."""
    keep = set(keep)
    agents = d.agents()
    unknown = keep - set(agents)
    if unknown:
        raise ValueError(f"unknown agent {sorted(unknown)[0]!r} in distribution")
    weights: dict[OutcomeTuple, float] = {}
    for key, w in d.weights.items():
        sub = tuple(entry for entry in key if entry[0] in keep)
        weights[sub] = weights.get(sub, 0.0) + w
    kept = ",".join(a for a in agents if a in keep)
    return OutcomeDistribution(weights, f"marginal[{kept}] of ({d.regime_tag})")


def implication(d: OutcomeDistribution, given: tuple[str, str],
                then: tuple[str, str]) -> ImplicationResult:
    """Does ``given`` imply ``then``?  Holds iff P(given and not then) <= 1e-9."""
    agents = set(d.agents())
    for agent, label in (given, then):
        if agent not in agents:
            raise ValueError(f"unknown agent {agent!r} in distribution")
        if not any((agent, label) in key for key in d.weights):
            raise ValueError(f"unknown label {label!r} for agent {agent!r}")
    counter = 0.0
    for key, w in d.weights.items():
        if given in key and then not in key:
            counter += w
    return ImplicationResult(given, then, counter <= ATOL_PROB, counter)


def real_path_graph(d: OutcomeDistribution, s: Scenario) -> RealPathGraph:
    """Layered graph of retained outcomes; consecutive-layer edge weights are
    pairwise marginals.  Vanishing edges are flagged (drawn dashed in DOT).
    """
    present = set(d.agents())
    retained = tuple((i, e) for i, e in s.retained() if e.agent in present)
    layers = tuple((e.agent, e.labels) for _, e in retained)
    edges = []
    for k in range(len(retained) - 1):
        agent_a, labels_a = layers[k]
        agent_b, labels_b = layers[k + 1]
        for la in labels_a:
            for lb in labels_b:
                w = 0.0
                for key, weight in d.weights.items():
                    if (agent_a, la) in key and (agent_b, lb) in key:
                        w += weight
                w = 0.0 if w <= ATOL_STRUCT else w
                edges.append((k, la, lb, w, w == 0.0))
    return RealPathGraph(layers, tuple(edges))


def sorted_outcomes(d: OutcomeDistribution, s: Scenario) -> list[tuple[OutcomeTuple, float]]:
    """Deterministic row order: event time order, then basis label order."""
    label_order = {
        e.agent: {label: j for j, label in enumerate(e.labels)}
        for _, e in s.measurements()
    }

    def sort_key(key: OutcomeTuple):
        return tuple(label_order[agent][label] for agent, label in key)

    return sorted(d.weights.items(), key=lambda item: sort_key(item[0]))
