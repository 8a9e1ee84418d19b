"""Independent verification engine built on explicit pointer ancillas.

Every measurement event is replaced by a unitary coupling between its
targets and a fresh pointer ancilla (dimension = outcome count + 1, state 0
meaning "not yet triggered"): |D(0)> x |v_k>  ->  |D(k)> x |v_k| for each
basis vector v_k.  Probabilities are never assigned during the run; at the
end they are expectation values of pointer projectors on the evolved state.

Record erasure is realized the way an observer who measures a whole
laboratory does: when a later measurement's targets cover a pending erased
record, its coupling is taken in the composite basis that entangles the
erased ancilla with the erased event's own basis vectors.  Operationally
the coupling is conjugated by the erased event's coupling chain, which maps
the plain basis onto exactly that composite basis.  The conjugation also
exposes the realizability condition: after undoing the chain, the consumed
ancillas must sit back at pointer 0 (population outside <= 1e-12), i.e. the
record must not have been disturbed between its creation and its erasure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import ATOL_PROB, ATOL_STRUCT, StateVector, apply_to_slots
from .paths import OutcomeDistribution, regime_tag_for
from .scenario import (
    MeasurementEvent,
    Record,
    RecordErasedError,
    Scenario,
    UnitaryEvent,
    require_valid,
)


class OracleError(ValueError):
    """Dilation cannot realize the scenario, or the run left its hypotheses."""


# one lift op: (full-space slots, unitary matrix on those slots)
LiftOp = tuple[tuple[int, ...], np.ndarray]


@dataclass(frozen=True)
class AncillaSpec:
    event_index: int
    agent: str
    slot: int
    dim: int
    labels: tuple[str, ...]

    def pointer_index(self, label: str | None) -> int:
        if label is None or label == "0":
            return 0
        if label not in self.labels:
            raise ValueError(f"unknown outcome label {label!r} for agent {self.agent!r}")
        return self.labels.index(label) + 1


@dataclass(frozen=True)
class CouplingPlan:
    event_index: int
    slots: tuple[int, ...]  # (ancilla slot, *target slots)
    matrix: np.ndarray = field(repr=False)
    consumed_ops: tuple[LiftOp, ...]
    consumed_anc_slots: tuple[int, ...]


@dataclass(frozen=True)
class EraserRealization:
    """The composite-basis measurement that destroyed an erased record."""

    erased_event: int
    eraser_event: int
    composite_slots: tuple[int, ...]  # consumed ancilla slots + eraser target slots
    basis: np.ndarray = field(repr=False)  # columns = composite basis vectors
    labels: tuple[str, ...]


@dataclass(frozen=True)
class DilatedScenario:
    base: Scenario
    dims: tuple[int, ...]  # base dims followed by ancilla dims, event order
    ancillas: tuple[AncillaSpec, ...]
    couplings: tuple[CouplingPlan, ...]
    erasure_map: dict[int, EraserRealization]

    def ancilla_for_event(self, event_index: int) -> AncillaSpec:
        for a in self.ancillas:
            if a.event_index == event_index:
                return a
        raise ValueError(f"event {event_index} has no ancilla")

    def ancilla_for_agent(self, agent: str) -> AncillaSpec:
        for a in self.ancillas:
            if a.agent == agent:
                return a
        raise ValueError(f"unknown agent {agent!r}")


@dataclass(frozen=True)
class DilatedState:
    psi: StateVector
    time_index: int
    dilated: DilatedScenario


@dataclass(frozen=True)
class _Lift:
    footprint: frozenset[int]
    anc_slots: tuple[int, ...]
    ops: tuple[LiftOp, ...]  # applied first-to-last, maps |0...0> x v to the composite vector
    events: tuple[int, ...]  # erased events encoded in this chain


def _coupling_matrix(basis_columns: np.ndarray) -> np.ndarray:
    """Unitary on ancilla x targets sending |0> x w_k to |k+1> x w_k.

    Completed involutively: |k+1> x w_k swaps back to |0> x w_k and every
    other sector is left alone.  Any unitary completion works because those
    sectors are never populated; this one is deterministic and exact.
    """
    side, n_labels = basis_columns.shape
    anc_dim = n_labels + 1
    eye_r = np.eye(side)
    m = np.zeros((anc_dim * side, anc_dim * side), dtype=complex)

    def anc_block(i, j):
        block = np.zeros((anc_dim, anc_dim))
        block[i, j] = 1.0
        return block

    for k in range(n_labels):
        w = basis_columns[:, k : k + 1]
        proj = w @ w.conj().T
        m += np.kron(anc_block(k + 1, 0) + anc_block(0, k + 1), proj)
        m += np.kron(anc_block(k + 1, k + 1), eye_r - proj)
    defect = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
    if defect > ATOL_STRUCT:
        raise OracleError(f"coupling completion is not unitary (defect {defect:.3g})")
    return m


def dilate(s: Scenario) -> DilatedScenario:
    """Attach one pointer ancilla per measurement and plan all couplings."""
    require_valid(s)
    base_n = len(s.subsystems)
    measurements = s.measurements()
    dims = list(s.dims)
    ancillas = []
    for k, (i, e) in enumerate(measurements):
        ancillas.append(
            AncillaSpec(i, e.agent, base_n + k, len(e.labels) + 1, e.labels)
        )
        dims.append(len(e.labels) + 1)
    anc_by_event = {a.event_index: a for a in ancillas}

    couplings = []
    erasure_map: dict[int, EraserRealization] = {}
    active: list[_Lift] = []
    for i, e in measurements:
        tslots = s.slots(e.targets)
        tset = set(tslots)
        consumed = [lift for lift in active if lift.footprint & tset]
        for lift in consumed:
            if not lift.footprint <= tset:
                raise OracleError(
                    f"measurement by {e.agent!r} overlaps an erased record on "
                    f"subsystem slots {sorted(lift.footprint)} without covering it; "
                    f"no composite-basis erasure exists"
                )
        anc = anc_by_event[i]
        matrix = _coupling_matrix(e.basis.matrix())
        consumed_ops = tuple(op for lift in consumed for op in lift.ops)
        consumed_anc = tuple(sl for lift in consumed for sl in lift.anc_slots)
        plan = CouplingPlan(i, (anc.slot,) + tslots, matrix, consumed_ops, consumed_anc)
        couplings.append(plan)

        if consumed:
            composite_slots = consumed_anc + tslots
            basis = _lifted_basis(e, tslots, consumed_ops, composite_slots, dims)
            for lift in consumed:
                for erased_event in lift.events:
                    # the first consumer is the eraser; later measurements
                    # through the same chain do not destroy anything new
                    erasure_map.setdefault(
                        erased_event,
                        EraserRealization(erased_event, i, composite_slots, basis, e.labels),
                    )
        if e.record is Record.ERASED:
            new = _Lift(
                footprint=frozenset(tset),
                anc_slots=consumed_anc + (anc.slot,),
                ops=((plan.slots, matrix),) + consumed_ops,
                events=tuple(ev for lift in consumed for ev in lift.events) + (i,),
            )
            active = [lift for lift in active if lift not in consumed] + [new]

    return DilatedScenario(s, tuple(dims), tuple(ancillas), tuple(couplings), erasure_map)


def _lifted_basis(e: MeasurementEvent, tslots, consumed_ops, composite_slots, dims):
    """Columns of the composite basis |E_k> = chain(|0...0> x w_k)."""
    local = {slot: axis for axis, slot in enumerate(composite_slots)}
    cdims = tuple(dims[slot] for slot in composite_slots)
    n_anc = len(composite_slots) - len(tslots)
    cols = []
    for k in range(len(e.labels)):
        vec = np.zeros(cdims, dtype=complex)
        w = e.basis.vectors[k].amps.reshape(tuple(dims[t] for t in tslots))
        vec[(0,) * n_anc] = w
        for slots, m in consumed_ops:
            axes = tuple(local[sl] for sl in slots)
            op_dims = tuple(cdims[a] for a in axes)
            vec = apply_to_slots(m, op_dims, axes, vec)
        cols.append(vec.reshape(-1))
    return np.column_stack(cols)


def evolve(d: DilatedScenario, upto_time: int | None = None) -> DilatedState:
    """Apply free unitaries and couplings in time order; norm is conserved.

    ``upto_time`` stops after the last event with time_index <= upto_time,
    which exposes intermediate states for inspection.
    """
    s = d.base
    n = len(d.dims)
    state = np.zeros(d.dims, dtype=complex)
    n_anc = n - len(s.subsystems)
    state[(slice(None),) * len(s.subsystems) + (0,) * n_anc] = s.initial.as_tensor()
    plan_by_event = {p.event_index: p for p in d.couplings}

    time = -1
    for i, e in enumerate(s.events):
        if upto_time is not None and e.time_index > upto_time:
            break
        if isinstance(e, UnitaryEvent):
            state = apply_to_slots(e.op.entries, e.op.dims, s.slots(e.targets), state)
        else:
            plan = plan_by_event[i]
            for slots, m in reversed(plan.consumed_ops):
                state = _apply(m.conj().T, slots, d.dims, state)
            _check_records_intact(state, plan.consumed_anc_slots, e.agent)
            state = _apply(plan.matrix, plan.slots, d.dims, state)
            for slots, m in plan.consumed_ops:
                state = _apply(m, slots, d.dims, state)
        drift = abs(float(np.linalg.norm(state)) - 1.0)
        if drift > ATOL_STRUCT:
            raise OracleError(f"norm drifted by {drift:.3g} at time {e.time_index}")
        time = e.time_index
    return DilatedState(StateVector(d.dims, state.reshape(-1)), time, d)


def _apply(matrix, slots, dims, state):
    return apply_to_slots(matrix, tuple(dims[x] for x in slots), slots, state)


def _check_records_intact(state, anc_slots, agent):
    """After undoing a lift chain, consumed ancillas must read pointer 0."""
    if not anc_slots:
        return
    sl = [slice(None)] * state.ndim
    for a in anc_slots:
        sl[a] = 0
    inside = float(np.linalg.norm(state[tuple(sl)])) ** 2
    leak = float(np.linalg.norm(state)) ** 2 - inside
    if leak > ATOL_STRUCT:
        raise OracleError(
            f"erased record was disturbed before {agent!r}'s measurement "
            f"(population {leak:.3g} outside the composite-basis block); "
            f"this erasure is not realizable"
        )


def _selection_slices(st: DilatedState, selection: dict[str, str]):
    d = st.dilated
    pairs = []
    for agent, label in selection.items():
        i, e = d.base.agent_event(agent)  # raises on unknown agent
        if e.record is Record.ERASED:
            raise RecordErasedError(agent)
        anc = d.ancilla_for_event(i)
        pairs.append((anc.slot, anc.pointer_index(label)))
    return pairs


def _pointer_probability(st: DilatedState, pairs) -> float:
    sl = [slice(None)] * len(st.dilated.dims)
    for slot, idx in pairs:
        sl[slot] = idx
    sub = st.psi.as_tensor()[tuple(sl)]
    return float(np.linalg.norm(sub)) ** 2


def joint_probability(st: DilatedState, selection: dict[str, str]) -> float:
    """Expectation of the product of pointer projectors for retained events.

    Partial selections marginalize implicitly over the unselected retained
    pointers.  Naming an erased agent raises RecordErasedError.
    """
    return _pointer_probability(st, _selection_slices(st, selection))


def inspect_record(st: DilatedState, agent: str, pointer_label: str | None,
                   final_selection: dict[str, str] | None = None) -> float:
    """Joint probability of finding an erased ancilla at a given pointer.

    The reading exists (the ancilla is still there to look at) but does not
    certify the pre-erasure branch: the which-branch information was lost to
    interference when the eraser measured the composite.
    """
    d = st.dilated
    i, e = d.base.agent_event(agent)
    if e.record is not Record.ERASED:
        raise ValueError(
            f"record of agent {agent!r} is retained; use joint_probability"
        )
    eraser = d.erasure_map[i]
    eraser_time = d.base.events[eraser.eraser_event].time_index
    if st.time_index < eraser_time:
        raise OracleError(
            f"state at time {st.time_index} has not evolved past the erasing "
            f"measurement at time {eraser_time}"
        )
    anc = d.ancilla_for_event(i)
    pairs = [(anc.slot, anc.pointer_index(pointer_label))]
    pairs += _selection_slices(st, final_selection or {})
    return _pointer_probability(st, pairs)


def distribution(s: Scenario) -> OutcomeDistribution:
    """Full retained-outcome distribution from pointer projectors."""
    st = evolve(dilate(s))
    retained = s.retained()
    weights = {}

    def fill(idx: int, key, pairs):
        if idx == len(retained):
            w = _pointer_probability(st, pairs)
            weights[key] = 0.0 if w <= ATOL_STRUCT else w
            return
        i, e = retained[idx]
        anc = st.dilated.ancilla_for_event(i)
        for j, label in enumerate(e.labels):
            fill(idx + 1, key + ((e.agent, label),), pairs + [(anc.slot, j + 1)])

    fill(0, (), [])
    dist = OutcomeDistribution(weights, regime_tag_for(s))
    total = dist.total()
    if abs(total - 1.0) > ATOL_PROB:
        raise OracleError(f"pointer probabilities sum to {total!r}, expected 1")
    return dist
