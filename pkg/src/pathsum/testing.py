"""Random valid scenarios for property tests and engine cross-checks.

Generated scenarios stay inside the class both engines support and the
composite-basis erasure can realize:

* every subsystem's last event is a retained measurement (a coverage tail),
* once a subsystem hosts an erased record, no unitary ever acts on it again
  (its ancilla stays entangled there; a unitary would disturb the record),
* joint measurements appear only in the tail, where nothing follows them.

Within that class the generator exercises erasure chains, superset erasers
(a joint tail measurement erasing a single-subsystem record), interleaved
unitaries and 1- to 3-subsystem systems of mixed dimension 2 and 3.
"""

from __future__ import annotations

import math

import numpy as np

from .hilbert import Basis, Operator, StateVector, tensor_many
from .scenario import (
    MeasurementEvent,
    Record,
    Scenario,
    SubsystemSpec,
    UnitaryEvent,
    require_valid,
)


def random_state(rng: np.random.Generator, dim: int) -> StateVector:
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector((dim,), z / np.linalg.norm(z))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_basis(rng: np.random.Generator, dims: tuple[int, ...],
                 prefix: str = "m") -> Basis:
    side = math.prod(dims)
    u = random_unitary(rng, side)
    labels = tuple(f"{prefix}{j}" for j in range(side))
    vectors = tuple(StateVector(dims, u[:, j]) for j in range(side))
    return Basis(dims, labels, vectors)


def random_scenario(seed_or_rng) -> Scenario:
    """One random scenario: <= 3 subsystems of dim <= 3, <= 4 events."""
    rng = (
        seed_or_rng
        if isinstance(seed_or_rng, np.random.Generator)
        else np.random.default_rng(seed_or_rng)
    )
    n_sub = int(rng.integers(1, 4))
    dims = tuple(int(rng.integers(2, 4)) for _ in range(n_sub))
    subsystems = tuple(
        SubsystemSpec(f"s{k}", dims[k], tuple(f"b{j}" for j in range(dims[k])))
        for k in range(n_sub)
    )
    initial = tensor_many([random_state(rng, d) for d in dims])

    # coverage tail: every subsystem's last event is a retained measurement,
    # occasionally a joint one on a pair
    order = list(rng.permutation(n_sub))
    groups: list[tuple[int, ...]] = []
    while order:
        if len(order) >= 2 and rng.random() < 0.3:
            groups.append((order.pop(), order.pop()))
        else:
            groups.append((order.pop(),))

    prefix_budget = 4 - len(groups)
    n_prefix = int(rng.integers(0, prefix_budget + 1))

    events: list = []
    # a subsystem that ever hosted an erased record keeps its ancilla
    # entangled forever; a later unitary there would disturb the record and
    # make the composite-basis erasure unrealizable
    ever_erased: set[int] = set()
    time = 0
    for _ in range(n_prefix):
        time += 1
        make_unitary = rng.random() < 0.35
        open_slots = [k for k in range(n_sub) if k not in ever_erased]
        if make_unitary and open_slots:
            n_targets = 1 if len(open_slots) == 1 or rng.random() < 0.5 else 2
            slots = sorted(rng.choice(open_slots, size=n_targets, replace=False).tolist())
            tdims = tuple(dims[k] for k in slots)
            op = Operator(tdims, random_unitary(rng, math.prod(tdims)))
            events.append(UnitaryEvent(time, tuple(f"s{k}" for k in slots), op))
        else:
            k = int(rng.integers(0, n_sub))
            erase = rng.random() < 0.45
            record = Record.ERASED if erase else Record.RETAINED
            events.append(
                MeasurementEvent(
                    time, f"A{time}", (f"s{k}",), random_basis(rng, (dims[k],)), record
                )
            )
            if erase:
                ever_erased.add(k)
    for group in groups:
        time += 1
        tdims = tuple(dims[k] for k in group)
        events.append(
            MeasurementEvent(
                time,
                f"A{time}",
                tuple(f"s{k}" for k in group),
                random_basis(rng, tdims),
                Record.RETAINED,
            )
        )
    return require_valid(Scenario(subsystems, initial, tuple(events)))
