"""Error models and syndrome sampling.

Two quantum-error-correction (QEC) models draw data errors and read the
syndrome out perfectly in a single round:

* ``channel-capacity`` - independent X on each data qubit with probability p;
* ``depolarizing``     - independent X/Y/Z, each with probability p/3.

Three fault-tolerance (FT) models run d noisy measurement rounds followed by
a perfect readout of the data qubits (whose recalculated stabiliser
eigenvalues form round d+1 of the record):

* ``channel-capacity-meas`` and ``depolarizing-meas`` - fresh data errors per
  round plus independent syndrome-bit flips with probability p;
* ``circuit`` - Pauli-frame simulation of the interleaved stabiliser
  measurement circuit, with a 15-outcome two-qubit depolarizing map of total
  probability p after every CNOT and preparation/measurement failures with
  probability p.

All samplers exist in two forms: a single-experiment operation taking an
explicit ``numpy.random.Generator``, and a batch kernel used by the
benchmark harness.  Batch kernels return flattened record bit matrices whose
per-round layout is ``[z_checks]`` for channel-capacity models (only Z-type
checks fire on X errors) and ``[z_checks, x_checks]`` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .code import CodeLayout, Syndrome
from .pauli import PauliString

CHANNEL_CAPACITY = "channel-capacity"
DEPOLARIZING = "depolarizing"
CHANNEL_CAPACITY_MEAS = "channel-capacity-meas"
DEPOLARIZING_MEAS = "depolarizing-meas"
CIRCUIT = "circuit"

QEC_TAGS = (CHANNEL_CAPACITY, DEPOLARIZING)
FT_TAGS = (CHANNEL_CAPACITY_MEAS, DEPOLARIZING_MEAS, CIRCUIT)
ALL_TAGS = QEC_TAGS + FT_TAGS

# (tag, distance) -> hidden-layer width that worked well for that scenario.
HIDDEN_DEFAULTS = {
    (CHANNEL_CAPACITY, 3): 10,
    (CHANNEL_CAPACITY, 5): 90,
    (CHANNEL_CAPACITY, 7): 512,
    (DEPOLARIZING, 3): 128,
    (DEPOLARIZING, 5): 660,
    (DEPOLARIZING, 7): 256,
    (CHANNEL_CAPACITY_MEAS, 3): 768,
    (DEPOLARIZING_MEAS, 3): 768,
    (CIRCUIT, 3): 704,
}


@dataclass(frozen=True)
class NoiseModel:
    """An error-model tag plus its physical error probability."""

    tag: str
    p: float

    def __post_init__(self):
        if self.tag not in ALL_TAGS:
            raise ValueError(f"unknown noise model {self.tag!r}; expected one of {ALL_TAGS}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"error probability must lie in [0, 1], got {self.p}")

    @property
    def is_ft(self) -> bool:
        return self.tag in FT_TAGS

    @property
    def both_check_types(self) -> bool:
        """Whether records carry both check types (False for X-only noise)."""
        return self.tag not in (CHANNEL_CAPACITY, CHANNEL_CAPACITY_MEAS)

    def n_rounds(self, d: int) -> int:
        return d + 1 if self.is_ft else 1

    def bits_per_round(self, d: int) -> int:
        per_type = (d * d - 1) // 2
        return 2 * per_type if self.both_check_types else per_type

    def input_size(self, d: int) -> int:
        """Flattened record length: the classifier input width."""
        return self.n_rounds(d) * self.bits_per_round(d)

    def output_size(self) -> int:
        # Independent X/Z QEC noise needs only a flip/no-flip output pair.
        return 2 if self.tag == CHANNEL_CAPACITY else 4

    def hidden_default(self, d: int) -> int:
        try:
            return HIDDEN_DEFAULTS[(self.tag, d)]
        except KeyError:
            raise ValueError(
                f"no default hidden-layer size for {self.tag} at d={d}; pass one explicitly"
            ) from None

    def with_p(self, p: float) -> "NoiseModel":
        return NoiseModel(self.tag, p)


@dataclass(frozen=True)
class SyndromeRecord:
    """One (QEC) or d+1 (FT) rounds of syndrome bits for a single experiment.

    For FT records the final round is the perfect syndrome recalculated from
    the data readout.  ``both_types`` mirrors the noise model: when False,
    only the Z-type check bits enter the flattened vector.
    """

    rounds: tuple[Syndrome, ...]
    distance: int
    both_types: bool

    def __post_init__(self):
        d = self.distance
        if len(self.rounds) not in (1, d + 1):
            raise ValueError(
                f"record must have 1 (QEC) or {d + 1} (FT) rounds, got {len(self.rounds)}"
            )
        per_type = (d * d - 1) // 2
        for s in self.rounds:
            if len(s.z_checks) != per_type or len(s.x_checks) != per_type:
                raise ValueError("syndrome length does not match the record's distance")

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    def flatten(self) -> np.ndarray:
        """Concatenate rounds into the classifier input bit vector."""
        parts = []
        for s in self.rounds:
            parts.append(s.z_checks)
            if self.both_types:
                parts.append(s.x_checks)
        return np.concatenate(parts).astype(np.uint8)

    @classmethod
    def from_bits(cls, bits, distance: int, both_types: bool) -> "SyndromeRecord":
        """Inverse of :meth:`flatten`."""
        bits = np.asarray(bits, dtype=np.uint8)
        per_type = (distance * distance - 1) // 2
        per_round = 2 * per_type if both_types else per_type
        if bits.size % per_round != 0:
            raise ValueError(f"bit length {bits.size} is not a whole number of rounds")
        rounds = []
        for chunk in bits.reshape(-1, per_round):
            z = chunk[:per_type]
            x = chunk[per_type:] if both_types else np.zeros(per_type, dtype=np.uint8)
            rounds.append(Syndrome(z_checks=z, x_checks=x))
        return cls(rounds=tuple(rounds), distance=distance, both_types=both_types)


# ---------------------------------------------------------------------------
# Data-error sampling (QEC models and the per-round step of the FT models)
# ---------------------------------------------------------------------------


def _sample_data_errors(tag: str, p: float, rng: np.random.Generator, n: int, n_qubits: int):
    """X/Z error bit matrices of shape (n, n_qubits) for one error round."""
    if tag in (CHANNEL_CAPACITY, CHANNEL_CAPACITY_MEAS):
        ex = (rng.random((n, n_qubits)) < p).astype(np.uint8)
        ez = np.zeros_like(ex)
        return ex, ez
    if tag in (DEPOLARIZING, DEPOLARIZING_MEAS):
        return sample_depolarizing_bits(p, rng, (n, n_qubits))
    raise ValueError(f"{tag!r} does not draw i.i.d. data errors")


def sample_depolarizing_bits(p: float, rng: np.random.Generator, shape):
    """Single-qubit depolarizing faults: X, Y, Z each with probability p/3.

    Returns (x_bits, z_bits) arrays of the given shape.
    """
    u = rng.random(shape)
    x = (u < 2.0 * p / 3.0).astype(np.uint8)
    z = ((u >= p / 3.0) & (u < p)).astype(np.uint8)
    return x, z


def sample_qec_error(layout: CodeLayout, model: NoiseModel, rng: np.random.Generator) -> PauliString:
    """Draw one data error under a perfect-measurement (QEC) model."""
    if model.is_ft:
        raise ValueError(f"{model.tag!r} is a fault-tolerance model; QEC model required")
    ex, ez = _sample_data_errors(model.tag, model.p, rng, 1, layout.n_data)
    return PauliString(ex[0], ez[0])


def _syndrome_bits(layout: CodeLayout, ex: np.ndarray, ez: np.ndarray):
    """Exact per-type syndrome bit matrices for batches of errors."""
    sz = (ex @ layout.z_parity.T) & 1
    sx = (ez @ layout.x_parity.T) & 1
    return sz.astype(np.uint8), sx.astype(np.uint8)


def sample_qec_batch(layout: CodeLayout, model: NoiseModel, rng: np.random.Generator, n: int):
    """Batch of QEC experiments: (record bits, X-error bits, Z-error bits)."""
    if model.is_ft:
        raise ValueError(f"{model.tag!r} is a fault-tolerance model; QEC model required")
    ex, ez = _sample_data_errors(model.tag, model.p, rng, n, layout.n_data)
    sz, sx = _syndrome_bits(layout, ex, ez)
    records = np.concatenate([sz, sx], axis=1) if model.both_check_types else sz
    return records, ex, ez


# ---------------------------------------------------------------------------
# Phenomenological fault tolerance: data errors + syndrome-bit flips
# ---------------------------------------------------------------------------


def sample_ft_phenom_batch(
    layout: CodeLayout,
    model: NoiseModel,
    rng: np.random.Generator,
    n: int,
    *,
    data_p: float | None = None,
    meas_p: float | None = None,
):
    """Batch of phenomenological FT experiments.

    d rounds of fresh data errors accumulate onto a running error; each
    round's recorded bits are the exact syndrome of the accumulated error
    with independent flips of probability p; a final perfect round is
    appended.  ``data_p``/``meas_p`` override the shared probability (used by
    tests to isolate the two error sources).
    """
    if model.tag not in (CHANNEL_CAPACITY_MEAS, DEPOLARIZING_MEAS):
        raise ValueError(f"{model.tag!r} is not a phenomenological FT model")
    d = layout.distance
    dp = model.p if data_p is None else data_p
    mp = model.p if meas_p is None else meas_p

    ex = np.zeros((n, layout.n_data), dtype=np.uint8)
    ez = np.zeros_like(ex)
    parts = []
    for _ in range(d):
        dex, dez = _sample_data_errors(model.tag, dp, rng, n, layout.n_data)
        ex ^= dex
        ez ^= dez
        sz, sx = _syndrome_bits(layout, ex, ez)
        sz ^= (rng.random(sz.shape) < mp).astype(np.uint8)
        parts.append(sz)
        if model.both_check_types:
            sx ^= (rng.random(sx.shape) < mp).astype(np.uint8)
            parts.append(sx)
    sz, sx = _syndrome_bits(layout, ex, ez)  # perfect final readout
    parts.append(sz)
    if model.both_check_types:
        parts.append(sx)
    return np.concatenate(parts, axis=1), ex, ez


def sample_ft_phenomenological(
    layout: CodeLayout,
    model: NoiseModel,
    rng: np.random.Generator,
    *,
    data_p: float | None = None,
    meas_p: float | None = None,
) -> tuple[SyndromeRecord, PauliString]:
    """One phenomenological FT experiment: (record, cumulative data error)."""
    records, ex, ez = sample_ft_phenom_batch(
        layout, model, rng, 1, data_p=data_p, meas_p=meas_p
    )
    record = SyndromeRecord.from_bits(records[0], layout.distance, model.both_check_types)
    return record, PauliString(ex[0], ez[0])


# ---------------------------------------------------------------------------
# Circuit-level noise: Pauli-frame simulation of the measurement circuit
# ---------------------------------------------------------------------------

# Non-identity two-qubit Paulis as (x_ctl, z_ctl, x_tgt, z_tgt) bit rows;
# the two-qubit depolarizing map picks one of these 15 with probability p/15.
_PAULI_BITS = ((0, 0), (1, 0), (1, 1), (0, 1))  # I, X, Y, Z
TWO_QUBIT_FAULTS = np.array(
    [
        (*_PAULI_BITS[a], *_PAULI_BITS[b])
        for a in range(4)
        for b in range(4)
        if not (a == 0 and b == 0)
    ],
    dtype=np.uint8,
)


def sample_two_qubit_faults(p: float, rng: np.random.Generator, n: int) -> np.ndarray:
    """n draws of the two-qubit depolarizing map as (n, 4) fault-bit rows.

    With probability 1-p a draw is the all-zero row; otherwise one of the 15
    non-identity rows, each with probability p/15.
    """
    mask = (rng.random(n) < p).astype(np.uint8)
    which = rng.integers(0, len(TWO_QUBIT_FAULTS), size=n)
    return TWO_QUBIT_FAULTS[which] * mask[:, None]


@dataclass(frozen=True)
class CircuitSchedule:
    """Gate schedule for one interleaved stabiliser measurement round.

    Data qubits are indexed 0..d^2-1, ancillas d^2..2d^2-2 (Z-check ancillas
    first, in check order, then X-check ancillas).  The four CNOT time steps
    hold (control, target) pairs; Z-checks couple data->ancilla, X-checks
    ancilla->data.  ``prep_steps``/``meas_steps`` give each ancilla's
    preparation and measurement slot on the time axis 0..5 (CNOT steps are
    slots 1..4); weight-two checks prepare late and measure early.
    """

    distance: int
    n_data: int
    n_ancilla: int
    cnot_steps: tuple[tuple[tuple[int, int], ...], ...]
    z_ancillas: tuple[int, ...]
    x_ancillas: tuple[int, ...]
    prep_steps: tuple[int, ...]
    meas_steps: tuple[int, ...]

    def __post_init__(self):
        for step, gates in enumerate(self.cnot_steps):
            used: set[int] = set()
            for ctl, tgt in gates:
                if ctl in used or tgt in used or ctl == tgt:
                    raise ValueError(f"qubit used twice in CNOT step {step}")
                used.update((ctl, tgt))


# Corner visit orders within a plaquette, as (dr, dc) offsets per CNOT step.
# Z-checks sweep north pair then south pair; X-checks sweep west pair then
# east pair.  The mirrored orders guarantee no data qubit is touched by two
# checks in the same step (diagonal plaquettes share a colour).
_Z_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))
_X_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))


def build_schedule(layout: CodeLayout) -> CircuitSchedule:
    """The fixed four-step CNOT interleaving for one measurement round."""
    d = layout.distance
    n_data = layout.n_data
    n_z = layout.n_z_checks
    z_anc = tuple(n_data + i for i in range(n_z))
    x_anc = tuple(n_data + n_z + j for j in range(layout.n_x_checks))

    steps: list[list[tuple[int, int]]] = [[] for _ in range(4)]
    first_gate = {}
    last_gate = {}

    def add_gates(coords, ancillas, order, ancilla_is_control):
        for anc, (r, c) in zip(ancillas, coords):
            for t, (dr, dc) in enumerate(order):
                rr, cc = r + dr, c + dc
                if not (0 <= rr < d and 0 <= cc < d):
                    continue
                data = rr * d + cc
                steps[t].append((anc, data) if ancilla_is_control else (data, anc))
                first_gate.setdefault(anc, t + 1)
                last_gate[anc] = t + 1

    add_gates(layout.z_check_coords, z_anc, _Z_ORDER, ancilla_is_control=False)
    add_gates(layout.x_check_coords, x_anc, _X_ORDER, ancilla_is_control=True)

    ancillas = z_anc + x_anc
    return CircuitSchedule(
        distance=d,
        n_data=n_data,
        n_ancilla=len(ancillas),
        cnot_steps=tuple(tuple(sorted(s)) for s in steps),
        z_ancillas=z_anc,
        x_ancillas=x_anc,
        prep_steps=tuple(first_gate[a] - 1 for a in ancillas),
        meas_steps=tuple(last_gate[a] + 1 for a in ancillas),
    )


def _circuit_round_batch(
    schedule: CircuitSchedule,
    p: float,
    fx: np.ndarray,
    fz: np.ndarray,
    rng: np.random.Generator,
):
    """Advance Pauli frames (n, n_data+n_ancilla) through one noisy round.

    Frame conventions: a CNOT spreads the X part of the control onto the
    target and the Z part of the target onto the control.  X-type ancillas
    are prepared and measured through a basis change, so their preparation
    failures and readout act on the Z component; Z-type ancillas use the X
    component.  Returns the measured (z_checks, x_checks) bit matrices.
    """
    n = fx.shape[0]
    z_anc = list(schedule.z_ancillas)
    x_anc = list(schedule.x_ancillas)

    # Fresh ancilla preparation; failures give the -1 eigenstate.
    fx[:, schedule.n_data :] = 0
    fz[:, schedule.n_data :] = 0
    if p > 0:
        fx[:, z_anc] ^= (rng.random((n, len(z_anc))) < p).astype(np.uint8)
        fz[:, x_anc] ^= (rng.random((n, len(x_anc))) < p).astype(np.uint8)

    for gates in schedule.cnot_steps:
        ctl = np.fromiter((g[0] for g in gates), dtype=np.intp)
        tgt = np.fromiter((g[1] for g in gates), dtype=np.intp)
        fx[:, tgt] ^= fx[:, ctl]
        fz[:, ctl] ^= fz[:, tgt]
        if p > 0:
            for (c, t) in gates:
                fault = sample_two_qubit_faults(p, rng, n)
                fx[:, c] ^= fault[:, 0]
                fz[:, c] ^= fault[:, 1]
                fx[:, t] ^= fault[:, 2]
                fz[:, t] ^= fault[:, 3]

    mz = fx[:, z_anc].copy()
    mx = fz[:, x_anc].copy()
    if p > 0:
        mz ^= (rng.random(mz.shape) < p).astype(np.uint8)
        mx ^= (rng.random(mx.shape) < p).astype(np.uint8)
    # Measured ancillas leave the round with no meaningful frame.
    fx[:, schedule.n_data :] = 0
    fz[:, schedule.n_data :] = 0
    return mz, mx


def simulate_circuit_round(
    layout: CodeLayout,
    schedule: CircuitSchedule,
    p: float,
    frame: PauliString,
    rng: np.random.Generator,
) -> tuple[Syndrome, PauliString]:
    """One noisy measurement round starting from the given Pauli frame.

    The frame covers data plus ancilla qubits; ancillas are re-prepared at
    the start of the round, and come back cleared in the returned frame.
    """
    if schedule.distance != layout.distance:
        raise ValueError(
            f"schedule is for d={schedule.distance}, layout is d={layout.distance}"
        )
    n_all = schedule.n_data + schedule.n_ancilla
    if len(frame) != n_all:
        raise ValueError(f"frame must cover {n_all} qubits, got {len(frame)}")
    fx = frame.x_bits.copy().reshape(1, -1)
    fz = frame.z_bits.copy().reshape(1, -1)
    mz, mx = _circuit_round_batch(schedule, p, fx, fz, rng)
    return Syndrome(z_checks=mz[0], x_checks=mx[0]), PauliString(fx[0], fz[0])


def sample_circuit_batch(layout: CodeLayout, model: NoiseModel, rng: np.random.Generator, n: int):
    """Batch of circuit-noise FT experiments (record bits, X errors, Z errors)."""
    if model.tag != CIRCUIT:
        raise ValueError(f"{model.tag!r} is not the circuit noise model")
    schedule = _schedule_for(layout)
    d = layout.distance
    n_all = schedule.n_data + schedule.n_ancilla
    fx = np.zeros((n, n_all), dtype=np.uint8)
    fz = np.zeros((n, n_all), dtype=np.uint8)
    parts = []
    for _ in range(d):
        mz, mx = _circuit_round_batch(schedule, model.p, fx, fz, rng)
        parts.extend((mz, mx))
    ex = fx[:, : layout.n_data].copy()
    ez = fz[:, : layout.n_data].copy()
    sz, sx = _syndrome_bits(layout, ex, ez)  # stabilisers recalculated from data readout
    parts.extend((sz, sx))
    return np.concatenate(parts, axis=1), ex, ez


def run_ft_circuit_experiment(
    layout: CodeLayout, p: float, rng: np.random.Generator
) -> tuple[SyndromeRecord, PauliString]:
    """d noisy circuit rounds plus the perfect reconstructed round."""
    records, ex, ez = sample_circuit_batch(layout, NoiseModel(CIRCUIT, p), rng, 1)
    record = SyndromeRecord.from_bits(records[0], layout.distance, both_types=True)
    return record, PauliString(ex[0], ez[0])


_SCHEDULES: dict[int, CircuitSchedule] = {}


def _schedule_for(layout: CodeLayout) -> CircuitSchedule:
    sched = _SCHEDULES.get(layout.distance)
    if sched is None:
        sched = _SCHEDULES.setdefault(layout.distance, build_schedule(layout))
    return sched


# ---------------------------------------------------------------------------
# Unified experiment sampling
# ---------------------------------------------------------------------------


def sample_experiment_batch(layout: CodeLayout, model: NoiseModel, rng: np.random.Generator, n: int):
    """Dispatch to the model's batch sampler: (record bits, ex, ez)."""
    if model.tag in QEC_TAGS:
        return sample_qec_batch(layout, model, rng, n)
    if model.tag == CIRCUIT:
        return sample_circuit_batch(layout, model, rng, n)
    return sample_ft_phenom_batch(layout, model, rng, n)
