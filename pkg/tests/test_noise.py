import numpy as np
import pytest

from surfdec.code import build_layout, syndrome_of
from surfdec.noise import (
    ALL_TAGS,
    NoiseModel,
    SyndromeRecord,
    build_schedule,
    run_ft_circuit_experiment,
    sample_depolarizing_bits,
    sample_experiment_batch,
    sample_ft_phenom_batch,
    sample_ft_phenomenological,
    sample_qec_error,
    sample_two_qubit_faults,
    simulate_circuit_round,
)
from surfdec.pauli import PauliString


def test_model_validation():
    with pytest.raises(ValueError, match="unknown noise model"):
        NoiseModel("gaussian", 0.1)
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        NoiseModel("depolarizing", 1.5)


@pytest.mark.parametrize(
    "tag,d,input_size,hidden,output",
    [
        ("channel-capacity", 3, 4, 10, 2),
        ("channel-capacity", 5, 12, 90, 2),
        ("channel-capacity", 7, 24, 512, 2),
        ("depolarizing", 3, 8, 128, 4),
        ("depolarizing", 5, 24, 660, 4),
        ("depolarizing", 7, 48, 256, 4),
        ("channel-capacity-meas", 3, 16, 768, 4),
        ("depolarizing-meas", 3, 32, 768, 4),
        ("circuit", 3, 32, 704, 4),
    ],
)
def test_scenario_sizes(tag, d, input_size, hidden, output):
    model = NoiseModel(tag, 0.1)
    assert model.input_size(d) == input_size
    assert model.hidden_default(d) == hidden
    assert model.output_size() == output


def test_hidden_default_missing():
    with pytest.raises(ValueError, match="no default hidden-layer size"):
        NoiseModel("circuit", 0.1).hidden_default(5)


@pytest.mark.parametrize("tag", ALL_TAGS)
def test_p_zero_is_trivial(tag, layout3):
    records, ex, ez = sample_experiment_batch(layout3, NoiseModel(tag, 0.0),
                                              np.random.default_rng(1), 1000)
    assert not records.any()
    assert not ex.any() and not ez.any()


def test_channel_capacity_p_one(layout3):
    e = sample_qec_error(layout3, NoiseModel("channel-capacity", 1.0), np.random.default_rng(0))
    assert e.x_bits.all() and not e.z_bits.any()


def test_qec_sampler_rejects_ft_model(layout3):
    with pytest.raises(ValueError, match="fault-tolerance model"):
        sample_qec_error(layout3, NoiseModel("circuit", 0.1), np.random.default_rng(0))


def test_phenom_sampler_rejects_other_models(layout3):
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match="not a phenomenological"):
        sample_ft_phenomenological(layout3, NoiseModel("depolarizing", 0.1), rng)
    with pytest.raises(ValueError, match="not a phenomenological"):
        sample_ft_phenomenological(layout3, NoiseModel("circuit", 0.1), rng)


def test_depolarizing_class_frequencies():
    x, z = sample_depolarizing_bits(0.3, np.random.default_rng(3), 10**6)
    f_x = float(((x == 1) & (z == 0)).mean())
    f_y = float(((x == 1) & (z == 1)).mean())
    f_z = float(((x == 0) & (z == 1)).mean())
    for f in (f_x, f_y, f_z):
        assert abs(f - 0.1) < 0.002


def test_two_qubit_channel_frequencies():
    n = 10**6
    faults = sample_two_qubit_faults(0.15, np.random.default_rng(7), n)
    uniq, counts = np.unique(faults, axis=0, return_counts=True)
    nonid = [c / n for u, c in zip(uniq, counts) if u.any()]
    assert len(nonid) == 15
    for f in nonid:
        assert abs(f - 0.01) < 0.001


@pytest.mark.parametrize("tag,length", [("channel-capacity-meas", 16), ("depolarizing-meas", 32)])
def test_phenom_record_lengths(tag, length, layout3):
    record, _ = sample_ft_phenomenological(layout3, NoiseModel(tag, 0.05),
                                           np.random.default_rng(2))
    assert record.n_rounds == 4
    assert record.flatten().shape == (length,)


def test_record_roundtrip(layout3):
    record, _ = sample_ft_phenomenological(layout3, NoiseModel("depolarizing-meas", 0.1),
                                           np.random.default_rng(5))
    back = SyndromeRecord.from_bits(record.flatten(), 3, both_types=True)
    assert back == record


def test_record_round_count_validation(layout3):
    s = syndrome_of(layout3, PauliString.identity(9))
    with pytest.raises(ValueError, match="rounds"):
        SyndromeRecord(rounds=(s, s), distance=3, both_types=True)


@pytest.mark.parametrize("tag", ["channel-capacity-meas", "depolarizing-meas", "circuit"])
def test_final_round_is_exact_readout(tag, layout3):
    """The appended round must be the true syndrome of the cumulative error."""
    model = NoiseModel(tag, 0.08)
    records, ex, ez = sample_experiment_batch(layout3, model, np.random.default_rng(17), 10_000)
    sz = (ex @ layout3.z_parity.T) & 1
    per = 4 if not model.both_check_types else 8
    final = records[:, -per:]
    assert np.array_equal(final[:, :4], sz)
    if model.both_check_types:
        sx = (ez @ layout3.x_parity.T) & 1
        assert np.array_equal(final[:, 4:], sx)


def test_phenom_flip_rate_with_perfect_data(layout3):
    """Forcing the data errors off isolates the measurement flips at rate p."""
    p = 0.08
    records, ex, ez = sample_ft_phenom_batch(
        layout3, NoiseModel("channel-capacity-meas", p),
        np.random.default_rng(11), 130_000, data_p=0.0,
    )
    assert not ex.any() and not ez.any()
    noisy = records[:, :-4]  # drop the perfect final round
    sigma = np.sqrt(p * (1 - p) / noisy.size)
    assert abs(float(noisy.mean()) - p) < 3 * sigma


# ---------------------------------------------------------------------------
# Circuit-level simulation
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("d", [3, 5])
def test_schedule_invariants(d):
    layout = build_layout(d)
    sched = build_schedule(layout)
    # one ancilla per check, every weight-w check has w interactions
    gate_count = {}
    for gates in sched.cnot_steps:
        for ctl, tgt in gates:
            anc = ctl if ctl >= sched.n_data else tgt
            gate_count[anc] = gate_count.get(anc, 0) + 1
    for i, sup in enumerate(layout.z_stabilisers):
        assert gate_count[sched.z_ancillas[i]] == len(sup)
    for j, sup in enumerate(layout.x_stabilisers):
        assert gate_count[sched.x_ancillas[j]] == len(sup)
    # prep precedes first gate, measurement follows last gate
    assert all(0 <= s <= 3 for s in sched.prep_steps)
    assert all(2 <= s <= 5 for s in sched.meas_steps)


def test_schedule_rejects_conflicts(layout3):
    sched = build_schedule(layout3)
    bad = (((0, 9), (0, 10)),) + sched.cnot_steps[1:]
    with pytest.raises(ValueError, match="used twice"):
        type(sched)(
            distance=sched.distance, n_data=sched.n_data, n_ancilla=sched.n_ancilla,
            cnot_steps=bad, z_ancillas=sched.z_ancillas, x_ancillas=sched.x_ancillas,
            prep_steps=sched.prep_steps, meas_steps=sched.meas_steps,
        )


def test_circuit_round_p0_matches_syndrome_oracle(layout3):
    """Noiseless propagation of any injected single-qubit data Pauli must read
    out exactly syndrome_of of that Pauli and leave the data frame alone."""
    sched = build_schedule(layout3)
    rng = np.random.default_rng(0)
    n_all = sched.n_data + sched.n_ancilla
    for q in range(layout3.n_data):
        for kind in "XYZ":
            frame = PauliString.single(n_all, kind, q)
            syn, out = simulate_circuit_round(layout3, sched, 0.0, frame, rng)
            assert syn == syndrome_of(layout3, PauliString.single(9, kind, q))
            assert np.array_equal(out.x_bits[:9], frame.x_bits[:9])
            assert np.array_equal(out.z_bits[:9], frame.z_bits[:9])
            assert not out.x_bits[9:].any() and not out.z_bits[9:].any()


def test_circuit_round_hand_propagated_example(layout3):
    # A data X on the central qubit sits in the support of exactly the two
    # interior Z-checks; at p=0 their ancillas and no others must read 1.
    sched = build_schedule(layout3)
    frame = PauliString.single(sched.n_data + sched.n_ancilla, "X", 4)
    syn, _ = simulate_circuit_round(layout3, sched, 0.0, frame, np.random.default_rng(0))
    expected = [1 if 4 in sup else 0 for sup in layout3.z_stabilisers]
    assert syn.z_checks.tolist() == expected
    assert not syn.x_checks.any()


def test_circuit_round_frame_length_check(layout3):
    sched = build_schedule(layout3)
    with pytest.raises(ValueError, match="frame must cover"):
        simulate_circuit_round(layout3, sched, 0.0, PauliString.identity(9),
                               np.random.default_rng(0))


def test_circuit_schedule_layout_mismatch(layout5):
    sched3 = build_schedule(build_layout(3))
    with pytest.raises(ValueError, match="schedule is for"):
        simulate_circuit_round(layout5, sched3, 0.0, PauliString.identity(17),
                               np.random.default_rng(0))


def test_circuit_rounds_consistent_at_p0(layout3):
    """With a pre-seeded data error and no noise, every round reads the same."""
    sched = build_schedule(layout3)
    rng = np.random.default_rng(9)
    n_all = sched.n_data + sched.n_ancilla
    frame = PauliString(
        np.concatenate([rng.integers(0, 2, 9, dtype=np.uint8), np.zeros(8, np.uint8)]),
        np.concatenate([rng.integers(0, 2, 9, dtype=np.uint8), np.zeros(8, np.uint8)]),
    )
    rounds = []
    for _ in range(3):
        syn, frame = simulate_circuit_round(layout3, sched, 0.0, frame, rng)
        rounds.append(syn)
    assert rounds[0] == rounds[1] == rounds[2]


def test_circuit_experiment_p0(layout3):
    record, err = run_ft_circuit_experiment(layout3, 0.0, np.random.default_rng(4))
    assert record.flatten().shape == (32,)
    assert not record.flatten().any()
    assert err.is_identity()


def test_circuit_experiment_final_round(layout3):
    rng = np.random.default_rng(21)
    for _ in range(300):
        record, err = run_ft_circuit_experiment(layout3, 0.1, rng)
        assert record.rounds[-1] == syndrome_of(layout3, err)
