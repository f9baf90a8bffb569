import numpy as np
import pytest

from surfdec.code import LogicalClass, build_layout, logical_class, syndrome_of
from surfdec.pauli import PauliString, commutes, multiply


@pytest.mark.parametrize("d,n_checks", [(3, 4), (5, 12), (7, 24)])
def test_check_counts(d, n_checks):
    layout = build_layout(d)
    assert layout.n_data == d * d
    assert layout.n_z_checks == n_checks
    assert layout.n_x_checks == n_checks


@pytest.mark.parametrize("d", [3, 5, 7])
def test_check_weights(d):
    layout = build_layout(d)
    for sups in (layout.z_stabilisers, layout.x_stabilisers):
        weights = [len(s) for s in sups]
        assert set(weights) <= {2, 4}
        # d-1 weight-two semicircles per type, the rest weight four
        assert weights.count(2) == d - 1
        assert weights.count(4) == (d * d - 1) // 2 - (d - 1)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_stabilisers_commute_pairwise(d):
    layout = build_layout(d)
    # Z-type vs Z-type and X-type vs X-type commute trivially (same letter);
    # mixed pairs need even support overlap.
    overlap = (layout.z_parity @ layout.x_parity.T) % 2
    assert not overlap.any()


@pytest.mark.parametrize("d", [3, 5, 7])
def test_logical_operators(d):
    layout = build_layout(d)
    assert layout.logical_x.weight == d
    assert layout.logical_z.weight == d
    assert not commutes(layout.logical_x, layout.logical_z)
    for i in range(layout.n_z_checks):
        s = layout.stabiliser_pauli("z", i)
        assert commutes(layout.logical_x, s)
        assert commutes(layout.logical_z, s)
    for j in range(layout.n_x_checks):
        s = layout.stabiliser_pauli("x", j)
        assert commutes(layout.logical_x, s)
        assert commutes(layout.logical_z, s)


@pytest.mark.parametrize("d", [2, 4, 1, 0, -3])
def test_bad_distance_rejected(d):
    with pytest.raises(ValueError, match="odd integer"):
        build_layout(d)


def test_identity_has_zero_syndrome(layout3):
    s = syndrome_of(layout3, PauliString.identity(9))
    assert not s.any()


def test_central_x_syndrome(layout3):
    # Independent oracle: count which Z-stabiliser supports contain qubit 4.
    touching = [i for i, sup in enumerate(layout3.z_stabilisers) if 4 in sup]
    assert len(touching) == 2
    s = syndrome_of(layout3, PauliString.single(9, "X", 4))
    assert s.z_checks.sum() == 2
    assert not s.x_checks.any()
    assert [i for i in range(4) if s.z_checks[i]] == touching


def test_logicals_have_zero_syndrome(layout3):
    assert not syndrome_of(layout3, layout3.logical_x).any()
    assert not syndrome_of(layout3, layout3.logical_z).any()


def test_syndrome_length_mismatch(layout3):
    with pytest.raises(ValueError, match="length"):
        syndrome_of(layout3, PauliString.identity(25))


@pytest.mark.parametrize("d", [3, 5, 7])
def test_syndrome_invariant_under_stabilisers(d):
    """syndrome_of(e * s) == syndrome_of(e) for every stabiliser s."""
    layout = build_layout(d)
    rng = np.random.default_rng(d)
    n = 10_000
    ex = rng.integers(0, 2, (n, layout.n_data), dtype=np.uint8)
    ez = rng.integers(0, 2, (n, layout.n_data), dtype=np.uint8)
    sz = (ex @ layout.z_parity.T) & 1
    sx = (ez @ layout.x_parity.T) & 1
    for i in range(layout.n_z_checks):  # Z-stabiliser: flips z-parts
        ez2 = ez ^ layout.z_parity[i]
        assert np.array_equal((ez2 @ layout.x_parity.T) & 1, sx)
    for j in range(layout.n_x_checks):
        ex2 = ex ^ layout.x_parity[j]
        assert np.array_equal((ex2 @ layout.z_parity.T) & 1, sz)


def test_syndrome_linearity(layout5):
    rng = np.random.default_rng(55)
    for _ in range(200):
        a = PauliString(rng.integers(0, 2, 25), rng.integers(0, 2, 25))
        b = PauliString(rng.integers(0, 2, 25), rng.integers(0, 2, 25))
        sab = syndrome_of(layout5, multiply(a, b))
        sa = syndrome_of(layout5, a)
        sb = syndrome_of(layout5, b)
        assert np.array_equal(sab.z_checks, sa.z_checks ^ sb.z_checks)
        assert np.array_equal(sab.x_checks, sa.x_checks ^ sb.x_checks)


def test_logical_class_basics(layout3):
    assert logical_class(layout3, PauliString.identity(9)) == LogicalClass.I
    assert logical_class(layout3, layout3.logical_x) == LogicalClass.X
    assert logical_class(layout3, layout3.logical_z) == LogicalClass.Z
    assert logical_class(layout3, multiply(layout3.logical_x, layout3.logical_z)) == LogicalClass.Y


def test_logical_class_rejects_nonzero_syndrome(layout3):
    with pytest.raises(ValueError, match="zero-syndrome"):
        logical_class(layout3, PauliString.single(9, "X", 4))


def test_logical_class_stabiliser_invariance(layout3):
    for i in range(layout3.n_z_checks):
        r = multiply(layout3.logical_x, layout3.stabiliser_pauli("z", i))
        assert logical_class(layout3, r) == LogicalClass.X
    for j in range(layout3.n_x_checks):
        r = multiply(layout3.logical_x, layout3.stabiliser_pauli("x", j))
        assert logical_class(layout3, r) == LogicalClass.X


def test_logical_class_composition():
    # Pauli group modulo phase: g*g = I, X*Z = Y.
    assert LogicalClass.X.compose(LogicalClass.Z) == LogicalClass.Y
    assert LogicalClass.Y.compose(LogicalClass.X) == LogicalClass.Z
    for g in LogicalClass:
        assert g.compose(g) == LogicalClass.I
        assert g.compose(LogicalClass.I) == g


def test_logical_class_flip_bits():
    assert LogicalClass.from_flips(0, 0) == LogicalClass.I
    assert LogicalClass.from_flips(1, 0) == LogicalClass.X
    assert LogicalClass.from_flips(0, 1) == LogicalClass.Z
    assert LogicalClass.from_flips(1, 1) == LogicalClass.Y
    assert LogicalClass.Y.x_flip and LogicalClass.Y.z_flip
    assert not LogicalClass.Z.x_flip and LogicalClass.Z.z_flip
