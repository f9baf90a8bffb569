import numpy as np
import pytest

from surfdec.pauli import PauliString, commutes, multiply


def test_from_string_roundtrip():
    p = PauliString.from_string("IXZY")
    assert p.to_string() == "IXZY"
    assert p.x_bits.tolist() == [0, 1, 0, 1]
    assert p.z_bits.tolist() == [0, 0, 1, 1]
    assert p.weight == 3


def test_invalid_character_rejected():
    with pytest.raises(ValueError, match="invalid Pauli character"):
        PauliString.from_string("XQ")


def test_identity_and_single():
    assert PauliString.identity(5).is_identity()
    y = PauliString.single(3, "Y", 1)
    assert y.to_string() == "IYI"


def test_self_product_is_identity():
    x0 = PauliString.single(4, "X", 0)
    assert multiply(x0, x0).is_identity()


def test_x_times_z_is_y():
    x0 = PauliString.single(1, "X", 0)
    z0 = PauliString.single(1, "Z", 0)
    assert multiply(x0, z0) == PauliString.from_string("Y")
    assert (x0 * z0).to_string() == "Y"


def test_multiply_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        multiply(PauliString.identity(2), PauliString.identity(3))


def test_commutes_single_qubit():
    x0 = PauliString.single(2, "X", 0)
    z0 = PauliString.single(2, "Z", 0)
    z1 = PauliString.single(2, "Z", 1)
    assert not commutes(x0, z0)
    assert commutes(x0, z1)
    assert commutes(x0, x0)


def test_commutes_length_mismatch():
    with pytest.raises(ValueError):
        commutes(PauliString.identity(2), PauliString.identity(3))


def test_bits_are_read_only():
    p = PauliString.single(3, "X", 0)
    with pytest.raises(ValueError):
        p.x_bits[0] = 0


def test_product_is_xor_of_parts():
    rng = np.random.default_rng(7)
    for _ in range(50):
        a = PauliString(rng.integers(0, 2, 10), rng.integers(0, 2, 10))
        b = PauliString(rng.integers(0, 2, 10), rng.integers(0, 2, 10))
        ab = multiply(a, b)
        assert np.array_equal(ab.x_bits, a.x_bits ^ b.x_bits)
        assert np.array_equal(ab.z_bits, a.z_bits ^ b.z_bits)
        assert multiply(ab, b) == a
