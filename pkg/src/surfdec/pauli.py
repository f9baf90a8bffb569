"""Binary-symplectic Pauli algebra on n qubits.

A Pauli operator is stored as two bit vectors (X part, Z part); a qubit
with both bits set carries a Y. Global phases are discarded everywhere,
which is all that syndrome decoding needs.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_TO_CHAR = {v: k for k, v in _CHAR_TO_BITS.items()}


class PauliString:
    """An n-qubit Pauli operator, phase ignored.

    Immutable: the underlying arrays are marked read-only at construction.
    """

    __slots__ = ("x_bits", "z_bits")

    def __init__(self, x_bits, z_bits):
        x = np.array(x_bits, dtype=np.uint8, copy=True) & 1
        z = np.array(z_bits, dtype=np.uint8, copy=True) & 1
        if x.ndim != 1 or z.ndim != 1 or x.shape != z.shape:
            raise ValueError(
                f"x/z parts must be 1-D and equal length, got shapes {x.shape} and {z.shape}"
            )
        x.setflags(write=False)
        z.setflags(write=False)
        self.x_bits = x
        self.z_bits = z

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_string(cls, label: str) -> "PauliString":
        """Build from a character string like ``"XIZY"`` (qubit 0 first)."""
        try:
            pairs = [_CHAR_TO_BITS[ch] for ch in label.upper()]
        except KeyError as exc:
            raise ValueError(f"invalid Pauli character {exc.args[0]!r} in {label!r}") from None
        x = np.array([p[0] for p in pairs], dtype=np.uint8)
        z = np.array([p[1] for p in pairs], dtype=np.uint8)
        return cls(x, z)

    @classmethod
    def x_on(cls, n: int, qubits: Iterable[int]) -> "PauliString":
        x = np.zeros(n, dtype=np.uint8)
        x[list(qubits)] = 1
        return cls(x, np.zeros(n, dtype=np.uint8))

    @classmethod
    def z_on(cls, n: int, qubits: Iterable[int]) -> "PauliString":
        z = np.zeros(n, dtype=np.uint8)
        z[list(qubits)] = 1
        return cls(np.zeros(n, dtype=np.uint8), z)

    @classmethod
    def single(cls, n: int, kind: str, qubit: int) -> "PauliString":
        """A single-qubit X, Y or Z on the given qubit."""
        xb, zb = _CHAR_TO_BITS[kind.upper()]
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        x[qubit] = xb
        z[qubit] = zb
        return cls(x, z)

    # -- queries -----------------------------------------------------------

    def __len__(self) -> int:
        return self.x_bits.shape[0]

    @property
    def weight(self) -> int:
        """Number of qubits acted on non-trivially."""
        return int(np.count_nonzero(self.x_bits | self.z_bits))

    def is_identity(self) -> bool:
        return self.weight == 0

    def to_string(self) -> str:
        return "".join(
            _BITS_TO_CHAR[(int(x), int(z))] for x, z in zip(self.x_bits, self.z_bits)
        )

    def __repr__(self) -> str:
        return f"PauliString({self.to_string()!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return np.array_equal(self.x_bits, other.x_bits) and np.array_equal(
            self.z_bits, other.z_bits
        )

    def __hash__(self) -> int:
        return hash((self.x_bits.tobytes(), self.z_bits.tobytes()))

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Product of two Pauli operators, phase discarded (bitwise XOR of parts)."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return PauliString(a.x_bits ^ b.x_bits, a.z_bits ^ b.z_bits)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the symplectic inner product a.x·b.z + a.z·b.x is even."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    overlap = int(np.sum(a.x_bits & b.z_bits)) + int(np.sum(a.z_bits & b.x_bits))
    return overlap % 2 == 0
