"""Rotated surface-code geometry, syndrome computation and logical classes.

Conventions (fixed; dataset and model files depend on them):

* Data qubits live on a d x d grid, indexed row-major: qubit (r, c) -> r*d + c.
* A plaquette with top-left data corner (r, c) touches the in-grid subset of
  {(r,c), (r,c+1), (r+1,c), (r+1,c+1)}.  Interior plaquettes (r, c in
  0..d-2) are Z-type when (r+c) is even and X-type otherwise.  Weight-two
  boundary checks sit on the top/bottom edges (X-type) and left/right edges
  (Z-type), at the positions where the interior colouring continues.
* Checks of each type are indexed row-major over plaquette positions
  (r, c in -1..d-1).
* Logical X is X on grid column 0; logical Z is Z on grid row 0 (weight d
  each, one shared qubit).

With this colouring, chains of X errors terminate on the top/bottom
boundaries and chains of Z errors on the left/right ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .pauli import PauliString, commutes

Coord = tuple[int, int]


class LogicalClass(IntEnum):
    """Logical coset label: which logical operator an error acts as.

    The integer value doubles as the class index used by classifier outputs
    (fixed order I, X, Z, Y).
    """

    I = 0
    X = 1
    Z = 2
    Y = 3

    @classmethod
    def from_flips(cls, x_flip: bool | int, z_flip: bool | int) -> "LogicalClass":
        return cls(int(bool(x_flip)) + 2 * int(bool(z_flip)))

    @property
    def x_flip(self) -> bool:
        """Whether the class contains a logical X component."""
        return bool(self.value & 1)

    @property
    def z_flip(self) -> bool:
        return bool(self.value & 2)

    def compose(self, other: "LogicalClass") -> "LogicalClass":
        """Group product modulo phase (bitwise XOR of flip bits)."""
        return LogicalClass(self.value ^ other.value)


@dataclass(frozen=True)
class Syndrome:
    """One round of stabiliser eigenvalue bits.

    ``z_checks`` are the Z-stabiliser outcomes (they detect X errors),
    ``x_checks`` the X-stabiliser outcomes (they detect Z errors).
    """

    z_checks: np.ndarray
    x_checks: np.ndarray

    def __post_init__(self):
        for name in ("z_checks", "x_checks"):
            arr = np.asarray(getattr(self, name), dtype=np.uint8) & 1
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def any(self) -> bool:
        return bool(self.z_checks.any() or self.x_checks.any())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Syndrome):
            return NotImplemented
        return np.array_equal(self.z_checks, other.z_checks) and np.array_equal(
            self.x_checks, other.x_checks
        )


class CodeLayout:
    """Rotated surface code of odd distance d: stabiliser supports, check
    coordinates, logical representatives, and the derived parity matrices.

    Construct through :func:`build_layout`. Immutable after construction.
    """

    def __init__(
        self,
        distance: int,
        z_stabilisers: tuple[tuple[int, ...], ...],
        x_stabilisers: tuple[tuple[int, ...], ...],
        z_check_coords: tuple[Coord, ...],
        x_check_coords: tuple[Coord, ...],
        logical_x: PauliString,
        logical_z: PauliString,
    ):
        self.distance = distance
        self.n_data = distance * distance
        self.z_stabilisers = z_stabilisers
        self.x_stabilisers = x_stabilisers
        self.z_check_coords = z_check_coords
        self.x_check_coords = x_check_coords
        self.logical_x = logical_x
        self.logical_z = logical_z
        # Parity matrices: row i of z_parity is the support of Z-check i.
        self.z_parity = _support_matrix(z_stabilisers, self.n_data)
        self.x_parity = _support_matrix(x_stabilisers, self.n_data)

    @property
    def n_z_checks(self) -> int:
        return len(self.z_stabilisers)

    @property
    def n_x_checks(self) -> int:
        return len(self.x_stabilisers)

    def qubit_index(self, r: int, c: int) -> int:
        return r * self.distance + c

    def qubit_coord(self, q: int) -> Coord:
        return divmod(q, self.distance)

    def stabiliser_pauli(self, kind: str, index: int) -> PauliString:
        """The stabiliser as a PauliString ('z' -> Z-type, 'x' -> X-type)."""
        if kind == "z":
            return PauliString.z_on(self.n_data, self.z_stabilisers[index])
        if kind == "x":
            return PauliString.x_on(self.n_data, self.x_stabilisers[index])
        raise ValueError(f"check kind must be 'z' or 'x', got {kind!r}")

    def __repr__(self) -> str:
        return f"CodeLayout(d={self.distance})"


def _support_matrix(supports, n_data: int) -> np.ndarray:
    m = np.zeros((len(supports), n_data), dtype=np.uint8)
    for i, qs in enumerate(supports):
        m[i, list(qs)] = 1
    m.setflags(write=False)
    return m


def _plaquette_kind(r: int, c: int) -> str:
    # Interior colouring, extended to the boundary rows/columns.
    return "z" if (r + c) % 2 == 0 else "x"


def build_layout(d: int) -> CodeLayout:
    """Construct the rotated surface code of odd distance d >= 3."""
    if d < 3 or d % 2 == 0:
        raise ValueError(f"distance must be an odd integer >= 3, got {d}")

    z_supports: list[tuple[int, ...]] = []
    x_supports: list[tuple[int, ...]] = []
    z_coords: list[Coord] = []
    x_coords: list[Coord] = []

    for r in range(-1, d):
        for c in range(-1, d):
            corners = [
                (r + dr, c + dc)
                for dr in (0, 1)
                for dc in (0, 1)
                if 0 <= r + dr < d and 0 <= c + dc < d
            ]
            if len(corners) < 2:
                continue  # lattice corners would give weight-1 checks
            kind = _plaquette_kind(r, c)
            interior = 0 <= r < d - 1 and 0 <= c < d - 1
            if not interior:
                # Boundary semicircles exist only where the boundary hosts
                # that check type: X on top/bottom rows, Z on left/right.
                on_top_bottom = r == -1 or r == d - 1
                if on_top_bottom and kind != "x":
                    continue
                if not on_top_bottom and kind != "z":
                    continue
            support = tuple(sorted(rr * d + cc for rr, cc in corners))
            if kind == "z":
                z_supports.append(support)
                z_coords.append((r, c))
            else:
                x_supports.append(support)
                x_coords.append((r, c))

    logical_x = PauliString.x_on(d * d, [r * d for r in range(d)])  # column 0
    logical_z = PauliString.z_on(d * d, list(range(d)))  # row 0

    layout = CodeLayout(
        distance=d,
        z_stabilisers=tuple(z_supports),
        x_stabilisers=tuple(x_supports),
        z_check_coords=tuple(z_coords),
        x_check_coords=tuple(x_coords),
        logical_x=logical_x,
        logical_z=logical_z,
    )

    n_checks = (d * d - 1) // 2
    assert layout.n_z_checks == n_checks and layout.n_x_checks == n_checks
    return layout


def syndrome_of(layout: CodeLayout, e: PauliString) -> Syndrome:
    """Stabiliser eigenvalue bits of an error: bit i is set iff the error
    anticommutes with stabiliser i."""
    if len(e) != layout.n_data:
        raise ValueError(f"error has length {len(e)}, layout needs {layout.n_data}")
    z_checks = (layout.z_parity @ e.x_bits) & 1
    x_checks = (layout.x_parity @ e.z_bits) & 1
    return Syndrome(z_checks=z_checks, x_checks=x_checks)


def logical_class(layout: CodeLayout, r: PauliString) -> LogicalClass:
    """Coset label of a zero-syndrome Pauli: I, X, Z or Y.

    The x-flip bit is set iff r anticommutes with the logical Z
    representative, the z-flip bit iff it anticommutes with logical X.
    """
    s = syndrome_of(layout, r)
    if s.any():
        raise ValueError(
            "logical_class needs a zero-syndrome operator; strip the pure error first"
        )
    x_flip = not commutes(r, layout.logical_z)
    z_flip = not commutes(r, layout.logical_x)
    return LogicalClass.from_flips(x_flip, z_flip)
