"""Decoders built on the code geometry.

* Pure-error table and the *simple decoder*: every syndrome bit owns a fixed
  error chain running from its check to a boundary, so any syndrome can be
  matched by the product of the chains of its set bits.  Stripping that pure
  error from accumulated noise leaves a zero-syndrome residual whose logical
  class is the classification target used throughout the package.
* Partial lookup table (PLUT): maps seen inputs to their modal class,
  returning I on misses.
* Minimum-weight perfect matching: defects (syndrome changes) are paired to
  each other or to a boundary so that the summed chain length is minimal.
  The pairing is found exactly by dynamic programming over defect subsets up
  to a configurable cap, with a greedy fallback beyond it.  X and Z errors
  are matched separately, so a Y counts as two independent defect pairs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .code import CodeLayout, LogicalClass, Syndrome, logical_class, syndrome_of
from .noise import SyndromeRecord
from .pauli import PauliString, multiply

BOUNDARY = -1  # matching partner marker for defects matched to the boundary


# ---------------------------------------------------------------------------
# Sector graphs: checks of one type as nodes, data qubits as edges
# ---------------------------------------------------------------------------


class SectorGraph:
    """Shortest-path structure for one check type ('z' or 'x').

    Nodes are the checks of the sector plus a virtual boundary node; every
    data qubit is an edge between the one or two sector checks it touches
    (one -> a boundary edge).  BFS gives the chain-length metric used both
    for pure-error chains and for matching weights, together with the actual
    data-qubit chains realizing each shortest path.
    """

    def __init__(self, layout: CodeLayout, sector: str):
        if sector not in ("z", "x"):
            raise ValueError(f"sector must be 'z' or 'x', got {sector!r}")
        supports = layout.z_stabilisers if sector == "z" else layout.x_stabilisers
        self.layout = layout
        self.sector = sector
        self.n_checks = len(supports)

        touching: list[list[int]] = [[] for _ in range(layout.n_data)]
        for i, sup in enumerate(supports):
            for q in sup:
                touching[q].append(i)

        boundary = self.n_checks
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_checks + 1)]
        for q, checks in enumerate(touching):
            if len(checks) == 2:
                a, b = checks
                adj[a].append((b, q))
                adj[b].append((a, q))
            elif len(checks) == 1:
                adj[checks[0]].append((boundary, q))
                adj[boundary].append((checks[0], q))
            else:  # every data qubit touches 1 or 2 checks of each type
                raise AssertionError(f"data qubit {q} touches {len(checks)} {sector}-checks")
        for lst in adj:
            lst.sort()  # deterministic tie-breaking: lower check, then lower qubit

        self._adj = adj
        self._boundary = boundary

        # Boundary-to-check distances and chains (multi-source BFS).
        bdist, bparent = self._bfs(boundary, skip=None)
        self.boundary_dist = np.array(
            [bdist[i] for i in range(self.n_checks)], dtype=np.int64
        )
        self.boundary_chain = tuple(
            self._walk(bparent, i, boundary) for i in range(self.n_checks)
        )

        # Pairwise check distances and chains, avoiding the boundary node;
        # routing via the boundary is the matcher's job (two boundary matches).
        self.dist = np.zeros((self.n_checks, self.n_checks), dtype=np.int64)
        self._pair_chain: list[list[tuple[int, ...]]] = []
        for i in range(self.n_checks):
            dist, parent = self._bfs(i, skip=boundary)
            row = []
            for j in range(self.n_checks):
                self.dist[i, j] = dist[j]
                row.append(self._walk(parent, j, i))
            self._pair_chain.append(row)

    def _bfs(self, source: int, skip: int | None):
        dist = {source: 0}
        parent: dict[int, tuple[int, int]] = {}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v, q in self._adj[u]:
                if v == skip or v in dist:
                    continue
                dist[v] = dist[u] + 1
                parent[v] = (u, q)
                queue.append(v)
        return dist, parent

    @staticmethod
    def _walk(parent, node: int, source: int) -> tuple[int, ...]:
        qubits = []
        while node != source:
            node, q = parent[node]
            qubits.append(q)
        return tuple(reversed(qubits))

    def pair_chain(self, i: int, j: int) -> tuple[int, ...]:
        """Data qubits of a shortest chain between two checks."""
        return self._pair_chain[i][j]


_SECTOR_GRAPHS: dict[tuple[int, str], SectorGraph] = {}


def sector_graph(layout: CodeLayout, sector: str) -> SectorGraph:
    key = (layout.distance, sector)
    graph = _SECTOR_GRAPHS.get(key)
    if graph is None:
        graph = _SECTOR_GRAPHS.setdefault(key, SectorGraph(layout, sector))
    return graph


# ---------------------------------------------------------------------------
# Pure errors and the simple decoder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PureErrorTable:
    """Per-syndrome-bit error chains: row i of ``chains_x`` is the X chain
    whose syndrome is exactly Z-check bit i (``chains_z`` likewise for
    X-check bits and Z chains)."""

    chains_x: np.ndarray
    chains_z: np.ndarray

    def __len__(self) -> int:
        return self.chains_x.shape[0] + self.chains_z.shape[0]

    def chain_for_z_check(self, i: int) -> PauliString:
        return PauliString(self.chains_x[i], np.zeros_like(self.chains_x[i]))

    def chain_for_x_check(self, j: int) -> PauliString:
        return PauliString(np.zeros_like(self.chains_z[j]), self.chains_z[j])


def build_pure_error_table(layout: CodeLayout) -> PureErrorTable:
    """Shortest boundary chain for every check bit of both types."""

    def chains(sector: str) -> np.ndarray:
        graph = sector_graph(layout, sector)
        rows = np.zeros((graph.n_checks, layout.n_data), dtype=np.uint8)
        for i, chain in enumerate(graph.boundary_chain):
            rows[i, list(chain)] = 1
        rows.setflags(write=False)
        return rows

    return PureErrorTable(chains_x=chains("z"), chains_z=chains("x"))


def simple_decode(table: PureErrorTable, s: Syndrome) -> PauliString:
    """Product of the pure-error chains of all set syndrome bits.

    The result reproduces the syndrome exactly: syndrome_of(result) == s.
    """
    if len(s.z_checks) != table.chains_x.shape[0] or len(s.x_checks) != table.chains_z.shape[0]:
        raise ValueError("syndrome length does not match the pure-error table")
    x = (s.z_checks @ table.chains_x) & 1
    z = (s.x_checks @ table.chains_z) & 1
    return PauliString(x.astype(np.uint8), z.astype(np.uint8))


def label_of_error(layout: CodeLayout, table: PureErrorTable, e: PauliString) -> LogicalClass:
    """Logical class of an error after stripping its pure error.

    This is the residual left once the simple decoder's correction is
    applied, i.e. the classification target a decoder must reproduce.
    """
    residual = multiply(e, simple_decode(table, syndrome_of(layout, e)))
    return logical_class(layout, residual)


def labels_batch(layout: CodeLayout, table: PureErrorTable, ex: np.ndarray, ez: np.ndarray) -> np.ndarray:
    """Vectorized label_of_error over error-bit matrices (n, n_data).

    Returns uint8 class indices in the fixed order I, X, Z, Y.
    """
    sz = (ex @ layout.z_parity.T) & 1
    sx = (ez @ layout.x_parity.T) & 1
    rx = ex ^ ((sz @ table.chains_x) & 1)
    rz = ez ^ ((sx @ table.chains_z) & 1)
    x_flip = (rx @ layout.logical_z.z_bits) & 1
    z_flip = (rz @ layout.logical_x.x_bits) & 1
    return (x_flip + 2 * z_flip).astype(np.uint8)


# ---------------------------------------------------------------------------
# Partial lookup table
# ---------------------------------------------------------------------------


@dataclass
class PlutDecoder:
    """Flattened input bits -> modal logical class; unseen inputs decode to I."""

    input_bits: int
    table: dict[bytes, int]

    def decode_batch(self, records: np.ndarray) -> np.ndarray:
        table = self.table
        return np.fromiter(
            (table.get(row.tobytes(), 0) for row in np.ascontiguousarray(records, dtype=np.uint8)),
            dtype=np.uint8,
            count=len(records),
        )


def plut_build(dataset: Mapping[bytes, np.ndarray], input_bits: int) -> PlutDecoder:
    """Build from a mapping of input keys to per-class count histograms.

    Ties in a histogram resolve to the lowest class index, matching the
    classifier's tie-break.
    """
    table = {}
    for key, counts in dataset.items():
        if len(key) != input_bits:
            raise ValueError(f"key length {len(key)} != input bits {input_bits}")
        table[key] = int(np.argmax(counts))
    return PlutDecoder(input_bits=input_bits, table=table)


def plut_decode(plut: PlutDecoder, bits) -> LogicalClass:
    key = np.asarray(bits, dtype=np.uint8).tobytes()
    if len(key) != plut.input_bits:
        raise ValueError(f"input has {len(key)} bits, table stores {plut.input_bits}")
    return LogicalClass(plut.table.get(key, 0))


# ---------------------------------------------------------------------------
# Minimum-weight perfect matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DefectGraph:
    """Defects of one sector with pairwise and boundary matching weights.

    A defect is (check index, round layer); QEC records contribute layer 0
    only, FT records one layer per consecutive-round difference.  Pairwise
    weight is spatial chain length plus layer separation; boundary weight is
    spatial only (the final perfect round closes all chains in-window).
    """

    sector: str
    defects: tuple[tuple[int, int], ...]
    weights: np.ndarray
    boundary_weights: np.ndarray


def _sector_layers(record: SyndromeRecord, sector: str) -> np.ndarray:
    rounds = record.rounds
    bits = [r.z_checks if sector == "z" else r.x_checks for r in rounds]
    return np.array(bits, dtype=np.uint8)


def _defects_from_layers(layers: np.ndarray) -> list[tuple[int, int]]:
    diffs = layers.copy()
    diffs[1:] ^= layers[:-1]
    ts, cs = np.nonzero(diffs)
    return [(int(c), int(t)) for t, c in zip(ts, cs)]


def build_defect_graph(layout: CodeLayout, record: SyndromeRecord, sector: str) -> DefectGraph:
    graph = sector_graph(layout, sector)
    defects = _defects_from_layers(_sector_layers(record, sector))
    k = len(defects)
    weights = np.zeros((k, k), dtype=np.int64)
    for a in range(k):
        ca, ta = defects[a]
        for b in range(a + 1, k):
            cb, tb = defects[b]
            weights[a, b] = weights[b, a] = graph.dist[ca, cb] + abs(ta - tb)
    bweights = np.array([graph.boundary_dist[c] for c, _ in defects], dtype=np.int64)
    return DefectGraph(
        sector=sector, defects=tuple(defects), weights=weights, boundary_weights=bweights
    )


@dataclass(frozen=True)
class MatchingSolution:
    """A perfect pairing-with-boundary over defect indices."""

    pairs: tuple[tuple[int, int], ...]
    to_boundary: tuple[int, ...]
    weight: int
    exact: bool


def min_weight_matching(weights: np.ndarray, boundary_weights: np.ndarray, exact_cap: int = 20) -> MatchingSolution:
    """Minimum-weight pairing of defects with each other or the boundary.

    Exact subset dynamic programming: the lowest-indexed live defect is
    matched to the boundary or to each other live defect, and the rest is
    solved recursively with memoization.  Beyond ``exact_cap`` defects a
    greedy nearest-neighbour pass is used instead and the result is flagged
    inexact.
    """
    k = len(boundary_weights)
    if k == 0:
        return MatchingSolution(pairs=(), to_boundary=(), weight=0, exact=True)
    if k > exact_cap:
        return _greedy_matching(weights, boundary_weights)

    w = weights.tolist()
    bw = [int(x) for x in boundary_weights]
    best: dict[int, int] = {0: 0}
    choice: dict[int, tuple] = {}

    def solve(mask: int) -> int:
        cached = best.get(mask)
        if cached is not None:
            return cached
        i = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << i)
        value = bw[i] + solve(rest)
        picked = (i, BOUNDARY)
        mm = rest
        while mm:
            j = (mm & -mm).bit_length() - 1
            mm ^= 1 << j
            cand = w[i][j] + solve(rest ^ (1 << j))
            if cand < value:
                value = cand
                picked = (i, j)
        best[mask] = value
        choice[mask] = picked
        return value

    full = (1 << k) - 1
    total = solve(full)

    pairs = []
    to_boundary = []
    mask = full
    while mask:
        i, j = choice[mask]
        if j == BOUNDARY:
            to_boundary.append(i)
            mask ^= 1 << i
        else:
            pairs.append((i, j))
            mask ^= (1 << i) | (1 << j)
    return MatchingSolution(
        pairs=tuple(pairs), to_boundary=tuple(to_boundary), weight=int(total), exact=True
    )


def _greedy_matching(weights: np.ndarray, boundary_weights: np.ndarray) -> MatchingSolution:
    """Nearest-neighbour fallback used above the exact-solver cap."""
    live = sorted(range(len(boundary_weights)))
    pairs = []
    to_boundary = []
    total = 0
    while live:
        best_cost = None
        best_move = None
        for ai, a in enumerate(live):
            cost = int(boundary_weights[a])
            if best_cost is None or cost < best_cost:
                best_cost, best_move = cost, (a, BOUNDARY)
            for b in live[ai + 1 :]:
                cost = int(weights[a, b])
                if cost < best_cost:
                    best_cost, best_move = cost, (a, b)
        a, b = best_move
        total += best_cost
        if b == BOUNDARY:
            to_boundary.append(a)
            live.remove(a)
        else:
            pairs.append((a, b))
            live.remove(a)
            live.remove(b)
    return MatchingSolution(
        pairs=tuple(pairs), to_boundary=tuple(to_boundary), weight=total, exact=False
    )


@dataclass(frozen=True)
class MwpmResult:
    correction: PauliString
    logical: LogicalClass
    weight: int
    exact: bool


class MwpmDecoder:
    """Matching decoder for one layout, with per-sector memoisation.

    X and Z errors are decoded independently: the Z-check sector yields an
    X-type correction and the X-check sector a Z-type one.  Sector results
    are cached on the raw per-round sector bits, which keeps Monte Carlo
    benchmarking cheap at small distances.
    """

    def __init__(self, layout: CodeLayout, exact_cap: int = 20):
        self.layout = layout
        self.exact_cap = exact_cap
        self.table = build_pure_error_table(layout)
        self._graphs = {"z": sector_graph(layout, "z"), "x": sector_graph(layout, "x")}
        self._cache: dict[tuple[str, bytes], tuple[bytes, int, int, bool]] = {}

    def _decode_sector(self, sector: str, layers: np.ndarray):
        """-> (correction bits, decoder flip bit, matching weight, exact)."""
        key = (sector, layers.tobytes())
        hit = self._cache.get(key)
        if hit is not None:
            return hit

        graph = self._graphs[sector]
        defects = _defects_from_layers(layers)
        k = len(defects)
        weights = np.zeros((k, k), dtype=np.int64)
        for a in range(k):
            ca, ta = defects[a]
            for b in range(a + 1, k):
                cb, tb = defects[b]
                weights[a, b] = weights[b, a] = graph.dist[ca, cb] + abs(ta - tb)
        bweights = np.array([graph.boundary_dist[c] for c, _ in defects], dtype=np.int64)
        solution = min_weight_matching(weights, bweights, self.exact_cap)

        corr = np.zeros(self.layout.n_data, dtype=np.uint8)
        for a, b in solution.pairs:
            chain = graph.pair_chain(defects[a][0], defects[b][0])
            corr[list(chain)] ^= 1
        for a in solution.to_boundary:
            chain = graph.boundary_chain[defects[a][0]]
            corr[list(chain)] ^= 1

        # Residual of the correction against the canonical pure error of the
        # final (perfect) round; its parity across the crossing logical
        # support is this sector's contribution to the decoder's class.
        chains = self.table.chains_x if sector == "z" else self.table.chains_z
        pure = (layers[-1] @ chains) & 1
        logical_bits = (
            self.layout.logical_z.z_bits if sector == "z" else self.layout.logical_x.x_bits
        )
        flip = int(((corr ^ pure) @ logical_bits) & 1)

        result = (corr.tobytes(), flip, solution.weight, solution.exact)
        self._cache[key] = result
        return result

    def decode_record(self, record: SyndromeRecord) -> MwpmResult:
        if record.distance != self.layout.distance:
            raise ValueError("record distance does not match decoder layout")
        corr_x, x_flip, weight, exact = self._decode_sector("z", _sector_layers(record, "z"))
        if record.both_types:
            corr_z, z_flip, w2, e2 = self._decode_sector("x", _sector_layers(record, "x"))
            weight += w2
            exact = exact and e2
        else:
            corr_z, z_flip = bytes(self.layout.n_data), 0
        correction = PauliString(
            np.frombuffer(corr_x, dtype=np.uint8), np.frombuffer(corr_z, dtype=np.uint8)
        )
        return MwpmResult(
            correction=correction,
            logical=LogicalClass.from_flips(x_flip, z_flip),
            weight=weight,
            exact=exact,
        )

    def decode_batch(self, records: np.ndarray, n_rounds: int, both_types: bool) -> np.ndarray:
        """Class indices for flattened record rows (harness fast path)."""
        per_type = (self.layout.distance ** 2 - 1) // 2
        per_round = 2 * per_type if both_types else per_type
        n = len(records)
        layers = np.ascontiguousarray(records, dtype=np.uint8).reshape(n, n_rounds, per_round)
        out = np.zeros(n, dtype=np.uint8)
        for i in range(n):
            _, x_flip, _, _ = self._decode_sector("z", layers[i, :, :per_type])
            z_flip = 0
            if both_types:
                _, z_flip, _, _ = self._decode_sector("x", layers[i, :, per_type:])
            out[i] = x_flip + 2 * z_flip
        return out


_MWPM_DECODERS: dict[tuple[int, int], MwpmDecoder] = {}


def mwpm_decoder(layout: CodeLayout, exact_cap: int = 20) -> MwpmDecoder:
    key = (layout.distance, exact_cap)
    dec = _MWPM_DECODERS.get(key)
    if dec is None:
        dec = _MWPM_DECODERS.setdefault(key, MwpmDecoder(layout, exact_cap))
    return dec


def mwpm_decode(layout: CodeLayout, record: SyndromeRecord, exact_cap: int = 20) -> MwpmResult:
    """Decode one record by minimum-weight perfect matching."""
    return mwpm_decoder(layout, exact_cap).decode_record(record)
