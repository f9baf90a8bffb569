"""Benchmark harness: dataset generation, calibration, and decoder sweeps.

Every experiment draws a record plus its ground-truth label (the logical
class of the residual after the simple decoder's pure error is stripped).
A decoder fails a trial when its class disagrees with that label.  Logical
error rates come with Wilson score intervals at z = 3.2905 (99.9%).

Comparisons between decoders share a common random-number stream: each
sampled record batch is fed to every decoder, so differences between
failure counts are not diluted by sampling noise.

File formats are line-oriented text with `# key=value` metadata headers;
they are documented next to their writers below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .code import CodeLayout, build_layout
from .decode import (
    MwpmDecoder,
    PlutDecoder,
    build_pure_error_table,
    labels_batch,
    mwpm_decoder,
    plut_build,
)
from .neural import Network, TrainConfig, TrainingSet, TrainResult, classify_batch, new_network, train_sgd
from .noise import NoiseModel, sample_experiment_batch

WILSON_Z = 3.2905  # two-sided 99.9%

SAMPLE_CAP = 1_000_000

DECODER_CHOICES = ("nn", "mwpm", "plut", "simple-only")

DEFAULT_CHUNK = 32768


class CalibrationError(RuntimeError):
    """Raised when the target logical error rate cannot be bracketed or met."""


def wilson_interval(failures: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= failures <= trials:
        raise ValueError("failures must lie in [0, trials]")
    phat = failures / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class BenchmarkPoint:
    """Logical error rate of one decoder at one physical rate."""

    p: float
    trials: int
    failures: int
    rate: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, p: float, trials: int, failures: int) -> "BenchmarkPoint":
        low, high = wilson_interval(failures, trials)
        return cls(
            p=p, trials=trials, failures=failures, rate=failures / trials,
            ci_low=low, ci_high=high,
        )


# ---------------------------------------------------------------------------
# Decoder adapters: a uniform batch interface over the four decoder choices
# ---------------------------------------------------------------------------


class NeuralAdapter:
    def __init__(self, net: Network):
        self.net = net

    def decode_batch(self, records: np.ndarray) -> np.ndarray:
        return classify_batch(self.net, records.astype(np.float64))


class MwpmAdapter:
    def __init__(self, layout: CodeLayout, model_tag: str, exact_cap: int = 20):
        model = NoiseModel(model_tag, 0.0)
        self._decoder: MwpmDecoder = mwpm_decoder(layout, exact_cap)
        self._n_rounds = model.n_rounds(layout.distance)
        self._both = model.both_check_types

    def decode_batch(self, records: np.ndarray) -> np.ndarray:
        return self._decoder.decode_batch(records, self._n_rounds, self._both)


class SimpleOnlyAdapter:
    """The bare simple decoder: its residual is the identity by construction,
    so as a classifier it always answers I."""

    def decode_batch(self, records: np.ndarray) -> np.ndarray:
        return np.zeros(len(records), dtype=np.uint8)


def make_decoder(choice: str, layout: CodeLayout, model_tag: str, *,
                 net: Network | None = None, plut: PlutDecoder | None = None):
    if choice == "nn":
        if net is None:
            raise ValueError("decoder 'nn' needs a trained network")
        return NeuralAdapter(net)
    if choice == "mwpm":
        return MwpmAdapter(layout, model_tag)
    if choice == "plut":
        if plut is None:
            raise ValueError("decoder 'plut' needs a dataset-built lookup table")
        return plut
    if choice == "simple-only":
        return SimpleOnlyAdapter()
    raise ValueError(f"unknown decoder {choice!r}; expected one of {DECODER_CHOICES}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _seed_seq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _labeled_batches(layout: CodeLayout, model: NoiseModel, trials: int, seed, chunk: int):
    """Yield (records, labels) arrays over independent RNG substreams."""
    table = build_pure_error_table(layout)
    n_chunks = (trials + chunk - 1) // chunk
    seeds = _seed_seq(seed).spawn(n_chunks)
    done = 0
    for child in seeds:
        n = min(chunk, trials - done)
        rng = np.random.default_rng(child)
        records, ex, ez = sample_experiment_batch(layout, model, rng, n)
        yield records, labels_batch(layout, table, ex, ez)
        done += n


def _run_paired(decoders: dict, layout: CodeLayout, model: NoiseModel, trials: int,
                seed, chunk: int, collect_indicators: bool):
    failures = {name: 0 for name in decoders}
    indicators = {name: [] for name in decoders} if collect_indicators else None
    for records, labels in _labeled_batches(layout, model, trials, seed, chunk):
        for name, dec in decoders.items():
            wrong = dec.decode_batch(records) != labels
            failures[name] += int(wrong.sum())
            if collect_indicators:
                indicators[name].append(wrong)
    if collect_indicators:
        indicators = {name: np.concatenate(parts) for name, parts in indicators.items()}
    return failures, indicators


def evaluate_decoder(decoder, layout: CodeLayout, model_tag: str, p: float,
                     trials: int, seed, chunk: int = DEFAULT_CHUNK) -> BenchmarkPoint:
    """Monte Carlo logical error rate of one decoder at one physical rate."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    model = NoiseModel(model_tag, p)
    failures, _ = _run_paired({"_": decoder}, layout, model, trials, seed, chunk, False)
    return BenchmarkPoint.from_counts(p, trials, failures["_"])


def evaluate_decoders(decoders: dict, layout: CodeLayout, model_tag: str, p: float,
                      trials: int, seed, chunk: int = DEFAULT_CHUNK) -> dict:
    """Evaluate several decoders on identical error streams (paired trials)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    model = NoiseModel(model_tag, p)
    failures, _ = _run_paired(decoders, layout, model, trials, seed, chunk, False)
    return {name: BenchmarkPoint.from_counts(p, trials, n) for name, n in failures.items()}


def paired_failure_indicators(decoders: dict, layout: CodeLayout, model_tag: str, p: float,
                              trials: int, seed, chunk: int = DEFAULT_CHUNK) -> dict:
    """Per-trial failure indicators for each decoder over one shared stream."""
    model = NoiseModel(model_tag, p)
    _, indicators = _run_paired(decoders, layout, model, trials, seed, chunk, True)
    return indicators


# ---------------------------------------------------------------------------
# Calibration of the training error rate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationResult:
    p_star: float
    rate: float
    probes: tuple[tuple[float, float], ...]  # (p, measured rate) in probe order


def calibrate_training_rate(
    layout: CodeLayout,
    model_tag: str,
    seed=0,
    *,
    target: float = 0.25,
    tol: float = 0.02,
    probe_trials: int = 100_000,
    bracket: tuple[float, float] = (0.01, 0.5),
    max_iter: int = 40,
) -> CalibrationResult:
    """Bisect the physical rate until matching decodes ~25% of trials wrongly.

    The returned p* is the sampling rate used to generate training sets: high
    enough to produce a wide variety of syndromes, low enough that correction
    is still usually possible.
    """
    mwpm = MwpmAdapter(layout, model_tag)
    seeds = iter(_seed_seq(seed).spawn(max_iter + 2))
    probes: list[tuple[float, float]] = []

    def probe(p: float) -> float:
        point = evaluate_decoder(mwpm, layout, model_tag, p, probe_trials, next(seeds))
        probes.append((p, point.rate))
        return point.rate

    lo, hi = bracket
    r_lo = probe(lo)
    if abs(r_lo - target) <= tol:
        return CalibrationResult(lo, r_lo, tuple(probes))
    r_hi = probe(hi)
    if abs(r_hi - target) <= tol:
        return CalibrationResult(hi, r_hi, tuple(probes))
    if not (r_lo < target < r_hi):
        raise CalibrationError(
            f"target rate {target} not bracketed on [{lo}, {hi}]: "
            f"rate({lo})={r_lo:.4f}, rate({hi})={r_hi:.4f}"
        )

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        r = probe(mid)
        if abs(r - target) <= tol:
            return CalibrationResult(mid, r, tuple(probes))
        if r < target:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(f"no rate within {tol} of {target} after {max_iter} bisections")


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------


@dataclass
class Dataset:
    """Aggregated training data: input key -> per-class count histogram.

    Keys are the flattened record bits as raw bytes (one byte per bit).
    Sampled datasets hold integer counts; exhaustive datasets hold exact
    probabilities scaled so the histogram total equals ``total``.
    """

    model_tag: str
    distance: int
    p: float
    total: float
    seed: int | None
    input_bits: int
    exhaustive: bool
    rows: dict[bytes, np.ndarray] = field(default_factory=dict)

    @property
    def n_unique(self) -> int:
        return len(self.rows)

    def to_training_set(self, output_size: int, weighting: str = "counts") -> TrainingSet:
        """Unique rows as classifier training data.

        ``weighting='counts'`` weights each row by how often it was sampled
        (the direct-sampling distribution); ``'uniform'`` weights all unique
        rows equally.
        """
        if weighting not in ("counts", "uniform"):
            raise ValueError(f"weighting must be 'counts' or 'uniform', got {weighting!r}")
        if not self.rows:
            raise ValueError("dataset is empty")
        keys = sorted(self.rows)
        counts = np.array([self.rows[k] for k in keys], dtype=np.float64)
        if output_size == 2:
            if counts[:, 2:].any():
                raise ValueError("dataset has Z/Y labels; a 2-output scenario cannot hold them")
            counts = counts[:, :2]
        inputs = np.array([np.frombuffer(k, dtype=np.uint8) for k in keys], dtype=np.float64)
        totals = counts.sum(axis=1)
        targets = counts / totals[:, None]
        weights = totals if weighting == "counts" else None
        return TrainingSet(inputs=inputs, targets=targets, weights=weights)

    def build_plut(self) -> PlutDecoder:
        return plut_build(self.rows, self.input_bits)


def _accumulate(rows: dict, records: np.ndarray, labels: np.ndarray, amount):
    uniq, inverse = np.unique(records, axis=0, return_inverse=True)
    combo = inverse.astype(np.int64) * 4 + labels
    if np.isscalar(amount) and amount == 1:
        hist = np.bincount(combo, minlength=len(uniq) * 4).astype(np.float64)
    else:
        hist = np.bincount(combo, weights=np.broadcast_to(amount, len(records)),
                           minlength=len(uniq) * 4)
    hist = hist.reshape(len(uniq), 4)
    for row, h in zip(uniq, hist):
        key = row.tobytes()
        seen = rows.get(key)
        if seen is None:
            rows[key] = h.copy()
        else:
            seen += h


def generate_dataset(
    layout: CodeLayout,
    model_tag: str,
    p: float,
    n_samples: int,
    seed=0,
    *,
    exhaustive: bool = False,
    chunk: int = DEFAULT_CHUNK,
) -> Dataset:
    """Sample (or exhaustively enumerate) experiments into a dataset.

    Sampling draws ``n_samples`` independent experiments at rate p and
    aggregates per unique input.  Exhaustive mode (d=3 QEC models only)
    enumerates every possible data error with its exact probability at rate
    p, yielding the complete input space with exact class distributions, and
    scales the histograms so they total ``n_samples``.
    """
    if n_samples > SAMPLE_CAP:
        raise ValueError(f"n_samples {n_samples} exceeds the {SAMPLE_CAP} cap")
    model = NoiseModel(model_tag, p)
    table = build_pure_error_table(layout)
    rows: dict[bytes, np.ndarray] = {}

    if exhaustive:
        records, labels, probs = _enumerate_qec(layout, model, table)
        _accumulate(rows, records, labels, probs * float(n_samples))
    elif n_samples > 0:
        seeds = iter(_seed_seq(seed).spawn((n_samples + chunk - 1) // chunk))
        done = 0
        while done < n_samples:
            n = min(chunk, n_samples - done)
            rng = np.random.default_rng(next(seeds))
            records, ex, ez = sample_experiment_batch(layout, model, rng, n)
            _accumulate(rows, records, labels_batch(layout, table, ex, ez), 1)
            done += n

    input_bits = model.input_size(layout.distance)
    return Dataset(
        model_tag=model_tag,
        distance=layout.distance,
        p=p,
        total=float(n_samples),
        seed=None if exhaustive else seed,
        input_bits=input_bits,
        exhaustive=exhaustive,
        rows=rows,
    )


def _enumerate_qec(layout: CodeLayout, model: NoiseModel, table):
    """All data errors of a d=3 QEC model with exact probabilities."""
    if model.is_ft:
        raise ValueError("exhaustive mode applies to QEC models only")
    if layout.distance != 3:
        raise ValueError("exhaustive enumeration is only tractable at d=3")
    n = layout.n_data
    p = model.p
    if model.tag == "channel-capacity":
        idx = np.arange(2**n, dtype=np.int64)
        ex = ((idx[:, None] >> np.arange(n)) & 1).astype(np.uint8)
        ez = np.zeros_like(ex)
        w = ex.sum(axis=1)
        probs = p**w * (1.0 - p) ** (n - w)
    else:
        idx = np.arange(4**n, dtype=np.int64)
        digits = (idx[:, None] // 4 ** np.arange(n)) % 4  # 0=I 1=X 2=Y 3=Z
        ex = ((digits == 1) | (digits == 2)).astype(np.uint8)
        ez = ((digits == 2) | (digits == 3)).astype(np.uint8)
        w = (digits != 0).sum(axis=1)
        probs = (p / 3.0) ** w * (1.0 - p) ** (n - w)
    sz = (ex @ layout.z_parity.T) & 1
    records = sz.astype(np.uint8)
    if model.both_check_types:
        sx = ((ez @ layout.x_parity.T) & 1).astype(np.uint8)
        records = np.concatenate([records, sx], axis=1)
    return records, labels_batch(layout, table, ex, ez), probs


def coverage_stats(dataset: Dataset, layout: CodeLayout) -> float:
    """Fraction of the possible input space present in the dataset."""
    if dataset.distance != layout.distance:
        raise ValueError("dataset and layout distances differ")
    return dataset.n_unique / 2.0**dataset.input_bits


def train_decoder(
    dataset: Dataset,
    hidden: int | None = None,
    config: TrainConfig | None = None,
    weighting: str = "counts",
) -> tuple[Network, TrainResult]:
    """Build and train a classifier network for a dataset's scenario."""
    model = NoiseModel(dataset.model_tag, dataset.p)
    if hidden is None:
        hidden = model.hidden_default(dataset.distance)
    config = config or TrainConfig()
    training = dataset.to_training_set(model.output_size(), weighting=weighting)
    rng = np.random.default_rng(config.seed)
    net = new_network(dataset.input_bits, hidden, model.output_size(), rng, config.init_scale)
    result = train_sgd(net, training, config)
    return net, result


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def _fmt_num(v: float) -> str:
    return repr(int(v)) if float(v).is_integer() else repr(float(v))


def _pack_key(key: bytes) -> str:
    return np.packbits(np.frombuffer(key, dtype=np.uint8)).tobytes().hex()


def _unpack_key(hexstr: str, n_bits: int) -> bytes:
    bits = np.unpackbits(np.frombuffer(bytes.fromhex(hexstr), dtype=np.uint8))
    return bits[:n_bits].astype(np.uint8).tobytes()


def save_dataset(dataset: Dataset, path) -> None:
    """Line-oriented text: metadata header, then `key_hex count_I..count_Y`."""
    lines = [
        "# surfdec-dataset-v1",
        f"# model={dataset.model_tag} distance={dataset.distance} p={repr(dataset.p)}"
        f" total={_fmt_num(dataset.total)} seed={dataset.seed}"
        f" input_bits={dataset.input_bits} exhaustive={str(dataset.exhaustive).lower()}",
        "# columns: key_hex count_I count_X count_Z count_Y",
    ]
    for key in sorted(dataset.rows):
        counts = " ".join(_fmt_num(c) for c in dataset.rows[key])
        lines.append(f"{_pack_key(key)} {counts}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_dataset(path) -> Dataset:
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != "# surfdec-dataset-v1":
        raise ValueError(f"{path}: not a surfdec dataset file")
    meta = _parse_meta(text[1])
    rows = {}
    for line in text[2:]:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        key = _unpack_key(fields[0], int(meta["input_bits"]))
        rows[key] = np.array([float(v) for v in fields[1:5]], dtype=np.float64)
    return Dataset(
        model_tag=meta["model"],
        distance=int(meta["distance"]),
        p=float(meta["p"]),
        total=float(meta["total"]),
        seed=None if meta["seed"] == "None" else int(meta["seed"]),
        input_bits=int(meta["input_bits"]),
        exhaustive=meta["exhaustive"] == "true",
        rows=rows,
    )


def _parse_meta(line: str) -> dict:
    meta = {}
    for token in line.lstrip("# ").split():
        k, _, v = token.partition("=")
        meta[k] = v
    return meta


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    """One benchmark run: model, decoders, sweep points, and artifact paths."""

    model_tag: str
    distance: int
    decoders: tuple[str, ...]
    ps: tuple[float, ...]
    trials: int
    seed: int
    out: str | None = None
    model_file: str | None = None
    dataset_file: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for p in self.ps:
            if not 0.0 < p < 1.0:
                raise ValueError(f"sweep rates must lie in (0, 1), got {p}")
        for dec in self.decoders:
            if dec not in DECODER_CHOICES:
                raise ValueError(f"unknown decoder {dec!r}")


def sweep_and_compare(config: RunConfig) -> list[tuple[str, BenchmarkPoint]]:
    """Evaluate the configured decoders over the p sweep on shared streams.

    Returns (decoder, point) rows; writes them to ``config.out`` when set.
    """
    from .neural import load_model  # local import keeps module load light

    layout = build_layout(config.distance)
    net = None
    plut = None
    if "nn" in config.decoders:
        if not config.model_file:
            raise ValueError("decoder 'nn' requested but no model file given")
        net, meta = load_model(config.model_file)
        expected = NoiseModel(config.model_tag, 0.0).input_size(config.distance)
        if net.input_size != expected:
            raise ValueError(
                f"model file expects {net.input_size} input bits, scenario needs {expected}"
            )
    if "plut" in config.decoders:
        if not config.dataset_file:
            raise ValueError("decoder 'plut' requested but no dataset file given")
        dataset = load_dataset(config.dataset_file)
        if dataset.model_tag != config.model_tag or dataset.distance != config.distance:
            raise ValueError("dataset file does not match the requested scenario")
        plut = dataset.build_plut()

    decoders = {
        name: make_decoder(name, layout, config.model_tag, net=net, plut=plut)
        for name in config.decoders
    }

    results: list[tuple[str, BenchmarkPoint]] = []
    point_seeds = _seed_seq(config.seed).spawn(max(len(config.ps), 1))
    for p, child in zip(config.ps, point_seeds):
        points = evaluate_decoders(decoders, layout, config.model_tag, p,
                                   config.trials, child)
        for name in config.decoders:
            results.append((name, points[name]))
    if config.out:
        save_results(config, results, config.out)
    return results


def save_results(config: RunConfig, results, path) -> None:
    """CSV body under a `# key=value` header; bit-identical for equal configs."""
    lines = [
        "# surfdec-results-v1",
        f"# model={config.model_tag} distance={config.distance}"
        f" trials={config.trials} seed={config.seed}",
        f"# decoders={','.join(config.decoders)} ps={','.join(repr(p) for p in config.ps)}",
        "decoder,p,trials,failures,rate,ci_low,ci_high",
    ]
    for name, pt in results:
        lines.append(
            f"{name},{repr(pt.p)},{pt.trials},{pt.failures},"
            f"{repr(pt.rate)},{repr(pt.ci_low)},{repr(pt.ci_high)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def load_results(path) -> tuple[dict, list[dict]]:
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != "# surfdec-results-v1":
        raise ValueError(f"{path}: not a surfdec results file")
    meta = {}
    rows = []
    for line in text[1:]:
        line = line.strip()
        if line.startswith("#"):
            meta.update(_parse_meta(line))
            continue
        if not line or line.startswith("decoder,"):
            continue
        name, p, trials, failures, rate, lo, hi = line.split(",")
        rows.append(
            dict(decoder=name, p=float(p), trials=int(trials), failures=int(failures),
                 rate=float(rate), ci_low=float(lo), ci_high=float(hi))
        )
    return meta, rows


def plot_results(results_path, out_path) -> None:
    """Rate-vs-p curves with confidence bars, one line per decoder (SVG/PDF)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    meta, rows = load_results(results_path)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for name in dict.fromkeys(r["decoder"] for r in rows):  # preserve file order
        pts = [r for r in rows if r["decoder"] == name]
        ps = [r["p"] for r in pts]
        rates = [r["rate"] for r in pts]
        err_lo = [r["rate"] - r["ci_low"] for r in pts]
        err_hi = [r["ci_high"] - r["rate"] for r in pts]
        ax.errorbar(ps, rates, yerr=[err_lo, err_hi], marker="o", capsize=3, label=name)
    ax.set_xlabel("physical error rate p")
    ax.set_ylabel("logical error rate")
    ax.set_xscale("log")
    ax.set_yscale("log")
    title = f"{meta.get('model', '?')} d={meta.get('distance', '?')}"
    ax.set_title(title)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
