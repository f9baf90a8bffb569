"""Command-line interface.

Subcommands: layout, calibrate, generate, train, bench, compare, coverage,
latency, plot.  Exit codes: 0 on success, 1 on usage errors, 2 on runtime or
data errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import harness, neural
from .code import build_layout
from .harness import (
    CalibrationError,
    RunConfig,
    calibrate_training_rate,
    coverage_stats,
    evaluate_decoder,
    generate_dataset,
    load_dataset,
    make_decoder,
    plot_results,
    save_dataset,
    sweep_and_compare,
)
from .neural import LatencyShape, TrainConfig, TrainingDiverged, latency_steps, parity_depth
from .noise import ALL_TAGS, NoiseModel


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors by default; this project
    # reserves 2 for runtime errors.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="surfdec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        return p

    p = add("layout", "print the code geometry for a distance")
    p.add_argument("--distance", type=int, default=3)

    p = add("calibrate", "find the training rate where matching fails ~25% of trials")
    p.add_argument("--distance", type=int, required=True)
    p.add_argument("--model", choices=ALL_TAGS, required=True)
    p.add_argument("--trials", type=int, default=100_000, help="trials per probe")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="optional JSON output path")

    p = add("generate", "sample (or enumerate) a training dataset")
    p.add_argument("--distance", type=int, required=True)
    p.add_argument("--model", choices=ALL_TAGS, required=True)
    p.add_argument("--p", type=float, required=True, help="sampling error rate")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exhaustive", action="store_true",
                   help="enumerate every error exactly (d=3 QEC models only)")
    p.add_argument("--out", required=True)

    p = add("train", "train a classifier network on a dataset file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--hidden", type=int, help="hidden nodes (default: per-scenario table)")
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--minibatch", type=int, default=64)
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weighting", choices=("counts", "uniform"), default="counts")
    p.add_argument("--out", required=True)

    p = add("bench", "measure one decoder's logical error rate at one p")
    p.add_argument("--distance", type=int, required=True)
    p.add_argument("--model", choices=ALL_TAGS, required=True)
    p.add_argument("--decoder", choices=harness.DECODER_CHOICES, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-file", help="trained network (decoder 'nn')")
    p.add_argument("--dataset", help="dataset file (decoder 'plut')")

    p = add("compare", "sweep several decoders over p on shared error streams")
    p.add_argument("--distance", type=int, required=True)
    p.add_argument("--model", choices=ALL_TAGS, required=True)
    p.add_argument("--ps", required=True, help="comma-separated physical rates")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decoders", help="comma-separated subset of nn,mwpm,plut,simple-only")
    p.add_argument("--model-file")
    p.add_argument("--dataset")
    p.add_argument("--out", required=True)

    p = add("coverage", "fraction of the input space a dataset covers")
    p.add_argument("--dataset", required=True)

    p = add("latency", "serial-step count of the hardware evaluation model")
    p.add_argument("--input", type=int, required=True)
    p.add_argument("--hidden", type=int, required=True)

    p = add("plot", "render a results file to a vector image")
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)

    return parser


def _cmd_layout(args) -> int:
    layout = build_layout(args.distance)
    print(f"rotated surface code, distance {layout.distance}")
    print(f"data qubits: {layout.n_data} (row-major on a {layout.distance}x{layout.distance} grid)")
    print(f"Z-checks: {layout.n_z_checks}, X-checks: {layout.n_x_checks}")
    for kind, coords, sups in (
        ("Z", layout.z_check_coords, layout.z_stabilisers),
        ("X", layout.x_check_coords, layout.x_stabilisers),
    ):
        for i, (coord, sup) in enumerate(zip(coords, sups)):
            print(f"  {kind}{i} at plaquette {coord}: qubits {list(sup)}")
    print(f"logical X: qubits {np.nonzero(layout.logical_x.x_bits)[0].tolist()} (column 0)")
    print(f"logical Z: qubits {np.nonzero(layout.logical_z.z_bits)[0].tolist()} (row 0)")
    return 0


def _cmd_calibrate(args) -> int:
    layout = build_layout(args.distance)
    result = calibrate_training_rate(layout, args.model, args.seed, probe_trials=args.trials)
    print(f"p* = {result.p_star:.6f} (matching logical error rate {result.rate:.4f})")
    for p, rate in result.probes:
        print(f"  probed p={p:.6f}: rate={rate:.4f}")
    if args.out:
        doc = {"p_star": result.p_star, "rate": result.rate, "probes": list(result.probes),
               "model": args.model, "distance": args.distance, "seed": args.seed,
               "trials": args.trials}
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)
    return 0


def _cmd_generate(args) -> int:
    layout = build_layout(args.distance)
    dataset = generate_dataset(
        layout, args.model, args.p, args.samples, args.seed, exhaustive=args.exhaustive
    )
    save_dataset(dataset, args.out)
    space = 2.0**dataset.input_bits
    print(f"wrote {dataset.n_unique} unique inputs "
          f"({dataset.n_unique / space:.3%} of 2^{dataset.input_bits}) to {args.out}")
    return 0


def _cmd_train(args) -> int:
    dataset = load_dataset(args.dataset)
    config = TrainConfig(
        learning_rate=args.learning_rate,
        minibatch=args.minibatch,
        epochs=args.epochs,
        seed=args.seed,
    )
    net, result = harness.train_decoder(dataset, args.hidden, config, weighting=args.weighting)
    neural.save_model(
        args.out, net, model_tag=dataset.model_tag, distance=dataset.distance,
        train_config=config,
        extra={"dataset_seed": dataset.seed, "dataset_p": dataset.p,
               "weighting": args.weighting, "epochs_run": result.epochs_run},
    )
    print(f"trained {net.input_size}-{net.hidden_size}-{net.output_size} network: "
          f"loss {result.losses[0]:.5f} -> {result.losses[-1]:.5f} "
          f"in {result.epochs_run} epochs; saved to {args.out}")
    return 0


def _load_artifacts(args, layout):
    net = None
    plut = None
    if getattr(args, "model_file", None):
        net, _ = neural.load_model(args.model_file)
    if getattr(args, "dataset", None):
        plut = load_dataset(args.dataset).build_plut()
    return net, plut


def _cmd_bench(args) -> int:
    layout = build_layout(args.distance)
    net, plut = _load_artifacts(args, layout)
    decoder = make_decoder(args.decoder, layout, args.model, net=net, plut=plut)
    point = evaluate_decoder(decoder, layout, args.model, args.p, args.trials, args.seed)
    print(f"{args.decoder} @ p={point.p}: rate={point.rate:.6f} "
          f"({point.failures}/{point.trials}), 99.9% CI [{point.ci_low:.6f}, {point.ci_high:.6f}]")
    return 0


def _cmd_compare(args) -> int:
    ps = tuple(float(v) for v in args.ps.split(","))
    if args.decoders:
        decoders = tuple(args.decoders.split(","))
    else:
        decoders = ("mwpm",)
        if args.model_file:
            decoders = ("nn",) + decoders
        if args.dataset:
            decoders = decoders + ("plut",)
    config = RunConfig(
        model_tag=args.model, distance=args.distance, decoders=decoders, ps=ps,
        trials=args.trials, seed=args.seed, out=args.out,
        model_file=args.model_file, dataset_file=args.dataset,
    )
    results = sweep_and_compare(config)
    for name, pt in results:
        print(f"{name:12s} p={pt.p:<8g} rate={pt.rate:.6f} "
              f"CI [{pt.ci_low:.6f}, {pt.ci_high:.6f}]")
    print(f"wrote {args.out}")
    return 0


def _cmd_coverage(args) -> int:
    dataset = load_dataset(args.dataset)
    layout = build_layout(dataset.distance)
    fraction = coverage_stats(dataset, layout)
    print(f"{dataset.n_unique} unique inputs of 2^{dataset.input_bits} possible: "
          f"{fraction:.6g} ({fraction:.4%})")
    return 0


def _cmd_latency(args) -> int:
    shape = LatencyShape(args.input, args.hidden)
    steps = latency_steps(shape)
    print(f"input {args.input} -> hidden {args.hidden}: {steps} serial steps")
    print(f"  2 multiplications + {parity_depth(args.input)} + {parity_depth(args.hidden)} "
          f"addition steps + 2 sigmoid evaluations")
    return 0


def _cmd_plot(args) -> int:
    plot_results(args.results, args.out)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "layout": _cmd_layout,
    "calibrate": _cmd_calibrate,
    "generate": _cmd_generate,
    "train": _cmd_train,
    "bench": _cmd_bench,
    "compare": _cmd_compare,
    "coverage": _cmd_coverage,
    "latency": _cmd_latency,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError, KeyError, CalibrationError, TrainingDiverged) as exc:
        print(f"surfdec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
