"""surfdec: a desk-scale lab for decoding small rotated surface codes.

Builds the code geometry, samples five noise models (two perfect-measurement
models, two phenomenological fault-tolerance models, and gate-level circuit
noise), and benchmarks four decoders against each other: the simple
pure-error decoder, a one-hidden-layer neural network classifier, a partial
lookup table, and exact minimum-weight perfect matching.
"""

from .code import CodeLayout, LogicalClass, Syndrome, build_layout, logical_class, syndrome_of
from .decode import (
    DefectGraph,
    MwpmResult,
    PlutDecoder,
    PureErrorTable,
    build_defect_graph,
    build_pure_error_table,
    label_of_error,
    mwpm_decode,
    plut_build,
    plut_decode,
    simple_decode,
)
from .harness import (
    BenchmarkPoint,
    Dataset,
    RunConfig,
    calibrate_training_rate,
    coverage_stats,
    evaluate_decoder,
    generate_dataset,
    sweep_and_compare,
    wilson_interval,
)
from .neural import (
    LatencyShape,
    Network,
    TrainConfig,
    classify,
    cross_entropy,
    forward,
    latency_steps,
    parity_depth,
    train_sgd,
)
from .noise import (
    CircuitSchedule,
    NoiseModel,
    SyndromeRecord,
    build_schedule,
    run_ft_circuit_experiment,
    sample_ft_phenomenological,
    sample_qec_error,
    simulate_circuit_round,
)
from .pauli import PauliString, commutes, multiply

__version__ = "0.1.0"
