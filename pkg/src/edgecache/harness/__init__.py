"""Experiment driver: configs, replicated runs, oracle verification, export."""

from .config import (
    PRESETS,
    SCHEMES,
    SWEEP_PARAMS,
    Capacities,
    ExperimentSpec,
    Sweep,
    dump_config,
    load_config,
    parse_config,
    preset,
)
from .export import (
    export,
    plot_placement_svg,
    plot_summary_svg,
    read_placement_csv,
    read_results_csv,
    write_placement_csv,
    write_results_csv,
)
from .runner import (
    ExperimentResult,
    RunRecord,
    Scene,
    VerificationReport,
    make_scene,
    run,
    verify,
)

__all__ = [
    "PRESETS",
    "SCHEMES",
    "SWEEP_PARAMS",
    "Capacities",
    "ExperimentSpec",
    "Sweep",
    "dump_config",
    "load_config",
    "parse_config",
    "preset",
    "export",
    "plot_placement_svg",
    "plot_summary_svg",
    "read_placement_csv",
    "read_results_csv",
    "write_placement_csv",
    "write_results_csv",
    "ExperimentResult",
    "RunRecord",
    "Scene",
    "VerificationReport",
    "make_scene",
    "run",
    "verify",
]
