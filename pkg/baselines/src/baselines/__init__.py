"""Classical ML reference harness for kernelscope dataset exports."""

from .harness import (
    BaselineResult,
    HashMismatch,
    compare,
    load_export,
    run_baselines,
    write_results_csv,
)

__version__ = "0.1.0"
