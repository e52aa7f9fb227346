"""Rate regions of interference channels: evaluators, hulls, elimination, prover, simulator."""

__version__ = "0.1.0"
