"""Census-tract set-back analysis for CBRS small-cell licensing."""

__version__ = "0.1.0"
