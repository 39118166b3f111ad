"""Train/test overlap measurement for pronoun-disambiguation benchmarks."""

__version__ = "0.1.0"
