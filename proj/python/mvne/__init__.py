"""Multi-view network embedding: synthetic data, contrastive training and evaluation probes."""

from ._mvne import (
    ConfigError,
    DomainError,
    Error,
    Graph,
    IndexError,
    IoError,
    NumericalError,
    ParseError,
    ShapeError,
    default_config,
    evaluate,
    f1_scores,
    generate,
    kmeans,
    load,
    logistic_regression,
    nmi,
    run_cli,
    table3_variants,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "Graph",
    "IndexError",
    "IoError",
    "NumericalError",
    "ParseError",
    "ShapeError",
    "default_config",
    "evaluate",
    "f1_scores",
    "generate",
    "kmeans",
    "load",
    "logistic_regression",
    "nmi",
    "run_cli",
    "table3_variants",
    "train",
]
