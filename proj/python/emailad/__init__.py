"""Email header anomaly detection: header parsing, features, learners and the
experiment pipeline, backed by the C++ core."""

from ._core import (
    Bundle,
    ConvergenceError,
    Error,
    FingerprintMismatch,
    FormatError,
    InvalidArgument,
    IoError,
    Model,
    __version__,
    auc,
    cross_validate,
    parse_headers,
    permutation_importance,
    run,
    set_num_threads,
    synth_email,
    train,
    write_synthetic_corpus,
)


def classify(bundle_path, raw):
    """Classify one email (bytes or str) with the bundle at bundle_path."""
    if isinstance(raw, str):
        raw = raw.encode()
    return Bundle.load(bundle_path).classify(raw)


__all__ = [
    "Bundle",
    "ConvergenceError",
    "Error",
    "FingerprintMismatch",
    "FormatError",
    "InvalidArgument",
    "IoError",
    "Model",
    "__version__",
    "auc",
    "classify",
    "cross_validate",
    "parse_headers",
    "permutation_importance",
    "run",
    "set_num_threads",
    "synth_email",
    "train",
    "write_synthetic_corpus",
]
