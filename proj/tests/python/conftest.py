import json
import os
import shutil
from pathlib import Path

import pytest

# Small grids keep a whole run to a few seconds.
FAST = {
    "features": {"k": 50},
    "selection": {"importance_repeats": 3, "top_m": 30, "models": ["RF", "LR"]},
    "evaluation": {"cv_folds": 3, "test_fraction": 0.2},
    "binary_algorithms": ["LR", "RF", "kNN"],
    "grids": {
        "RF": {"n_trees": [15], "max_depth": ["inf"]},
        "kNN": {"k": [3]},
        "LR": {"lambda": [1e-3]},
        "OC-SVM": {"nu": [0.1], "gamma": ["1/d"]},
    },
    "stacks": [["RF", "kNN"]],
    "seed": 11,
}


def fast_config(root, **dataset):
    cfg = dict(FAST)
    cfg["dataset"] = dataset or {
        "trec_index": "trec/full/index",
        "trec_root": "trec/full",
        "phishing_dir": "phishing",
    }
    path = Path(root) / "fast.json"
    path.write_text(json.dumps(cfg))
    return path


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("EMAILAD_CLI") or shutil.which("emailad")
    if not path:
        pytest.skip("emailad CLI not found (set EMAILAD_CLI)")
    return path
