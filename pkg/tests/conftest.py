"""Shared fixtures: real-dataset discovery and a synthetic mini corpus.

The NSL-KDD files are not redistributed with this repository. Tests that
need them look in ``$INFUSE_DATA_DIR`` (default ``./data``) for
``KDDTrain+.txt``, ``KDDTest+.txt``, and ``KDDTest-21.txt`` and skip with an
explanation when the files are absent. Everything else runs on synthetic
traffic written in the same file format.
"""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from synthcorpus import write_corpus

DATA_ENV = "INFUSE_DATA_DIR"
TRAIN_FILE = "KDDTrain+.txt"
TEST_PLUS_FILE = "KDDTest+.txt"
TEST_21_FILE = "KDDTest-21.txt"


def dataset_dir() -> Path | None:
    root = Path(os.environ.get(DATA_ENV, Path(__file__).resolve().parent.parent / "data"))
    needed = [TRAIN_FILE, TEST_PLUS_FILE, TEST_21_FILE]
    if all((root / name).is_file() for name in needed):
        return root
    return None


@pytest.fixture(scope="session")
def nsl_paths():
    """Paths to the real NSL-KDD files, or skip."""
    root = dataset_dir()
    if root is None:
        pytest.skip(
            f"NSL-KDD files not found (set {DATA_ENV} or place KDDTrain+.txt, "
            "KDDTest+.txt, KDDTest-21.txt under ./data)"
        )
    return {
        "train": root / TRAIN_FILE,
        "test_plus": root / TEST_PLUS_FILE,
        "test_21": root / TEST_21_FILE,
    }


@pytest.fixture(scope="session")
def mini_corpus(tmp_path_factory):
    """Synthetic NSL-KDD-format corpus: train/test files plus ground truth."""
    root = tmp_path_factory.mktemp("corpus")
    return write_corpus(root, n_train=1600, n_test=700, seed=20240811)
