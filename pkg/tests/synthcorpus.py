"""Synthetic NSL-KDD-format traffic with planted, learnable class structure.

The generator emits files with the real layout (41 features, label,
difficulty) and the real failure modes: categorical vocabulary drift
(test-only services), attack families absent from training, and numeric
distribution shift in the test set. Signal strength is tuned so simple
classifiers reach high-but-imperfect accuracy on a few thousand rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

PROTOCOLS = ["tcp", "udp", "icmp"]
FLAGS = ["SF", "S0", "REJ", "RSTR", "SH"]
TRAIN_SERVICES = ["http", "smtp", "ftp", "ftp_data", "domain_u", "telnet", "private", "other"]
TEST_ONLY_SERVICES = ["imap4", "pop_3"]

TRAIN_ATTACKS = ["neptune", "smurf", "portsweep", "satan", "back"]
TEST_ONLY_ATTACKS = [
    "mscan", "processtable", "snmpguess", "saint", "apache2", "httptunnel", "mailbomb",
]

# Numeric feature slots (within the 38 numeric columns) carrying family signal.
SIGNAL_SLOTS = [0, 4, 8, 12, 18, 22, 27, 33]


@dataclass
class Corpus:
    train_path: Path
    test_path: Path
    test21_path: Path
    n_train: int
    n_test: int


def _family_mean(name: str, rng: np.random.Generator) -> np.ndarray:
    """Stable per-family signature over the signal slots."""
    h = abs(hash(name)) % (2**32)
    local = np.random.default_rng(h)
    return local.uniform(0.5, 3.0, size=len(SIGNAL_SLOTS))


def _sample_rows(families, weights, n, rng, shifted=False):
    rows = []
    names = rng.choice(len(families), size=n, p=weights)
    for fi in names:
        fam = families[fi]
        numeric = np.abs(rng.normal(0.15, 0.12, size=38))
        if fam != "normal":
            numeric[SIGNAL_SLOTS] += _family_mean(fam, rng) + rng.normal(0, 0.35, len(SIGNAL_SLOTS))
        if shifted:
            numeric *= 1.15
        if fam == "normal":
            proto = PROTOCOLS[rng.integers(0, 2)]
            flag = "SF"
        else:
            proto = PROTOCOLS[rng.integers(0, 3)]
            flag = FLAGS[rng.integers(0, len(FLAGS))]
        services = TRAIN_SERVICES + (TEST_ONLY_SERVICES if shifted else [])
        service = services[rng.integers(0, len(services))]
        feats = [f"{numeric[0]:.4f}", proto, service, flag]
        feats += [f"{v:.4f}" for v in numeric[1:]]
        difficulty = int(rng.integers(0, 22))
        rows.append(",".join(feats + [fam, str(difficulty)]))
    return rows


def write_corpus(root: Path, n_train=1600, n_test=700, seed=0) -> Corpus:
    rng = np.random.default_rng(seed)
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)

    train_fams = ["normal"] + TRAIN_ATTACKS
    train_w = np.array([0.54, 0.16, 0.12, 0.07, 0.06, 0.05])
    train_rows = _sample_rows(train_fams, train_w / train_w.sum(), n_train, rng)

    test_fams = ["normal"] + TRAIN_ATTACKS + TEST_ONLY_ATTACKS
    test_w = np.array([0.42, 0.08, 0.07, 0.05, 0.04, 0.04] + [0.30 / 7] * 7)
    test_rows = _sample_rows(test_fams, test_w / test_w.sum(), n_test, rng, shifted=True)
    # Test-21 analogue: the harder tail, biased toward attacks.
    t21_rows = [r for r in test_rows if r.rsplit(",", 2)[1] != "normal"]
    t21_rows += [r for r in test_rows if r.rsplit(",", 2)[1] == "normal"][: max(1, len(t21_rows) // 4)]

    train_path = root / "KDDTrain+.txt"
    test_path = root / "KDDTest+.txt"
    t21_path = root / "KDDTest-21.txt"
    train_path.write_text("\n".join(train_rows) + "\n")
    test_path.write_text("\n".join(test_rows) + "\n")
    t21_path.write_text("\n".join(t21_rows) + "\n")
    return Corpus(train_path, test_path, t21_path, len(train_rows), len(test_rows))
