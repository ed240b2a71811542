"""NSL-KDD ingestion: parsing, encoding, normalization, splits, attack tags.

The dataset files are plain comma-separated text without a header. Each line
carries 41 feature values, an attack label, and an optional difficulty score
(parsed then ignored downstream). Columns 1..3 (protocol_type, service, flag)
are categorical; the remaining 38 are numeric.

Encoding is learned from the training file only: categorical columns become
one-hot blocks in first-appearance category order, numeric columns are
min-max scaled into [0, 1] on the training range. Test values are neither
clipped nor re-fitted, so out-of-range magnitudes and unknown categories
(all-zero blocks) survive into the encoded space; downstream shift analysis
depends on that.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ParseError, SchemaError
from .storage import write_text

#: Standard NSL-KDD column names, in file order.
COLUMN_NAMES = [
    "duration", "protocol_type", "service", "flag", "src_bytes",
    "dst_bytes", "land", "wrong_fragment", "urgent", "hot",
    "num_failed_logins", "logged_in", "num_compromised", "root_shell",
    "su_attempted", "num_root", "num_file_creations", "num_shells",
    "num_access_files", "num_outbound_cmds", "is_host_login",
    "is_guest_login", "count", "srv_count", "serror_rate",
    "srv_serror_rate", "rerror_rate", "srv_rerror_rate", "same_srv_rate",
    "diff_srv_rate", "srv_diff_host_rate", "dst_host_count",
    "dst_host_srv_count", "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate", "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
    "dst_host_srv_serror_rate", "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
]

CATEGORICAL_COLUMNS = (1, 2, 3)
N_FEATURES = 41
N_NUMERIC = N_FEATURES - len(CATEGORICAL_COLUMNS)

#: Alternate label spellings accepted in configs and reports.
LABEL_ALIASES = {"sainl": "saint", "apache": "apache2"}


@dataclass
class FlowRecord:
    """One raw NSL-KDD connection record."""

    features: list[str]
    attack_label: str
    difficulty: int | None = None

    def __post_init__(self):
        if len(self.features) != N_FEATURES:
            raise SchemaError(f"expected {N_FEATURES} features, got {len(self.features)}")
        if not self.attack_label:
            raise ParseError("empty attack label")


def load_records(path: str | Path) -> list[FlowRecord]:
    """Parse an NSL-KDD file into records, preserving file order.

    Each non-empty line must have 42 fields (features + label) or 43
    (features + label + difficulty). Raises :class:`SchemaError` on a wrong
    field count and :class:`ParseError` on an unparsable difficulty value,
    naming the offending line number.
    """
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) not in (N_FEATURES + 1, N_FEATURES + 2):
                raise SchemaError(
                    f"{path}:{lineno}: expected 42 or 43 fields, got {len(fields)}"
                )
            difficulty = None
            if len(fields) == N_FEATURES + 2:
                try:
                    difficulty = int(fields[-1])
                except ValueError as exc:
                    raise ParseError(
                        f"{path}:{lineno}: difficulty {fields[-1]!r} is not an integer"
                    ) from exc
                fields = fields[:-1]
            label = fields[N_FEATURES].strip().lower()
            if not label:
                raise ParseError(f"{path}:{lineno}: empty attack label")
            records.append(FlowRecord(fields[:N_FEATURES], label, difficulty))
    return records


@dataclass
class EncodingSchema:
    """Column encoding learned from training data.

    ``categories`` maps a raw categorical column index to its ordered,
    duplicate-free category list (first appearance in the training file).
    ``numeric_range`` maps a raw numeric column index to its training
    (min, max). Offsets into the encoded space are derived, keeping raw
    column order with categorical blocks expanded in place.
    """

    categories: dict[int, list[str]]
    numeric_range: dict[int, tuple[float, float]]
    offsets: list[int] = field(default_factory=list)
    width: int = 0

    def __post_init__(self):
        if not self.offsets:
            off = 0
            self.offsets = []
            for col in range(N_FEATURES):
                self.offsets.append(off)
                off += len(self.categories[col]) if col in self.categories else 1
            self.width = off
        for col, (lo, hi) in self.numeric_range.items():
            if lo > hi:
                raise SchemaError(f"column {col}: min {lo} > max {hi}")

    def block(self, col: int) -> tuple[int, int]:
        """Encoded [start, end) span of raw column ``col``."""
        start = self.offsets[col]
        span = len(self.categories[col]) if col in self.categories else 1
        return start, start + span

    def numeric_encoded_columns(self) -> list[int]:
        """Encoded indices holding min-max scaled numeric values."""
        return [self.offsets[c] for c in range(N_FEATURES) if c not in self.categories]


def fit_schema(train: list[FlowRecord]) -> EncodingSchema:
    """Learn category vocabularies and numeric ranges from training records."""
    if not train:
        raise SchemaError("cannot fit a schema on an empty record list")
    categories: dict[int, list[str]] = {c: [] for c in CATEGORICAL_COLUMNS}
    seen: dict[int, set] = {c: set() for c in CATEGORICAL_COLUMNS}
    numeric = _numeric_matrix(train)
    for rec in train:
        for col in CATEGORICAL_COLUMNS:
            v = rec.features[col]
            if v not in seen[col]:
                seen[col].add(v)
                categories[col].append(v)
    numeric_cols = [c for c in range(N_FEATURES) if c not in categories]
    ranges = {
        col: (float(numeric[:, i].min()), float(numeric[:, i].max()))
        for i, col in enumerate(numeric_cols)
    }
    return EncodingSchema(categories, ranges)


def _numeric_matrix(records: list[FlowRecord]) -> np.ndarray:
    """Raw numeric feature values as an (n, 38) float array."""
    numeric_cols = [c for c in range(N_FEATURES) if c not in CATEGORICAL_COLUMNS]
    out = np.empty((len(records), len(numeric_cols)))
    for i, rec in enumerate(records):
        for j, col in enumerate(numeric_cols):
            token = rec.features[col]
            try:
                out[i, j] = float(token)
            except ValueError as exc:
                raise ParseError(
                    f"record {i}: column {COLUMN_NAMES[col]} has non-numeric "
                    f"value {token!r}"
                ) from exc
    return out


@dataclass
class EncodedMatrix:
    """Encoded feature matrix with aligned labels and attack names."""

    X: np.ndarray
    y: np.ndarray
    attack_names: list[str]

    def __post_init__(self):
        if self.X.shape[0] != len(self.y) or self.X.shape[0] != len(self.attack_names):
            raise SchemaError("matrix, labels, and attack names must align")


def transform(records: list[FlowRecord], schema: EncodingSchema) -> EncodedMatrix:
    """Encode records against a fitted schema.

    Categorical values unknown to the schema produce an all-zero one-hot
    block. Numeric values map to (x - min) / (max - min) on the training
    range; a constant training column maps to 0. Values beyond the training
    range are deliberately left outside [0, 1]. Labels binarize as
    "normal" -> 0, anything else -> 1.
    """
    n = len(records)
    X = np.zeros((n, schema.width))
    numeric_cols = [c for c in range(N_FEATURES) if c not in schema.categories]
    raw = _numeric_matrix(records)
    for j, col in enumerate(numeric_cols):
        lo, hi = schema.numeric_range[col]
        span = hi - lo
        enc = schema.offsets[col]
        if span == 0.0:
            X[:, enc] = 0.0
        else:
            X[:, enc] = (raw[:, j] - lo) / span
    cat_index = {
        col: {v: k for k, v in enumerate(schema.categories[col])}
        for col in schema.categories
    }
    for i, rec in enumerate(records):
        for col in schema.categories:
            slot = cat_index[col].get(rec.features[col])
            if slot is not None:
                X[i, schema.offsets[col] + slot] = 1.0
    y = np.array([0 if r.attack_label == "normal" else 1 for r in records], dtype=np.int64)
    return EncodedMatrix(X, y, [r.attack_label for r in records])


@dataclass
class SplitPlan:
    """Disjoint, exhaustive index sets over the training file."""

    base_train: np.ndarray
    meta_train: np.ndarray
    meta_val: np.ndarray
    seed: int

    def sets(self) -> dict[str, np.ndarray]:
        return {
            "base_train": self.base_train,
            "meta_train": self.meta_train,
            "meta_val": self.meta_val,
        }


#: Fractions of the training file per split set: base classifiers get 60%,
#: the meta-learner trains on 80% of the remaining 40% and validates on 20%.
SPLIT_RATIOS = (0.6, 0.4 * 0.8, 0.4 * 0.2)


def stratified_split(
    matrix: EncodedMatrix,
    ratios: tuple[float, float, float] = SPLIT_RATIOS,
    seed: int = 0,
) -> SplitPlan:
    """Shuffle each class independently and assign proportional counts.

    Set sizes per class use largest-remainder rounding so the three sets
    cover every index exactly once. A class with fewer than 3 members cannot
    be represented in all sets; it is assigned wholly to ``base_train`` with
    a warning.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {ratios}")
    rng = np.random.default_rng(seed)
    parts: list[list[np.ndarray]] = [[], [], []]
    for cls in np.unique(matrix.y):
        idx = np.flatnonzero(matrix.y == cls)
        if len(idx) < 3:
            warnings.warn(
                f"class {cls} has only {len(idx)} member(s); assigning to base_train",
                stacklevel=2,
            )
            parts[0].append(idx)
            continue
        idx = rng.permutation(idx)
        counts = _proportional_counts(len(idx), ratios)
        stops = np.cumsum(counts)
        parts[0].append(idx[: stops[0]])
        parts[1].append(idx[stops[0] : stops[1]])
        parts[2].append(idx[stops[1] : stops[2]])
    sets = [np.sort(np.concatenate(p)) if p else np.array([], dtype=np.int64) for p in parts]
    return SplitPlan(sets[0], sets[1], sets[2], seed)


def _proportional_counts(n: int, ratios: tuple[float, ...]) -> list[int]:
    """Integer counts per ratio, largest fractional remainder first."""
    exact = [r * n for r in ratios]
    counts = [int(np.floor(e)) for e in exact]
    remainder = n - sum(counts)
    by_frac = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in by_frac[:remainder]:
        counts[i] += 1
    return counts


def normalize_label(name: str) -> str:
    """Canonical attack-family spelling (accepts known alternates)."""
    name = name.strip().lower()
    return LABEL_ALIASES.get(name, name)


def tag_attacks(
    test_records: list[FlowRecord], train_records: list[FlowRecord]
) -> tuple[list[str], set[str]]:
    """Attack name per test record plus the set of families absent from training.

    "normal" is never an attack family. Names are normalized so alternate
    spellings in configs match dataset labels.
    """
    test_names = [normalize_label(r.attack_label) for r in test_records]
    train_families = {normalize_label(r.attack_label) for r in train_records}
    unseen = {n for n in test_names if n != "normal" and n not in train_families}
    return test_names, unseen


# ---------------------------------------------------------------------------
# schema persistence (human-readable key-value text)
# ---------------------------------------------------------------------------

def save_schema(path: str | Path, schema: EncodingSchema) -> None:
    lines = ["format infuse-schema v1", f"width {schema.width}"]
    for col in sorted(schema.categories):
        cats = ",".join(schema.categories[col])
        lines.append(f"categorical {col} {COLUMN_NAMES[col]} {cats}")
    for col in sorted(schema.numeric_range):
        lo, hi = schema.numeric_range[col]
        lines.append(f"numeric {col} {COLUMN_NAMES[col]} {lo!r} {hi!r}")
    write_text(path, "\n".join(lines) + "\n")


def load_schema(path: str | Path) -> EncodingSchema:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "format infuse-schema v1":
        raise SchemaError(f"{path}: not a schema file")
    categories: dict[int, list[str]] = {}
    ranges: dict[int, tuple[float, float]] = {}
    declared_width = None
    for line in lines[1:]:
        if not line.strip():
            continue
        kind, rest = line.split(" ", 1)
        if kind == "width":
            declared_width = int(rest)
        elif kind == "categorical":
            col, _name, cats = rest.split(" ", 2)
            categories[int(col)] = cats.split(",")
        elif kind == "numeric":
            col, _name, lo, hi = rest.split(" ")
            ranges[int(col)] = (float(lo), float(hi))
        else:
            raise SchemaError(f"{path}: unknown schema entry {kind!r}")
    schema = EncodingSchema(categories, ranges)
    if declared_width is not None and schema.width != declared_width:
        raise SchemaError(
            f"{path}: declared width {declared_width} != derived {schema.width}"
        )
    return schema
