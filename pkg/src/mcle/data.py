"""Dataset bundles: loading, validation, serialization, synthetic generation.

A dataset directory holds a feature pool, per-class ground-truth labels, a
train/test split, a bank of source classifiers, and per-target relation
weights over those sources.  Bundles are immutable after load and safe to
share across concurrent sessions.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

FEATURES_MAGIC = b"ALZS"
SOURCES_MAGIC = b"ALSW"
FORMAT_VERSION = 1


class DatasetError(ValueError):
    """Raised for any malformed dataset file; message names file and row."""


def _fail(fname, msg, row=None):
    loc = f"{fname}" if row is None else f"{fname}, row {row}"
    raise DatasetError(f"{loc}: {msg}")


def _check_finite(arr, fname):
    bad = ~np.isfinite(arr)
    if bad.any():
        row = int(np.argwhere(bad)[0][0])
        _fail(fname, "non-finite value", row=row)


@dataclass(eq=False)
class Pool:
    """Immutable feature pool with train/test split tags."""

    features: np.ndarray          # (n_samples, dim) float64
    sample_ids: list[int]
    split: np.ndarray             # (n_samples,) of 'train'/'test'
    display_uri: Optional[list[str]] = None
    _gram_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def train_indices(self) -> np.ndarray:
        return np.flatnonzero(self.split == "train")

    @property
    def test_indices(self) -> np.ndarray:
        return np.flatnonzero(self.split == "test")

    def train_gram(self) -> np.ndarray:
        """Cached gram matrix of the train split (for incremental solves)."""
        if "train" not in self._gram_cache:
            x = self.features[self.train_indices]
            self._gram_cache["train"] = x @ x.T
        return self._gram_cache["train"]

    def validate(self):
        if self.n_samples < 2:
            raise DatasetError("pool must contain at least 2 samples")
        _check_finite(self.features, "features")
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise DatasetError("sample_ids must be unique")
        if len(self.split) != self.n_samples:
            raise DatasetError(
                f"split.csv: row count {len(self.split)} != feature rows {self.n_samples}")
        bad = ~np.isin(self.split, ("train", "test"))
        if bad.any():
            _fail("split.csv", "tag must be 'train' or 'test'", int(np.argwhere(bad)[0][0]))


@dataclass(frozen=True)
class LabelMatrix:
    class_names: tuple[str, ...]
    labels: np.ndarray            # (n_samples, n_classes) int8 in {-1,+1}

    def column(self, class_name: str) -> np.ndarray:
        return self.labels[:, self.class_names.index(class_name)]

    def validate(self, pool: Pool):
        if len(self.class_names) != len(set(self.class_names)):
            raise DatasetError("labels.csv: duplicate class name in header")
        if self.labels.shape != (pool.n_samples, len(self.class_names)):
            raise DatasetError(
                f"labels.csv: row count {self.labels.shape[0]} != feature rows {pool.n_samples}")
        bad = ~np.isin(self.labels, (-1, 1))
        if bad.any():
            _fail("labels.csv", "labels must be +1 or -1", int(np.argwhere(bad)[0][0]))
        warnings = []
        train = pool.train_indices
        for j, name in enumerate(self.class_names):
            col = self.labels[train, j]
            if not ((col == 1).any() and (col == -1).any()):
                warnings.append(f"class {name!r} lacks a positive or negative in the train split")
        return warnings


@dataclass(frozen=True)
class SourceBank:
    source_names: tuple[str, ...]
    weights: np.ndarray           # (K, dim)
    biases: np.ndarray            # (K,)

    @property
    def n_sources(self) -> int:
        return self.weights.shape[0]

    def validate(self, pool: Pool):
        if len(self.source_names) != self.weights.shape[0]:
            raise DatasetError(
                f"sources.txt: {len(self.source_names)} names for {self.weights.shape[0]} rows")
        if len(self.source_names) != len(set(self.source_names)):
            raise DatasetError("sources.txt: duplicate source name")
        if self.weights.shape[1] != pool.dim:
            raise DatasetError(
                f"sources.bin: dim {self.weights.shape[1]} != feature dim {pool.dim}")
        _check_finite(self.weights, "sources.bin")
        _check_finite(self.biases, "sources.bin")


@dataclass(frozen=True)
class RelationMatrix:
    target_names: tuple[str, ...]
    betas: np.ndarray             # (n_targets, K)

    def row(self, target_name: str) -> np.ndarray:
        return self.betas[self.target_names.index(target_name)]

    def validate(self, bank: SourceBank):
        if len(self.target_names) != len(set(self.target_names)):
            raise DatasetError("relations.csv: duplicate target name")
        if self.betas.shape != (len(self.target_names), bank.n_sources):
            raise DatasetError(
                f"relations.csv: {self.betas.shape[1]} beta columns for "
                f"{bank.n_sources} sources")
        _check_finite(self.betas, "relations.csv")


@dataclass(frozen=True)
class ClassSplit:
    known: tuple[str, ...]
    unknown: tuple[str, ...]


class Bundle(NamedTuple):
    pool: Pool
    labels: LabelMatrix
    sources: SourceBank
    relations: RelationMatrix


# ---------------------------------------------------------------------------
# File IO
# ---------------------------------------------------------------------------

def _read_bin_matrix(path: Path, magic: bytes):
    raw = path.read_bytes()
    if raw[:4] != magic:
        _fail(path.name, f"bad magic {raw[:4]!r}, expected {magic!r}")
    version, n, d = struct.unpack_from("<III", raw, 4)
    if version != FORMAT_VERSION:
        _fail(path.name, f"unsupported version {version}")
    expected = 16 + n * d * 4
    if len(raw) != expected:
        _fail(path.name, f"payload is {len(raw)} bytes, header implies {expected}")
    mat = np.frombuffer(raw, dtype="<f4", offset=16).reshape(n, d)
    return mat.astype(np.float64)


def _write_bin_matrix(path: Path, magic: bytes, mat: np.ndarray):
    n, d = mat.shape
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack("<III", FORMAT_VERSION, n, d))
        fh.write(np.ascontiguousarray(mat, dtype="<f4").tobytes())


def _read_csv_rows(path: Path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def load_dataset(data_dir) -> Bundle:
    """Load and validate a dataset directory.

    Raises DatasetError naming the offending file (and row where relevant).
    """
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise DatasetError(f"{data_dir}: not a directory")

    bin_path = data_dir / "features.bin"
    csv_path = data_dir / "features.csv"
    if bin_path.exists():
        features = _read_bin_matrix(bin_path, FEATURES_MAGIC)
        feat_file = "features.bin"
    elif csv_path.exists():
        rows = _read_csv_rows(csv_path)
        try:
            features = np.array([[float(v) for v in row] for row in rows], dtype=np.float64)
        except ValueError:
            _fail("features.csv", "unparseable decimal field")
        if features.ndim != 2:
            _fail("features.csv", "ragged rows")
        feat_file = "features.csv"
    else:
        raise DatasetError(f"{data_dir}: missing file features.bin (or features.csv)")
    _check_finite(features, feat_file)
    n = features.shape[0]

    labels_path = data_dir / "labels.csv"
    if not labels_path.exists():
        raise DatasetError(f"{data_dir}: missing file labels.csv")
    rows = _read_csv_rows(labels_path)
    if not rows:
        _fail("labels.csv", "empty file")
    class_names = tuple(rows[0])
    body = rows[1:]
    if len(body) != n:
        _fail("labels.csv", f"row count {len(body)} != feature rows {n}")
    try:
        labels = np.array([[int(v) for v in row] for row in body], dtype=np.int8)
    except ValueError:
        _fail("labels.csv", "label fields must be +1 or -1")
    if labels.ndim != 2 or labels.shape[1] != len(class_names):
        _fail("labels.csv", "row width does not match header")

    split_path = data_dir / "split.csv"
    if not split_path.exists():
        raise DatasetError(f"{data_dir}: missing file split.csv")
    split = np.array([row[0].strip() for row in _read_csv_rows(split_path)])
    if len(split) != n:
        _fail("split.csv", f"row count {len(split)} != feature rows {n}")

    sources_path = data_dir / "sources.bin"
    names_path = data_dir / "sources.txt"
    for p in (sources_path, names_path):
        if not p.exists():
            raise DatasetError(f"{data_dir}: missing file {p.name}")
    weights = _read_bin_matrix(sources_path, SOURCES_MAGIC)
    source_names = tuple(
        line.strip() for line in names_path.read_text().splitlines() if line.strip())
    biases = np.zeros(weights.shape[0])

    rel_path = data_dir / "relations.csv"
    if not rel_path.exists():
        raise DatasetError(f"{data_dir}: missing file relations.csv")
    rows = _read_csv_rows(rel_path)
    if not rows:
        _fail("relations.csv", "empty file")
    header = tuple(rows[0])
    if header != source_names:
        _fail("relations.csv", "header source names do not match sources.txt")
    target_names = tuple(row[0] for row in rows[1:])
    try:
        betas = np.array([[float(v) for v in row[1:]] for row in rows[1:]], dtype=np.float64)
    except ValueError:
        _fail("relations.csv", "unparseable beta field")

    uris_path = data_dir / "uris.csv"
    display_uri = None
    if uris_path.exists():
        display_uri = [row[0] if row else "" for row in _read_csv_rows(uris_path)]
        if len(display_uri) != n:
            _fail("uris.csv", f"row count {len(display_uri)} != feature rows {n}")

    pool = Pool(features=features, sample_ids=list(range(n)), split=split,
                display_uri=display_uri)
    label_matrix = LabelMatrix(class_names=class_names, labels=labels)
    bank = SourceBank(source_names=source_names, weights=weights, biases=biases)
    relations = RelationMatrix(target_names=target_names, betas=betas)

    pool.validate()
    label_matrix.validate(pool)
    bank.validate(pool)
    relations.validate(bank)
    return Bundle(pool, label_matrix, bank, relations)


def save_dataset(data_dir, bundle: Bundle):
    """Write a bundle in the on-disk directory layout."""
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    pool, labels, bank, relations = bundle

    _write_bin_matrix(data_dir / "features.bin", FEATURES_MAGIC, pool.features)
    with open(data_dir / "labels.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(labels.class_names)
        for row in labels.labels:
            w.writerow([f"{v:+d}" for v in row])
    with open(data_dir / "split.csv", "w", newline="") as fh:
        fh.write("\n".join(pool.split) + "\n")
    _write_bin_matrix(data_dir / "sources.bin", SOURCES_MAGIC, bank.weights)
    (data_dir / "sources.txt").write_text("\n".join(bank.source_names) + "\n")
    with open(data_dir / "relations.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(bank.source_names))
        for name, row in zip(relations.target_names, relations.betas):
            w.writerow([name] + [repr(float(v)) for v in row])
    if pool.display_uri is not None:
        with open(data_dir / "uris.csv", "w", newline="") as fh:
            fh.write("\n".join(pool.display_uri) + "\n")


# ---------------------------------------------------------------------------
# Class splits and synthetic benchmarks
# ---------------------------------------------------------------------------

def make_class_split(class_names: Sequence[str], known_fraction: float,
                     seed: int) -> ClassSplit:
    """Randomly split class names into known/unknown sets (deterministic)."""
    if not 0.0 < known_fraction < 1.0:
        raise ValueError(f"known_fraction must be in (0, 1), got {known_fraction}")
    names = list(class_names)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(names))
    n_known = round(known_fraction * len(names))
    known = tuple(sorted(names[i] for i in order[:n_known]))
    unknown = tuple(sorted(names[i] for i in order[n_known:]))
    return ClassSplit(known=known, unknown=unknown)


FEATURE_NOISE_SD = 0.7


def generate_synthetic(n_classes: int, n_per_class: int, dim: int,
                       prior_noise: float, seed: int) -> Bundle:
    """Gaussian class blobs with noisy true-direction source classifiers.

    Each class is an isotropic Gaussian blob (per-coordinate sd
    FEATURE_NOISE_SD) around a random unit-norm center.  The noise scale is
    calibrated so that, at C=1, the max-margin problem neither degenerates
    to the all-negative solution nor becomes separable: both extremes erase
    the differences between query strategies that the benchmark exists to
    expose.  The source bank holds one classifier per class: the true center
    direction perturbed by zero-mean Gaussian noise of scale `prior_noise`.
    Relations are the identity, so each target's prior is its own noisy
    direction.  The split is stratified 50/50 train/test.
    """
    if n_classes < 1 or n_per_class < 1 or dim < 1:
        raise ValueError("n_classes, n_per_class and dim must all be >= 1")
    if prior_noise < 0:
        raise ValueError(f"prior_noise must be >= 0, got {prior_noise}")
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(n_classes, dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)

    n = n_classes * n_per_class
    features = np.empty((n, dim))
    labels = -np.ones((n, n_classes), dtype=np.int8)
    split = np.empty(n, dtype=object)
    for c in range(n_classes):
        lo = c * n_per_class
        features[lo:lo + n_per_class] = (centers[c] + FEATURE_NOISE_SD
                                         * rng.normal(size=(n_per_class, dim)))
        labels[lo:lo + n_per_class, c] = 1
        order = rng.permutation(n_per_class)
        tags = np.full(n_per_class, "test", dtype=object)
        tags[order[:(n_per_class + 1) // 2]] = "train"
        split[lo:lo + n_per_class] = tags
    split = split.astype(str)

    class_names = tuple(f"c{c}" for c in range(n_classes))
    bank_weights = centers + prior_noise * rng.normal(size=(n_classes, dim))
    bundle = Bundle(
        pool=Pool(features=features, sample_ids=list(range(n)), split=split),
        labels=LabelMatrix(class_names=class_names, labels=labels),
        sources=SourceBank(source_names=class_names, weights=bank_weights,
                           biases=np.zeros(n_classes)),
        relations=RelationMatrix(target_names=class_names,
                                 betas=np.eye(n_classes)),
    )
    bundle.pool.validate()
    return bundle
