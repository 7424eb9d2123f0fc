"""Labeled embedding datasets: CSV ingestion, synthetic generation, summaries.

CSV interchange format (human-inspectable, diff-able):

    id,label,sentence,f0,f1,...,f{N-1}

The ``sentence`` column is optional and passed through untouched. Leading
lines starting with '#' are provenance comments (the embedding extractor
writes them) and are skipped. Features are serialized with 17 significant
digits so a write/read cycle is exact.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError


@dataclass
class LabeledExample:
    id: str
    label: int
    features: np.ndarray
    sentence: str | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass
class Dataset:
    feature_dim: int
    examples: list[LabeledExample] = field(default_factory=list)

    def __post_init__(self):
        for ex in self.examples:
            if ex.features.shape != (self.feature_dim,):
                raise ValueError(
                    f"example {ex.id!r} has {ex.features.shape} features, expected ({self.feature_dim},)"
                )

    def __len__(self) -> int:
        return len(self.examples)

    def features_matrix(self) -> np.ndarray:
        return np.stack([ex.features for ex in self.examples])

    def labels(self) -> np.ndarray:
        return np.array([ex.label for ex in self.examples], dtype=int)


def _parse_header(fields: list[str]) -> tuple[bool, int]:
    if len(fields) < 3 or fields[0] != "id" or fields[1] != "label":
        raise ParseError(f"header must start with id,label, got {fields[:3]}", line=1)
    has_sentence = fields[2] == "sentence"
    feat_names = fields[3:] if has_sentence else fields[2:]
    if not feat_names:
        raise ParseError("header declares no feature columns", line=1)
    for i, name in enumerate(feat_names):
        if name != f"f{i}":
            raise ParseError(f"expected feature column f{i}, got {name!r}", line=1)
    return has_sentence, len(feat_names)


def load_csv(path) -> Dataset:
    """Parse an embedding CSV; raises ParseError with the offending line number."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = csv.reader(_skip_comments(fh))
        try:
            header = next(rows)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        has_sentence, dim = _parse_header(header)
        n_cols = 2 + (1 if has_sentence else 0) + dim
        examples = []
        for fields in rows:
            line = rows.line_num
            if not fields:
                continue
            if len(fields) != n_cols:
                raise ParseError(f"expected {n_cols} columns, got {len(fields)}", line=line)
            if fields[1] not in ("0", "1"):
                raise ParseError(f"label must be 0 or 1, got {fields[1]!r}", line=line)
            sentence = fields[2] if has_sentence else None
            raw = fields[3:] if has_sentence else fields[2:]
            try:
                feats = np.array([float(v) for v in raw])
            except ValueError as exc:
                raise ParseError(f"bad feature value ({exc})", line=line) from None
            if not np.all(np.isfinite(feats)):
                raise ParseError("non-finite feature value", line=line)
            examples.append(LabeledExample(fields[0], int(fields[1]), feats, sentence))
    if not examples:
        raise ValueError(f"{path}: no data rows")
    return Dataset(dim, examples)


def _skip_comments(fh):
    body_started = False
    for raw in fh:
        if not body_started and raw.startswith("#"):
            continue
        body_started = True
        yield raw


def write_csv(dataset: Dataset, path, comments: list[str] | None = None) -> None:
    """Inverse of load_csv; optional '#' provenance comments go first."""
    has_sentence = any(ex.sentence is not None for ex in dataset.examples)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        header = ["id", "label"] + (["sentence"] if has_sentence else [])
        header += [f"f{i}" for i in range(dataset.feature_dim)]
        writer.writerow(header)
        for ex in dataset.examples:
            row = [ex.id, str(ex.label)]
            if has_sentence:
                row.append(ex.sentence or "")
            row += [format(v, ".17g") for v in ex.features]
            writer.writerow(row)


# Cluster means sit at carrier +- modulation, with the carrier CARRIER_RATIO
# times stronger than the half-separation modulation. The shared carrier is
# load-bearing: per-qubit Z readouts of an amplitude-encoded state are
# quadratic in the amplitudes, so they cannot see a global sign flip, and
# antipodal means (+-mu) would make the two encoded classes identically
# distributed. A strong common component turns the +- modulation into a
# first-order (carrier x modulation cross term) observable.
CARRIER_RATIO = 2.5


def synthesize(n_per_class: int, dim: int, separation: float, seed: int) -> Dataset:
    """Two seeded isotropic unit-variance Gaussian clusters, one per label.

    Means are ``carrier +- (separation/2) * modulation`` for seeded
    orthogonal unit directions, so their Euclidean distance is exactly
    ``separation`` (Bayes error ~ Phi(-separation/2) in raw feature space).
    """
    if n_per_class < 1:
        raise ValueError(f"n_per_class must be >= 1, got {n_per_class}")
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    if not separation > 0:
        raise ValueError(f"separation must be > 0, got {separation}")
    rng = np.random.default_rng(seed)
    means = _cluster_means(rng, dim, separation)
    examples = []
    for label in (0, 1):
        points = means[label] + rng.normal(size=(n_per_class, dim))
        for i in range(n_per_class):
            examples.append(LabeledExample(f"syn-{label}-{i:04d}", label, points[i]))
    return Dataset(dim, examples)


def _cluster_means(rng: np.random.Generator, dim: int, separation: float) -> np.ndarray:
    carrier = rng.normal(size=dim)
    carrier /= np.linalg.norm(carrier)
    modulation = rng.normal(size=dim)
    modulation -= carrier * (carrier @ modulation)
    modulation /= np.linalg.norm(modulation)
    half = separation / 2.0
    center = CARRIER_RATIO * half * carrier
    return np.stack([center + half * modulation, center - half * modulation])


def cluster_means(dim: int, separation: float, seed: int) -> np.ndarray:
    """The two configured means synthesize(seed=...) draws its clusters around."""
    return _cluster_means(np.random.default_rng(seed), dim, separation)


def stats(dataset: Dataset) -> dict:
    """Counts, class balance, single-pass feature moments, norm percentiles."""
    if len(dataset) == 0:
        raise ValueError("cannot summarize an empty dataset")
    count = 0
    mean = 0.0
    m2 = 0.0
    # Welford over every feature entry
    for ex in dataset.examples:
        for v in ex.features:
            count += 1
            delta = v - mean
            mean += delta / count
            m2 += delta * (v - mean)
    std = math.sqrt(m2 / count) if count > 1 else 0.0
    norms = np.array([np.linalg.norm(ex.features) for ex in dataset.examples])
    pct = np.percentile(norms, [0, 25, 50, 75, 100])
    labels = dataset.labels()
    return {
        "count": len(dataset),
        "feature_dim": dataset.feature_dim,
        "class_balance": float(labels.mean()),
        "feature_mean": mean,
        "feature_std": std,
        "norm_percentiles": {
            "p0": float(pct[0]),
            "p25": float(pct[1]),
            "p50": float(pct[2]),
            "p75": float(pct[3]),
            "p100": float(pct[4]),
        },
    }


def stats_json(dataset: Dataset) -> str:
    return json.dumps(stats(dataset), indent=2)
