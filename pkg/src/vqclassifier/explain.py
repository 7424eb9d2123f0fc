"""Shapley-value attribution over feature groups, with co-importance dendrograms.

The value function masks a group by replacing its features with the baseline
vector (single-baseline masking; no background-distribution averaging). The
attribution target is the class-1 ("acceptable") probability, so positive
phi pushes toward acceptance. Groups whose attribution profiles co-vary
across permutation replicates are merged first in the dendrogram
(agglomerative, average linkage, distance 1 - |corr|).

Note the divergence from token-level attribution inside a language model:
here groups are index blocks of the fixed embedding vector, token-aligned
only when the extractor supplies per-token spans.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .data import LabeledExample
from .errors import CapacityError, ShapeError
from .model import HybridModel, hybrid_forward

EXACT_GROUP_LIMIT = 20
MIN_SAMPLES = 100
DENDRO_REPLICATES = 200


@dataclass(frozen=True)
class FeatureGroup:
    name: str
    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if not self.indices:
            raise ValueError(f"group {self.name!r} has no feature indices")


def equal_blocks(n_features: int, k: int) -> list[FeatureGroup]:
    """Fallback grouping: k contiguous blocks of nearly equal size."""
    if not 1 <= k <= n_features:
        raise ValueError(f"need 1 <= k <= {n_features}, got {k}")
    bounds = np.linspace(0, n_features, k + 1, dtype=int)
    return [
        FeatureGroup(f"block{j}", tuple(range(bounds[j], bounds[j + 1])))
        for j in range(k)
    ]


def groups_from_spans(names: list[str], spans: list[tuple[int, int]]) -> list[FeatureGroup]:
    """Token-aligned groups from extractor-provided [start, end) feature spans."""
    return [FeatureGroup(n, tuple(range(a, b))) for n, (a, b) in zip(names, spans)]


def _check_partition(groups: list[FeatureGroup], n_features: int) -> None:
    seen: set[int] = set()
    for g in groups:
        for i in g.indices:
            if i in seen:
                raise ValueError(f"feature index {i} appears in more than one group")
            seen.add(i)
    if seen != set(range(n_features)):
        raise ValueError("groups must partition all feature indices exactly")


@dataclass
class AttributionRequest:
    example: LabeledExample
    groups: list[FeatureGroup]
    baseline: np.ndarray
    method: str = "exact"  # "exact" | "sampled"
    samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        self.baseline = np.asarray(self.baseline, dtype=float)
        n = self.example.features.size
        if self.baseline.shape != (n,):
            raise ShapeError(f"baseline must have shape ({n},), got {self.baseline.shape}")
        if self.method not in ("exact", "sampled"):
            raise ValueError(f"method must be 'exact' or 'sampled', got {self.method!r}")
        if not self.groups:
            raise ValueError("need at least one feature group")
        _check_partition(self.groups, n)


@dataclass
class DendroNode:
    """Either a leaf (one group) or a merge of two subtrees at a given height."""

    members: tuple[int, ...]
    height: float = 0.0
    left: "DendroNode | None" = None
    right: "DendroNode | None" = None
    phi_sum: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def leaf_count(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.leaf_count() + self.right.leaf_count()

    def annotate(self, phi: np.ndarray) -> "DendroNode":
        self.phi_sum = float(sum(phi[i] for i in self.members))
        if not self.is_leaf:
            self.left.annotate(phi)
            self.right.annotate(phi)
        return self

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": self.members[0]}
        return {
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
            "height": self.height,
            "phi_sum": self.phi_sum,
        }


@dataclass
class AttributionReport:
    example_id: str
    method: str
    base_value: float
    fx: float
    phi: np.ndarray
    groups: list[FeatureGroup]
    dendrogram: DendroNode
    stderr: np.ndarray | None = None

    def to_dict(self) -> dict:
        entries = []
        for j, g in enumerate(self.groups):
            entry = {"name": g.name, "indices": list(g.indices), "phi": float(self.phi[j])}
            if self.stderr is not None:
                entry["stderr"] = float(self.stderr[j])
            entries.append(entry)
        return {
            "version": 1,
            "example_id": self.example_id,
            "method": self.method,
            "base_value": self.base_value,
            "fx": self.fx,
            "groups": entries,
            "dendrogram": self.dendrogram.to_dict(),
        }


def _as_predictor(model):
    """Accept a HybridModel (class-1 probability) or any callable x -> float."""
    if isinstance(model, HybridModel):
        return lambda x: float(hybrid_forward(x, model)[1])
    if callable(model):
        return lambda x: float(model(x))
    raise TypeError(f"cannot attribute over {type(model).__name__}")


def _masked_input(request: AttributionRequest, mask: int) -> np.ndarray:
    x = request.baseline.copy()
    for j, g in enumerate(request.groups):
        if mask >> j & 1:
            idx = list(g.indices)
            x[idx] = request.example.features[idx]
    return x


def _coalition_values(predict, request: AttributionRequest) -> np.ndarray:
    m = len(request.groups)
    values = np.empty(2**m)
    for mask in range(2**m):
        values[mask] = predict(_masked_input(request, mask))
    return values


def _popcounts(size: int) -> np.ndarray:
    counts = np.zeros(size, dtype=np.int64)
    for k in range(1, size):
        counts[k] = counts[k >> 1] + (k & 1)
    return counts


def shapley_exact(model, request: AttributionRequest) -> AttributionReport:
    """Full coalition enumeration; exact efficiency Sum(phi) = f(x) - f(baseline)."""
    m = len(request.groups)
    if m > EXACT_GROUP_LIMIT:
        raise CapacityError(
            f"exact mode enumerates 2^{m} coalitions; use method='sampled' for m > {EXACT_GROUP_LIMIT}"
        )
    predict = _as_predictor(model)
    values = _coalition_values(predict, request)
    counts = _popcounts(2**m)
    # phi_i = sum_S |S|! (m-1-|S|)! [v(S+i) - v(S)] / m!, accumulated with
    # integer factorial weights and a single final division
    weights = np.array([math.factorial(s) * math.factorial(m - 1 - s) for s in range(m)], dtype=float)
    m_fact = float(math.factorial(m))
    idx = np.arange(2**m)
    phi = np.empty(m)
    for i in range(m):
        without = idx[(idx >> i) & 1 == 0]
        deltas = values[without | (1 << i)] - values[without]
        phi[i] = float(np.sum(weights[counts[without]] * deltas)) / m_fact
    base, fx = float(values[0]), float(values[-1])
    history = _replicates_from_cache(values, m, request.seed)
    dendro = _dendrogram_or_leaf(history, m).annotate(phi)
    return AttributionReport(request.example.id, "exact", base, fx, phi, request.groups, dendro)


def _replicates_from_cache(values: np.ndarray, m: int, seed: int, replicates: int = DENDRO_REPLICATES) -> np.ndarray:
    """Per-permutation marginal vectors, read off the cached coalition values."""
    rng = np.random.default_rng(seed)
    history = np.empty((m, replicates))
    for r in range(replicates):
        perm = rng.permutation(m)
        mask = 0
        prev = values[0]
        for g in perm:
            mask |= 1 << g
            history[g, r] = values[mask] - prev
            prev = values[mask]
    return history


def shapley_sampled(model, request: AttributionRequest) -> AttributionReport:
    """Permutation-sampling estimator with per-group standard errors."""
    if request.samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} permutation samples, got {request.samples}")
    m = len(request.groups)
    predict = _as_predictor(model)
    rng = np.random.default_rng(request.seed)
    base = predict(_masked_input(request, 0))
    fx = predict(_masked_input(request, (1 << m) - 1))
    marginals = np.empty((m, request.samples))
    for r in range(request.samples):
        perm = rng.permutation(m)
        x = request.baseline.copy()
        prev = base
        for g in perm:
            idx = list(request.groups[g].indices)
            x[idx] = request.example.features[idx]
            val = predict(x)
            marginals[g, r] = val - prev
            prev = val
    phi = marginals.mean(axis=1)
    stderr = marginals.std(axis=1, ddof=1) / math.sqrt(request.samples)
    dendro = _dendrogram_or_leaf(marginals, m).annotate(phi)
    return AttributionReport(
        request.example.id, "sampled", float(base), float(fx), phi, request.groups, dendro, stderr
    )


def attribute(model, request: AttributionRequest) -> AttributionReport:
    if request.method == "exact":
        return shapley_exact(model, request)
    return shapley_sampled(model, request)


# ---------------------------------------------------------------------------
# Hierarchical clustering of attribution profiles


def _abs_correlation_distance(history: np.ndarray) -> np.ndarray:
    """1 - |corr| between profile rows; constant rows get correlation 0."""
    m = history.shape[0]
    centered = history - history.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    dist = np.ones((m, m))
    np.fill_diagonal(dist, 0.0)
    for i in range(m):
        for j in range(i + 1, m):
            if norms[i] > 1e-300 and norms[j] > 1e-300:
                corr = float(centered[i] @ centered[j]) / (norms[i] * norms[j])
                dist[i, j] = dist[j, i] = 1.0 - min(abs(corr), 1.0)
    return dist


def cluster_dendrogram(phi_history: np.ndarray, linkage: str = "average", phi: np.ndarray | None = None) -> DendroNode:
    """Agglomerative clustering of group attribution profiles.

    phi_history is m x r (group x replicate). Ties in the merge queue break
    deterministically toward the cluster pair with the lowest leaf indices.
    """
    history = np.asarray(phi_history, dtype=float)
    if history.ndim != 2 or history.shape[0] < 2 or history.shape[1] < 2:
        raise ShapeError(f"phi_history must be m x r with m, r >= 2, got {history.shape}")
    if linkage != "average":
        raise ValueError(f"only 'average' linkage is supported, got {linkage!r}")
    m = history.shape[0]
    leaf_dist = _abs_correlation_distance(history)
    clusters: list[DendroNode] = [DendroNode((i,),) for i in range(m)]
    while len(clusters) > 1:
        best = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                d = _average_linkage(leaf_dist, clusters[a].members, clusters[b].members)
                pair = sorted((min(clusters[a].members), min(clusters[b].members)))
                key = (d, pair[0], pair[1])
                if best is None or key < best[0]:
                    best = (key, a, b)
        (height, _, _), a, b = best
        merged = DendroNode(
            tuple(sorted(clusters[a].members + clusters[b].members)),
            height=height,
            left=clusters[a],
            right=clusters[b],
        )
        clusters = [c for k, c in enumerate(clusters) if k not in (a, b)] + [merged]
    root = clusters[0]
    if phi is not None:
        root.annotate(np.asarray(phi, dtype=float))
    return root


def _average_linkage(leaf_dist: np.ndarray, members_a, members_b) -> float:
    total = 0.0
    for i in members_a:
        for j in members_b:
            total += leaf_dist[i, j]
    return total / (len(members_a) * len(members_b))


def _dendrogram_or_leaf(history: np.ndarray, m: int) -> DendroNode:
    if m == 1:
        return DendroNode((0,))
    return cluster_dendrogram(history)


# ---------------------------------------------------------------------------
# Export


def export_report(report: AttributionReport, path, format: str = "JSON", config: dict | None = None) -> None:
    """Write the report as JSON or DOT; ``config`` is echoed for provenance."""
    fmt = format.upper()
    if fmt == "JSON":
        doc = report.to_dict()
        if config is not None:
            doc["config"] = config
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    elif fmt == "DOT":
        with open(path, "w", encoding="utf-8") as fh:
            if config is not None:
                fh.write(f"// config: {json.dumps(config)}\n")
            fh.write(report_to_dot(report))
    else:
        raise ValueError(f"unknown export format {format!r} (expected JSON or DOT)")


def report_to_dot(report: AttributionReport) -> str:
    """One digraph; positive-contribution arcs orange, negative green."""
    lines = [
        "digraph attribution {",
        '  rankdir="BT";',
        '  node [shape=box, fontsize=10];',
    ]
    counter = [0]

    def walk(node: DendroNode) -> str:
        name = f"n{counter[0]}"
        counter[0] += 1
        if node.is_leaf:
            g = report.groups[node.members[0]]
            phi = report.phi[node.members[0]]
            lines.append(f'  {name} [label="{_dot_escape(g.name)}\\nφ={phi:.6g}"];')
            return name
        left = walk(node.left)
        right = walk(node.right)
        label = f"h={node.height:.4g}"
        if node.phi_sum is not None:
            label += f"\\nφ={node.phi_sum:.6g}"
        lines.append(f'  {name} [label="{label}", shape=ellipse];')
        for child, child_node in ((left, node.left), (right, node.right)):
            color = _arc_color(child_node)
            lines.append(f'  {child} -> {name} [color="{color}"];')
        return name

    walk(report.dendrogram)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _arc_color(node: DendroNode) -> str:
    if node.phi_sum is not None and node.phi_sum < 0:
        return "green"
    return "orange"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def mean_baseline(features_matrix: np.ndarray) -> np.ndarray:
    """Default masking baseline: the feature-wise mean of a reference set."""
    mat = np.asarray(features_matrix, dtype=float)
    if mat.ndim != 2:
        raise ShapeError(f"need a 2-D feature matrix, got shape {mat.shape}")
    return mat.mean(axis=0)
