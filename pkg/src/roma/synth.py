"""Synthetic dataset generators.

Inliers live on the unit sphere inside a planted r-dimensional subspace,
outliers on the full sphere, either spread uniformly or clustered around a
random center with tightness mu.  Generation is driven by a counter-based
RNG (Philox) with one substream per column, keyed by (seed, domain, column
index), so datasets are bitwise reproducible no matter how generation is
parallelized or interleaved: column j of a given seed is always the same.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .data import DataMatrix, Label, write_csv
from .errors import FeasibilityError, ValidationError

__all__ = [
    "ColumnStreams",
    "shuffle_and_label",
    "UniformInliers",
    "ClusteredInliers",
    "UnstructuredOutliers",
    "ClusteredOutliers",
    "BoundedConeOutliers",
    "SynthSpec",
    "SynthDataset",
    "random_subspace",
    "sample_uniform_inliers",
    "sample_clustered_inliers",
    "sample_unstructured_outliers",
    "sample_clustered_outliers",
    "sample_bounded_cone",
    "sample_unstructured",
    "make_dataset",
    "assemble",
    "add_noise_snr",
    "export_dataset",
    "load_sidecar",
    "NOISE_TARGETS",
]

NOISE_TARGETS = ("inliers", "all")

# Substream domains: each (domain, index) pair owns an independent Philox
# stream under a fixed seed.
_DOM_SUBSPACE = 1
_DOM_INLIER = 2
_DOM_OUTLIER = 3
_DOM_INLIER_CENTER = 4
_DOM_OUTLIER_CENTER = 5
_DOM_SHUFFLE = 6
_DOM_NOISE = 7
_DOM_AUX = 0

_MAX_INDEX = 1 << 56


@dataclass(frozen=True)
class ColumnStreams:
    """Per-column substreams of a counter-based generator.

    The Philox key packs (seed, domain, index) into 128 bits, so distinct
    columns get independent streams and a column's draws do not depend on
    which other columns were generated or in what order.
    """

    seed: int

    def __post_init__(self):
        seed = int(self.seed)
        if not 0 <= seed < (1 << 64):
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
        object.__setattr__(self, "seed", seed)

    def stream(self, domain: int, index: int) -> np.random.Generator:
        if not 0 <= index < _MAX_INDEX:
            raise ValidationError(f"substream index out of range: {index}")
        key = (self.seed << 64) | (domain << 56) | index
        return np.random.Generator(np.random.Philox(key=key))

    def subspace(self) -> np.random.Generator:
        return self.stream(_DOM_SUBSPACE, 0)

    def inlier(self, index: int) -> np.random.Generator:
        return self.stream(_DOM_INLIER, index)

    def outlier(self, index: int) -> np.random.Generator:
        return self.stream(_DOM_OUTLIER, index)

    def inlier_center(self, index: int = 0) -> np.random.Generator:
        return self.stream(_DOM_INLIER_CENTER, index)

    def outlier_center(self, index: int = 0) -> np.random.Generator:
        return self.stream(_DOM_OUTLIER_CENTER, index)

    def shuffle(self) -> np.random.Generator:
        return self.stream(_DOM_SHUFFLE, 0)

    def noise(self, column: int) -> np.random.Generator:
        return self.stream(_DOM_NOISE, column)

    def aux(self, index: int) -> np.random.Generator:
        """Experiment-level draws that must not collide with column streams."""
        return self.stream(_DOM_AUX, index)


@dataclass(frozen=True)
class UniformInliers:
    """Inliers uniform on the unit sphere of the planted subspace."""


@dataclass(frozen=True)
class ClusteredInliers:
    """Inliers u + nu * v_i around a random in-subspace center u."""

    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise ValidationError(f"nu must be positive, got {self.nu!r}")


@dataclass(frozen=True)
class UnstructuredOutliers:
    """Outliers uniform on the full unit sphere."""


@dataclass(frozen=True)
class ClusteredOutliers:
    """Outliers a + mu * b_i around a random center a, then normalized.

    ``literal_scale`` switches to the fixed-scale form (a + b_i) /
    sqrt(1 + mu^2); after the mandatory renormalization that form no longer
    depends on mu, which is why it is not the default.
    """

    mu: float
    literal_scale: bool = False

    def __post_init__(self):
        if not self.mu > 0:
            raise ValidationError(f"mu must be positive, got {self.mu!r}")


@dataclass(frozen=True)
class BoundedConeOutliers:
    """Outliers rejection-sampled so pairwise angles stay within theta_max."""

    theta_max: float
    within_subspace: bool = False

    def __post_init__(self):
        if not 0.0 < self.theta_max < math.pi / 2.0:
            raise ValidationError(
                f"theta_max must lie in (0, pi/2), got {self.theta_max!r}")


@dataclass(frozen=True)
class SynthSpec:
    """Full description of a synthetic dataset; everything the sidecar needs."""

    n: int
    num_points: int
    rank: int
    gamma: float
    seed: int
    inlier_model: object = UniformInliers()
    outlier_model: object = UnstructuredOutliers()
    snr_db: float | None = None
    noise_target: str = "inliers"

    def __post_init__(self):
        if self.n < 3:
            raise ValidationError(f"ambient dimension must be at least 3, got {self.n}")
        if not 1 <= self.rank <= self.n:
            raise ValidationError(f"rank must lie in [1, n={self.n}], got {self.rank}")
        if self.num_points < 2:
            raise ValidationError(f"need at least 2 points, got {self.num_points}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValidationError(f"gamma must lie in [0, 1), got {self.gamma!r}")
        if self.num_inliers < 1:
            raise ValidationError("gamma leaves no inliers")
        if self.noise_target not in NOISE_TARGETS:
            raise ValidationError(
                f"noise_target must be one of {NOISE_TARGETS}, got {self.noise_target!r}")

    @property
    def num_outliers(self) -> int:
        # half-up rounding; round-half-even would surprise on exact halves
        return int(math.floor(self.gamma * self.num_points + 0.5))

    @property
    def num_inliers(self) -> int:
        return self.num_points - self.num_outliers


@dataclass(frozen=True, eq=False)
class SynthDataset:
    matrix: DataMatrix
    spec: SynthSpec
    sigma: float | None = None
    point_snr: np.ndarray | None = None

    @property
    def inlier_indices(self) -> np.ndarray:
        return self.matrix.label_indices(Label.INLIER)

    @property
    def outlier_indices(self) -> np.ndarray:
        return self.matrix.label_indices(Label.OUTLIER)


def random_subspace(n: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal basis of a rotation-invariant random r-dim subspace."""
    if not 1 <= r <= n:
        raise ValidationError(f"rank must lie in [1, n={n}], got {r}")
    a = rng.standard_normal((n, r))
    q, rr = np.linalg.qr(a)
    # Sign-fix the factorization so the distribution is exactly uniform.
    signs = np.sign(np.diag(rr))
    signs[signs == 0] = 1.0
    return q * signs


def _unit(vec: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise ValidationError("drew a zero vector; cannot normalize")
    return vec / norm


def sample_uniform_inliers(basis: np.ndarray, count: int, streams: ColumnStreams,
                           index_offset: int = 0) -> np.ndarray:
    """Columns U g / ||U g||, uniform on the subspace's unit sphere."""
    n, r = basis.shape
    cols = np.empty((n, count))
    for i in range(count):
        g = streams.inlier(index_offset + i).standard_normal(r)
        cols[:, i] = _unit(basis @ g)
    return cols


def sample_clustered_inliers(basis: np.ndarray, count: int, nu: float,
                             streams: ColumnStreams, index_offset: int = 0) -> np.ndarray:
    """In-subspace cluster: normalize(u + nu * v_i) with u, v_i unit in span(U)."""
    if not nu > 0:
        raise ValidationError(f"nu must be positive, got {nu!r}")
    n, r = basis.shape
    center = _unit(basis @ streams.inlier_center(index_offset).standard_normal(r))
    cols = np.empty((n, count))
    for i in range(count):
        g = streams.inlier(index_offset + i).standard_normal(r)
        cols[:, i] = _unit(center + nu * _unit(basis @ g))
    return cols


def sample_unstructured_outliers(n: int, count: int, streams: ColumnStreams,
                                 index_offset: int = 0) -> np.ndarray:
    """Columns uniform on the full unit sphere."""
    cols = np.empty((n, count))
    for i in range(count):
        h = streams.outlier(index_offset + i).standard_normal(n)
        cols[:, i] = _unit(h)
    return cols


def sample_clustered_outliers(n: int, count: int, mu: float, streams: ColumnStreams,
                              index_offset: int = 0,
                              literal_scale: bool = False) -> np.ndarray:
    """Cluster of unit vectors around a random center a.

    Default form normalize(a + mu * b_i); ``literal_scale`` uses
    (a + b_i) / sqrt(1 + mu^2) before normalization instead.
    """
    if not mu > 0:
        raise ValidationError(f"mu must be positive, got {mu!r}")
    center = _unit(streams.outlier_center(index_offset).standard_normal(n))
    scale = 1.0 if literal_scale else mu
    cols = np.empty((n, count))
    for i in range(count):
        b = _unit(streams.outlier(index_offset + i).standard_normal(n))
        raw = center + scale * b
        if literal_scale:
            raw = raw / math.sqrt(1.0 + mu * mu)
        cols[:, i] = _unit(raw)
    return cols


def sample_bounded_cone(n: int, count: int, theta_max: float, streams: ColumnStreams,
                        subspace: np.ndarray | None = None,
                        index_offset: int = 0) -> np.ndarray:
    """Unit vectors whose pairwise principal angles all stay within theta_max.

    Rejection sampling with a total candidate budget of 1000 * count; raises
    FeasibilityError carrying the observed acceptance rate when the budget
    runs out (tight cones in high dimension are exponentially unlikely).
    """
    if not 0.0 < theta_max < math.pi / 2.0:
        raise ValidationError(f"theta_max must lie in (0, pi/2), got {theta_max!r}")
    dim = n if subspace is None else subspace.shape[1]
    cos_min = math.cos(theta_max)
    budget = 1000 * count
    cols = np.empty((n, count))
    accepted = 0
    for draw in range(budget):
        g = streams.outlier(index_offset + draw).standard_normal(dim)
        x = _unit(g if subspace is None else subspace @ g)
        if accepted == 0 or np.all(cols[:, :accepted].T @ x >= cos_min):
            cols[:, accepted] = x
            accepted += 1
            if accepted == count:
                return cols
    raise FeasibilityError(
        f"accepted {accepted}/{count} cone points in {budget} draws",
        acceptance_rate=accepted / budget)


def shuffle_and_label(inlier_cols: np.ndarray, outlier_cols: np.ndarray | None,
                      basis: np.ndarray, streams: ColumnStreams) -> DataMatrix:
    """Concatenate labeled columns and shuffle them into a DataMatrix."""
    parts = [inlier_cols] if outlier_cols is None or outlier_cols.shape[1] == 0 \
        else [inlier_cols, outlier_cols]
    values = np.hstack(parts)
    total = values.shape[1]
    labels = np.full(total, int(Label.OUTLIER), dtype=np.int8)
    labels[: inlier_cols.shape[1]] = int(Label.INLIER)
    perm = streams.shuffle().permutation(total)
    return DataMatrix(values[:, perm], labels=labels[perm], true_basis=basis)


def assemble(inlier_cols: np.ndarray, outlier_cols: np.ndarray | None,
             basis: np.ndarray, spec: SynthSpec,
             streams: ColumnStreams | None = None) -> SynthDataset:
    """Concatenate, label, shuffle, and (per spec) add noise."""
    streams = streams or ColumnStreams(spec.seed)
    total = inlier_cols.shape[1] + (0 if outlier_cols is None else outlier_cols.shape[1])
    if total != spec.num_points:
        raise ValidationError(
            f"assembled {total} columns but spec declares {spec.num_points}")
    matrix = shuffle_and_label(inlier_cols, outlier_cols, basis, streams)
    dataset = SynthDataset(matrix=matrix, spec=spec)
    if spec.snr_db is not None:
        dataset = add_noise_snr(dataset, spec.snr_db, streams, spec.noise_target)
    return dataset


def make_dataset(spec: SynthSpec) -> SynthDataset:
    """Build the dataset a SynthSpec describes."""
    streams = ColumnStreams(spec.seed)
    basis = random_subspace(spec.n, spec.rank, streams.subspace())
    model = spec.inlier_model
    if isinstance(model, UniformInliers):
        inlier_cols = sample_uniform_inliers(basis, spec.num_inliers, streams)
    elif isinstance(model, ClusteredInliers):
        inlier_cols = sample_clustered_inliers(basis, spec.num_inliers, model.nu, streams)
    else:
        raise ValidationError(f"unknown inlier model {model!r}")
    outlier_cols = None
    if spec.num_outliers:
        model = spec.outlier_model
        if isinstance(model, UnstructuredOutliers):
            outlier_cols = sample_unstructured_outliers(spec.n, spec.num_outliers, streams)
        elif isinstance(model, ClusteredOutliers):
            outlier_cols = sample_clustered_outliers(
                spec.n, spec.num_outliers, model.mu, streams,
                literal_scale=model.literal_scale)
        elif isinstance(model, BoundedConeOutliers):
            outlier_cols = sample_bounded_cone(
                spec.n, spec.num_outliers, model.theta_max, streams,
                subspace=basis if model.within_subspace else None)
        else:
            raise ValidationError(f"unknown outlier model {model!r}")
    return assemble(inlier_cols, outlier_cols, basis, spec, streams)


def sample_unstructured(spec: SynthSpec, streams: ColumnStreams | None = None) -> SynthDataset:
    """Dataset with uniform subspace inliers and full-sphere outliers."""
    if not isinstance(spec.inlier_model, UniformInliers) or \
            not isinstance(spec.outlier_model, UnstructuredOutliers):
        spec = dataclasses.replace(spec, inlier_model=UniformInliers(),
                                   outlier_model=UnstructuredOutliers())
    del streams  # column substreams are derived from spec.seed
    return make_dataset(spec)


def add_noise_snr(dataset: SynthDataset, snr_db: float,
                  streams: ColumnStreams | None = None,
                  target: str = "inliers") -> SynthDataset:
    """Add white Gaussian noise calibrated to a matrix-level SNR in dB.

    sigma = ||M||_F / (10^(snr_db/20) sqrt(n N)) over the full matrix; the
    noise lands on the target columns ("inliers" by default, or "all").
    Also records per-point snr_i = ||m_i||^2 / (n sigma^2) of the clean
    columns.
    """
    if target not in NOISE_TARGETS:
        raise ValidationError(f"noise target must be one of {NOISE_TARGETS}, got {target!r}")
    if dataset.sigma is not None:
        raise ValidationError("dataset already carries noise")
    streams = streams or ColumnStreams(dataset.spec.seed)
    values = dataset.matrix.values.copy()
    n, total = values.shape
    sigma = np.linalg.norm(values) / (10.0 ** (snr_db / 20.0) * math.sqrt(n * total))
    point_snr = np.sum(values * values, axis=0) / (n * sigma * sigma)
    if target == "inliers":
        targets = dataset.matrix.label_indices(Label.INLIER)
    else:
        targets = np.arange(total)
    for j in targets:
        values[:, j] += sigma * streams.noise(int(j)).standard_normal(n)
    matrix = DataMatrix(values, labels=dataset.matrix.labels,
                        true_basis=dataset.matrix.true_basis)
    return SynthDataset(matrix=matrix, spec=dataset.spec, sigma=float(sigma),
                        point_snr=point_snr)


_INLIER_MODELS = {"uniform": UniformInliers, "clustered": ClusteredInliers}
_OUTLIER_MODELS = {"unstructured": UnstructuredOutliers,
                   "clustered": ClusteredOutliers,
                   "bounded-cone": BoundedConeOutliers}


def _model_to_dict(model) -> dict:
    # the registries reuse names ("clustered"), so search them separately
    for registry in (_INLIER_MODELS, _OUTLIER_MODELS):
        for name, cls in registry.items():
            if type(model) is cls:
                return {"type": name, **dataclasses.asdict(model)}
    raise ValidationError(f"unknown model {model!r}")


def _model_from_dict(d: dict, registry: dict):
    kind = d.get("type")
    if kind not in registry:
        raise ValidationError(f"unknown model type {kind!r}")
    params = {k: v for k, v in d.items() if k != "type"}
    return registry[kind](**params)


def spec_to_dict(spec: SynthSpec) -> dict:
    return {
        "n": spec.n, "num_points": spec.num_points, "rank": spec.rank,
        "gamma": spec.gamma, "seed": spec.seed,
        "inlier_model": _model_to_dict(spec.inlier_model),
        "outlier_model": _model_to_dict(spec.outlier_model),
        "snr_db": spec.snr_db, "noise_target": spec.noise_target,
    }


def spec_from_dict(d: dict) -> SynthSpec:
    return SynthSpec(
        n=d["n"], num_points=d["num_points"], rank=d["rank"], gamma=d["gamma"],
        seed=d["seed"],
        inlier_model=_model_from_dict(d["inlier_model"], _INLIER_MODELS),
        outlier_model=_model_from_dict(d["outlier_model"], _OUTLIER_MODELS),
        snr_db=d.get("snr_db"), noise_target=d.get("noise_target", "inliers"),
    )


def export_dataset(dataset: SynthDataset, csv_path,
                   orientation: str = "points-as-rows",
                   sidecar_path=None) -> str:
    """Write the dataset as CSV plus a JSON sidecar (spec, labels, basis)."""
    write_csv(dataset.matrix, csv_path, orientation)
    if sidecar_path is None:
        sidecar_path = str(csv_path) + ".json"
    payload = {
        "orientation": orientation,
        "spec": spec_to_dict(dataset.spec),
        "sigma": dataset.sigma,
        "labels": [Label(v).name.lower() for v in dataset.matrix.labels],
        "true_basis": dataset.matrix.true_basis.tolist(),
    }
    with open(sidecar_path, "w") as fh:
        json.dump(payload, fh, indent=1)
    return str(sidecar_path)


def load_sidecar(path) -> dict:
    """Read a sidecar back; labels become a Label-coded int8 array."""
    with open(path) as fh:
        payload = json.load(fh)
    name_to_code = {lab.name.lower(): np.int8(int(lab)) for lab in Label}
    try:
        labels = np.array([name_to_code[lab] for lab in payload["labels"]], dtype=np.int8)
    except KeyError as exc:
        raise ValidationError(f"unknown label {exc.args[0]!r} in sidecar") from None
    return {
        "orientation": payload.get("orientation", "points-as-rows"),
        "spec": spec_from_dict(payload["spec"]) if "spec" in payload else None,
        "sigma": payload.get("sigma"),
        "labels": labels,
        "true_basis": None if payload.get("true_basis") is None
        else np.asarray(payload["true_basis"], dtype=float),
    }
