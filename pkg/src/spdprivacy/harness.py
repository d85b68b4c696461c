"""Benchmark harness: privacy-utility experiments on synthetic and image data.

An :class:`ExperimentSpec` pins everything an experiment depends on,
including the seed; the emitted records (and hence the CSV) are a pure
function of the spec.  Trials inside each (epsilon, delta) cell run on
independent RNG substreams keyed by (seed, cell, trial), so thread count
does not affect results, and records are sorted canonically before
emission.

Wall-clock timing of the privatization call is optional (``record_timing``)
because real timings are not reproducible; with timing off the
``wall_time_ns`` column is zero and the CSV is byte-stable across runs.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .descriptors import (
    DescriptorParams,
    covariance_descriptor,
    descriptor_radius_bound,
    load_pnm,
)
from .errors import DomainError
from .geometry import SpdMatrix, ball_radius, frechet_mean_le, le_distance
from .mechanisms import (
    PrivacyBudget,
    Sensitivity,
    calibrate_analytic,
    calibrate_classical,
    extrinsic_gaussian,
    riemannian_laplace,
    sensitivity_extrinsic,
    sensitivity_frechet_le,
    tangent_gaussian,
)
from .sampling import RngState, sample_synthetic_spd

log = logging.getLogger(__name__)

MECHANISMS = (
    "tangent_classical",
    "tangent_analytic",
    "extrinsic_analytic",
    "riemannian_laplace",
)

CSV_HEADER = "mechanism,k,epsilon,delta,trial,utility,wall_time_ns,acceptance_ratio"

# Substream tags so dataset and noise streams never collide.
_DATA_STREAM = 0
_NOISE_STREAM = 1


@dataclass(frozen=True)
class ExperimentSpec:
    """One benchmark configuration; every field participates in determinism."""

    kind: str  # "synthetic" | "image"
    mechanism: str
    epsilon_grid: tuple[float, ...]
    delta_grid: tuple[float, ...]
    n: int = 500
    r: float = 0.25
    k: int = 2
    trials: int = 10
    seed: int = 0
    burn_in: int = 50000
    image_dir: str | None = None
    eta: float = 1e-6
    resample_data: bool = False
    measured_radius: bool = False
    record_timing: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("synthetic", "image"):
            raise DomainError(f"kind must be 'synthetic' or 'image', got {self.kind!r}")
        if self.mechanism not in MECHANISMS:
            raise DomainError(
                f"mechanism must be one of {MECHANISMS}, got {self.mechanism!r}"
            )
        if not self.epsilon_grid or not self.delta_grid:
            raise DomainError("epsilon and delta grids must be nonempty")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.kind == "synthetic" and self.k < 2:
            raise DomainError("synthetic experiments require k >= 2")
        if self.kind == "image" and self.image_dir is None:
            raise DomainError("image experiments require image_dir")
        if self.burn_in < 1:
            raise DomainError("burn_in must be >= 1")
        object.__setattr__(
            self, "epsilon_grid", tuple(float(e) for e in self.epsilon_grid)
        )
        object.__setattr__(
            self, "delta_grid", tuple(float(d) for d in self.delta_grid)
        )


@dataclass(frozen=True)
class TrialRecord:
    """One measured outcome row."""

    mechanism: str
    k: int
    epsilon: float
    delta: float
    trial: int
    utility: float
    wall_time_ns: int = 0
    acceptance_ratio: float | None = None

    def sort_key(self) -> tuple:
        return (self.mechanism, self.k, self.epsilon, self.delta, self.trial)


@dataclass(frozen=True)
class _Group:
    """One summary to privatize: the whole dataset (synthetic) or a class."""

    mean: SpdMatrix
    n: int
    k: int
    radius: float


def _noise_scale(
    mechanism: str, epsilon: float, delta: float, sens: Sensitivity
) -> float:
    if mechanism == "tangent_classical":
        return calibrate_classical(sens, PrivacyBudget(epsilon, delta))
    if mechanism in ("tangent_analytic", "extrinsic_analytic"):
        return calibrate_analytic(sens, PrivacyBudget(epsilon, delta))
    if mechanism == "riemannian_laplace":
        # Pure-DP Laplace scale; delta plays no role.
        return sens.value / epsilon
    raise DomainError(f"unknown mechanism {mechanism!r}")


def _sensitivity(mechanism: str, n: int, radius: float) -> Sensitivity:
    if mechanism == "extrinsic_analytic":
        return sensitivity_extrinsic(n, radius)
    return sensitivity_frechet_le(n, radius)


def _privatize(
    spec: ExperimentSpec, rng: RngState, mean: SpdMatrix, sigma: float
) -> tuple[float, int, float | None]:
    """Run one privatization; returns (utility, wall_time_ns, acceptance)."""
    mechanism = spec.mechanism
    start = time.perf_counter_ns() if spec.record_timing else 0
    if mechanism in ("tangent_classical", "tangent_analytic"):
        out = tangent_gaussian(rng, mean, sigma)
        elapsed = time.perf_counter_ns() - start if spec.record_timing else 0
        return le_distance(mean, out) ** 2, elapsed, None
    if mechanism == "extrinsic_analytic":
        out = extrinsic_gaussian(rng, mean, sigma)
        elapsed = time.perf_counter_ns() - start if spec.record_timing else 0
        deviation = float(np.linalg.norm(out.entries - mean.entries))
        return deviation**2, elapsed, None
    draw = riemannian_laplace(rng, mean, sigma, burn_in=spec.burn_in)
    elapsed = time.perf_counter_ns() - start if spec.record_timing else 0
    if draw.warning:
        log.warning("%s", draw.warning)
    return le_distance(mean, draw.sample) ** 2, elapsed, draw.acceptance_ratio


def _synthetic_dataset(spec: ExperimentSpec, rng: RngState) -> list[SpdMatrix]:
    return [sample_synthetic_spd(rng, spec.k, spec.r) for _ in range(spec.n)]


def _run_cells(
    spec: ExperimentSpec, base: RngState, groups: list[_Group], threads: int
) -> list[TrialRecord]:
    """Fan out over (group, epsilon, delta) cells and trials."""
    cells = [
        (group, eps, delta)
        for group in groups
        for eps in spec.epsilon_grid
        for delta in spec.delta_grid
    ]

    def one_trial(args: tuple[int, int]) -> TrialRecord:
        cell_index, trial = args
        group, eps, delta = cells[cell_index]
        sens = _sensitivity(spec.mechanism, group.n, group.radius)
        sigma = _noise_scale(spec.mechanism, eps, delta, sens)
        rng = base.substream(_NOISE_STREAM, cell_index, trial)
        if spec.kind == "synthetic" and spec.resample_data:
            data = _synthetic_dataset(
                spec, base.substream(_DATA_STREAM, cell_index, trial)
            )
            mean = frechet_mean_le(data)
        else:
            mean = group.mean
        utility, elapsed, acceptance = _privatize(spec, rng, mean, sigma)
        return TrialRecord(
            mechanism=spec.mechanism,
            k=group.k,
            epsilon=eps,
            delta=delta,
            trial=trial,
            utility=utility,
            wall_time_ns=elapsed,
            acceptance_ratio=acceptance,
        )

    tasks = [(ci, t) for ci in range(len(cells)) for t in range(spec.trials)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(one_trial, tasks))
    else:
        records = [one_trial(task) for task in tasks]
    records.sort(key=TrialRecord.sort_key)
    return records


def run_synthetic(spec: ExperimentSpec, threads: int = 1) -> list[TrialRecord]:
    """Run the synthetic-data experiment described by ``spec``.

    The dataset is drawn once per (k, r, seed) and shared by all cells
    unless ``resample_data`` asks for a fresh dataset per trial.  The ball
    radius defaults to the generator's guarantee sqrt(k) * r; with
    ``measured_radius`` the observed radius is used instead.
    """
    if spec.kind != "synthetic":
        raise DomainError("run_synthetic requires a synthetic spec")
    base = RngState(spec.seed)
    data = _synthetic_dataset(spec, base.substream(_DATA_STREAM))
    mean = frechet_mean_le(data)
    radius = math.sqrt(spec.k) * spec.r
    if spec.measured_radius:
        radius = ball_radius(data, SpdMatrix(np.eye(spec.k)))
    group = _Group(mean=mean, n=spec.n, k=spec.k, radius=radius)
    return _run_cells(spec, base, [group], threads)


def _image_classes(root: Path) -> list[tuple[str, list[Path]]]:
    subdirs = sorted(p for p in root.iterdir() if p.is_dir())
    if subdirs:
        return [
            (d.name, sorted(p for p in d.iterdir() if p.is_file())) for d in subdirs
        ]
    return [("", sorted(p for p in root.iterdir() if p.is_file()))]


def run_image(spec: ExperimentSpec, threads: int = 1) -> list[TrialRecord]:
    """Run the covariance-descriptor experiment over a directory of images.

    One subdirectory per class, or a flat directory treated as one class.
    Unparseable files are skipped with a warning; an empty class is an
    error.  Sensitivity uses the analytic radius bound of the descriptor
    pipeline and n = class size.
    """
    if spec.kind != "image":
        raise DomainError("run_image requires an image spec")
    root = Path(spec.image_dir)
    if not root.is_dir():
        raise DomainError(f"image_dir {root} is not a directory")
    params = DescriptorParams(eta=spec.eta)
    base = RngState(spec.seed)

    groups = []
    for name, files in _image_classes(root):
        descriptors = []
        channels = None
        for path in files:
            try:
                image = load_pnm(path)
            except DomainError as exc:
                log.warning("skipping %s: %s", path, exc)
                continue
            if channels is None:
                channels = image.channels
            elif image.channels != channels:
                raise DomainError(
                    f"class {name!r} mixes gray and RGB images; descriptors "
                    "would have different dimensions"
                )
            descriptors.append(covariance_descriptor(image, params))
        if not descriptors:
            raise DomainError(f"class {name!r} contains no parseable images")
        groups.append(
            _Group(
                mean=frechet_mean_le(descriptors),
                n=len(descriptors),
                k=descriptors[0].dim,
                radius=descriptor_radius_bound(channels, spec.eta),
            )
        )
    return _run_cells(spec, base, groups, threads)


def _format_float(x: float) -> str:
    return repr(float(x))


def render_csv(records: list[TrialRecord]) -> str:
    """Records as CSV text with the canonical header; acceptance_ratio is
    empty for mechanisms without a chain."""
    if not records:
        raise DomainError("no records to emit")
    lines = [CSV_HEADER]
    for rec in records:
        acceptance = (
            "" if rec.acceptance_ratio is None else _format_float(rec.acceptance_ratio)
        )
        lines.append(
            ",".join(
                [
                    rec.mechanism,
                    str(rec.k),
                    _format_float(rec.epsilon),
                    _format_float(rec.delta),
                    str(rec.trial),
                    _format_float(rec.utility),
                    str(rec.wall_time_ns),
                    acceptance,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def emit_csv(records: list[TrialRecord], path: str | Path) -> None:
    """Write :func:`render_csv` output to ``path``."""
    Path(path).write_text(render_csv(records))
