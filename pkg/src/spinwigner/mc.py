"""Complex-weighted Monte Carlo estimation of the sliced spin density.

Each sample is a closed path of L independent points drawn uniformly on the
sphere; its weight is the cyclic product of coherent-state overlaps and its
binned coordinate is the radius (and optionally one projection) of the
scaled mean label (s+1) nbar. With uniform sampling the only surviving
normalization is the single scalar (2s+1)^{L-1}: bin densities are

    (2s+1)^{L-1} * sum_bin(w) / (n_paths * bin_measure),

with bin_measure the exact shell volume (radial) or the bin width
(projected). E[(2s+1)^{L-1} w] = 1 identically, which every run can check.

Determinism contract: paths are generated in fixed-size chunks, chunk i
drawing from the counter-based stream keyed by (seed, i). Per-chunk partial
sums are kept (they also provide batch-means error bars), and all totals
are reduced over the chunk-index-sorted stack, so any worker count and any
merge order reproduce a single-threaded run bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .spincore import SpinRep, validate_unit_vector

__all__ = [
    "McConfig",
    "PathSample",
    "ComplexHistogram",
    "SignMetrics",
    "McResult",
    "SignScanRow",
    "sample_unit_vector",
    "sample_path",
    "empty_histogram",
    "run_chunk_range",
    "run_estimation",
    "merge",
    "sign_metrics",
    "sign_scan",
]

RADIAL = "radial"
PROJECTED = "projected"

_TWO_PI = 2.0 * math.pi
_MAX_SEED = 2**64


@dataclass(frozen=True)
class McConfig:
    """Sampling plan for one (spin, L) experiment.

    n_samples is rounded up to a whole number of chunks; the padded count
    (``effective_samples``) is what all estimates are normalized by and what
    outputs echo. r_max defaults to s+1, the largest reachable radius.
    """

    spin: SpinRep
    L: int
    n_samples: int
    n_bins: int = 60
    r_max: float | None = None
    seed: int = 0
    chunk_size: int = 10_000
    project_axis: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"L must be >= 2, got {self.L}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.n_bins < 1:
            raise ValueError(f"n_bins must be >= 1, got {self.n_bins}")
        if self.chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {self.chunk_size}")
        if not 0 <= self.seed < _MAX_SEED:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.r_max is not None and self.r_max < self.spin.s + 1.0:
            raise ValueError(
                f"r_max = {self.r_max} does not cover the support radius "
                f"s+1 = {self.spin.s + 1.0}"
            )
        if self.project_axis is not None:
            axis = tuple(float(c) for c in validate_unit_vector(self.project_axis))
            object.__setattr__(self, "project_axis", axis)

    @property
    def r_max_resolved(self) -> float:
        return self.r_max if self.r_max is not None else self.spin.s + 1.0

    @property
    def n_chunks(self) -> int:
        return -(-self.n_samples // self.chunk_size)

    @property
    def effective_samples(self) -> int:
        return self.n_chunks * self.chunk_size

    @property
    def scale(self) -> float:
        """The estimator prefactor (2s+1)^(L-1)."""
        return float(self.spin.dimension()) ** (self.L - 1)

    def radial_edges(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max_resolved, self.n_bins + 1)

    def projected_edges(self) -> np.ndarray:
        r = self.r_max_resolved
        return np.linspace(-r, r, self.n_bins + 1)


@dataclass(frozen=True)
class PathSample:
    """One closed path: its points, mean label nbar, and loop weight."""

    points: np.ndarray
    mean_label: np.ndarray
    weight: complex


def sample_unit_vector(rng: np.random.Generator) -> np.ndarray:
    """One point, exactly uniform on the sphere: z ~ U[-1,1), phi ~ U[0,2pi)."""
    z = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, _TWO_PI)
    st = math.sqrt(max(0.0, 1.0 - z * z))
    return np.array([st * math.cos(phi), st * math.sin(phi), z])


def sample_path(L: int, rep: SpinRep, rng: np.random.Generator) -> PathSample:
    """One path of L independent uniform points with its loop weight.

    Draws the L polar coordinates as one block (all z, then all phi).
    """
    if L < 2:
        raise ValueError(f"L must be >= 2, got {L}")
    z = rng.uniform(-1.0, 1.0, L)
    phi = rng.uniform(0.0, _TWO_PI, L)
    points, weights = _paths_from_angles(z[None, :], phi[None, :], rep.two_s)
    return PathSample(
        points=points[0],
        mean_label=points[0].mean(axis=0),
        weight=complex(weights[0]),
    )


def _paths_from_angles(z: np.ndarray, phi: np.ndarray, two_s: int):
    """Cartesian points and loop weights for (n_paths, L) angle arrays."""
    st = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    x = st * np.cos(phi)
    y = st * np.sin(phi)
    a = np.sqrt((1.0 + z) / 2.0)
    b = (x + 1j * y) / (2.0 * np.maximum(a, 1e-300))
    b = np.where(a > 0.0, b, 1.0 + 0.0j)
    # consecutive spin-1/2 overlaps, closing cyclically (a is real)
    link = a * np.roll(a, -1, axis=1) + np.conj(b) * np.roll(b, -1, axis=1)
    weights = np.prod(link, axis=1) ** two_s
    points = np.stack([x, y, z], axis=-1)
    return points, weights


def _compute_chunk(config: McConfig, chunk_index: int):
    """All per-chunk accumulators, from the stream keyed by (seed, index)."""
    rng = np.random.Generator(np.random.Philox(key=[config.seed, chunk_index]))
    n = config.chunk_size
    z = rng.uniform(-1.0, 1.0, (n, config.L))
    phi = rng.uniform(0.0, _TWO_PI, (n, config.L))
    points, w = _paths_from_angles(z, phi, config.spin.two_s)
    nbar = points.mean(axis=1)
    label = (config.spin.s + 1.0) * nbar

    nb = config.n_bins
    r_max = config.r_max_resolved
    abs2 = (w * np.conj(w)).real

    r = np.sqrt((label**2).sum(axis=1))
    idx = np.minimum((r * (nb / r_max)).astype(np.int64), nb - 1)
    radial = _bin_sums(idx, w, abs2, nb)

    projected = None
    if config.project_axis is not None:
        u = label @ np.asarray(config.project_axis)
        pidx = (u + r_max) * (nb / (2.0 * r_max))
        pidx = np.clip(pidx.astype(np.int64), 0, nb - 1)
        projected = _bin_sums(pidx, w, abs2, nb)

    scalars = (complex(w.sum()), float(np.abs(w).sum()), float(abs2.sum()))
    return radial, projected, scalars


def _bin_sums(idx, w, abs2, n_bins):
    sum_w = np.bincount(idx, weights=w.real, minlength=n_bins) + 1j * np.bincount(
        idx, weights=w.imag, minlength=n_bins
    )
    sum_w2 = np.bincount(idx, weights=abs2, minlength=n_bins)
    count = np.bincount(idx, minlength=n_bins)
    return sum_w, sum_w2, count.astype(np.int64)


def _compute_block(config: McConfig, indices):
    return [_compute_chunk(config, int(i)) for i in indices]


@dataclass(frozen=True, eq=False)
class ComplexHistogram:
    """Complex-weighted accumulator with per-chunk sums retained.

    Bin totals are always reduced over the chunk-index-sorted stack, so the
    statistical content and the exact floating-point totals are independent
    of how the chunks were computed or merged.
    """

    config: McConfig
    kind: str
    edges: np.ndarray
    chunk_ids: np.ndarray
    chunk_sum_w: np.ndarray
    chunk_sum_w2: np.ndarray
    chunk_count: np.ndarray
    chunk_weight_sum: np.ndarray
    chunk_abs_sum: np.ndarray
    chunk_abs2_sum: np.ndarray

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1

    @property
    def n_chunks(self) -> int:
        return len(self.chunk_ids)

    @property
    def n_paths(self) -> int:
        return self.n_chunks * self.config.chunk_size

    @property
    def sum_w(self) -> np.ndarray:
        return self.chunk_sum_w.sum(axis=0)

    @property
    def sum_w2(self) -> np.ndarray:
        return self.chunk_sum_w2.sum(axis=0)

    @property
    def count(self) -> np.ndarray:
        return self.chunk_count.sum(axis=0)

    def bin_measure(self) -> np.ndarray:
        """Shell volumes (radial) or widths (projected) per bin."""
        if self.kind == RADIAL:
            return 4.0 * math.pi / 3.0 * np.diff(self.edges**3)
        return np.diff(self.edges)

    def density(self) -> np.ndarray:
        """Complex density estimate per bin (real part is the physics)."""
        norm = self.config.scale / (self.n_paths * self.bin_measure())
        return self.sum_w * norm

    def chunk_density(self) -> np.ndarray:
        norm = self.config.scale / (self.config.chunk_size * self.bin_measure())
        return self.chunk_sum_w * norm[None, :]

    def density_stderr(self) -> np.ndarray:
        """Batch-means stderr per bin, packed as stderr_re + 1j stderr_im."""
        if self.n_chunks < 2:
            return np.zeros(self.n_bins, dtype=complex)
        d = self.chunk_density()
        scale = 1.0 / math.sqrt(self.n_chunks)
        return scale * (
            d.real.std(axis=0, ddof=1) + 1j * d.imag.std(axis=0, ddof=1)
        )


def empty_histogram(config: McConfig, kind: str = RADIAL) -> ComplexHistogram:
    """A histogram with no chunks; the identity element of merge()."""
    edges = config.radial_edges() if kind == RADIAL else config.projected_edges()
    nb = config.n_bins
    return ComplexHistogram(
        config=config,
        kind=kind,
        edges=edges,
        chunk_ids=np.zeros(0, dtype=np.int64),
        chunk_sum_w=np.zeros((0, nb), dtype=complex),
        chunk_sum_w2=np.zeros((0, nb)),
        chunk_count=np.zeros((0, nb), dtype=np.int64),
        chunk_weight_sum=np.zeros(0, dtype=complex),
        chunk_abs_sum=np.zeros(0),
        chunk_abs2_sum=np.zeros(0),
    )


def merge(h1: ComplexHistogram, h2: ComplexHistogram) -> ComplexHistogram:
    """Union of two accumulators over disjoint chunk sets.

    Requires identical configs and kinds; the merged chunk arrays are
    re-sorted by chunk index, making merge associative and commutative with
    bit-identical totals.
    """
    if h1.kind != h2.kind:
        raise ValueError(f"cannot merge kinds {h1.kind!r} and {h2.kind!r}")
    if h1.config != h2.config:
        raise ValueError("cannot merge histograms with different configs")
    ids = np.concatenate([h1.chunk_ids, h2.chunk_ids])
    if len(np.unique(ids)) != len(ids):
        raise ValueError("cannot merge histograms with overlapping chunks")
    order = np.argsort(ids)
    cat = lambda a, b: np.concatenate([a, b])[order]
    return ComplexHistogram(
        config=h1.config,
        kind=h1.kind,
        edges=h1.edges,
        chunk_ids=ids[order],
        chunk_sum_w=cat(h1.chunk_sum_w, h2.chunk_sum_w),
        chunk_sum_w2=cat(h1.chunk_sum_w2, h2.chunk_sum_w2),
        chunk_count=cat(h1.chunk_count, h2.chunk_count),
        chunk_weight_sum=cat(h1.chunk_weight_sum, h2.chunk_weight_sum),
        chunk_abs_sum=cat(h1.chunk_abs_sum, h2.chunk_abs_sum),
        chunk_abs2_sum=cat(h1.chunk_abs2_sum, h2.chunk_abs2_sum),
    )


@dataclass(frozen=True)
class SignMetrics:
    """Sign-problem diagnostics over all sampled paths.

    Complex-valued stderr fields pack the real-part error in .real and the
    imaginary-part error in .imag. phase_quality = |E w| / E |w| is 1 for
    real non-negative weights and decays toward 0 as phases decohere;
    scaled_weight_variance is Var[(2s+1)^{L-1} w], the direct cost of the
    phase problem at fixed sample count.
    """

    mean_weight: complex
    mean_weight_stderr: complex
    mean_abs_weight: float
    mean_abs_weight_stderr: float
    phase_quality: float
    phase_quality_stderr: float
    normalization_check: complex
    normalization_stderr: complex
    scaled_weight_variance: float
    n_samples: int
    n_chunks: int


def sign_metrics(hist: ComplexHistogram) -> SignMetrics:
    """Batch-means metrics from the per-chunk scalar sums of a histogram."""
    n_chunks = hist.n_chunks
    if n_chunks < 1:
        raise ValueError("sign metrics require at least one chunk")
    chunk_size = hist.config.chunk_size
    n = hist.n_paths
    scale = hist.config.scale

    w_sums = hist.chunk_weight_sum
    abs_sums = hist.chunk_abs_sum
    mean_w = complex(w_sums.sum() / n)
    mean_abs = float(abs_sums.sum() / n)
    mean_abs2 = float(hist.chunk_abs2_sum.sum() / n)

    if n_chunks >= 2:
        cm = w_sums / chunk_size
        root = math.sqrt(n_chunks)
        mean_w_err = complex(
            cm.real.std(ddof=1) / root + 1j * cm.imag.std(ddof=1) / root
        )
        am = abs_sums / chunk_size
        mean_abs_err = float(am.std(ddof=1) / root)
        # jackknife over chunks for the ratio |E w| / E |w|
        loo_w = (w_sums.sum() - w_sums) / (n - chunk_size)
        loo_abs = (abs_sums.sum() - abs_sums) / (n - chunk_size)
        loo_pq = np.abs(loo_w) / loo_abs
        pq_err = float(
            math.sqrt((n_chunks - 1) / n_chunks * ((loo_pq - loo_pq.mean()) ** 2).sum())
        )
    else:
        mean_w_err = 0j
        mean_abs_err = 0.0
        pq_err = 0.0

    pq = abs(mean_w) / mean_abs if mean_abs > 0 else 0.0
    return SignMetrics(
        mean_weight=mean_w,
        mean_weight_stderr=mean_w_err,
        mean_abs_weight=mean_abs,
        mean_abs_weight_stderr=mean_abs_err,
        phase_quality=pq,
        phase_quality_stderr=pq_err,
        normalization_check=scale * mean_w,
        normalization_stderr=scale * mean_w_err,
        scaled_weight_variance=scale**2 * mean_abs2 - abs(scale * mean_w) ** 2,
        n_samples=n,
        n_chunks=n_chunks,
    )


@dataclass(frozen=True)
class McResult:
    radial: ComplexHistogram
    projected: ComplexHistogram | None
    metrics: SignMetrics


def run_chunk_range(
    config: McConfig, start: int, stop: int, workers: int = 1
) -> tuple[ComplexHistogram, ComplexHistogram | None]:
    """Accumulate chunks [start, stop) of the config's sampling plan."""
    if not 0 <= start <= stop <= config.n_chunks:
        raise ValueError(
            f"chunk range [{start}, {stop}) outside [0, {config.n_chunks})"
        )
    indices = list(range(start, stop))
    if workers > 1 and len(indices) > 1:
        blocks = np.array_split(np.asarray(indices), min(workers, len(indices)))
        results: dict[int, tuple] = {}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for block, partials in zip(
                blocks, pool.map(_compute_block, [config] * len(blocks), blocks)
            ):
                for i, partial in zip(block, partials):
                    results[int(i)] = partial
        partials = [results[i] for i in indices]
    else:
        partials = _compute_block(config, indices)

    radial = _assemble(config, RADIAL, indices, [p[0] for p in partials], partials)
    projected = None
    if config.project_axis is not None:
        projected = _assemble(
            config, PROJECTED, indices, [p[1] for p in partials], partials
        )
    return radial, projected


def _assemble(config, kind, indices, bin_parts, partials) -> ComplexHistogram:
    nb = config.n_bins
    edges = config.radial_edges() if kind == RADIAL else config.projected_edges()
    n = len(indices)
    sum_w = np.zeros((n, nb), dtype=complex)
    sum_w2 = np.zeros((n, nb))
    count = np.zeros((n, nb), dtype=np.int64)
    w_sum = np.zeros(n, dtype=complex)
    abs_sum = np.zeros(n)
    abs2_sum = np.zeros(n)
    for row, (bins, partial) in enumerate(zip(bin_parts, partials)):
        sum_w[row], sum_w2[row], count[row] = bins
        w_sum[row], abs_sum[row], abs2_sum[row] = partial[2]
    return ComplexHistogram(
        config=config,
        kind=kind,
        edges=edges,
        chunk_ids=np.asarray(indices, dtype=np.int64),
        chunk_sum_w=sum_w,
        chunk_sum_w2=sum_w2,
        chunk_count=count,
        chunk_weight_sum=w_sum,
        chunk_abs_sum=abs_sum,
        chunk_abs2_sum=abs2_sum,
    )


def run_estimation(config: McConfig, workers: int = 1) -> McResult:
    """Full sampling plan: radial histogram, optional projection, metrics."""
    radial, projected = run_chunk_range(config, 0, config.n_chunks, workers=workers)
    return McResult(radial=radial, projected=projected, metrics=sign_metrics(radial))


@dataclass(frozen=True)
class SignScanRow:
    two_s: int
    L: int
    metrics: SignMetrics


def sign_scan(
    two_s_list,
    L_list,
    n_samples: int,
    seed: int = 0,
    chunk_size: int = 10_000,
    n_bins: int = 40,
    workers: int = 1,
) -> list[SignScanRow]:
    """One independent estimation per (spin, L) cell, tabulated.

    Cells reuse the same seed: equal-L cells across spins then share paths,
    which removes sampling noise from spin-to-spin comparisons.
    """
    rows = []
    for two_s in two_s_list:
        for L in L_list:
            config = McConfig(
                spin=SpinRep(int(two_s)),
                L=int(L),
                n_samples=n_samples,
                n_bins=n_bins,
                seed=seed,
                chunk_size=chunk_size,
            )
            result = run_estimation(config, workers=workers)
            rows.append(SignScanRow(two_s=int(two_s), L=int(L), metrics=result.metrics))
    return rows


def split_seed_variant(config: McConfig, seed: int) -> McConfig:
    """Same plan, different stream family (for independent repetitions)."""
    return replace(config, seed=seed)
