"""Representation diagnostics: band-to-baseband similarity and class separation."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)


class AnalysisError(ValueError):
    """Raised on degenerate analysis inputs."""


@dataclass(frozen=True)
class SimilarityReport:
    """Mean cosine of each band's functional against band 1, over a sample set."""

    per_band_mean_cosine: np.ndarray
    sample_count: int


@dataclass(frozen=True)
class SeparationReport:
    intra: float
    inter: float

    @property
    def separation(self) -> float:
        return self.intra - self.inter


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; either vector all-zero yields 0.0 (with a warning)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise AnalysisError(f"cosine expects two equal-length 1-D vectors, got {u.shape} and {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        logger.warning("cosine similarity of a zero vector; returning 0.0")
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _as_functional_stack(feature_sets) -> np.ndarray:
    if isinstance(feature_sets, np.ndarray):
        stack = np.asarray(feature_sets, dtype=np.float64)
    else:
        stack = np.stack([np.asarray(s.functionals, dtype=np.float64) for s in feature_sets])
    if stack.ndim != 3:
        raise AnalysisError("expected an N x B x D stack of band functionals")
    return stack


def band_similarity(feature_sets) -> SimilarityReport:
    """How far each band's representation drifts from the baseband's.

    Entry b is the mean over samples of cosine(f_1, f_b); entry 1 compares
    band 1 with itself. Accepts a list of BandFeatureSets or an (N, B, D)
    array. Bands whose functionals genuinely differ from the baseband score
    well below 1.
    """
    stack = _as_functional_stack(feature_sets)
    n, b, _ = stack.shape
    if n == 0:
        raise AnalysisError("band_similarity needs at least one sample")
    means = np.empty(b)
    for band in range(b):
        means[band] = np.mean([cosine(stack[i, 0], stack[i, band]) for i in range(n)])
    return SimilarityReport(per_band_mean_cosine=means, sample_count=n)


def class_separation(vectors, labels) -> SeparationReport:
    """Mean intra-class minus mean inter-class cosine over unordered pairs.

    All pairs are pooled with equal weight (no per-class re-weighting).
    Classes with fewer than two members contribute no intra pairs; if no
    class has two members the intra mean is undefined and this errors.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    labels = np.asarray(labels)
    if vectors.ndim != 2:
        raise AnalysisError("vectors must be an N x D matrix")
    if labels.shape != (vectors.shape[0],):
        raise AnalysisError("labels must align with vectors")
    n = vectors.shape[0]
    intra, inter = [], []
    for i in range(n):
        for j in range(i + 1, n):
            sim = cosine(vectors[i], vectors[j])
            (intra if labels[i] == labels[j] else inter).append(sim)
    if not intra:
        raise AnalysisError("no intra-class pairs: every class has fewer than two members")
    inter_mean = float(np.mean(inter)) if inter else 0.0
    return SeparationReport(intra=float(np.mean(intra)), inter=inter_mean)


def write_band_similarity_csv(report: SimilarityReport, path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["band", "mean_cosine", "n"])
        for band, value in enumerate(report.per_band_mean_cosine, start=1):
            writer.writerow([band, f"{value:.6f}", report.sample_count])


def write_class_separation_csv(rows: dict[str, SeparationReport], path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "intra", "inter", "separation"])
        for method, report in rows.items():
            writer.writerow([
                method, f"{report.intra:.6f}", f"{report.inter:.6f}", f"{report.separation:.6f}",
            ])
