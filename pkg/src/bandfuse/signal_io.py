"""Audio clip loading, WAV writing, and dataset manifest parsing."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile

SPLITS = ("train", "val", "test")

# Peak value used to normalize integer PCM to [-1, 1].
_INT_SCALE = {
    np.dtype(np.int16): 2.0**15,
    np.dtype(np.int32): 2.0**31,  # scipy stores 24-bit PCM in the upper bytes of int32
}


class AudioLoadError(ValueError):
    """Raised when an audio file cannot be read or fails validation."""


class ManifestError(ValueError):
    """Raised when a dataset manifest is malformed."""


@dataclass(eq=False)
class AudioClip:
    """A mono audio buffer at its native sample rate, amplitudes in ~[-1, 1]."""

    samples: np.ndarray
    sample_rate_hz: int
    source_id: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise AudioLoadError(f"clip {self.source_id!r}: samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(self.samples)):
            raise AudioLoadError(f"clip {self.source_id!r}: samples contain NaN or Inf")
        if int(self.sample_rate_hz) <= 0:
            raise AudioLoadError(f"clip {self.source_id!r}: sample rate must be positive")
        self.sample_rate_hz = int(self.sample_rate_hz)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class ManifestEntry:
    clip_path: str
    label: str
    split: str


@dataclass(eq=False)
class DatasetManifest:
    """Validated clip list with train/val/test splits and a stable label vocabulary."""

    entries: tuple[ManifestEntry, ...]
    label_vocab: tuple[str, ...] = field(default=())

    def __post_init__(self):
        self.entries = tuple(self.entries)
        if not self.entries:
            raise ManifestError("manifest has no entries")
        if not self.label_vocab:
            self.label_vocab = tuple(sorted({e.label for e in self.entries}))
        if len(self.label_vocab) < 2:
            raise ManifestError("manifest must contain at least 2 distinct labels")
        vocab = set(self.label_vocab)
        seen: dict[str, str] = {}
        for e in self.entries:
            if e.split not in SPLITS:
                raise ManifestError(f"unknown split {e.split!r} for clip {e.clip_path!r}")
            if e.label not in vocab:
                raise ManifestError(f"label {e.label!r} of clip {e.clip_path!r} not in vocabulary")
            if e.clip_path in seen:
                raise ManifestError(
                    f"duplicate clip path {e.clip_path!r} (splits {seen[e.clip_path]!r} and {e.split!r})"
                )
            seen[e.clip_path] = e.split

    @property
    def class_count(self) -> int:
        return len(self.label_vocab)

    def label_index(self, label: str) -> int:
        return self.label_vocab.index(label)

    def split_entries(self, split: str) -> list[ManifestEntry]:
        if split not in SPLITS:
            raise ManifestError(f"unknown split {split!r}")
        return [e for e in self.entries if e.split == split]


def load_clip(path) -> AudioClip:
    """Read a RIFF WAV file (PCM 8/16/24/32-bit or float) as a mono AudioClip.

    Multi-channel audio is averaged to mono; integer PCM is scaled by its
    type maximum so amplitudes land in [-1, 1]. Float data passes through.
    """
    path = Path(path)
    if not path.exists():
        raise AudioLoadError(f"audio file not found: {path}")
    try:
        rate, data = wavfile.read(str(path))
    except AudioLoadError:
        raise
    except Exception as exc:
        raise AudioLoadError(f"cannot read {path}: {exc}") from exc
    if data.size == 0:
        raise AudioLoadError(f"zero-length audio: {path}")

    dtype = data.dtype
    if dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif dtype in _INT_SCALE:
        samples = data.astype(np.float64) / _INT_SCALE[dtype]
    elif dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise AudioLoadError(f"unsupported sample format {dtype} in {path}")

    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return AudioClip(samples=samples, sample_rate_hz=int(rate), source_id=str(path))


def save_wav(path, samples: np.ndarray, sample_rate_hz: int) -> None:
    """Write a mono float32 WAV (used for band-signal debug dumps)."""
    samples = np.asarray(samples, dtype=np.float32)
    wavfile.write(str(path), int(sample_rate_hz), samples)


def load_manifest(path) -> DatasetManifest:
    """Parse a `path,label,split` CSV into a validated DatasetManifest.

    The label vocabulary is sorted lexicographically so label indices are
    stable across runs.
    """
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ManifestError(f"empty manifest: {path}")
        if [h.strip().lower() for h in header] != ["path", "label", "split"]:
            raise ManifestError(f"manifest header must be 'path,label,split', got {header!r} in {path}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ManifestError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            clip_path, label, split = (c.strip() for c in row)
            if split not in SPLITS:
                raise ManifestError(f"{path}:{lineno}: unknown split {split!r} for {clip_path!r}")
            entries.append(ManifestEntry(clip_path=clip_path, label=label, split=split))
    if not entries:
        raise ManifestError(f"empty manifest: {path}")
    return DatasetManifest(entries=tuple(entries))
