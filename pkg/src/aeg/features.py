"""Frame-level feature standardization and segment aggregation.

A clip arrives as a T x D matrix of frame vectors. Frames are standardized
per dimension over the whole corpus, then summarized into overlapping
segments of ``window`` frames with stride ``hop``; each segment row is the
concatenation of the windowed mean and (population) standard deviation, so
segments are 2D wide. Trailing frames that do not fill a window are dropped.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ClipTooShort, DimensionMismatch, EmptyInput

MIN_STD = 1e-12


def _check_matrix(frames: np.ndarray) -> np.ndarray:
    frames = np.array(frames, dtype=np.float64)  # copy: instances own their storage
    if frames.ndim != 2 or frames.shape[0] < 1:
        raise DimensionMismatch(f"frames must be a nonempty 2-D matrix, got {frames.shape}")
    if not np.all(np.isfinite(frames)):
        raise DimensionMismatch("frames contain NaN or Inf")
    return frames


@dataclass(frozen=True)
class FrameMatrix:
    """Frame-level feature vectors of one clip, rows in time order."""

    clip_id: str
    frames: np.ndarray
    frame_rate_hz: float = 20.0

    def __post_init__(self):
        frames = _check_matrix(self.frames)
        frames.flags.writeable = False
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return int(self.frames.shape[0])

    @property
    def dim(self) -> int:
        return int(self.frames.shape[1])


@dataclass(frozen=True)
class SegmentMatrix:
    """Segment-level vectors of one clip; each row is [mean || std]."""

    clip_id: str
    segments: np.ndarray

    def __post_init__(self):
        segments = _check_matrix(self.segments)
        segments.flags.writeable = False
        object.__setattr__(self, "segments", segments)

    @property
    def n_segments(self) -> int:
        return int(self.segments.shape[0])

    @property
    def dim(self) -> int:
        return int(self.segments.shape[1])


@dataclass(frozen=True)
class StandardizationStats:
    """Per-dimension mean and std; std entries are strictly positive."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64).reshape(-1)
        std = np.array(self.std, dtype=np.float64).reshape(-1)
        if mean.shape != std.shape:
            raise DimensionMismatch("mean and std must have equal length")
        if np.any(std <= 0):
            raise DimensionMismatch("std entries must be positive")
        mean.flags.writeable = False
        std.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


def fit_standardization(corpus: Iterable[FrameMatrix]) -> StandardizationStats:
    """Per-dimension mean/std over all frames of all clips (divisor N).

    Dimensions with std below MIN_STD get divisor 1 so constant features
    survive standardization.
    """
    clips = list(corpus)
    if not clips:
        raise EmptyInput("cannot fit standardization on an empty corpus")
    dims = {fm.dim for fm in clips}
    if len(dims) != 1:
        raise DimensionMismatch(f"inconsistent feature dims across corpus: {sorted(dims)}")
    stacked = np.concatenate([fm.frames for fm in clips], axis=0)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)  # population std
    std = np.where(std < MIN_STD, 1.0, std)
    return StandardizationStats(mean=mean, std=std)


def apply_standardization(fm: FrameMatrix, stats: StandardizationStats) -> FrameMatrix:
    if fm.dim != stats.mean.shape[0]:
        raise DimensionMismatch(
            f"clip {fm.clip_id!r} has dim {fm.dim}, stats expect {stats.mean.shape[0]}"
        )
    out = (fm.frames - stats.mean) / stats.std
    return FrameMatrix(clip_id=fm.clip_id, frames=out, frame_rate_hz=fm.frame_rate_hz)


def aggregate_segments(fm: FrameMatrix, window: int = 16, hop: int = 4) -> SegmentMatrix:
    """Summarize frames into overlapping [mean || std] segment rows.

    Segment s covers frames [s*hop, s*hop + window); the count is
    floor((T - window) / hop) + 1.
    """
    if window < 2:
        raise DimensionMismatch("window must be >= 2")
    if hop < 1:
        raise DimensionMismatch("hop must be >= 1")
    t = fm.n_frames
    if t < window:
        raise ClipTooShort(fm.clip_id, t, window)
    n_seg = (t - window) // hop + 1
    rows = np.empty((n_seg, 2 * fm.dim), dtype=np.float64)
    for s in range(n_seg):
        w = fm.frames[s * hop : s * hop + window]
        rows[s, : fm.dim] = w.mean(axis=0)
        rows[s, fm.dim :] = w.std(axis=0)  # population std
    return SegmentMatrix(clip_id=fm.clip_id, segments=rows)


def pool_segments(segment_matrices: Sequence[SegmentMatrix]) -> np.ndarray:
    """Stack all clips' segment rows into one training matrix."""
    if not segment_matrices:
        raise EmptyInput("no segment matrices to pool")
    return np.concatenate([sm.segments for sm in segment_matrices], axis=0)
