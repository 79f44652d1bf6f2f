"""Reading and writing the delimited data formats.

All files are UTF-8 CSV with a required header. Floats are written with
Python's shortest round-trip repr, so write-then-read reproduces values
bit-exactly and repeated runs produce byte-identical files.
"""
from __future__ import annotations

import csv
from typing import Dict, List, Sequence

import numpy as np

from .acoustic import TopicPosterior
from .annotations import Annotation
from .errors import MalformedInput
from .features import FrameMatrix, SegmentMatrix


def _open_rows(path: str, expected_prefix: Sequence[str], label: str):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedInput(f"{label} file {path!r} is empty") from None
        header = [h.strip() for h in header]
        if header[: len(expected_prefix)] != list(expected_prefix):
            raise MalformedInput(
                f"{label} header must start with {','.join(expected_prefix)}, "
                f"got {','.join(header[:len(expected_prefix)])}"
            )
        rows = list(reader)
    return header, rows


def _floats(cells: Sequence[str], path: str, line: int) -> List[float]:
    try:
        return [float(c) for c in cells]
    except ValueError as err:
        raise MalformedInput(f"{path}:{line}: non-numeric value ({err})") from None


def _index(cell: str, path: str, line: int) -> int:
    try:
        return int(cell)
    except ValueError:
        raise MalformedInput(f"{path}:{line}: index column must be an integer") from None


def read_feature_csv(path: str) -> List[FrameMatrix]:
    """Frame-level features: ``clip_id,frame_idx,f0..f{D-1}``.

    Frames are ordered by frame_idx within each clip; clips keep their
    first-appearance order.
    """
    header, rows = _open_rows(path, ("clip_id", "frame_idx"), "feature")
    dim = len(header) - 2
    if dim < 1:
        raise MalformedInput("feature file has no feature columns")
    frames: Dict[str, List] = {}
    for n, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise MalformedInput(f"{path}:{n}: expected {len(header)} cells, got {len(row)}")
        cid = row[0]
        idx = _index(row[1], path, n)
        frames.setdefault(cid, []).append((idx, _floats(row[2:], path, n)))
    out = []
    for cid, items in frames.items():
        indices = [i for i, _ in items]
        if len(indices) != len(set(indices)):
            raise MalformedInput(f"clip {cid!r} repeats a frame_idx")
        items.sort(key=lambda t: t[0])
        out.append(FrameMatrix(clip_id=cid, frames=np.array([v for _, v in items])))
    return out


def write_feature_csv(path: str, clips: Sequence[FrameMatrix]) -> None:
    if not clips:
        raise MalformedInput("no clips to write")
    dim = clips[0].dim
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["clip_id", "frame_idx"] + [f"f{i}" for i in range(dim)])
        for fm in clips:
            for t in range(fm.n_frames):
                writer.writerow([fm.clip_id, t] + [repr(float(v)) for v in fm.frames[t]])


def read_annotation_csv(path: str) -> List[Annotation]:
    """Annotations: ``clip_id,subject_id,valence,arousal`` with both
    coordinates in [-1, 1]."""
    _, rows = _open_rows(path, ("clip_id", "subject_id", "valence", "arousal"), "annotation")
    out = []
    for n, row in enumerate(rows, start=2):
        if len(row) != 4:
            raise MalformedInput(f"{path}:{n}: expected 4 cells, got {len(row)}")
        v, a = _floats(row[2:], path, n)
        if not (-1.0 <= v <= 1.0 and -1.0 <= a <= 1.0):
            raise MalformedInput(f"{path}:{n}: valence/arousal outside [-1, 1]")
        out.append(Annotation(clip_id=row[0], subject_id=row[1], e=np.array([v, a])))
    return out


def write_annotation_csv(path: str, annotations: Sequence[Annotation]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["clip_id", "subject_id", "valence", "arousal"])
        for ann in annotations:
            writer.writerow([ann.clip_id, ann.subject_id, repr(float(ann.e[0])), repr(float(ann.e[1]))])


def read_segments_csv(path: str) -> List[SegmentMatrix]:
    """Segment vectors: ``clip_id,segment_idx,s0..s{2D-1}``."""
    header, rows = _open_rows(path, ("clip_id", "segment_idx"), "segment")
    segs: Dict[str, List] = {}
    for n, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise MalformedInput(f"{path}:{n}: expected {len(header)} cells, got {len(row)}")
        idx = _index(row[1], path, n)
        segs.setdefault(row[0], []).append((idx, _floats(row[2:], path, n)))
    out = []
    for cid, items in segs.items():
        items.sort(key=lambda t: t[0])
        out.append(SegmentMatrix(clip_id=cid, segments=np.array([v for _, v in items])))
    return out


def write_segments_csv(path: str, clips: Sequence[SegmentMatrix]) -> None:
    if not clips:
        raise MalformedInput("no segments to write")
    dim = clips[0].segments.shape[1]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["clip_id", "segment_idx"] + [f"s{i}" for i in range(dim)])
        for sm in clips:
            for t in range(sm.segments.shape[0]):
                writer.writerow([sm.clip_id, t] + [repr(float(v)) for v in sm.segments[t]])


def read_thetas_csv(path: str) -> Dict[str, TopicPosterior]:
    """Topic posteriors: ``clip_id,t0..t{K-1}``, one simplex row per clip."""
    header, rows = _open_rows(path, ("clip_id",), "theta")
    k = len(header) - 1
    if k < 1:
        raise MalformedInput("theta file has no topic columns")
    out: Dict[str, TopicPosterior] = {}
    for n, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise MalformedInput(f"{path}:{n}: expected {len(header)} cells, got {len(row)}")
        cid = row[0]
        if cid in out:
            raise MalformedInput(f"{path}:{n}: clip {cid!r} repeated")
        out[cid] = TopicPosterior(clip_id=cid, theta=np.array(_floats(row[1:], path, n)))
    return out


def write_thetas_csv(path: str, thetas: Sequence[TopicPosterior]) -> None:
    if not thetas:
        raise MalformedInput("no posteriors to write")
    k = thetas[0].k
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["clip_id"] + [f"t{i}" for i in range(k)])
        for tp in thetas:
            writer.writerow([tp.clip_id] + [repr(float(v)) for v in tp.theta])
