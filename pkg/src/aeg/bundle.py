"""Model persistence: a single-file binary container.

Layout: 4-byte magic, little-endian uint32 format version, little-endian
uint64 manifest length, canonical JSON manifest, raw float64 payload
(little-endian, C order), and a trailing SHA-256 over everything before
it. All structure lives in the manifest; the payload is nothing but
concatenated arrays, so a round-trip reproduces every parameter
bit-exactly.

Creation time honors ``SOURCE_DATE_EPOCH`` so repeated builds of the same
model are byte-identical.
"""
from __future__ import annotations

import hashlib
import json
import os
import struct
import time
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .acoustic import AcousticGMM, TopicPosterior
from .affective import AffectiveGMM, Provenance
from .errors import CorruptBundle, EmptyInput, ModelMismatch, UnsupportedVersion
from .features import StandardizationStats
from .gaussians import Gaussian2
from .retrieval import IndexEntry, LibraryIndex

MAGIC = b"AEGB"
BUNDLE_VERSION = 1
_HEADER = struct.Struct("<4sIQ")  # magic, version, manifest length


def _digest_affective(model: AffectiveGMM) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(model.means, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(model.covs, dtype="<f8").tobytes())
    h.update(repr(model.topic_indices).encode())
    h.update(str(model.k_original).encode())
    return h.hexdigest()[:16]


def _digest_acoustic(model: AcousticGMM) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(model.means, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(model.covariances, dtype="<f8").tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class ModelBundle:
    """Everything a service needs to predict and retrieve: the affective
    Gaussians, optionally the acoustic front end (standardization + GMM),
    optionally a prebuilt library index, and per-user adapted variants.
    """

    affective: Optional[AffectiveGMM] = None
    acoustic: Optional[AcousticGMM] = None
    standardization: Optional[StandardizationStats] = None
    index: Optional[LibraryIndex] = None
    adapted: Mapping[str, AffectiveGMM] = field(default_factory=dict)
    provenance: Mapping[str, object] = field(default_factory=dict)
    version: int = BUNDLE_VERSION

    def __post_init__(self):
        if self.version != BUNDLE_VERSION:
            raise UnsupportedVersion(f"bundle version {self.version} not supported")
        if self.affective is None and self.acoustic is None:
            raise EmptyInput("bundle holds no model at all")
        if (
            self.acoustic is not None
            and self.affective is not None
            and self.acoustic.k != self.affective.k_original
        ):
            raise ModelMismatch(
                f"acoustic K={self.acoustic.k} but affective was trained with "
                f"K={self.affective.k_original}"
            )
        if self.index is not None:
            if self.affective is None:
                raise ModelMismatch("an index needs the affective model it was built on")
            if self.index.model_ref not in ("", self.identity()):
                raise ModelMismatch("index was built against a different model")
        if self.adapted and self.affective is None:
            raise ModelMismatch("adapted variants need a background affective model")
        object.__setattr__(self, "adapted", dict(self.adapted))
        object.__setattr__(self, "provenance", dict(self.provenance))

    def identity(self) -> str:
        """Digest of the model parameters; binds indexes to the model they
        were built from."""
        if self.affective is not None:
            return _digest_affective(self.affective)
        return _digest_acoustic(self.acoustic)

    def model_for(self, user_id: Optional[str] = None) -> AffectiveGMM:
        if self.affective is None:
            raise ModelMismatch("bundle has no affective model yet")
        if user_id is None or user_id not in self.adapted:
            return self.affective
        return self.adapted[user_id]

    def with_adapted(self, user_id: str, model: AffectiveGMM) -> "ModelBundle":
        """Copy-on-write: a new bundle with one user's model replaced."""
        adapted = dict(self.adapted)
        adapted[user_id] = model
        return ModelBundle(
            affective=self.affective,
            acoustic=self.acoustic,
            standardization=self.standardization,
            index=self.index,
            adapted=adapted,
            provenance=self.provenance,
            version=self.version,
        )


class _PayloadWriter:
    def __init__(self):
        self.chunks = []
        self.arrays: Dict[str, dict] = {}
        self.offset = 0

    def add(self, name: str, arr: np.ndarray):
        raw = np.ascontiguousarray(arr, dtype="<f8")
        data = raw.tobytes()
        self.arrays[name] = {
            "shape": list(raw.shape),
            "offset": self.offset,
            "nbytes": len(data),
        }
        self.chunks.append(data)
        self.offset += len(data)

    def payload(self) -> bytes:
        return b"".join(self.chunks)


def _affective_meta(model: AffectiveGMM) -> dict:
    return {
        "topic_indices": list(model.topic_indices),
        "removed_topics": sorted(model.removed_topics),
        "cov_fallback_topics": sorted(model.cov_fallback_topics),
        "k_original": model.k_original,
        "provenance": model.provenance.value,
    }


def _write_affective(w: _PayloadWriter, prefix: str, model: AffectiveGMM):
    w.add(f"{prefix}/means", model.means)
    w.add(f"{prefix}/covs", model.covs)


def _read_array(payload: bytes, spec: dict) -> np.ndarray:
    count = spec["nbytes"] // 8
    arr = np.frombuffer(payload, dtype="<f8", count=count, offset=spec["offset"])
    return arr.reshape(spec["shape"]).astype(np.float64, copy=True)


def _load_affective(meta: dict, arrays: dict, payload: bytes, prefix: str) -> AffectiveGMM:
    return AffectiveGMM(
        topic_indices=tuple(meta["topic_indices"]),
        means=_read_array(payload, arrays[f"{prefix}/means"]),
        covs=_read_array(payload, arrays[f"{prefix}/covs"]),
        k_original=meta["k_original"],
        provenance=Provenance(meta["provenance"]),
        removed_topics=frozenset(meta["removed_topics"]),
        cov_fallback_topics=frozenset(meta["cov_fallback_topics"]),
    )


def save_bundle(bundle: ModelBundle, path: str) -> None:
    w = _PayloadWriter()
    affective_meta = None
    if bundle.affective is not None:
        _write_affective(w, "affective", bundle.affective)
        affective_meta = _affective_meta(bundle.affective)
    manifest: Dict[str, object] = {
        "format": "AEGB",
        "version": bundle.version,
        "created_epoch": int(os.environ.get("SOURCE_DATE_EPOCH", int(time.time()))),
        "identity": bundle.identity(),
        "provenance": dict(bundle.provenance),
        "affective": affective_meta,
        "acoustic": None,
        "standardization": None,
        "index": None,
        "adapted": {},
    }

    if bundle.acoustic is not None:
        ac = bundle.acoustic
        w.add("acoustic/means", ac.means)
        w.add("acoustic/covariances", ac.covariances)
        w.add("acoustic/weights", ac.trained_weights)
        w.add("acoustic/ll_trace", np.asarray(ac.log_likelihood_trace, dtype=np.float64))
        manifest["acoustic"] = {
            "k": ac.k,
            "dim": ac.feature_dim,
            "diagonal": ac.is_diagonal,
        }
    if bundle.standardization is not None:
        w.add("standardization/mean", bundle.standardization.mean)
        w.add("standardization/std", bundle.standardization.std)
        manifest["standardization"] = {"dim": int(bundle.standardization.mean.shape[0])}
    if bundle.index is not None:
        idx = bundle.index
        if len(idx.entries) > 0:
            w.add("index/thetas", np.array([e.theta.theta for e in idx.entries]))
            w.add("index/means", np.array([e.reduced.mean for e in idx.entries]))
            w.add("index/covs", np.array([e.reduced.cov for e in idx.entries]))
        manifest["index"] = {
            "clip_ids": [e.clip_id for e in idx.entries],
            "model_ref": idx.model_ref,
            "skipped": [list(s) for s in idx.skipped],
            "metadata": {
                e.clip_id: dict(e.metadata) for e in idx.entries if e.metadata
            },
        }
    adapted_meta = {}
    for user_id in sorted(bundle.adapted):
        _write_affective(w, f"adapted/{user_id}", bundle.adapted[user_id])
        adapted_meta[user_id] = _affective_meta(bundle.adapted[user_id])
    manifest["adapted"] = adapted_meta

    payload = w.payload()
    manifest["arrays"] = w.arrays
    manifest["payload_nbytes"] = len(payload)
    body = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    head = _HEADER.pack(MAGIC, bundle.version, len(body))
    checksum = hashlib.sha256(head + body + payload).digest()
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(head)
        fh.write(body)
        fh.write(payload)
        fh.write(checksum)
    os.replace(tmp, path)


def _parse_header(blob: bytes) -> Tuple[int, dict, int]:
    """(version, manifest, payload offset); raises on malformed headers."""
    if len(blob) < _HEADER.size:
        raise CorruptBundle("file too short for a bundle header")
    magic, version, manifest_len = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise CorruptBundle("bad magic; not a model bundle")
    if version != BUNDLE_VERSION:
        raise UnsupportedVersion(f"bundle version {version} not supported")
    end = _HEADER.size + manifest_len
    if len(blob) < end:
        raise CorruptBundle("truncated manifest")
    try:
        manifest = json.loads(blob[_HEADER.size:end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise CorruptBundle(f"unreadable manifest: {err}") from err
    return version, manifest, end


def read_manifest(path: str) -> dict:
    """Inspect a bundle without loading its matrices. Verifies magic and
    version only; full integrity checking happens in load_bundle."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise CorruptBundle("file too short for a bundle header")
        magic, version, manifest_len = _HEADER.unpack(head)
        if magic != MAGIC:
            raise CorruptBundle("bad magic; not a model bundle")
        if version != BUNDLE_VERSION:
            raise UnsupportedVersion(f"bundle version {version} not supported")
        body = fh.read(manifest_len)
    if len(body) < manifest_len:
        raise CorruptBundle("truncated manifest")
    try:
        return json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise CorruptBundle(f"unreadable manifest: {err}") from err


def load_bundle(path: str) -> ModelBundle:
    with open(path, "rb") as fh:
        blob = fh.read()
    version, manifest, payload_start = _parse_header(blob)
    payload_nbytes = manifest.get("payload_nbytes", 0)
    expected = payload_start + payload_nbytes + 32
    if len(blob) != expected:
        raise CorruptBundle(f"file is {len(blob)} bytes, expected {expected}")
    checksum = blob[-32:]
    if hashlib.sha256(blob[:-32]).digest() != checksum:
        raise CorruptBundle("checksum mismatch")
    payload = blob[payload_start:payload_start + payload_nbytes]
    arrays = manifest["arrays"]

    affective = None
    if manifest.get("affective"):
        affective = _load_affective(manifest["affective"], arrays, payload, "affective")
    acoustic = None
    if manifest.get("acoustic"):
        acoustic = AcousticGMM(
            means=_read_array(payload, arrays["acoustic/means"]),
            covariances=_read_array(payload, arrays["acoustic/covariances"]),
            trained_weights=_read_array(payload, arrays["acoustic/weights"]),
            log_likelihood_trace=tuple(_read_array(payload, arrays["acoustic/ll_trace"])),
        )
    standardization = None
    if manifest.get("standardization"):
        standardization = StandardizationStats(
            mean=_read_array(payload, arrays["standardization/mean"]),
            std=_read_array(payload, arrays["standardization/std"]),
        )
    index = None
    if manifest.get("index") is not None:
        meta = manifest["index"]
        clip_ids = meta["clip_ids"]
        entries = []
        if clip_ids:
            thetas = _read_array(payload, arrays["index/thetas"])
            means = _read_array(payload, arrays["index/means"])
            covs = _read_array(payload, arrays["index/covs"])
            per_clip_meta = meta.get("metadata", {})
            for i, cid in enumerate(clip_ids):
                entries.append(
                    IndexEntry(
                        clip_id=cid,
                        theta=TopicPosterior(clip_id=cid, theta=thetas[i]),
                        reduced=Gaussian2(means[i], covs[i]),
                        metadata=per_clip_meta.get(cid),
                    )
                )
        index = LibraryIndex(
            entries=tuple(entries),
            affective=affective,
            model_ref=meta.get("model_ref", ""),
            skipped=tuple((s[0], s[1]) for s in meta.get("skipped", [])),
        )
    adapted = {
        user_id: _load_affective(meta, arrays, payload, f"adapted/{user_id}")
        for user_id, meta in manifest.get("adapted", {}).items()
    }
    return ModelBundle(
        affective=affective,
        acoustic=acoustic,
        standardization=standardization,
        index=index,
        adapted=adapted,
        provenance=manifest.get("provenance", {}),
        version=version,
    )
