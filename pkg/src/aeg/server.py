"""HTTP service over a model bundle.

The service never mutates a served model: adaptation builds a new bundle
and swaps the shared handle under a lock (copy-on-write), so in-flight
requests keep the snapshot they started with. Errors surface as
{code, message} where code is the raising error class name.
"""
from __future__ import annotations

import threading
from typing import Any, Dict, List, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .acoustic import TopicPosterior, topic_posterior
from .bundle import ModelBundle, load_bundle, read_manifest
from .errors import AegError, EmptyInput, MalformedInput, UnknownClip
from .features import FrameMatrix, aggregate_segments, apply_standardization
from .gaussians import Gaussian2
from .personalize import AdaptConfig, PersonalDatum, map_adapt
from .prediction import predict
from .retrieval import (
    GaussianQuery,
    LibraryIndex,
    MatchMode,
    PointQuery,
    fold_in,
    rank_emotion_prediction,
    rank_ensemble,
    rank_folding_in,
    reindex_for_model,
)

_METHODS = {
    "ep": "ep", "emotion_prediction": "ep",
    "fi": "fi", "folding_in": "fi",
    "ensemble": "ensemble",
}

# handled AegError subclasses that indicate a missing resource
_NOT_FOUND = (UnknownClip,)


class _ServiceState:
    """Shared, swap-on-write service state."""

    def __init__(self, bundle: ModelBundle, manifest: Dict[str, Any]):
        self.bundle = bundle
        self.manifest = manifest
        self.model_version = 1
        self.lock = threading.Lock()


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise MalformedInput(msg)


def _as_vec2(value: Any, label: str) -> np.ndarray:
    _require(isinstance(value, (list, tuple)) and len(value) == 2,
             f"{label} must be a [v, a] pair")
    try:
        arr = np.array([float(value[0]), float(value[1])])
    except (TypeError, ValueError):
        raise MalformedInput(f"{label} must be numeric") from None
    _require(bool(np.all(np.isfinite(arr))), f"{label} must be finite")
    return arr


def _as_cov(value: Any, label: str) -> np.ndarray:
    _require(isinstance(value, (list, tuple)) and len(value) == 3,
             f"{label} must be [s11, s12, s22]")
    try:
        s11, s12, s22 = (float(v) for v in value)
    except (TypeError, ValueError):
        raise MalformedInput(f"{label} must be numeric") from None
    return np.array([[s11, s12], [s12, s22]])


def _gaussian_json(g: Gaussian2) -> Dict[str, Any]:
    return {
        "mean": [float(g.mean[0]), float(g.mean[1])],
        "cov": [float(g.cov[0, 0]), float(g.cov[0, 1]), float(g.cov[1, 1])],
    }


def _theta_from_body(state: _ServiceState, body: Dict[str, Any]) -> TopicPosterior:
    bundle = state.bundle
    clip_id = body.get("clip_id") or "query"
    if body.get("theta") is not None:
        theta = body["theta"]
        _require(isinstance(theta, (list, tuple)) and len(theta) > 0,
                 "theta must be a list of topic weights")
        return TopicPosterior(clip_id=clip_id, theta=np.array(theta, dtype=float))
    if body.get("frames") is not None:
        if bundle.acoustic is None:
            raise EmptyInput("bundle has no acoustic model; send theta instead of frames")
        frames = np.array(body["frames"], dtype=float)
        _require(frames.ndim == 2 and frames.shape[0] > 0,
                 "frames must be a non-empty 2-D array")
        fm = FrameMatrix(clip_id=clip_id, frames=frames)
        if bundle.standardization is not None:
            fm = apply_standardization(fm, bundle.standardization)
        window = int(body.get("window", 16))
        hop = int(body.get("hop", 4))
        sm = aggregate_segments(fm, window=window, hop=hop)
        return topic_posterior(sm, bundle.acoustic)
    raise MalformedInput("send either theta or frames")


def _parse_query(body: Dict[str, Any]):
    q = body.get("query")
    _require(isinstance(q, dict), "query must be an object")
    if "point" in q:
        return PointQuery(_as_vec2(q["point"], "query.point"))
    if "gaussian" in q:
        g = q["gaussian"]
        _require(isinstance(g, dict), "query.gaussian must be an object")
        return GaussianQuery(Gaussian2(_as_vec2(g.get("mean"), "query.gaussian.mean"),
                                       _as_cov(g.get("cov"), "query.gaussian.cov")))
    raise MalformedInput("query must contain point or gaussian")


def _index_for(state: _ServiceState, user_id: Optional[str]) -> LibraryIndex:
    bundle = state.bundle
    if bundle.index is None:
        raise EmptyInput("bundle has no library index")
    if user_id and user_id in bundle.adapted:
        # rescore the same clip posteriors under the personalized model
        return reindex_for_model(bundle.index, bundle.adapted[user_id])
    return bundle.index


def create_app(bundle_path: Optional[str] = None,
               bundle: Optional[ModelBundle] = None) -> FastAPI:
    """Build the service around one bundle (path or live object)."""
    if bundle is None:
        if not bundle_path:
            raise EmptyInput("create_app needs a bundle path or a bundle")
        bundle = load_bundle(bundle_path)
        manifest = read_manifest(bundle_path)
    else:
        manifest = {"format": "AEGB", "version": bundle.version,
                    "identity": bundle.identity(),
                    "provenance": dict(bundle.provenance)}
    manifest.pop("arrays", None)
    state = _ServiceState(bundle, manifest)

    app = FastAPI(title="acoustic emotion service")
    app.state.service = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(AegError)
    async def _aeg_error(_request: Request, err: AegError):
        status = 404 if isinstance(err, _NOT_FOUND) else 400
        return JSONResponse(status_code=status,
                            content={"code": err.code, "message": str(err)})

    @app.get("/health")
    def health():
        return {"status": "ok", "model_version": state.model_version}

    @app.get("/model")
    def model():
        out = dict(state.manifest)
        out["model_version"] = state.model_version
        out["adapted_users"] = sorted(state.bundle.adapted)
        return out

    @app.post("/predict")
    def predict_endpoint(body: Dict[str, Any]):
        snapshot = state.bundle
        tp = _theta_from_body(state, body)
        model = snapshot.model_for(body.get("user_id"))
        result = predict(tp, model)
        out: Dict[str, Any] = {"clip_id": tp.clip_id}
        out.update(_gaussian_json(result.reduced))
        out["theta"] = [float(v) for v in tp.theta]
        if body.get("include_mixture"):
            out["mixture"] = [
                {"weight": float(w), **_gaussian_json(c)}
                for w, c in zip(result.mixture.weights, result.mixture.components)
            ]
        return out

    @app.post("/retrieve")
    def retrieve_endpoint(body: Dict[str, Any]):
        q = _parse_query(body)
        method = _METHODS.get(str(body.get("method", "ep")).lower())
        _require(method is not None, "method must be ep, fi, or ensemble")
        topk = int(body.get("topk", 10))
        _require(topk >= 1, "topk must be at least 1")
        mode = (MatchMode.FULL_MIXTURE if body.get("match") == "mixture"
                else MatchMode.SINGLE_GAUSSIAN)
        iters = int(body.get("iters", 3))
        idx = _index_for(state, body.get("user_id"))
        if method == "ep":
            ranked = rank_emotion_prediction(q, idx, mode)
        elif method == "fi":
            ranked = rank_folding_in(fold_in(q, idx.affective, iters=iters), idx)
        else:
            ep = rank_emotion_prediction(q, idx, mode)
            fi = rank_folding_in(fold_in(q, idx.affective, iters=iters), idx)
            ranked = rank_ensemble(ep, fi)
        results = []
        for cid, score in ranked.pairs[:topk]:
            entry = idx.entry(cid)
            results.append({"clip_id": cid, "score": float(score),
                            **_gaussian_json(entry.reduced)})
        return {"method": ranked.method.value, "results": results}

    @app.post("/adapt")
    def adapt_endpoint(body: Dict[str, Any]):
        user_id = body.get("user_id")
        _require(isinstance(user_id, str) and len(user_id) > 0,
                 "user_id must be a non-empty string")
        rows = body.get("data")
        _require(isinstance(rows, list) and len(rows) > 0,
                 "data must be a non-empty list")
        config = AdaptConfig(
            beta_mean=float(body.get("beta_mean", 0.01)),
            beta_cov=float(body.get("beta_cov", 0.01)),
            adapt_cov=bool(body.get("adapt_cov", False)),
        )
        with state.lock:
            snapshot = state.bundle
            data: List[PersonalDatum] = []
            for row in rows:
                _require(isinstance(row, dict), "each datum must be an object")
                e = _as_vec2(row.get("e"), "e")
                if row.get("theta") is not None:
                    tp = TopicPosterior(clip_id=row.get("clip_id") or "feedback",
                                        theta=np.array(row["theta"], dtype=float))
                elif row.get("clip_id"):
                    if snapshot.index is None:
                        raise EmptyInput("clip_id data needs an indexed bundle")
                    tp = snapshot.index.entry(row["clip_id"]).theta
                else:
                    raise MalformedInput("each datum needs theta or clip_id")
                data.append(PersonalDatum(theta=tp, e=e))
            # chain from the user's current model so repeated posts accumulate
            background = snapshot.model_for(user_id)
            adapted = map_adapt(background, data, config)
            state.bundle = snapshot.with_adapted(user_id, adapted)
            state.model_version += 1
            version = state.model_version
        return {"model_version": version, "user_id": user_id,
                "n_observations": len(data)}

    @app.get("/clips/{clip_id}")
    def clip_endpoint(clip_id: str):
        snapshot = state.bundle
        if snapshot.index is None:
            raise EmptyInput("bundle has no library index")
        entry = snapshot.index.entry(clip_id)
        out = {"clip_id": entry.clip_id,
               "theta": [float(v) for v in entry.theta.theta],
               **_gaussian_json(entry.reduced)}
        if entry.metadata:
            out["metadata"] = dict(entry.metadata)
        return out

    return app
