"""Report rendering: JSON + CSV tables plus matplotlib figures.

Every ``render_*`` function writes the delimited outputs and the figures
side by side into one directory, so a single evaluate run leaves a
self-contained folder.
"""
from __future__ import annotations

import csv
import json
import os
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import Ellipse

from .affective import AffectiveGMM
from .evaluation.harness import (
    CrossValidationReport,
    PersonalizationReport,
    RetrievalReport,
)
from .gaussians import Gaussian2


def _ellipse_params(cov: np.ndarray):
    """(width, height, angle degrees) of the 1-sigma contour."""
    vals, vecs = np.linalg.eigh(np.asarray(cov))
    vals = np.maximum(vals, 0.0)
    angle = float(np.degrees(np.arctan2(vecs[1, 1], vecs[0, 1])))
    return 2.0 * float(np.sqrt(vals[1])), 2.0 * float(np.sqrt(vals[0])), angle


def draw_gaussian(ax, g: Gaussian2, color: str, label: Optional[str] = None, alpha: float = 0.5):
    w, h, angle = _ellipse_params(g.cov)
    ax.add_patch(
        Ellipse(
            xy=(float(g.mean[0]), float(g.mean[1])),
            width=w,
            height=h,
            angle=angle,
            fill=False,
            edgecolor=color,
            alpha=alpha,
            label=label,
        )
    )
    ax.plot([g.mean[0]], [g.mean[1]], marker="+", color=color, alpha=alpha)


def write_json(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_metrics_csv(metrics: Mapping[str, float], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for name in sorted(metrics):
            writer.writerow([name, repr(float(metrics[name]))])


def cv_report_to_dict(report: CrossValidationReport) -> dict:
    return {
        "metrics": {k: float(v) for k, v in report.metrics.items()},
        "folds": [
            {
                "fold": f.fold,
                "n_train": f.n_train,
                "n_test": f.n_test,
                "lbound_trace": list(f.lbound_trace),
                "removed_topics": sorted(f.removed_topics),
            }
            for f in report.folds
        ],
        "predictions": {
            cid: {
                "mean": [float(x) for x in g.mean],
                "cov": [float(g.cov[0, 0]), float(g.cov[0, 1]), float(g.cov[1, 1])],
            }
            for cid, g in sorted(report.predictions.items())
        },
    }


def plot_lbound_traces(report: CrossValidationReport, path: str) -> None:
    """One learning curve per fold; monotone except at removal events."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for f in report.folds:
        if f.lbound_trace:
            ax.plot(range(len(f.lbound_trace)), f.lbound_trace, marker="o", label=f"fold {f.fold}")
    ax.set_xlabel("M-step")
    ax.set_ylabel("lower bound")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_predictions_va(
    report: CrossValidationReport,
    path: str,
    truth_means: Optional[Mapping[str, np.ndarray]] = None,
) -> None:
    fig, ax = plt.subplots(figsize=(6, 6))
    for cid, g in sorted(report.predictions.items()):
        draw_gaussian(ax, g, color="tab:blue", alpha=0.25)
    if truth_means:
        pts = np.array([truth_means[cid] for cid in sorted(truth_means)])
        ax.plot(pts[:, 0], pts[:, 1], linestyle="", marker="x", color="tab:red", label="truth means")
        ax.legend(loc="upper right")
    ax.set_xlim(-1.2, 1.2)
    ax.set_ylim(-1.2, 1.2)
    ax.set_xlabel("valence")
    ax.set_ylabel("arousal")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_model_ellipses(model: AffectiveGMM, path: str) -> None:
    """The affective components on the VA plane, labeled by topic index."""
    fig, ax = plt.subplots(figsize=(6, 6))
    cmap = plt.get_cmap("tab20")
    for i, topic in enumerate(model.topic_indices):
        g = Gaussian2(model.means[i], model.covs[i])
        draw_gaussian(ax, g, color=cmap(i % 20), alpha=0.8)
        ax.annotate(str(topic), (float(g.mean[0]), float(g.mean[1])), fontsize=8)
    ax.set_xlim(-1.2, 1.2)
    ax.set_ylim(-1.2, 1.2)
    ax.set_xlabel("valence")
    ax.set_ylabel("arousal")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_mer_report(
    report: CrossValidationReport,
    out_dir: str,
    truth_means: Optional[Mapping[str, np.ndarray]] = None,
) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_json(cv_report_to_dict(report), os.path.join(out_dir, "report.json"))
    write_metrics_csv(report.metrics, os.path.join(out_dir, "metrics.csv"))
    plot_lbound_traces(report, os.path.join(out_dir, "lbound_traces.png"))
    plot_predictions_va(report, os.path.join(out_dir, "predictions_va.png"), truth_means)


def write_ndcg_csv(report: RetrievalReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "p", "mean_ndcg"])
        for method in sorted(report.ndcg):
            for p in sorted(report.ndcg[method]):
                writer.writerow([method, p, repr(float(report.ndcg[method][p]))])


def plot_ndcg_bars(report: RetrievalReport, path: str) -> None:
    methods = sorted(report.ndcg)
    p_values = sorted(next(iter(report.ndcg.values())))
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / len(methods)
    x = np.arange(len(p_values))
    for mi, method in enumerate(methods):
        vals = [report.ndcg[method][p] for p in p_values]
        ax.bar(x + mi * width, vals, width=width, label=method)
    ax.set_xticks(x + 0.4 - width / 2)
    ax.set_xticklabels([f"@{p}" for p in p_values])
    ax.set_ylabel("mean NDCG")
    ax.set_ylim(0, 1.05)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_retrieval_report(report: RetrievalReport, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_json(
        {"ndcg": {m: {str(p): v for p, v in d.items()} for m, d in report.ndcg.items()},
         "n_queries": report.n_queries},
        os.path.join(out_dir, "report.json"),
    )
    write_ndcg_csv(report, os.path.join(out_dir, "ndcg.csv"))
    plot_ndcg_bars(report, os.path.join(out_dir, "ndcg_bars.png"))


def write_personalization_csv(report: PersonalizationReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["batch_size", "alh", "mean_distance"])
        writer.writerow([0, repr(report.baseline_alh), repr(report.baseline_mean_distance)])
        for n, alh, dist in zip(
            report.batch_sizes, report.alh_curve, report.mean_distance_curve
        ):
            writer.writerow([n, repr(alh), repr(dist)])


def plot_personalization_curves(report: PersonalizationReport, path: str) -> None:
    sizes = (0,) + report.batch_sizes
    alh = (report.baseline_alh,) + report.alh_curve
    dist = (report.baseline_mean_distance,) + report.mean_distance_curve
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(sizes, alh, marker="o")
    ax1.set_xlabel("personal annotations")
    ax1.set_ylabel("held-out ALH")
    ax2.plot(sizes, dist, marker="o", color="tab:orange")
    ax2.set_xlabel("personal annotations")
    ax2.set_ylabel("mean distance to user truth")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_personalization_report(report: PersonalizationReport, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_json(
        {
            "batch_sizes": list(report.batch_sizes),
            "alh_curve": list(report.alh_curve),
            "mean_distance_curve": list(report.mean_distance_curve),
            "baseline_alh": report.baseline_alh,
            "baseline_mean_distance": report.baseline_mean_distance,
        },
        os.path.join(out_dir, "report.json"),
    )
    write_personalization_csv(report, os.path.join(out_dir, "personalization.csv"))
    plot_personalization_curves(report, os.path.join(out_dir, "personalization.png"))
