"""Command-line workflow.

The verbs mirror the pipeline: features -> train-acoustic -> posteriors ->
train-affective -> (adapt) -> predict / index -> retrieve / evaluate /
serve. A JSON config file can preseed any option; explicit flags win.
Every stochastic step takes --seed.
"""
from __future__ import annotations

import json
import os
import sys
from typing import Dict, List, Optional

import click
import numpy as np

from .acoustic import AcousticTrainConfig, topic_posterior, train_acoustic_gmm
from .affective import LearnConfig, Mode, combine_hybrid, learn_affective_gmm
from .annotations import EmotionCorpus, compute_corpus_priors
from .bundle import ModelBundle, load_bundle, read_manifest, save_bundle
from .dataio import (
    read_annotation_csv,
    read_feature_csv,
    read_segments_csv,
    read_thetas_csv,
    write_annotation_csv,
    write_segments_csv,
    write_thetas_csv,
)
from .errors import AegError, EmptyInput, MalformedInput
from .evaluation.harness import (
    run_cross_validation,
    run_personalization_eval,
    run_retrieval_eval,
)
from .evaluation.metrics import GroundTruth
from .evaluation.synthetic import (
    SyntheticSpec,
    circular_true_model,
    generate_point_queries,
    pointify_to_gaussian_queries,
    synthesize_corpus,
)
from .features import aggregate_segments, apply_standardization, fit_standardization
from .gaussians import Gaussian2
from .personalize import AdaptConfig, PersonalDatum, adapt_incrementally, map_adapt
from .prediction import predict as predict_emotion
from .retrieval import (
    GaussianQuery,
    MatchMode,
    PointQuery,
    build_index,
    fold_in,
    index_from_posteriors,
    rank_emotion_prediction,
    rank_ensemble,
    rank_folding_in,
)

_MODES = {"uniform": Mode.UNIFORM, "annoprior": Mode.ANNOPRIOR}


def _fail(err: Exception) -> None:
    code = getattr(err, "code", type(err).__name__)
    raise click.ClickException(f"[{code}] {err}")


def _parse_floats(text: str, n: int, label: str) -> List[float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise click.ClickException(f"{label} needs {n} comma-separated numbers")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise click.ClickException(f"{label} must be numeric") from None


def _load_required_bundle(path: Optional[str]) -> ModelBundle:
    if not path:
        raise click.ClickException(
            "no bundle given: pass --bundle or set AEG_BUNDLE"
        )
    try:
        return load_bundle(path)
    except AegError as err:
        _fail(err)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON file preseeding per-command options.")
@click.pass_context
def main(ctx, config_path):
    """Topic-weighted Gaussian emotion modeling over the valence-arousal
    plane: training, personalization, prediction, retrieval, evaluation."""
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            try:
                ctx.default_map = json.load(fh)
            except json.JSONDecodeError as err:
                raise click.ClickException(f"config is not valid JSON: {err}")


@main.command()
@click.option("--features", "features_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Frame-level feature CSV.")
@click.option("--out-segments", required=True, type=click.Path(dir_okay=False))
@click.option("--out-stats", required=True, type=click.Path(dir_okay=False),
              help="Where to store the standardization statistics (JSON).")
@click.option("--window", default=16, show_default=True, help="Frames per segment.")
@click.option("--hop", default=4, show_default=True, help="Frame stride between segments.")
def features(features_path, out_segments, out_stats, window, hop):
    """Standardize frame features and aggregate them into segments."""
    try:
        clips = read_feature_csv(features_path)
        stats = fit_standardization(clips)
        segments = [
            aggregate_segments(apply_standardization(fm, stats), window=window, hop=hop)
            for fm in clips
        ]
        write_segments_csv(out_segments, segments)
    except AegError as err:
        _fail(err)
    with open(out_stats, "w", encoding="utf-8") as fh:
        json.dump({"mean": list(stats.mean), "std": list(stats.std)}, fh, sort_keys=True)
        fh.write("\n")
    click.echo(f"segmented {len(clips)} clips -> {out_segments}")


@main.command("train-acoustic")
@click.option("--segments", "segments_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--stats", "stats_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Standardization JSON from the features step.")
@click.option("--k", required=True, type=int, help="Number of latent topics.")
@click.option("--seed", default=0, show_default=True)
@click.option("--max-iters", default=100, show_default=True)
@click.option("--min-rel-gain", default=1e-5, show_default=True)
@click.option("--full-covariance", is_flag=True, default=False)
@click.option("--bundle", "bundle_path", required=True, type=click.Path(dir_okay=False),
              envvar="AEG_BUNDLE")
def train_acoustic(segments_path, stats_path, k, seed, max_iters, min_rel_gain,
                   full_covariance, bundle_path):
    """Fit the acoustic mixture over pooled segment vectors."""
    from .features import StandardizationStats

    try:
        clips = read_segments_csv(segments_path)
        pooled = np.vstack([c.segments for c in clips])
        config = AcousticTrainConfig(seed=seed, max_iters=max_iters,
                                     min_rel_gain=min_rel_gain,
                                     full_covariance=full_covariance)
        model = train_acoustic_gmm(pooled, k, config)
        standardization = None
        if stats_path:
            with open(stats_path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
            standardization = StandardizationStats(
                mean=np.array(raw["mean"]), std=np.array(raw["std"])
            )
        bundle = ModelBundle(
            acoustic=model,
            standardization=standardization,
            provenance={"acoustic_seed": seed, "acoustic_k": k,
                        "acoustic_iters": len(model.log_likelihood_trace)},
        )
        save_bundle(bundle, bundle_path)
    except AegError as err:
        _fail(err)
    click.echo(
        f"trained K={k} acoustic model on {pooled.shape[0]} segments "
        f"({len(model.log_likelihood_trace)} EM iterations) -> {bundle_path}"
    )


@main.command()
@click.option("--segments", "segments_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--bundle", "bundle_path", required=True,
              type=click.Path(exists=True, dir_okay=False), envvar="AEG_BUNDLE")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def posteriors(segments_path, bundle_path, out_path):
    """Compute per-clip topic posteriors from segment vectors."""
    bundle = _load_required_bundle(bundle_path)
    if bundle.acoustic is None:
        raise click.ClickException("bundle has no acoustic model; run train-acoustic first")
    try:
        clips = read_segments_csv(segments_path)
        thetas = [topic_posterior(c, bundle.acoustic) for c in clips]
        write_thetas_csv(out_path, thetas)
    except AegError as err:
        _fail(err)
    click.echo(f"wrote {len(thetas)} posteriors -> {out_path}")


@main.command("train-affective")
@click.option("--annotations", "annotations_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--thetas", "thetas_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["uniform", "annoprior", "hybrid"]),
              default="uniform", show_default=True)
@click.option("--max-iters", default=9, show_default=True)
@click.option("--min-rel-gain", default=0.01, show_default=True)
@click.option("--bundle", "bundle_path", required=True, type=click.Path(dir_okay=False),
              envvar="AEG_BUNDLE")
def train_affective(annotations_path, thetas_path, mode, max_iters, min_rel_gain, bundle_path):
    """Learn the affective Gaussians from annotations and posteriors.

    Hybrid mode trains both variants and merges uniform means with
    annotation-prior covariances.
    """
    try:
        corpus = EmotionCorpus(read_annotation_csv(annotations_path))
        thetas = read_thetas_csv(thetas_path)

        def run(m: str):
            cfg = LearnConfig(max_iters=max_iters, min_rel_gain=min_rel_gain, mode=_MODES[m])
            priors = compute_corpus_priors(corpus) if cfg.mode is Mode.ANNOPRIOR else None
            return learn_affective_gmm(thetas, corpus, priors, cfg)

        if mode == "hybrid":
            uni, trace = run("uniform")
            anno, trace_a = run("annoprior")
            model = combine_hybrid(uni, anno)
            trace = list(trace) + list(trace_a)
        else:
            model, trace = run(mode)

        base = None
        if os.path.exists(bundle_path):
            base = load_bundle(bundle_path)
        provenance = dict(base.provenance) if base else {}
        provenance.update({"affective_mode": mode, "affective_iters": len(trace) - 1})
        bundle = ModelBundle(
            affective=model,
            acoustic=base.acoustic if base else None,
            standardization=base.standardization if base else None,
            provenance=provenance,
        )
        save_bundle(bundle, bundle_path)
    except AegError as err:
        _fail(err)
    removed = sorted(model.removed_topics)
    click.echo(
        f"learned {model.n_components}/{model.k_original} components "
        f"(removed: {removed if removed else 'none'}) -> {bundle_path}"
    )


def _personal_data(annotations_path: str, user: str, thetas: Dict) -> List[PersonalDatum]:
    anns = [a for a in read_annotation_csv(annotations_path) if a.subject_id == user]
    if not anns:
        raise EmptyInput(f"no annotations for subject {user!r}")
    data = []
    for a in anns:
        if a.clip_id not in thetas:
            raise MalformedInput(f"clip {a.clip_id!r} has no posterior in the thetas file")
        data.append(PersonalDatum(theta=thetas[a.clip_id], e=a.e))
    return data


@main.command()
@click.option("--bundle", "bundle_path", required=True,
              type=click.Path(exists=True, dir_okay=False), envvar="AEG_BUNDLE")
@click.option("--user", required=True, help="subject_id whose annotations to adapt on.")
@click.option("--annotations", "annotations_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--thetas", "thetas_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--beta-mean", default=0.01, show_default=True)
@click.option("--beta-cov", default=0.01, show_default=True)
@click.option("--adapt-cov", is_flag=True, default=False)
@click.option("--cumulative/--online", default=True, show_default=True,
              help="Re-adapt from the background each run, or chain batches.")
@click.option("--batch-size", default=0, show_default=True,
              help="Online mode: annotations per batch (0 = single batch).")
def adapt(bundle_path, user, annotations_path, thetas_path, beta_mean, beta_cov,
          adapt_cov, cumulative, batch_size):
    """Personalize the affective model for one user."""
    bundle = _load_required_bundle(bundle_path)
    try:
        background = bundle.model_for(None)
        thetas = read_thetas_csv(thetas_path)
        data = _personal_data(annotations_path, user, thetas)
        config = AdaptConfig(beta_mean=beta_mean, beta_cov=beta_cov, adapt_cov=adapt_cov)
        if cumulative or batch_size <= 0 or batch_size >= len(data):
            adapted = map_adapt(background, data, config)
        else:
            batches = [data[i:i + batch_size] for i in range(0, len(data), batch_size)]
            adapted = adapt_incrementally(background, batches, config)[-1]
        save_bundle(bundle.with_adapted(user, adapted), bundle_path)
    except AegError as err:
        _fail(err)
    click.echo(f"adapted model for {user!r} on {len(data)} annotations -> {bundle_path}")


@main.command()
@click.option("--bundle", "bundle_path", required=True,
              type=click.Path(exists=True, dir_okay=False), envvar="AEG_BUNDLE")
@click.option("--theta", "theta_text", default=None,
              help="Comma-separated topic posterior (length K).")
@click.option("--thetas", "thetas_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--clip", "clip_id", default=None, help="Clip id to look up in --thetas.")
@click.option("--user", default=None, help="Use this user's adapted model.")
@click.option("--mixture", "with_mixture", is_flag=True, default=False,
              help="Include the full mixture in the output.")
def predict(bundle_path, theta_text, thetas_path, clip_id, user, with_mixture):
    """Predict a clip's emotion distribution as JSON on stdout."""
    bundle = _load_required_bundle(bundle_path)
    try:
        model = bundle.model_for(user)
        if theta_text:
            from .acoustic import TopicPosterior

            values = np.array([float(p) for p in theta_text.split(",")])
            # typed simplexes are rarely exact; normalize at the boundary
            if np.any(values < 0) or values.sum() <= 0:
                raise MalformedInput("--theta needs nonnegative weights with positive sum")
            tp = TopicPosterior(clip_id=clip_id or "query", theta=values / values.sum())
        elif thetas_path and clip_id:
            thetas = read_thetas_csv(thetas_path)
            if clip_id not in thetas:
                raise MalformedInput(f"clip {clip_id!r} not in {thetas_path}")
            tp = thetas[clip_id]
        else:
            raise click.ClickException("pass --theta, or --thetas together with --clip")
        result = predict_emotion(tp, model)
    except AegError as err:
        _fail(err)
    g = result.reduced
    payload = {
        "clip_id": tp.clip_id,
        "mean": [float(g.mean[0]), float(g.mean[1])],
        "cov": [float(g.cov[0, 0]), float(g.cov[0, 1]), float(g.cov[1, 1])],
    }
    if with_mixture:
        payload["mixture"] = [
            {
                "weight": float(w),
                "mean": [float(c.mean[0]), float(c.mean[1])],
                "cov": [float(c.cov[0, 0]), float(c.cov[0, 1]), float(c.cov[1, 1])],
            }
            for w, c in zip(result.mixture.weights, result.mixture.components)
        ]
    click.echo(json.dumps(payload, sort_keys=True))


@main.command("index")
@click.option("--bundle", "bundle_path", required=True,
              type=click.Path(exists=True, dir_okay=False), envvar="AEG_BUNDLE")
@click.option("--segments", "segments_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--thetas", "thetas_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Index precomputed posteriors instead of segments.")
def index_cmd(bundle_path, segments_path, thetas_path):
    """Index a clip library for retrieval and store it in the bundle."""
    bundle = _load_required_bundle(bundle_path)
    try:
        affective = bundle.model_for(None)
        if segments_path:
            if bundle.acoustic is None:
                raise click.ClickException("bundle has no acoustic model; use --thetas")
            clips = read_segments_csv(segments_path)
            idx = build_index(clips, bundle.acoustic, affective, model_ref=bundle.identity())
        elif thetas_path:
            thetas = read_thetas_csv(thetas_path)
            idx = index_from_posteriors(
                list(thetas.values()), affective, model_ref=bundle.identity()
            )
        else:
            raise click.ClickException("pass --segments or --thetas")
        bundle = ModelBundle(
            affective=bundle.affective,
            acoustic=bundle.acoustic,
            standardization=bundle.standardization,
            index=idx,
            adapted=bundle.adapted,
            provenance=bundle.provenance,
        )
        save_bundle(bundle, bundle_path)
    except AegError as err:
        _fail(err)
    for cid, code in idx.skipped:
        click.echo(f"skipped {cid}: {code}", err=True)
    click.echo(f"indexed {len(idx)} clips -> {bundle_path}")


def _parse_query(point_text: Optional[str], gaussian_text: Optional[str]):
    if (point_text is None) == (gaussian_text is None):
        raise click.ClickException("pass exactly one of --point or --gaussian")
    if point_text:
        v, a = _parse_floats(point_text, 2, "--point")
        return PointQuery(np.array([v, a]))
    v, a, s11, s12, s22 = _parse_floats(gaussian_text, 5, "--gaussian")
    return GaussianQuery(Gaussian2(np.array([v, a]), np.array([[s11, s12], [s12, s22]])))


@main.command()
@click.option("--bundle", "bundle_path", required=True,
              type=click.Path(exists=True, dir_okay=False), envvar="AEG_BUNDLE")
@click.option("--point", "point_text", default=None, help="Query point: v,a")
@click.option("--gaussian", "gaussian_text", default=None,
              help="Query Gaussian: v,a,s11,s12,s22")
@click.option("--method", type=click.Choice(["ep", "fi", "ensemble"]),
              default="ep", show_default=True)
@click.option("--match", type=click.Choice(["single", "mixture"]),
              default="single", show_default=True,
              help="Emotion Prediction scoring against the reduced Gaussian or the full mixture.")
@click.option("--iters", default=3, show_default=True, help="Folding-in EM updates.")
@click.option("--topk", default=10, show_default=True)
@click.option("--user", default=None)
@click.option("--json", "as_json", is_flag=True, default=False)
def retrieve(bundle_path, point_text, gaussian_text, method, match, iters, topk, user, as_json):
    """Rank indexed clips against a VA query; CSV on stdout by default."""
    bundle = _load_required_bundle(bundle_path)
    if bundle.index is None:
        raise click.ClickException("bundle has no index; run the index command first")
    q = _parse_query(point_text, gaussian_text)
    try:
        idx = bundle.index
        if user and user in bundle.adapted:
            from .retrieval import reindex_for_model

            idx = reindex_for_model(idx, bundle.adapted[user])
        mode = MatchMode.SINGLE_GAUSSIAN if match == "single" else MatchMode.FULL_MIXTURE
        if method == "ep":
            ranked = rank_emotion_prediction(q, idx, mode)
        elif method == "fi":
            ranked = rank_folding_in(fold_in(q, idx.affective, iters=iters), idx)
        else:
            ep = rank_emotion_prediction(q, idx, mode)
            fi = rank_folding_in(fold_in(q, idx.affective, iters=iters), idx)
            ranked = rank_ensemble(ep, fi)
    except AegError as err:
        _fail(err)
    pairs = ranked.pairs[:topk]
    if as_json:
        out = []
        for cid, score in pairs:
            e = idx.entry(cid)
            out.append({
                "clip_id": cid,
                "score": score,
                "mean": [float(e.reduced.mean[0]), float(e.reduced.mean[1])],
                "cov": [float(e.reduced.cov[0, 0]), float(e.reduced.cov[0, 1]),
                        float(e.reduced.cov[1, 1])],
            })
        click.echo(json.dumps(out, sort_keys=True))
    else:
        click.echo("rank,clip_id,score")
        for i, (cid, score) in enumerate(pairs, start=1):
            click.echo(f"{i},{cid},{score!r}")


@main.command()
@click.option("--task", type=click.Choice(["mer", "personalized", "retrieval"]), required=True)
@click.option("--annotations", "annotations_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--thetas", "thetas_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--bundle", "bundle_path", default=None,
              type=click.Path(exists=True, dir_okay=False), envvar="AEG_BUNDLE")
@click.option("--mode", type=click.Choice(["uniform", "annoprior"]), default="uniform",
              show_default=True)
@click.option("--folds", default=3, show_default=True)
@click.option("--max-iters", default=9, show_default=True)
@click.option("--min-rel-gain", default=0.01, show_default=True)
@click.option("--queries", "n_queries", default=100, show_default=True)
@click.option("--gaussian-queries", is_flag=True, default=False,
              help="Evaluate retrieval with Gaussian-wrapped queries.")
@click.option("--shift", default=0.3, show_default=True,
              help="Personalized task: mean shift of the synthetic user.")
@click.option("--batches", default="10,20,30,40,50", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def evaluate(task, annotations_path, thetas_path, bundle_path, mode, folds, max_iters,
             min_rel_gain, n_queries, gaussian_queries, shift, batches, seed, out_dir):
    """Run an evaluation task and render its report (JSON + CSV + figures)."""
    from . import reporting

    try:
        if task == "mer":
            if not annotations_path or not thetas_path:
                raise click.ClickException("mer task needs --annotations and --thetas")
            corpus = EmotionCorpus(read_annotation_csv(annotations_path))
            thetas = read_thetas_csv(thetas_path)
            config = LearnConfig(max_iters=max_iters, min_rel_gain=min_rel_gain,
                                 mode=_MODES[mode])
            report = run_cross_validation(corpus, thetas, folds=folds, config=config,
                                          seed=seed)
            truth = GroundTruth.from_corpus(corpus)
            reporting.render_mer_report(
                report, out_dir,
                truth_means={cid: truth.mean(cid) for cid in truth.clip_ids},
            )
            for name in sorted(report.metrics):
                click.echo(f"{name}: {report.metrics[name]:.4f}")
        elif task == "retrieval":
            if not bundle_path or not annotations_path:
                raise click.ClickException("retrieval task needs --bundle and --annotations")
            bundle = _load_required_bundle(bundle_path)
            if bundle.index is None:
                raise click.ClickException("bundle has no index")
            corpus = EmotionCorpus(read_annotation_csv(annotations_path))
            truth = GroundTruth.from_corpus(corpus)
            queries = generate_point_queries(n=n_queries, seed=seed)
            if gaussian_queries:
                queries = pointify_to_gaussian_queries(queries)
            # drop cutoffs the library cannot fill
            p_values = tuple(p for p in (5, 10, 20, 30) if p <= len(bundle.index))
            if not p_values:
                p_values = (len(bundle.index),)
            report = run_retrieval_eval(bundle.index, queries, truth, seed=seed,
                                        p_values=p_values)
            reporting.render_retrieval_report(report, out_dir)
            for m in sorted(report.ndcg):
                row = " ".join(f"@{p}={v:.4f}" for p, v in sorted(report.ndcg[m].items()))
                click.echo(f"{m}: {row}")
        else:
            if not bundle_path:
                raise click.ClickException("personalized task needs --bundle")
            bundle = _load_required_bundle(bundle_path)
            background = bundle.model_for(None)
            rng = np.random.default_rng(seed)
            offsets = rng.standard_normal(background.means.shape)
            offsets *= shift / np.linalg.norm(offsets, axis=1, keepdims=True)
            from .affective import AffectiveGMM, Provenance

            user_truth = AffectiveGMM(
                topic_indices=background.topic_indices,
                means=background.means + offsets,
                covs=background.covs,
                k_original=background.k_original,
                provenance=Provenance.ADAPTED,
                removed_topics=background.removed_topics,
            )
            sizes = [int(s) for s in batches.split(",")]
            report = run_personalization_eval(background, user_truth,
                                              batch_sizes=sizes, seed=seed)
            reporting.render_personalization_report(report, out_dir)
            click.echo(f"baseline ALH: {report.baseline_alh:.4f}")
            for n, alh in zip(report.batch_sizes, report.alh_curve):
                click.echo(f"after {n}: ALH {alh:.4f}")
    except AegError as err:
        _fail(err)
    click.echo(f"report written to {out_dir}")


@main.command()
@click.option("--k", default=4, show_default=True)
@click.option("--clips", default=100, show_default=True)
@click.option("--subjects", default=10, show_default=True)
@click.option("--alpha", default=0.5, show_default=True, help="Dirichlet concentration.")
@click.option("--radius", default=0.75, show_default=True,
              help="Distance of true component means from the origin.")
@click.option("--variance", default=0.01, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def synth(k, clips, subjects, alpha, radius, variance, seed, out_dir):
    """Emit a synthetic corpus drawn from a known model."""
    try:
        truth = circular_true_model(k, radius=radius, variance=variance)
        spec = SyntheticSpec(true_affective=truth, dirichlet_alpha=alpha,
                             clips=clips, subjects_per_clip=subjects, seed=seed)
        corpus, thetas, _ = synthesize_corpus(spec)
        os.makedirs(out_dir, exist_ok=True)
        write_annotation_csv(os.path.join(out_dir, "annotations.csv"),
                             list(corpus.annotations))
        write_thetas_csv(os.path.join(out_dir, "thetas.csv"),
                         [thetas[cid] for cid in corpus.clip_ids])
        save_bundle(
            ModelBundle(affective=truth,
                        provenance={"synthetic_seed": seed, "dirichlet_alpha": alpha}),
            os.path.join(out_dir, "truth.aegb"),
        )
        with open(os.path.join(out_dir, "spec.json"), "w", encoding="utf-8") as fh:
            json.dump({"k": k, "clips": clips, "subjects": subjects, "alpha": alpha,
                       "radius": radius, "variance": variance, "seed": seed},
                      fh, sort_keys=True)
            fh.write("\n")
    except AegError as err:
        _fail(err)
    click.echo(f"synthesized {clips} clips x {subjects} subjects -> {out_dir}")


@main.command()
@click.option("--bundle", "bundle_path", required=True,
              type=click.Path(exists=True, dir_okay=False), envvar="AEG_BUNDLE")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
def serve(bundle_path, host, port):
    """Serve prediction and retrieval over HTTP."""
    import uvicorn

    from .server import create_app

    app = create_app(bundle_path)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--bundle", "bundle_path", required=True,
              type=click.Path(exists=True, dir_okay=False), envvar="AEG_BUNDLE")
def inspect(bundle_path):
    """Print a bundle's manifest without loading its matrices."""
    try:
        manifest = read_manifest(bundle_path)
    except AegError as err:
        _fail(err)
    manifest.pop("arrays", None)
    click.echo(json.dumps(manifest, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
