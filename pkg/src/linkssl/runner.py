"""Seeded experiment execution: one config -> per-seed rows, checkpoints,
and CSV output; plus the 25-trial uniform random hyperparameter search.

Layout under the output directory:
    <dataset>/<model>_<aug>/metrics.csv            all seeds + aggregate
    <dataset>/<model>_<aug>/<seed>/metrics.csv     single row
    <dataset>/<model>_<aug>/<seed>/config.txt      config snapshot
    <dataset>/<model>_<aug>/<seed>/loss.csv        (epoch, loss)
    <dataset>/<model>_<aug>/<seed>/params.npz      parameter dump
    <dataset>/<model>_<aug>/<seed>/run.txt         seed lineage + diagnostics
"""

from __future__ import annotations

import dataclasses
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .community import get_detector
from .config import serialize_config
from .datasets import load_dataset
from .graphs import random_link_split
from .metrics import evaluate_split
from .models import (train_decoder, train_encoder, train_supervised_gcn)
from .seeding import derive_seed

CSV_HEADER = "dataset,model,augmentation,seed,hits_at_50,ap,auc"
HITS_K = 50


@dataclass
class RunResult:
    seed: int
    row: dict | None  # None when the run trained without evaluating
    detector_edges: int | None
    loss_history: list
    parameters: dict = field(default_factory=dict)
    lineage: list = field(default_factory=list)


def format_row(row):
    return (f"{row['dataset']},{row['model']},{row['augmentation']},"
            f"{row['seed']},{row['hits_at_50']!r},{row['ap']!r},"
            f"{row['auc']!r}")


def _train_stages(graph, cfg, seed):
    """split -> (self-supervised encoder) -> decoder for one seed.
    Oracle-SBM detection runs on the full pre-split graph; every other
    random stage derives its own sub-seed from `seed`."""
    block_state = None
    detector_edges = None
    lineage = [("split", derive_seed(seed, "split")),
               ("train", derive_seed(seed, "train")),
               ("decoder", derive_seed(seed, "decoder")),
               ("evaluate", derive_seed(seed, "evaluate"))]
    if cfg.model != "gcn_supervised" and cfg.augmentation.kind == "sbm_oracle":
        detector = get_detector(cfg.augmentation.detector)
        detection_seed = derive_seed(seed, "detection")
        lineage.insert(0, ("detection", detection_seed))
        block_state = detector(graph, detection_seed)
        detector_edges = graph.num_edges
    split = random_link_split(graph, cfg.split_fractions,
                              seed=derive_seed(seed, "split"))
    if cfg.model == "gcn_supervised":
        state, decoder = train_supervised_gcn(split, cfg,
                                              derive_seed(seed, "train"))
    else:
        state = train_encoder(split, cfg.augmentation, cfg.model, cfg,
                              derive_seed(seed, "train"),
                              block_state=block_state)
        decoder = train_decoder(state, split, cfg,
                                derive_seed(seed, "decoder"))
    return split, state, decoder, detector_edges, lineage


def _param_dump(state, decoder):
    return {p.name: p.values.copy()
            for p in state.encoder.parameters() + decoder.parameters()}


def run_single(graph, cfg, seed, k=HITS_K):
    """One seed end to end: training stages plus held-out evaluation."""
    split, state, decoder, detector_edges, lineage = _train_stages(
        graph, cfg, seed)
    hits, ap, auc = evaluate_split(state, decoder, split, k=k,
                                   seed=derive_seed(seed, "evaluate"))
    row = {"dataset": cfg.dataset, "model": cfg.model,
           "augmentation": cfg.augmentation.kind, "seed": seed,
           "hits_at_50": hits, "ap": ap, "auc": auc}
    return RunResult(seed=seed, row=row, detector_edges=detector_edges,
                     loss_history=list(state.loss_history),
                     parameters=_param_dump(state, decoder),
                     lineage=lineage)


def train_single(graph, cfg, seed):
    """Training stages only; the result carries checkpoints and the loss
    curve but no metrics row."""
    _, state, decoder, detector_edges, lineage = _train_stages(
        graph, cfg, seed)
    return RunResult(seed=seed, row=None, detector_edges=detector_edges,
                     loss_history=list(state.loss_history),
                     parameters=_param_dump(state, decoder),
                     lineage=lineage)


def write_run_dir(out_dir, cfg, result):
    """Persist one seed's artifacts under <dataset>/<label>/<seed>/."""
    seed_dir = os.path.join(out_dir, cfg.dataset, cfg.label(),
                            str(result.seed))
    os.makedirs(seed_dir, exist_ok=True)
    if result.row is not None:
        with open(os.path.join(seed_dir, "metrics.csv"), "w") as fh:
            fh.write(CSV_HEADER + "\n" + format_row(result.row) + "\n")
    with open(os.path.join(seed_dir, "config.txt"), "w") as fh:
        fh.write(serialize_config(cfg))
    with open(os.path.join(seed_dir, "loss.csv"), "w") as fh:
        fh.write("epoch,loss\n")
        for epoch, value in result.loss_history:
            fh.write(f"{epoch},{value!r}\n")
    if result.parameters:
        np.savez(os.path.join(seed_dir, "params.npz"), **result.parameters)
    with open(os.path.join(seed_dir, "run.txt"), "w") as fh:
        for label, sub_seed in result.lineage:
            fh.write(f"lineage {label} {sub_seed}\n")
        if result.detector_edges is not None:
            fh.write(f"detector_input_edges {result.detector_edges}\n")


def _aggregate_rows(rows):
    def stats(key):
        vals = np.array([r[key] for r in rows])
        return vals.mean(), vals.std()

    cells = []
    for key in ("hits_at_50", "ap", "auc"):
        mean, std = stats(key)
        cells.append(f"{mean:.6f}±{std:.6f}")
    first = rows[0]
    return (f"{first['dataset']},{first['model']},{first['augmentation']},"
            f"aggregate,{cells[0]},{cells[1]},{cells[2]}")


def write_metrics_csv(path, rows, with_aggregate=True):
    lines = [CSV_HEADER]
    lines += [format_row(r) for r in rows]
    if with_aggregate and rows:
        lines.append(_aggregate_rows(rows))
    text = "\n".join(lines) + "\n"
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def _run_seed_job(args):
    graph, cfg, seed, k = args
    return run_single(graph, cfg, seed, k=k)


def run_experiment(cfg, out_dir=None, graph=None, workers=1, k=HITS_K):
    """All configured seeds; failures are recorded and skipped so the
    remaining seeds still run. Returns (rows, failures)."""
    if graph is None:
        graph = load_dataset(cfg.dataset)
    rows, failures = [], []
    if workers > 1:
        jobs = [(graph, cfg, seed, k) for seed in cfg.seeds]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = []
            for seed, future in [(s, pool.submit(_run_seed_job, j))
                                 for (s, j) in zip(cfg.seeds, jobs)]:
                outcomes.append((seed, future))
            results = []
            for seed, future in outcomes:
                try:
                    results.append(future.result())
                except Exception as exc:  # per-seed isolation
                    failures.append((seed, f"{exc}\n"))
                    results.append(None)
    else:
        results = []
        for seed in cfg.seeds:
            try:
                results.append(run_single(graph, cfg, seed, k=k))
            except Exception as exc:
                failures.append((seed, traceback.format_exc()
                                 if os.environ.get("LINKSSL_DEBUG")
                                 else str(exc)))
                results.append(None)
    for result in results:
        if result is None:
            continue
        rows.append(result.row)
        if out_dir is not None:
            write_run_dir(out_dir, cfg, result)
    if out_dir is not None and rows:
        write_metrics_csv(
            os.path.join(out_dir, cfg.dataset, cfg.label(), "metrics.csv"),
            rows)
    return rows, failures


TUNING_SEED = 0


def validation_objective(graph, cfg, k=HITS_K):
    """Hits@k on the tuning split's validation positives (seed 0)."""
    seed = TUNING_SEED
    block_state = None
    if cfg.model != "gcn_supervised" and cfg.augmentation.kind == "sbm_oracle":
        detector = get_detector(cfg.augmentation.detector)
        block_state = detector(graph, derive_seed(seed, "detection"))
    split = random_link_split(graph, cfg.split_fractions,
                              seed=derive_seed(seed, "split"))
    if len(split.val_pos) == 0:
        raise ValueError("tuning requires a non-empty validation split")
    # swap val and test so evaluate_split scores the validation positives;
    # the union of known positives (negative exclusion) is unchanged
    val_split = dataclasses.replace(split, test_pos=split.val_pos,
                                    val_pos=split.test_pos)
    if cfg.model == "gcn_supervised":
        state, decoder = train_supervised_gcn(split, cfg,
                                              derive_seed(seed, "train"))
    else:
        state = train_encoder(split, cfg.augmentation, cfg.model, cfg,
                              derive_seed(seed, "train"),
                              block_state=block_state)
        decoder = train_decoder(state, split, cfg,
                                derive_seed(seed, "decoder"))
    hits, _, _ = evaluate_split(state, decoder, val_split,
                                k=min(k, len(split.val_pos)),
                                seed=derive_seed(seed, "evaluate"))
    return hits


def random_search(space, base_cfg, seed, graph=None, objective=None,
                  out_dir=None, k=HITS_K):
    """Uniform random search over `space.budget` trials, scored by the
    validation objective; returns (best config, trial log). Trials that
    raise score -inf; all trials failing is an error."""
    if objective is None:
        if graph is None:
            graph = load_dataset(base_cfg.dataset)

        def objective(cfg):
            return validation_objective(graph, cfg, k=k)

    trial_log = []
    for idx, trial_cfg in enumerate(space.trials(base_cfg, seed)):
        try:
            score = float(objective(trial_cfg))
        except Exception as exc:
            score = float("-inf")
            trial_log.append((idx, trial_cfg, score, str(exc)))
        else:
            trial_log.append((idx, trial_cfg, score, ""))
    if all(score == float("-inf") for _, _, score, _ in trial_log):
        raise RuntimeError("every search trial failed")
    best_idx = max(range(len(trial_log)), key=lambda i: trial_log[i][2])
    best_cfg = trial_log[best_idx][1]
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "search_log.csv"), "w") as fh:
            fh.write("trial,score,error,config\n")
            for idx, cfg, score, err in trial_log:
                flat = serialize_config(cfg).replace("\n", ";")
                fh.write(f"{idx},{score!r},{err},{flat}\n")
        with open(os.path.join(out_dir, "best_config.txt"), "w") as fh:
            fh.write(serialize_config(best_cfg))
    return best_cfg, trial_log
