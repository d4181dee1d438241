"""Train-and-test model selection.

Fit each candidate model on training data, score it on held-out test data,
and call model A an overfit of model B on a run when A trains strictly
better but tests strictly worse.  Single runs are noisy; the study layer
repeats the protocol over seeds and reports overfit fractions and error
medians, which is where the statistical argument lives.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bell_core import frequencies
from .fitting import FitConfig, FitResult, fit, loss
from .models import ModelSpec
from .scenarios import ScenarioSpec, generate


@dataclass(frozen=True)
class ModelOutcome:
    train_error: float
    test_error: float
    fit: FitResult


@dataclass(frozen=True)
class TrainTestRun:
    train: np.ndarray
    test: np.ndarray
    results: dict  # ModelSpec -> ModelOutcome, insertion-ordered


@dataclass(frozen=True)
class OverfitVerdict:
    model_a: ModelSpec
    model_b: ModelSpec
    a_overfits_b: bool
    train_gap: float   # train_a - train_b
    test_gap: float    # test_a - test_b


def run(models: list[ModelSpec], train: np.ndarray, test: np.ndarray,
        cfg: FitConfig | None = None) -> TrainTestRun:
    """Fit every model on `train` and score its behavior on `test`."""
    cfg = cfg or FitConfig()
    test_freqs = frequencies(test)
    results = {}
    for spec in models:
        res = fit(spec, train, cfg)
        results[spec] = ModelOutcome(
            train_error=res.train_error,
            test_error=loss(test_freqs, res.fitted_behavior),
            fit=res)
    return TrainTestRun(train=train, test=test, results=results)


def verdicts(tt: TrainTestRun) -> list[OverfitVerdict]:
    """Pairwise overfit verdicts over all ordered model pairs."""
    specs = list(tt.results)
    if len(specs) < 2:
        raise ValueError("verdicts need at least two models")
    out = []
    for a in specs:
        for b in specs:
            if a == b:
                continue
            ra, rb = tt.results[a], tt.results[b]
            out.append(OverfitVerdict(
                model_a=a, model_b=b,
                a_overfits_b=(ra.train_error < rb.train_error
                              and ra.test_error > rb.test_error),
                train_gap=ra.train_error - rb.train_error,
                test_gap=ra.test_error - rb.test_error))
    return out


@dataclass(frozen=True)
class StudySummary:
    scenario: ScenarioSpec
    models: tuple          # ModelSpec, study order
    seeds: tuple
    config: FitConfig
    median_train: dict     # label -> float
    median_test: dict
    overfit_fraction: dict  # (label_a, label_b) -> float
    per_seed: tuple        # records: (seed, label, train_error, test_error)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "models": [json.loads(m.to_json()) for m in self.models],
            "seeds": list(self.seeds),
            "config": self.config.to_dict(),
            "median_train": dict(self.median_train),
            "median_test": dict(self.median_test),
            "overfit_fraction": [
                {"a": a, "b": b, "fraction": frac}
                for (a, b), frac in self.overfit_fraction.items()],
            "per_seed": [list(rec) for rec in self.per_seed],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _study_one(args) -> tuple:
    models, scenario, seed, cfg = args
    train, test, _ = generate(scenario.with_seed(seed))
    tt = run(list(models), train, test, cfg)
    return tuple((spec.label(), out.train_error, out.test_error)
                 for spec, out in tt.results.items())


def multi_seed_study(models: list[ModelSpec], scenario: ScenarioSpec,
                     seeds: list[int], cfg: FitConfig | None = None,
                     jobs: int = 1) -> StudySummary:
    """Repeat the train/test protocol across seeds and aggregate.

    Deterministic given (models, scenario, seeds, cfg): seeds fan out to a
    worker pool but aggregation follows the given seed order.
    """
    cfg = cfg or FitConfig()
    seeds = [int(s) for s in seeds]
    if len(seeds) != len(set(seeds)):
        raise ValueError("seeds must be distinct")
    tasks = [(tuple(models), scenario, s, cfg) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_study_one, tasks))
    else:
        rows = [_study_one(t) for t in tasks]

    labels = [m.label() for m in models]
    errs = {lab: ([], []) for lab in labels}
    per_seed = []
    for seed, row in zip(seeds, rows):
        for lab, tr, te in row:
            errs[lab][0].append(tr)
            errs[lab][1].append(te)
            per_seed.append((seed, lab, tr, te))
    median_train = {lab: float(np.median(errs[lab][0])) for lab in labels}
    median_test = {lab: float(np.median(errs[lab][1])) for lab in labels}

    fractions = {}
    for la in labels:
        for lb in labels:
            if la == lb:
                continue
            hits = [tra < trb and tea > teb
                    for tra, trb, tea, teb in zip(errs[la][0], errs[lb][0],
                                                  errs[la][1], errs[lb][1])]
            fractions[(la, lb)] = float(np.mean(hits)) if hits else 0.0
    return StudySummary(scenario=scenario, models=tuple(models),
                        seeds=tuple(seeds), config=cfg,
                        median_train=median_train, median_test=median_test,
                        overfit_fraction=fractions, per_seed=tuple(per_seed))


def split_table(counts: np.ndarray, seed: int, frac: float = 0.5):
    """Per-trial binomial split of one ingested table into train/test."""
    if not 0.0 < frac < 1.0:
        raise ValueError("frac must lie in (0, 1)")
    counts = np.asarray(counts)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xA11)))
    train = rng.binomial(counts, frac)
    return train.astype(np.int64), (counts - train).astype(np.int64)
