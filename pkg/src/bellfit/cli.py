"""Command-line front end.

Subcommands:

  generate  scenario JSON -> train.csv / test.csv / truth.json
  fit       model JSON + table CSV -> FitResult JSON
  study     models + scenario + seeds -> study.json / errors.csv / errors.svg
  verdict   study.json -> pairwise overfit fractions on stdout

Every command writes a manifest.json describing its inputs and config so
artifacts are reproducible.  Exit codes: 0 ok, 2 bad configuration,
3 I/O failure, 4 fit-stage failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bell_core import EmptySettingError, table_from_csv, table_to_csv
from .fitting import FitConfig, fit
from .models import ModelSpec
from .scenarios import ScenarioSpec, generate, ground_truth
from .traintest import multi_seed_study

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_FIT = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO)


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO)


def _parse_json(text: str, what: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"invalid {what} JSON: {exc}", EXIT_CONFIG)


def _scenario_from_arg(path: str, seed_override) -> ScenarioSpec:
    obj = _parse_json(_read_text(path), "scenario")
    try:
        spec = ScenarioSpec.from_dict(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"invalid scenario: {exc}", EXIT_CONFIG)
    if seed_override is not None:
        spec = spec.with_seed(seed_override)
    return spec


def _models_from_arg(path: str) -> list[ModelSpec]:
    obj = _parse_json(_read_text(path), "models")
    items = obj if isinstance(obj, list) else [obj]
    try:
        return [ModelSpec.from_dict(it) for it in items]
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"invalid model spec: {exc}", EXIT_CONFIG)


def _fit_config_from_arg(path: str | None, seed_override) -> FitConfig:
    if path is None:
        cfg = FitConfig()
    else:
        try:
            cfg = FitConfig.from_dict(_parse_json(_read_text(path), "fit config"))
        except (TypeError, ValueError) as exc:
            raise CliError(f"invalid fit config: {exc}", EXIT_CONFIG)
    if seed_override is not None:
        cfg = FitConfig.from_dict({**cfg.to_dict(), "seed": seed_override})
    return cfg


def _manifest(out_dir: Path, command: str, config: dict, inputs: list[str],
              outputs: list[str], seed: int) -> None:
    man = {"command": command, "config": config,
           "input_paths": inputs, "output_paths": outputs,
           "seed": seed, "tool_version": __version__}
    _write_text(out_dir / "manifest.json", json.dumps(man, indent=2, sort_keys=True) + "\n")


def _parse_seeds(spec: str) -> list[int]:
    """Seed list syntax: '0..49' or comma-separated integers."""
    try:
        if ".." in spec:
            lo, hi = spec.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(s) for s in spec.split(",")]
    except ValueError:
        raise CliError(f"bad seeds spec {spec!r}", EXIT_CONFIG)


def cmd_generate(args) -> int:
    sc = _scenario_from_arg(args.scenario, args.seed)
    train, test, truth = generate(sc)
    out = Path(args.out)
    _write_text(out / "train.csv", table_to_csv(train))
    _write_text(out / "test.csv", table_to_csv(test))
    _write_text(out / "truth.json", json.dumps(
        {"scenario": sc.to_dict(), "behavior": truth.ravel().tolist()},
        indent=2, sort_keys=True) + "\n")
    _manifest(out, "generate", sc.to_dict(), [args.scenario],
              ["train.csv", "test.csv", "truth.json"], sc.seed)
    return EXIT_OK


def cmd_fit(args) -> int:
    models = _models_from_arg(args.model)
    if len(models) != 1:
        raise CliError("fit takes exactly one model spec", EXIT_CONFIG)
    cfg = _fit_config_from_arg(args.config, args.seed)
    try:
        table = table_from_csv(_read_text(args.table))
    except ValueError as exc:
        raise CliError(f"invalid table CSV: {exc}", EXIT_CONFIG)
    try:
        result = fit(models[0], table, cfg)
    except EmptySettingError as exc:
        raise CliError(f"fit failed: {exc}", EXIT_FIT)
    out = Path(args.out)
    _write_text(out / "fit.json", json.dumps(result.to_dict(), indent=2,
                                             sort_keys=True) + "\n")
    _manifest(out, "fit", {"model": json.loads(models[0].to_json()),
                           "fit": cfg.to_dict()},
              [args.model, args.table] + ([args.config] if args.config else []),
              ["fit.json"], cfg.seed)
    return EXIT_OK


def _errors_csv(summary) -> str:
    lines = ["seed,model,train_error,test_error"]
    for seed, label, tr, te in summary.per_seed:
        lines.append(f"{seed},{label},{tr:.12e},{te:.12e}")
    return "\n".join(lines) + "\n"


def _errors_svg(summary) -> str:
    """Grouped bar chart of median train/test error per model."""
    labels = [m.label() for m in summary.models]
    train = [summary.median_train[l] for l in labels]
    test = [summary.median_test[l] for l in labels]
    width, height, margin = 640, 360, 50
    top = max(max(train + test), 1e-300) * 1.15
    n = len(labels)
    group_w = (width - 2 * margin) / max(n, 1)
    bar_w = group_w * 0.35
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<text x="{margin}" y="{margin - 10}" font-size="12">'
        f'median error (nats/trial), scenario {summary.scenario.id}</text>',
    ]
    for i, lab in enumerate(labels):
        x0 = margin + i * group_w + group_w / 2
        for j, (val, color, name) in enumerate(
                [(train[i], "#4878cf", "train"), (test[i], "#d65f5f", "test")]):
            h = (height - 2 * margin) * val / top
            x = x0 + (j - 1) * bar_w
            y = height - margin - h
            parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}" '
                         f'height="{h:.1f}" fill="{color}">'
                         f'<title>{lab} {name}: {val:.3e}</title></rect>')
        parts.append(f'<text x="{x0:.1f}" y="{height - margin + 16}" '
                     f'font-size="11" text-anchor="middle">{lab}</text>')
    parts.append(f'<rect x="{width - margin - 110}" y="{margin}" width="10" '
                 f'height="10" fill="#4878cf"/>')
    parts.append(f'<text x="{width - margin - 95}" y="{margin + 9}" '
                 f'font-size="11">train</text>')
    parts.append(f'<rect x="{width - margin - 110}" y="{margin + 16}" width="10" '
                 f'height="10" fill="#d65f5f"/>')
    parts.append(f'<text x="{width - margin - 95}" y="{margin + 25}" '
                 f'font-size="11">test</text>')
    parts.append('</svg>')
    return "\n".join(parts) + "\n"


def cmd_study(args) -> int:
    models = _models_from_arg(args.models)
    sc = _scenario_from_arg(args.scenario, args.seed)
    cfg = _fit_config_from_arg(args.config, None)
    seeds = _parse_seeds(args.seeds)
    try:
        summary = multi_seed_study(models, sc, seeds, cfg, jobs=args.jobs)
    except EmptySettingError as exc:
        raise CliError(f"study failed: {exc}", EXIT_FIT)
    except ValueError as exc:
        raise CliError(f"invalid study: {exc}", EXIT_CONFIG)
    out = Path(args.out)
    _write_text(out / "study.json", summary.to_json() + "\n")
    _write_text(out / "errors.csv", _errors_csv(summary))
    _write_text(out / "errors.svg", _errors_svg(summary))
    _manifest(out, "study",
              {"models": [json.loads(m.to_json()) for m in models],
               "scenario": sc.to_dict(), "fit": cfg.to_dict(), "seeds": seeds},
              [args.models, args.scenario] + ([args.config] if args.config else []),
              ["study.json", "errors.csv", "errors.svg"], sc.seed)
    return EXIT_OK


def cmd_verdict(args) -> int:
    obj = _parse_json(_read_text(args.study), "study")
    try:
        rows = obj["overfit_fraction"]
    except (KeyError, TypeError):
        raise CliError("study JSON lacks overfit_fraction", EXIT_CONFIG)
    for row in rows:
        print(f"{row['a']} overfits {row['b']}: {row['fraction']:.3f}")
    return EXIT_OK


def _default_jobs() -> int:
    env = os.environ.get("BELLFIT_JOBS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bellfit",
                                description="CHSH causal-model fitting lab")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample train/test tables for a scenario")
    g.add_argument("scenario", help="ScenarioSpec JSON file")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", default=".", help="output directory")
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("fit", help="fit one model to a count table")
    f.add_argument("model", help="ModelSpec JSON file")
    f.add_argument("table", help="count table CSV file")
    f.add_argument("--config", default=None, help="FitConfig JSON file")
    f.add_argument("--seed", type=int, default=None)
    f.add_argument("--out", default=".")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("study", help="multi-seed train/test study")
    s.add_argument("models", help="JSON file with a list of ModelSpecs")
    s.add_argument("scenario", help="ScenarioSpec JSON file")
    s.add_argument("--seeds", default="0..49", help="e.g. 0..49 or 1,2,5")
    s.add_argument("--config", default=None, help="FitConfig JSON file")
    s.add_argument("--seed", type=int, default=None,
                   help="override the scenario base seed")
    s.add_argument("--jobs", type=int, default=_default_jobs())
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_study)

    v = sub.add_parser("verdict", help="print overfit fractions from study.json")
    v.add_argument("study", help="study.json file")
    v.set_defaults(func=cmd_verdict)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, matching the config error code
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
