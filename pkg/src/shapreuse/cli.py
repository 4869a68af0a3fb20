"""Command-line entry point.

Eight subcommands: ``value`` runs one valuation method, ``oracle`` is a
shortcut for the brute-force reference, ``compare`` correlates two result
files, ``select`` builds a data-selection accuracy curve, ``bench`` runs a
cost ladder across methods, ``scale`` measures one method across dataset
sizes, ``subsets`` prints the distinct-subset count and its bound, and
``gen`` writes a synthetic dataset to CSV.

Runs are configured by flags or a JSON config file; flags override the
config, and unknown config keys are rejected. All outputs are written
atomically (temp file plus rename). The ``seconds`` field in result.json
is measured wall time and is the only output field that varies between
repeated runs of the same seed.

Exit codes: 0 success, 2 validation error, 3 size-limit error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .analysis import (METHODS, Instance, cost_ladder, pearson, run_method,
                       scaling_study, selection_curve, spearman)
from .core import SizeLimitError, ValidationError, ValuationResult
from .data import generate_synthetic, ingest_csv, write_csv
from .exact import enumerate_distinct_subsets, subset_count_bound
from .models import FAMILY_KINDS, make_family
from .sampling import SamplerConfig

DEFAULTS: dict = {
    # dataset source: a CSV path, or synthetic blob parameters when csv is null
    "csv": None,
    "normalize": False,
    "classes": 3,
    "per_class": 20,
    "test_per_class": 5,
    "dim": 2,
    "noise": 1.0,
    "shift": 0.0,
    # model family and hyperparameters
    "family": "wknn",
    "k": 5,
    "gamma": 1.0,
    "tau_k": 0.5,
    "max_depth": 5,
    "min_split": 2,
    "min_leaf": 1,
    # optional support override (support family may differ from the
    # utility family; unset fields fall back to the utility settings)
    "support_family": None,
    "support_k": None,
    "support_gamma": None,
    "support_tau_k": None,
    "support_max_depth": None,
    # method and sampler settings
    "method": "lsmr",
    "samples": 1000,
    "tau": 0.05,
    "check_every": 100,
    "tmc_tol": 0.01,
    "tmc_stable_runs": 5,
    # run plumbing
    "seed": 0,
    "out": ".",
    "workers": 1,
    "enum_limit": 20,
    "reuse": False,
}

BENCH_DEFAULT = ("local-baseline", "subset-centric", "lsmr", "global-mc",
                 "local-mc", "tmc", "comple-s", "lsmr-a")


def _atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_csv_rows(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(cell) for cell in row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def _load_config_file(path: str) -> dict:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ValidationError(f"config {path}: top level must be an object")
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise ValidationError(
            f"config {path}: unknown keys {', '.join(unknown)}")
    return raw


def merge_config(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicitly passed flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(_load_config_file(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _family_params(kind: str, cfg: dict) -> dict:
    if kind == "wknn":
        return {"k": cfg["k"]}
    if kind == "kernel":
        return {"gamma": cfg["gamma"], "tau": cfg["tau_k"]}
    return {"max_depth": cfg["max_depth"],
            "min_samples_split": cfg["min_split"],
            "min_samples_leaf": cfg["min_leaf"]}


def _support_map_for(cfg: dict, dataset, tests, family):
    override_keys = ("support_family", "support_k", "support_gamma",
                     "support_tau_k", "support_max_depth")
    if all(cfg[key] is None for key in override_keys):
        return family.support_map(dataset, tests)
    kind = cfg["support_family"] or cfg["family"]
    params = _family_params(kind, cfg)
    if kind == "wknn" and cfg["support_k"] is not None:
        params["k"] = cfg["support_k"]
    if kind == "kernel":
        if cfg["support_gamma"] is not None:
            params["gamma"] = cfg["support_gamma"]
        if cfg["support_tau_k"] is not None:
            params["tau"] = cfg["support_tau_k"]
    if kind == "tree" and cfg["support_max_depth"] is not None:
        params["max_depth"] = cfg["support_max_depth"]
    return make_family(kind, **params).support_map(dataset, tests)


def build_instance(cfg: dict) -> Instance:
    if cfg["csv"]:
        dataset, tests = ingest_csv(cfg["csv"], seed=int(cfg["seed"]),
                                    normalize=bool(cfg["normalize"]))
    else:
        dataset, tests = generate_synthetic(
            num_classes=int(cfg["classes"]), per_class=int(cfg["per_class"]),
            test_per_class=int(cfg["test_per_class"]), dim=int(cfg["dim"]),
            noise=float(cfg["noise"]), shift=float(cfg["shift"]),
            seed=int(cfg["seed"]))
    family = make_family(cfg["family"], **_family_params(cfg["family"], cfg))
    support_map = _support_map_for(cfg, dataset, tests, family)
    return Instance(dataset, tests, support_map, family)


def _sampler(cfg: dict) -> SamplerConfig:
    return SamplerConfig(samples=int(cfg["samples"]), tau=float(cfg["tau"]),
                         check_every=int(cfg["check_every"]),
                         seed=int(cfg["seed"]),
                         tmc_perf_tol=float(cfg["tmc_tol"]),
                         tmc_stable_runs=int(cfg["tmc_stable_runs"]))


def _result_payload(result: ValuationResult, cfg: dict) -> str:
    # the output directory has no bearing on the values, so it stays out of
    # the reproduction record: same flags, same seed, same payload
    payload = {
        "schema": 1,
        "method": result.method,
        "seed": result.seed,
        "samples": result.samples_used,
        "fits": result.trainings,
        "evaluations": result.evaluations,
        "seconds": result.elapsed,
        "values": {str(z): float(v) for z, v in sorted(result.values.items())},
        "config": {k: v for k, v in cfg.items() if k != "out"},
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write_trace(path: Path, result: ValuationResult) -> None:
    _write_csv_rows(path, ["samples", "criterion"],
                    [(int(s), repr(float(c))) for s, c in result.checkpoints])


def _load_values(path: str) -> dict[int, float]:
    with open(path) as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict) or "values" not in payload:
        raise ValidationError(f"{path}: not a result file (no 'values' field)")
    return {int(z): float(v) for z, v in payload["values"].items()}


def _cmd_value(cfg: dict) -> int:
    instance = build_instance(cfg)
    result = run_method(cfg["method"], instance, config=_sampler(cfg),
                        enum_limit=int(cfg["enum_limit"]),
                        workers=int(cfg["workers"]), reuse=bool(cfg["reuse"]))
    out = Path(cfg["out"])
    _atomic_write_text(out / "result.json", _result_payload(result, cfg))
    _write_trace(out / "trace.csv", result)
    total = sum(result.values.values())
    print(f"{result.method}: fits={result.trainings} "
          f"evaluations={result.evaluations} samples={result.samples_used} "
          f"total_value={total:.6f} seconds={result.elapsed:.3f}")
    print(f"wrote {out / 'result.json'}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    a = _load_values(args.result_a)
    b = _load_values(args.result_b)
    if set(a) != set(b):
        raise ValidationError("result files value different training ids")
    ids = sorted(a)
    r_pearson = pearson([a[z] for z in ids], [b[z] for z in ids])
    r_spearman = spearman([a[z] for z in ids], [b[z] for z in ids])
    print(f"pearson={r_pearson:.6f} spearman={r_spearman:.6f}")
    payload = {"schema": 1, "pearson": r_pearson, "spearman": r_spearman,
               "result_a": args.result_a, "result_b": args.result_b,
               "ids": len(ids)}
    out = Path(args.out or ".")
    _atomic_write_text(out / "compare.json",
                       json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_select(cfg: dict, args: argparse.Namespace) -> int:
    instance = build_instance(cfg)
    values = _load_values(args.values)
    fractions = [float(f) for f in args.fractions.split(",") if f.strip()]
    curve = selection_curve(instance.dataset, instance.tests, instance.family,
                            values, fractions)
    out = Path(cfg["out"])
    _write_csv_rows(out / "curve.csv", ["fraction", "size", "accuracy"],
                    [(f, s, repr(a)) for f, s, a in curve.rows()])
    for f, size, acc in curve.rows():
        print(f"f={f:.2f} size={size} accuracy={acc:.4f}")
    print(f"wrote {out / 'curve.csv'}")
    return 0


def _cmd_bench(cfg: dict, args: argparse.Namespace) -> int:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise ValidationError(f"unknown method {m!r} in --methods")
    instance = build_instance(cfg)
    ladder = cost_ladder(instance, methods, config=_sampler(cfg),
                         enum_limit=int(cfg["enum_limit"]))
    out = Path(cfg["out"])
    _write_csv_rows(out / "ladder.csv",
                    ["method", "fits", "evaluations", "samples", "seconds"],
                    [(r["method"], r["fits"], r["evaluations"], r["samples"],
                      repr(r["seconds"])) for r in ladder.rows])
    for r in ladder.rows:
        print(f"{r['method']:<16} fits={r['fits']:<8} "
              f"evaluations={r['evaluations']:<10} samples={r['samples']:<8} "
              f"seconds={r['seconds']:.3f}")
    print(f"wrote {out / 'ladder.csv'}")
    return 0


def _cmd_scale(cfg: dict, args: argparse.Namespace) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes or any(s < int(cfg["classes"]) for s in sizes):
        raise ValidationError("--sizes must list totals of at least one point "
                              "per class")

    def make_instance(size: int) -> Instance:
        grown = dict(cfg)
        grown["per_class"] = max(1, size // int(cfg["classes"]))
        grown["csv"] = None
        return build_instance(grown)

    study = scaling_study(make_instance, sizes, cfg["method"],
                          config=_sampler(cfg),
                          enum_limit=int(cfg["enum_limit"]))
    out = Path(cfg["out"])
    _write_csv_rows(out / "scaling.csv",
                    ["size", "tests", "method", "fits", "evaluations",
                     "samples", "seconds"],
                    [(r["size"], r["tests"], r["method"], r["fits"],
                      r["evaluations"], r["samples"], repr(r["seconds"]))
                     for r in study.rows])
    for r in study.rows:
        print(f"size={r['size']:<6} fits={r['fits']:<8} "
              f"evaluations={r['evaluations']:<10} seconds={r['seconds']:.3f}")
    print(f"wrote {out / 'scaling.csv'}")
    return 0


def _cmd_subsets(cfg: dict) -> int:
    instance = build_instance(cfg)
    family = enumerate_distinct_subsets(instance.support_map,
                                        limit=int(cfg["enum_limit"]))
    bound = subset_count_bound(instance.support_map,
                               instance.dataset.num_training)
    sizes = [len(instance.support_map.of(t))
             for t in instance.support_map.test_ids]
    print(f"tests={len(sizes)} support sizes min={min(sizes)} "
          f"max={max(sizes)}")
    print(f"distinct subsets: {len(family)}")
    print(f"bound: {bound}")
    return 0


def _cmd_gen(cfg: dict, args: argparse.Namespace) -> int:
    dataset, tests = generate_synthetic(
        num_classes=int(cfg["classes"]), per_class=int(cfg["per_class"]),
        test_per_class=int(cfg["test_per_class"]), dim=int(cfg["dim"]),
        noise=float(cfg["noise"]), shift=float(cfg["shift"]),
        seed=int(cfg["seed"]))
    target = Path(args.file)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name + ".",
                               suffix=".tmp")
    os.close(fd)
    try:
        write_csv(tmp, dataset, tests)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    print(f"wrote {target}: {dataset.num_training} train / {len(tests)} test, "
          f"dim={dataset.feature_matrix.shape[1]}, "
          f"classes={dataset.num_classes}")
    return 0


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dataset")
    g.add_argument("--csv", help="dataset CSV path (default: synthetic blobs)")
    g.add_argument("--normalize", action="store_true", default=None,
                   help="z-score features with training-split statistics")
    g.add_argument("--classes", type=int, help="synthetic: number of classes")
    g.add_argument("--per-class", type=int, dest="per_class",
                   help="synthetic: training points per class")
    g.add_argument("--test-per-class", type=int, dest="test_per_class",
                   help="synthetic: test points per class")
    g.add_argument("--dim", type=int, help="synthetic: feature dimension")
    g.add_argument("--noise", type=float, help="synthetic: blob spread")
    g.add_argument("--shift", type=float,
                   help="synthetic: offset of test centers along coordinate 0")
    g.add_argument("--seed", type=int, help="seed for splits, data, sampling")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--family", choices=FAMILY_KINDS, help="utility model family")
    g.add_argument("--k", type=int, help="wknn: neighbors used in voting")
    g.add_argument("--gamma", type=float, help="kernel: RBF width")
    g.add_argument("--tau-k", type=float, dest="tau_k",
                   help="kernel: weight threshold")
    g.add_argument("--max-depth", type=int, dest="max_depth", help="tree depth")
    g.add_argument("--min-split", type=int, dest="min_split",
                   help="tree: min points to split")
    g.add_argument("--min-leaf", type=int, dest="min_leaf",
                   help="tree: min points per leaf")
    g.add_argument("--support-family", choices=FAMILY_KINDS,
                   dest="support_family",
                   help="family used for support sets when it differs from "
                        "the utility family")
    g.add_argument("--support-k", type=int, dest="support_k")
    g.add_argument("--support-gamma", type=float, dest="support_gamma")
    g.add_argument("--support-tau-k", type=float, dest="support_tau_k")
    g.add_argument("--support-max-depth", type=int, dest="support_max_depth")


def _add_run_flags(p: argparse.ArgumentParser, *, sampler: bool = True) -> None:
    g = p.add_argument_group("run")
    g.add_argument("--config", help="JSON config file; flags override it")
    g.add_argument("--out", help="output directory (default: current)")
    g.add_argument("--enum-limit", type=int, dest="enum_limit",
                   help="largest support size exact methods will enumerate")
    g.add_argument("--workers", type=int,
                   help="prefetch threads for the reuse schedule")
    g.add_argument("--reuse", action="store_true", default=None,
                   help="share fits through a cache in the exact baselines")
    if sampler:
        s = p.add_argument_group("sampler")
        s.add_argument("--samples", type=int, help="sampling budget")
        s.add_argument("--tau", type=float, help="convergence threshold")
        s.add_argument("--check-every", type=int, dest="check_every",
                       help="convergence check cadence")
        s.add_argument("--tmc-tol", type=float, dest="tmc_tol",
                       help="truncation tolerance on marginals")
        s.add_argument("--tmc-stable-runs", type=int, dest="tmc_stable_runs",
                       help="stable predictions before truncation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shapreuse",
        description="Shapley data valuation with model-induced locality")
    sub = parser.add_subparsers(dest="command", required=True)

    p_value = sub.add_parser("value", help="run one valuation method")
    p_value.add_argument("--method", choices=METHODS,
                         help="valuation method (default lsmr)")
    _add_data_flags(p_value)
    _add_model_flags(p_value)
    _add_run_flags(p_value)

    p_oracle = sub.add_parser("oracle",
                              help="brute-force reference on a small dataset")
    _add_data_flags(p_oracle)
    _add_model_flags(p_oracle)
    _add_run_flags(p_oracle, sampler=False)

    p_cmp = sub.add_parser("compare", help="correlate two result files")
    p_cmp.add_argument("result_a")
    p_cmp.add_argument("result_b")
    p_cmp.add_argument("--out", help="output directory (default: current)")

    p_sel = sub.add_parser("select",
                           help="retrain on top-valued fractions of the data")
    p_sel.add_argument("--values", required=True,
                       help="result.json with the values to rank by")
    p_sel.add_argument("--fractions", default="0.1,0.25,0.5,0.75,1.0",
                       help="comma-separated fractions in (0, 1]")
    _add_data_flags(p_sel)
    _add_model_flags(p_sel)
    _add_run_flags(p_sel, sampler=False)

    p_bench = sub.add_parser("bench", help="cost ladder across methods")
    p_bench.add_argument("--methods", default=",".join(BENCH_DEFAULT),
                         help="comma-separated method names")
    _add_data_flags(p_bench)
    _add_model_flags(p_bench)
    _add_run_flags(p_bench)

    p_scale = sub.add_parser("scale",
                             help="one method across synthetic dataset sizes")
    p_scale.add_argument("--sizes", required=True,
                         help="comma-separated training-set sizes")
    p_scale.add_argument("--method", choices=METHODS,
                         help="method to scale (default lsmr)")
    _add_data_flags(p_scale)
    _add_model_flags(p_scale)
    _add_run_flags(p_scale)

    p_sub = sub.add_parser("subsets",
                           help="distinct subset count and its upper bound")
    _add_data_flags(p_sub)
    _add_model_flags(p_sub)
    _add_run_flags(p_sub, sampler=False)

    p_gen = sub.add_parser("gen", help="write a synthetic dataset to CSV")
    p_gen.add_argument("file", help="target CSV path")
    _add_data_flags(p_gen)

    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "compare":
        return _cmd_compare(args)
    cfg = merge_config(args)
    if args.command == "value":
        return _cmd_value(cfg)
    if args.command == "oracle":
        cfg["method"] = "oracle"
        return _cmd_value(cfg)
    if args.command == "select":
        return _cmd_select(cfg, args)
    if args.command == "bench":
        return _cmd_bench(cfg, args)
    if args.command == "scale":
        return _cmd_scale(cfg, args)
    if args.command == "subsets":
        return _cmd_subsets(cfg)
    return _cmd_gen(cfg, args)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
