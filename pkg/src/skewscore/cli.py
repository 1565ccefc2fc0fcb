"""Command line entry point: generate, discover, benchmark, oracle-check."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ._validation import ParameterError
from .bench import discoverer_for, run_benchmark, simulate
from .config import RunConfig
from .datagen import read_dataset, write_adjacency, write_dataset, write_ground_truth
from .ordering import OrderingError

log = logging.getLogger("skewscore")


def _resolve(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    changes = {}
    if args.seed is not None:
        changes["seeds"] = [args.seed]
    if args.estimator is not None:
        changes["estimator"] = args.estimator
    if args.alpha is not None:
        changes["alpha"] = args.alpha
    if args.out is not None:
        changes["output_dir"] = args.out
    return cfg.replace(**changes) if changes else cfg


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _check_outputs(paths) -> int:
    missing = [str(p) for p in paths if not Path(p).is_file()]
    if missing:
        log.error("missing outputs: %s", ", ".join(missing))
        return 1
    return 0


def cmd_generate(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    written = [out / "config.json"]
    cfg.save(written[0])
    for seed in cfg.seeds:
        target = out if len(cfg.seeds) == 1 else out / f"seed_{seed}"
        target.mkdir(parents=True, exist_ok=True)
        sim = simulate(cfg, seed)
        write_dataset(target / "data.csv", sim.X)
        written.append(target / "data.csv")
        written += list(write_ground_truth(target, sim.dag, seed=seed, config=cfg.to_dict(),
                                           confounded_pairs=sim.confounded_pairs))
    return _check_outputs(written)


def _dump(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_discover(cfg: RunConfig, dataset) -> int:
    try:
        X = read_dataset(dataset)
    except (OSError, ValueError) as exc:
        raise ParameterError(f"cannot read dataset {dataset}: {exc}") from exc
    if X.shape[0] < 50:
        raise ParameterError(f"discovery needs at least 50 rows, got {X.shape[0]}")
    out = _out_dir(cfg)
    cfg.save(out / "config.json")
    seed = cfg.seeds[0]
    model = discoverer_for(cfg, seed)
    try:
        model.fit(X)
    except OrderingError as exc:
        _dump(out / "order_partial.json", {"partial_order": exc.partial_order, "error": str(exc)})
        (out / "diagnostics.json").write_text(exc.diagnostics.to_json())
        log.error("%s", exc)
        return 1
    files = [out / n for n in ("order.json", "adjacency.csv", "diagnostics.json", "p_values.json")]
    _dump(files[0], {"order": model.order_})
    write_adjacency(files[1], model.adjacency_)
    files[2].write_text(model.diagnostics_.to_json())
    _dump(files[3], [{"source": int(i), "target": int(j), "p_value": float(p)}
                     for (i, j), p in sorted(model.p_values_.items())])
    if model.diagnostics_.violation:
        log.warning("symmetry violation flagged: the noise may be asymmetric")
    return _check_outputs(files)


def cmd_benchmark(cfg: RunConfig) -> int:
    report = run_benchmark(cfg)
    paths = report.write(_out_dir(cfg))
    s = report.summary
    log.info("runs=%d failed=%d", s["runs"], s["failed"])
    if s["failed"]:
        for r in report.rows:
            if r["status"] != "ok":
                log.warning("seed %s failed: %s", r["seed"], r["error"])
    return _check_outputs(paths)


def cmd_oracle_check(cfg: RunConfig, mc_samples: int) -> int:
    from .oracles import conformance_json, conformance_report

    report = conformance_report(seed=cfg.seeds[0], mc_samples=mc_samples)
    path = _out_dir(cfg) / "conformance.json"
    path.write_text(conformance_json(report))
    for c in report["checks"]:
        if not c["passed"]:
            log.error("conformance check failed: %s (expected %s, got %s)",
                      c["name"], c["expected"], c["observed"])
    if _check_outputs([path]):
        return 1
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat JSON run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    common.add_argument("--seed", type=int, help="single seed (overrides config)")
    common.add_argument("--estimator", choices=("stein", "ssm"))
    common.add_argument("--alpha", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="skewscore", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write a synthetic dataset and its ground truth")
    d = sub.add_parser("discover", parents=[common], help="order and prune a CSV dataset")
    d.add_argument("dataset", help="CSV with a header row")
    sub.add_parser("benchmark", parents=[common], help="simulate and score every seed")
    o = sub.add_parser("oracle-check", parents=[common], help="write the oracle conformance report")
    o.add_argument("--mc-samples", type=int, default=10**6)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    np.seterr(over="ignore", under="ignore")
    try:
        cfg = _resolve(args)
        if args.command == "generate":
            return cmd_generate(cfg)
        if args.command == "discover":
            return cmd_discover(cfg, args.dataset)
        if args.command == "benchmark":
            return cmd_benchmark(cfg)
        return cmd_oracle_check(cfg, args.mc_samples)
    except (ParameterError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
