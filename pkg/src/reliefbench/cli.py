"""Command-line entry point: ``reliefbench {profile,score,generate,benchmark}``.

Exit status: 0 success, 2 usage error, 3 data error, 4 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import simulate
from .data import (DEFAULT_DISCRETE_CUTOFF, DEFAULT_ENDPOINT, DEFAULT_MISSING_TOKEN,
                   load_dataset, prepare, profile)
from .distance import cached_pairwise_distances
from .errors import DataError, ReliefBenchError, UsageError
from .power import BenchmarkConfig, rank_features, run_benchmark, score_any
from .relief import NeighborSpec, parse_algorithm

THREADS_ENV = "RELIEFBENCH_THREADS"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_threads():
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _data_options(p):
    p.add_argument("--endpoint", default=DEFAULT_ENDPOINT,
                   help="endpoint column name (default: %(default)s)")
    p.add_argument("--missing-token", default=DEFAULT_MISSING_TOKEN,
                   help="cell text marking a missing value (default: %(default)s)")
    p.add_argument("--discrete-cutoff", type=int, default=DEFAULT_DISCRETE_CUTOFF,
                   help="max distinct values for a discrete feature (default: %(default)s)")


def build_parser():
    parser = _Parser(prog="reliefbench", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("profile", help="report feature and endpoint types")
    p.add_argument("data")
    _data_options(p)

    p = sub.add_parser("score", help="rank features with one algorithm")
    p.add_argument("data")
    p.add_argument("--algorithm", "-a", required=True,
                   help="e.g. multisurf, relieff:k=10, relieff:pct=0.1, chi2")
    p.add_argument("--output", "-o", help="ranked TSV path (default: stdout)")
    p.add_argument("--threads", type=int)
    p.add_argument("--distance-cache", metavar="DIR",
                   help="reuse pairwise distances stored in DIR, keyed by dataset content")
    _data_options(p)

    p = sub.add_parser("generate", help="simulate a dataset from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", "-o", required=True,
                   help="dataset path; the manifest goes to <output>.manifest")
    p.add_argument("--missing-token", default=DEFAULT_MISSING_TOKEN)

    p = sub.add_parser("benchmark", help="run a power analysis from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--replicates", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for replicates (default: %(default)s)")
    return parser


def format_ranked(w, names):
    rl = rank_features(w)
    lines = ["rank\tfeature\tweight"]
    for r, j in enumerate(rl.order, start=1):
        lines.append(f"{r}\t{names[j]}\t{rl.weights[j]:.10g}")
    return "\n".join(lines) + "\n"


def _load(args):
    return load_dataset(args.data, args.endpoint, args.missing_token)


def cmd_profile(args, out):
    data = _load(args)
    s = profile(data, args.discrete_cutoff)
    ek = s.endpoint_kind
    report = {
        "instances": data.n,
        "features": data.a,
        "has_missing": s.has_missing,
        "endpoint": {"name": data.endpoint_name, "kind": ek.kind},
        "feature_kinds": {name: fk.kind for name, fk in zip(data.feature_names,
                                                           s.feature_kinds)},
        "constant_features": [data.feature_names[j] for j in s.constant_features],
    }
    if ek.is_continuous:
        report["endpoint"]["sigma"] = ek.sigma
    else:
        report["endpoint"]["classes"] = {str(lab): c for lab, c in
                                         zip(ek.class_labels, ek.class_counts)}
    out.write(json.dumps(report, indent=2) + "\n")


def cmd_score(args, out):
    spec = parse_algorithm(args.algorithm)
    data = _load(args)
    norm, summary = prepare(data, args.discrete_cutoff)
    threads = args.threads if args.threads is not None else _default_threads()
    if threads < 1:
        raise UsageError("--threads must be >= 1")
    dm = None
    if args.distance_cache and isinstance(spec, NeighborSpec):
        dm = cached_pairwise_distances(norm, summary, args.distance_cache, threads)
    w = score_any(spec, norm, summary, dm, threads)
    text = format_ranked(w, data.feature_names)
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)


def cmd_generate(args, out):
    spec = simulate.load_spec(args.spec)
    sim = simulate.generate(spec, args.seed)
    path = sim.save(args.output, args.missing_token)
    out.write(f"wrote {path} and {simulate.manifest_path(path)}\n")


def cmd_benchmark(args, out):
    cfg = BenchmarkConfig.load(args.config, seed=args.seed)
    if args.replicates is not None:
        cfg.replicates = args.replicates
    cfg.threads = args.threads if args.threads is not None else _default_threads()
    cfg.jobs = args.jobs
    report = run_benchmark(cfg)
    tsv, summary = report.write(args.out_dir)
    out.write(f"wrote {tsv} and {summary}\n")


COMMANDS = {
    "profile": cmd_profile,
    "score": cmd_score,
    "generate": cmd_generate,
    "benchmark": cmd_benchmark,
}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"reliefbench: usage error: {exc}\n")
        return EXIT_USAGE
    except (DataError, ReliefBenchError, OSError) as exc:
        err.write(f"reliefbench: error: {exc}\n")
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        err.write(f"reliefbench: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
