"""Command-line driver: ``lstab <subcommand> ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 failure of an external ranking process.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .core import load_dataset, rank_dataset
from .dense import detect_dense_region
from .engine import EngineConfig, lstability
from .errors import ConfigError, DataError, LStabError, RankingError
from .fixtures import fixture_sources
from .geometry import ReasonableChanges
from .oracle import global_stability_2d, grid_stability
from .problem import load_problem, read_header, parse_rc
from .reporting import csv_text, dumps
from .sampling import substream
from .synthetic import SynthConfig, generate_dense_dataset, synth_config_dict, write_synthetic

SEED_ENV = "LSTAB_SEED"
FIXTURE_PREFIX = "fixture:"

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RANKER = 0, 1, 2, 3

SWEEP_COLUMNS = [
    "tuple_id",
    "k",
    "estimate",
    "alpha",
    "converged",
    "iterations_used",
    "verification_skipped",
    "construction_samples",
    "verification_samples",
    "scale_factor",
]


class UsageError(Exception):
    def __init__(self, message: str, usage: str):
        super().__init__(message)
        self.usage = usage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self.format_usage())


# --- input resolution -------------------------------------------------------


def _fixture(ref: str):
    name = ref[len(FIXTURE_PREFIX):]
    try:
        return fixture_sources(name)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None


def _read_bytes(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _resolve_inputs(args, need_func: bool = True):
    """Return ``(raw_csv, func_text_or_None, id_column, fixture_rc_or_None)``."""
    func, rc = None, None
    id_column = args.id_column
    if args.data.startswith(FIXTURE_PREFIX):
        raw, func, fid, rc = _fixture(args.data)
        id_column = id_column or fid
    else:
        raw = _read_bytes(args.data)
    if getattr(args, "func", None):
        if args.func.startswith(FIXTURE_PREFIX):
            func = _fixture(args.func)[1]
        else:
            func = args.func
    if need_func and func is None:
        raise ConfigError("--func is required unless --data names a fixture")
    return raw, func, id_column, rc


def _attrs(args):
    return [a.strip() for a in args.attributes.split(",")] if args.attributes else None


def _problem(args):
    raw, func, id_column, fixture_rc = _resolve_inputs(args)
    d, spec = load_problem(raw, func, id_column, _attrs(args))
    return d, spec, fixture_rc


def _rc(args, d, fixture_rc) -> ReasonableChanges:
    if args.rc:
        return parse_rc(args.rc, d)
    if fixture_rc is not None:
        return ReasonableChanges([fixture_rc.get(a, 0.0) for a in d.schema.names])
    raise ConfigError("--rc is required (attr=value,... or pct=P)")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _engine_config(args, k: int, rc: ReasonableChanges) -> EngineConfig:
    return EngineConfig(
        k=k,
        rc=rc,
        construction_samples_per_iter=args.per_iter,
        max_iterations=args.iters,
        eta=args.eta,
        delta=args.delta,
        alpha_target=args.alpha,
        tau_v=args.tau_v,
        volume_samples=args.volume_samples,
        rejection_max_tries=args.max_tries,
        seed=_seed(args),
        rc_reduction=not args.no_reduce_rc,
        fast_rerank=not args.no_fast_rerank,
        budget_mode=args.budget,
        workers=args.workers,
    )


def _emit(args, text: str):
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- subcommands --------------------------------------------------------------


def cmd_rank(args) -> int:
    d, spec, _ = _problem(args)
    ranking = rank_dataset(spec, d)
    label_cols = sorted({c for lab in d.labels.values() for c in lab})
    rows = []
    for pos, tid in enumerate(ranking.order, start=1):
        lab = d.labels.get(tid, {})
        score = ranking.scores[tid] if ranking.scores is not None else None
        rows.append([pos, tid, *(lab.get(c, "") for c in label_cols), score])
    _emit(args, csv_text(["position", "id", *label_cols, "score"], rows))
    return EXIT_OK


def cmd_stability(args) -> int:
    d, spec, frc = _problem(args)
    cfg = _engine_config(args, args.k, _rc(args, d, frc))
    _emit(args, dumps(lstability(spec, d, args.tuple, cfg).to_dict()))
    return EXIT_OK


def cmd_sweep_k(args) -> int:
    d, spec, frc = _problem(args)
    rc = _rc(args, d, frc)
    if args.k_max < args.k_min:
        raise ConfigError("--k-max must be at least --k-min")
    reports = [lstability(spec, d, args.tuple, _engine_config(args, k, rc)) for k in range(args.k_min, args.k_max + 1)]
    if args.json:
        _emit(args, dumps([r.to_dict() for r in reports]))
    else:
        rows = []
        for r in reports:
            row = r.to_dict()
            rows.append([row[c] for c in SWEEP_COLUMNS])
        _emit(args, csv_text(SWEEP_COLUMNS, rows))
    return EXIT_OK


def cmd_dense_region(args) -> int:
    d, spec, frc = _problem(args)
    rc = _rc(args, d, frc)
    seed = _seed(args)
    rep = detect_dense_region(spec, d, args.tuple, rc, args.samples, rng=substream(seed, "dense"), seed=seed)
    _emit(args, dumps(rep.to_dict()))
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        n_tuples=args.n,
        n_attrs=args.dims,
        margin=args.margin,
        region_min=args.region_min,
        region_max=args.region_max,
        noise_sigma=args.noise,
        seed=_seed(args),
    )
    data = generate_dense_dataset(cfg)
    csv_path, truth_path = write_synthetic(data, args.out)
    func_path = f"{args.out}.func.json"
    with open(func_path, "w", encoding="utf-8") as fh:
        fh.write(dumps(data.spec.to_dict()))
    summary = {
        "data": csv_path,
        "truth": truth_path,
        "func": func_path,
        "rc": ",".join(f"{a}={w!r}" for a, w in zip(data.dataset.schema.names, data.rc.to_list())),
        "tuples": len(data.dataset),
        "regions": len(data.region_scores),
        "contiguous": data.contiguous,
        "config": synth_config_dict(cfg),
    }
    sys.stdout.write(dumps(summary))
    return EXIT_OK


def cmd_global_stability(args) -> int:
    raw, _, id_column, _ = _resolve_inputs(args, need_func=False)
    if id_column is None:
        header = read_header(raw) or ["id"]
        id_column = "id" if "id" in header else header[0]
    d = load_dataset(raw, id_column, _attrs(args))
    seed = _seed(args)
    value = global_stability_2d(d, args.samples, substream(seed, "global"))
    _emit(args, dumps({"global_stability": value, "samples": args.samples, "tuples": len(d), "seed": seed}))
    return EXIT_OK


def cmd_oracle(args) -> int:
    d, spec, frc = _problem(args)
    rc = _rc(args, d, frc)
    value, sb = grid_stability(spec, d, args.tuple, args.k, rc, args.grid, return_details=True)
    out = {
        "tuple_id": args.tuple,
        "k": args.k,
        "grid_points_per_dim": args.grid,
        "stability": value,
        "rc": rc.to_list(),
        "boundary": sb.to_list(),
    }
    _emit(args, dumps(out))
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def _data_args(p, func: bool = True):
    p.add_argument("--data", required=True, help="CSV file or fixture:NAME (universities, csrankings)")
    if func:
        p.add_argument("--func", help="ranking spec: JSON file, inline JSON, or fixture:NAME")
    p.add_argument("--id-column", help="id column (default: 'id' if present, else the first column)")
    p.add_argument("--attributes", help="comma-separated attribute columns")


def _seed_arg(p):
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")


def _engine_args(p):
    p.add_argument("--tuple", required=True, help="id of the tuple to analyse")
    p.add_argument("--rc", help="attr=value,... or pct=P (fixtures have defaults)")
    p.add_argument("--eta", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=0.05, help="target alpha for the bounded-alpha loop")
    p.add_argument("--tau-v", type=float, default=0.05)
    p.add_argument("--iters", type=int, default=20, help="maximum construction/verification iterations")
    p.add_argument("--per-iter", type=int, default=20_000, help="construction samples per iteration")
    p.add_argument("--budget", choices=("fixed", "apportioned"), default="fixed")
    p.add_argument("--volume-samples", type=int, default=100_000)
    p.add_argument("--max-tries", type=int, default=1000, help="consecutive rejections before giving up")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-reduce-rc", action="store_true")
    p.add_argument("--no-fast-rerank", action="store_true")
    _seed_arg(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lstab", description="Local stability of items in a ranking.")
    parser.add_argument("--version", action="version", version=f"lstab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("rank", help="rank a dataset (CSV)")
    _data_args(p)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_rank)

    p = sub.add_parser("stability", help="estimate local stability of one tuple (JSON)")
    _data_args(p)
    _engine_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_stability)

    p = sub.add_parser("sweep-k", help="stability for k = k-min..k-max (CSV, or JSON with --json)")
    _data_args(p)
    _engine_args(p)
    p.add_argument("--k-min", type=int, default=0)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_sweep_k)

    p = sub.add_parser("dense-region", help="suggest k spanning a tuple's dense region (JSON)")
    _data_args(p)
    p.add_argument("--tuple", required=True)
    p.add_argument("--rc")
    p.add_argument("--samples", type=int, default=20_000)
    _seed_arg(p)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_dense_region)

    p = sub.add_parser("synth", help="generate a synthetic dense-region dataset")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--margin", type=float, default=10.0)
    p.add_argument("--region-min", type=int, default=2)
    p.add_argument("--region-max", type=int, default=6)
    p.add_argument("--noise", type=float, default=None, help="Gaussian sigma (default margin/20)")
    _seed_arg(p)
    p.add_argument("--out", required=True, help="output prefix; writes PREFIX.csv, PREFIX.truth.json, PREFIX.func.json")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("global-stability", help="weight-space stability of a 2-attribute ranking (JSON)")
    _data_args(p, func=False)
    p.add_argument("--samples", type=int, default=500_000)
    _seed_arg(p)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_global_stability)

    p = sub.add_parser("oracle", help="grid-enumeration stability for n <= 3 (JSON)")
    _data_args(p)
    p.add_argument("--tuple", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rc")
    p.add_argument("--grid", type=int, default=201, help="grid points per dimension")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_oracle)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required", parser.format_usage())
        return args.fn(args)
    except UsageError as exc:
        sys.stderr.write(exc.usage)
        sys.stderr.write(f"lstab: error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except RankingError as exc:
        sys.stderr.write(f"lstab: ranking process failed: {exc}\n")
        return EXIT_RANKER
    except DataError as exc:
        sys.stderr.write(f"lstab: data error: {exc}\n")
        return EXIT_DATA
    except (ConfigError, LStabError) as exc:
        sys.stderr.write(f"lstab: error: {exc}\n")
        return EXIT_USAGE


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
