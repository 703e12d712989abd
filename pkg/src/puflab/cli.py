"""Command line front end.

Subcommands::

    puflab generate      draw an instance and write a CRP dataset
    puflab attack        train and score a model on a saved dataset
    puflab sweep         attack one instance over a grid of sizes/splits
    puflab metrics       quality study over a population of instances
    puflab oracle-check  race simulation vs. its linear reduction

Every option can also come from a ``--config`` file of ``key = value`` lines
(``#`` starts a comment; keys may use dashes or underscores); explicit flags
win over the file, and unknown keys are rejected.  All randomness hangs off
the one ``--seed``, so a run with the same inputs produces byte-identical
outputs, and CSV artifacts start with comment lines echoing the options that
made them.

Exit codes: 0 success, 1 usage or parameter error, 2 unreadable or malformed
data, 3 oracle disagreement.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from .attack import AttackReport, attack_dataset
from .bits import HexFormatError, format_hex_word
from .core import (DelayParams, LinearModel, all_challenges, derive_seed,
                   eval_brute, eval_linear, random_challenges, sample_chain,
                   to_linear)
from .crp import DatasetError, generate_crps, load_crps, save_crps
from .features import FeatureKind
from .metrics import evaluate_quality

__all__ = ["main", "entry", "UsageError"]


class UsageError(Exception):
    """Bad command line, bad config file, or a bad parameter value."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we reserve 2 for data
        raise UsageError(message)


REQUIRED = object()


@dataclass(frozen=True)
class Opt:
    name: str          # --name on the command line; name with _ in config files
    parse: object
    default: object
    help: str

    @property
    def dest(self):
        return self.name.replace("-", "_")


def _pos_int(text):
    value = int(text)
    if value < 1:
        raise ValueError("must be >= 1")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise ValueError("must be >= 0")
    return value


def _float(text):
    return float(text)


def _pos_float(text):
    value = float(text)
    if value <= 0:
        raise ValueError("must be > 0")
    return value


def _nonneg_float(text):
    value = float(text)
    if value < 0:
        raise ValueError("must be >= 0")
    return value


def _fraction(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise ValueError("must be strictly between 0 and 1")
    return value


def _seed(text):
    value = int(text)
    if value < 0:
        raise ValueError("seeds must be non-negative")
    return value


def _features(text):
    try:
        return FeatureKind(str(text))
    except ValueError:
        raise ValueError("must be 'raw' or 'parity'") from None


def _path(text):
    if not str(text):
        raise ValueError("empty path")
    return str(text)


def _pos_int_list(text):
    items = [p.strip() for p in str(text).split(",") if p.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(_pos_int(p) for p in items)


def _fraction_list(text):
    items = [p.strip() for p in str(text).split(",") if p.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(_fraction(p) for p in items)


def _read_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    config = {}
    for lineno, raw in enumerate(raw_lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        config[key.strip().replace("-", "_")] = value.strip()
    return config


def _merge(args, opts, command):
    """Fold CLI values, config file values and defaults into one namespace."""
    config = _read_config(args.config) if args.config else {}
    known = {o.dest: o for o in opts}
    for key in config:
        if key not in known:
            raise UsageError(f"unknown config key {key!r} for '{command}'")
    merged = {}
    for opt in opts:
        raw = getattr(args, opt.dest)
        if raw is None:
            raw = config.get(opt.dest)
        if raw is None:
            if opt.default is REQUIRED:
                raise UsageError(f"missing required option --{opt.name}")
            merged[opt.dest] = opt.default
            continue
        if isinstance(raw, str):
            try:
                raw = opt.parse(raw)
            except ValueError as exc:
                raise UsageError(f"bad value for --{opt.name}: {exc}") from None
        merged[opt.dest] = raw
    return SimpleNamespace(**merged)


def _echo_lines(ns, opts, extra=(), skip=("out",)):
    """Comment lines restating the options a run used, for self-describing files."""
    lines = [f"# {key}={value}" for key, value in extra]
    for opt in opts:
        if opt.dest in skip:
            continue
        value = getattr(ns, opt.dest)
        if value is None:
            value = "-"
        elif isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"# {opt.dest}={value}")
    return lines


def _write_text(path, lines):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# generate

GENERATE_OPTS = (
    Opt("n", _pos_int, REQUIRED, "challenge bits (stages per chain)"),
    Opt("chains", _pos_int, 1, "parallel chains = response bits"),
    Opt("count", _pos_int, REQUIRED, "number of CRPs to draw"),
    Opt("seed", _seed, None, "master seed; omit for a throwaway instance"),
    Opt("noise-sigma", _nonneg_float, 0.0,
        "std-dev of measurement noise on the delay difference"),
    Opt("delay-mean", _float, 10.0, "mean of the per-path delay distribution"),
    Opt("delay-sigma", _pos_float, 0.5,
        "std-dev of the per-path delay distribution"),
    Opt("out", _path, REQUIRED, "output dataset path"),
)


def cmd_generate(ns) -> int:
    params = DelayParams(ns.delay_mean, ns.delay_sigma)
    crps = generate_crps(ns.n, ns.count, width=ns.chains, seed=ns.seed,
                         params=params, noise_sigma=ns.noise_sigma)
    save_crps(ns.out, crps)
    seed_txt = "-" if ns.seed is None else ns.seed
    print(f"wrote {ns.out}: {len(crps)} rows, "
          f"challenge_bits={crps.challenge_bits} "
          f"response_bits={crps.response_bits}, seed={seed_txt}")
    return 0


# ---------------------------------------------------------------------------
# attack

ATTACK_OPTS = (
    Opt("features", _features, FeatureKind.PARITY,
        "challenge encoding: 'parity' or 'raw'"),
    Opt("test", _fraction, 0.15, "held-out fraction of the rows"),
    Opt("lr", _pos_float, 0.05, "gradient-descent step size"),
    Opt("epochs", _pos_int, 500, "maximum training passes"),
    Opt("l2", _nonneg_float, 0.0, "ridge penalty (bias excluded)"),
    Opt("tol", _nonneg_float, 1e-7,
        "stop once an epoch improves the loss less than this"),
    Opt("seed", _seed, None, "seed for the train/test split"),
    Opt("out", _path, None, "also write the CSV report to this path"),
)


def cmd_attack(ns) -> int:
    crps = load_crps(ns.dataset)
    report = attack_dataset(crps, test_fraction=ns.test, feature=ns.features,
                            lr=ns.lr, epochs=ns.epochs, l2=ns.l2, tol=ns.tol,
                            seed=ns.seed)
    lines = _echo_lines(ns, ATTACK_OPTS, extra=[("dataset", ns.dataset)])
    lines += [AttackReport.CSV_HEADER, report.csv_row()]
    for line in lines:
        print(line)
    if len(report.per_bit_rate) > 1:
        print(f"per-bit rate: min {min(report.per_bit_rate):.4f} "
              f"max {max(report.per_bit_rate):.4f}")
    if ns.out:
        _write_text(ns.out, lines)
    return 0


# ---------------------------------------------------------------------------
# sweep

SWEEP_OPTS = (
    Opt("n", _pos_int, REQUIRED, "challenge bits (stages per chain)"),
    Opt("chains", _pos_int, 1, "parallel chains = response bits"),
    Opt("counts", _pos_int_list, (750, 1650, 2850, 4920),
        "comma list of dataset sizes; prefixes of one drawn dataset"),
    Opt("fractions", _fraction_list, (0.15, 0.25, 0.35),
        "comma list of held-out fractions"),
    Opt("features", _features, FeatureKind.PARITY,
        "challenge encoding: 'parity' or 'raw'"),
    Opt("seed", _seed, None, "master seed for instance, data and splits"),
    Opt("noise-sigma", _nonneg_float, 0.0,
        "std-dev of measurement noise on the delay difference"),
    Opt("delay-mean", _float, 10.0, "mean of the per-path delay distribution"),
    Opt("delay-sigma", _pos_float, 0.5,
        "std-dev of the per-path delay distribution"),
    Opt("lr", _pos_float, 0.05, "gradient-descent step size"),
    Opt("epochs", _pos_int, 500, "maximum training passes"),
    Opt("l2", _nonneg_float, 0.0, "ridge penalty (bias excluded)"),
    Opt("tol", _nonneg_float, 1e-7,
        "stop once an epoch improves the loss less than this"),
    Opt("out", _path, None, "also write the CSV table to this path"),
)


def cmd_sweep(ns) -> int:
    params = DelayParams(ns.delay_mean, ns.delay_sigma)
    full = generate_crps(ns.n, max(ns.counts), width=ns.chains, seed=ns.seed,
                         params=params, noise_sigma=ns.noise_sigma)
    lines = _echo_lines(ns, SWEEP_OPTS)
    lines.append(AttackReport.CSV_HEADER)
    grid = []
    for i, count in enumerate(ns.counts):
        subset = full.subset(np.arange(count))
        row = []
        for j, fraction in enumerate(ns.fractions):
            report = attack_dataset(subset, test_fraction=fraction,
                                    feature=ns.features, lr=ns.lr,
                                    epochs=ns.epochs, l2=ns.l2, tol=ns.tol,
                                    seed=derive_seed(ns.seed, 3, i, j))
            lines.append(report.csv_row())
            row.append(report.mean_rate)
        grid.append(row)
    for line in lines:
        print(line)
    # column-aligned mean_rate table: counts down, fractions across
    cells = [["crps"] + [f"{f:g}" for f in ns.fractions]]
    for count, row in zip(ns.counts, grid):
        cells.append([str(count)] + [f"{r:.4f}" for r in row])
    widths = [max(len(row[c]) for row in cells) for c in range(len(cells[0]))]
    for row in cells:
        print("  ".join(v.rjust(w) for v, w in zip(row, widths)))
    print(f"mean rate over {sum(len(r) for r in grid)} cells: "
          f"{np.mean([v for r in grid for v in r]):.4f}")
    if ns.out:
        _write_text(ns.out, lines)
    return 0


# ---------------------------------------------------------------------------
# metrics

METRICS_OPTS = (
    Opt("n", _pos_int, REQUIRED, "challenge bits (stages per chain)"),
    Opt("chains", _pos_int, 1, "parallel chains = response bits"),
    Opt("instances", _pos_int, 50, "population size"),
    Opt("challenges", _pos_int, 1000, "challenges per instance"),
    Opt("repeats", _pos_int, 5, "noisy re-measurements per instance"),
    Opt("noise-sigma", _nonneg_float, 0.0,
        "std-dev of measurement noise on the delay difference"),
    Opt("delay-mean", _float, 10.0, "mean of the per-path delay distribution"),
    Opt("delay-sigma", _pos_float, 0.5,
        "std-dev of the per-path delay distribution"),
    Opt("seed", _seed, None, "master seed for the study"),
    Opt("out", _path, None, "also write the report to this path"),
)


def cmd_metrics(ns) -> int:
    params = DelayParams(ns.delay_mean, ns.delay_sigma)
    report = evaluate_quality(ns.n, ns.instances, ns.challenges,
                              width=ns.chains, repeats=ns.repeats,
                              noise_sigma=ns.noise_sigma, seed=ns.seed,
                              params=params)
    for line in report.lines():
        print(line)
    if ns.out:
        _write_text(ns.out, report.lines())
    return 0


# ---------------------------------------------------------------------------
# oracle-check

ORACLE_OPTS = (
    Opt("n", _pos_int, None,
        "check a single stage count (exhaustive up to 16, else randomised)"),
    Opt("chains", _pos_int, 5, "chains sampled per stage count"),
    Opt("random-width", _pos_int, 64, "stage count for the randomised pass"),
    Opt("random-count", _nonneg_int, 1000,
        "random challenges in the randomised pass (0 disables)"),
    Opt("seed", _seed, 0, "seed for sampled chains and challenges"),
)


def cmd_oracle_check(ns) -> int:
    mismatches = 0
    checks = 0

    def run_pass(n, challenges, label):
        nonlocal mismatches, checks
        bad = 0
        for idx in range(ns.chains):
            chain_seed = derive_seed(ns.seed, 0, n, idx)
            chain = sample_chain(n, seed=chain_seed)
            model = to_linear(chain)
            if getattr(ns, "corrupt", False):
                model = LinearModel(-model.weights)
            disagree = eval_brute(chain, challenges) != eval_linear(model, challenges)
            bad += int(np.count_nonzero(disagree))
            for c_idx in np.flatnonzero(disagree)[:3]:
                print(f"mismatch: n={n} chain_seed={chain_seed} "
                      f"challenge={format_hex_word(challenges[c_idx])}")
        mismatches += bad
        checks += ns.chains * len(challenges)
        print(f"n={n}: {ns.chains} chains x {len(challenges)} {label}, "
              f"{bad} disagreements")

    if ns.n is not None:
        if ns.n <= 16:
            run_pass(ns.n, all_challenges(ns.n), "challenges (exhaustive)")
        else:
            count = max(1, ns.random_count)
            run_pass(ns.n, random_challenges(count, ns.n,
                                             seed=derive_seed(ns.seed, 1)),
                     "challenges (random)")
    else:
        for n in range(1, 13):
            run_pass(n, all_challenges(n), "challenges (exhaustive)")
        if ns.random_count:
            run_pass(ns.random_width,
                     random_challenges(ns.random_count, ns.random_width,
                                       seed=derive_seed(ns.seed, 1)),
                     "challenges (random)")

    print(f"{mismatches} mismatches / {checks} checks")
    return 3 if mismatches else 0


# ---------------------------------------------------------------------------
# wiring

COMMANDS = {
    "generate": (GENERATE_OPTS, cmd_generate,
                 "draw an instance and write a CRP dataset"),
    "attack": (ATTACK_OPTS, cmd_attack,
               "train and score a model on a saved dataset"),
    "sweep": (SWEEP_OPTS, cmd_sweep,
              "attack one instance over a grid of sizes and splits"),
    "metrics": (METRICS_OPTS, cmd_metrics,
                "quality study over a population of instances"),
    "oracle-check": (ORACLE_OPTS, cmd_oracle_check,
                     "compare the race simulation against its linear reduction"),
}


def _build_parser():
    parser = _Parser(prog="puflab",
                     description="arbiter-chain simulation and attack toolkit")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, (opts, func, blurb) in COMMANDS.items():
        p = sub.add_parser(name, help=blurb, description=blurb)
        p.add_argument("--config", default=None, metavar="FILE",
                       help="read option defaults from a 'key = value' file")
        if name == "attack":
            p.add_argument("dataset", help="dataset to attack (puf-crp v1 file)")
        for opt in opts:
            if opt.default is REQUIRED:
                suffix = " (required)"
            elif opt.default is None:
                suffix = ""
            elif isinstance(opt.default, tuple):
                suffix = " (default " + ",".join(str(v) for v in opt.default) + ")"
            else:
                suffix = f" (default {opt.default})"
            flags = ["-o", "--out"] if opt.name == "out" else [f"--{opt.name}"]
            p.add_argument(*flags, dest=opt.dest, default=None, metavar="V",
                           help=opt.help + suffix)
        if name == "oracle-check":
            p.add_argument("--corrupt", action="store_true",
                           help=argparse.SUPPRESS)
        p.set_defaults(_opts=opts, _func=func, _command=name)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "_func", None) is None:
            parser.print_help(sys.stderr)
            return 1
        merged = _merge(args, args._opts, args._command)
        if args._command == "attack":
            merged.dataset = args.dataset
        if args._command == "oracle-check":
            merged.corrupt = args.corrupt
        return args._func(merged)
    except UsageError as exc:
        print(f"puflab: error: {exc}", file=sys.stderr)
        return 1
    except (DatasetError, HexFormatError) as exc:
        print(f"puflab: data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"puflab: data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"puflab: error: {exc}", file=sys.stderr)
        return 1


def entry():
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
