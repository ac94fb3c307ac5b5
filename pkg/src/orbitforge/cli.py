"""Command line front end: ``orbit-forge <subcommand>``.

Symbols in label files are arbitrary tokens, one per line, and index
coupling matrices in sorted order; permutations and line bijections are one
0-based image per line.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .freegroup import FiniteAction, parse_word
from .pipeline import (
    ConfigError,
    parse_config,
    read_coupling_csv,
    read_labels,
    read_permutation,
    run_experiment,
    write_permutation,
)
from .rearrange import PreconditionError, rearrange_line
from .rewire import rewire
from .spaces import (
    Observable,
    diagonal_coupling,
    empirical_distribution,
    joint_pair_distribution,
    mixture_coupling,
)
from .weak import stats_matrix


def _cmd_pipeline(args) -> int:
    try:
        config = parse_config(Path(args.config).read_text())
    except (OSError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    result = run_experiment(config)
    if not config.out_csv:
        sys.stdout.write(result.csv_text)
    if not config.out_json:
        sys.stdout.write(result.json_text)
    return 0 if result.all_bounds_held else 1


def _write_or_print(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_lemma_rearrange(args) -> int:
    phi, _ = read_labels(args.labels)
    j = read_coupling_csv(args.coupling)
    try:
        sigma, report = rearrange_line(phi, j, args.eps, check=not args.no_check)
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return 2
    if args.out_sigma:
        write_permutation(args.out_sigma, sigma.sigma)
    else:
        sys.stdout.write("\n".join(str(int(v)) for v in sigma.sigma) + "\n")
    payload = {"schema_version": 1, **asdict(report)}
    _write_or_print(args.out_report, json.dumps(payload, sort_keys=True) + "\n")
    return 0


def _cmd_rewire(args) -> int:
    t = read_permutation(args.perm)
    psi, _ = read_labels(args.labels)
    j = read_coupling_csv(args.coupling)
    try:
        t_new, report = rewire(t, psi, j, args.eps, check=not args.no_check)
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return 2
    if args.out_perm:
        write_permutation(args.out_perm, t_new)
    else:
        sys.stdout.write("\n".join(str(int(v)) for v in t_new) + "\n")
    payload = {"schema_version": 1, **asdict(report)}
    payload["per_cycle"] = [list(row.values()) for row in payload["per_cycle"]]
    _write_or_print(args.out_report, json.dumps(payload, sort_keys=True) + "\n")
    return 0


def _cmd_stats(args) -> int:
    perms = np.vstack([read_permutation(p) for p in args.perm])
    action = FiniteAction.from_perms(perms)
    p, _ = read_labels(args.labels)
    word = parse_word(args.word, action.rank)
    stats = stats_matrix(action, p, word)
    for i in range(p.alphabet_size):
        for jx in range(p.alphabet_size):
            value = float(stats.counts[i, jx] / stats.denom)
            sys.stdout.write(f"{i},{jx},{value!r}\n")
    return 0


def _cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    sys.stdout.write("op,n,seconds\n")
    for n in (10_000, 100_000, 1_000_000):
        phi = Observable(rng.integers(0, 2, size=n), 2)
        pi = empirical_distribution(phi)
        j = mixture_coupling(diagonal_coupling(pi), 0.8, pi)
        start = time.perf_counter()
        rearrange_line(phi, j, 0.02)
        sys.stdout.write(f"rearrange_line,{n},{time.perf_counter() - start:.4f}\n")
    n = 100_000
    t = rng.permutation(n)
    psi = Observable(rng.integers(0, 2, size=n), 2)
    pi = empirical_distribution(psi)
    j = mixture_coupling(joint_pair_distribution(psi, t), 0.2, pi)
    start = time.perf_counter()
    rewire(t, psi, j, 0.02)
    sys.stdout.write(f"rewire,{n},{time.perf_counter() - start:.4f}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orbit-forge")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pipeline", help="run a config-driven experiment schedule")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser(
        "lemma-rearrange", help="rearrange labels into a line matching a coupling"
    )
    p.add_argument("--labels", required=True)
    p.add_argument("--coupling", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out-sigma")
    p.add_argument("--out-report")
    p.add_argument("--no-check", action="store_true")
    p.set_defaults(func=_cmd_lemma_rearrange)

    p = sub.add_parser("rewire", help="rewire a permutation within its cycles")
    p.add_argument("--perm", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--coupling", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out-perm")
    p.add_argument("--out-report")
    p.add_argument("--no-check", action="store_true")
    p.set_defaults(func=_cmd_rewire)

    p = sub.add_parser("stats", help="print intersection statistics as CSV")
    p.add_argument("--perm", action="append", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--word", required=True)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("bench", help="time the core operations on seeded inputs")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
