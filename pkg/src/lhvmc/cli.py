"""Command-line interface: ``lhvmc verify | run | sweep | plot``.

Exit status: 0 success, 1 verification failure, 2 usage or input-format
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import contextlib
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .estimators import (
    DEFAULT_TRIALS,
    ModelParams,
    detection_census,
    make_grid,
    run_sweep,
    run_sweep_point,
)
from .operators import (
    ATOL,
    SIGN_TRIPLES,
    build_magic_square,
    is_projector,
    joint_projector,
    max_abs,
)
from .oracle import ideal_term_values, ideal_witnesses
from .records import RecordError, read_csv, write_csv, write_json
from .svg import render_sweep
from .terms import ALL_TERMS

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

DEFAULT_SEED = 2024


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    s: float = 2.1
    s_min: float = 0.25
    s_max: float = 7.0
    s_step: float = 0.25
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    out_path: str | None = None
    in_path: str | None = None
    format: str = "csv"
    threads: int = 1

    def validate(self) -> "RunConfig":
        if self.trials < 1:
            raise UsageError("--trials must be at least 1")
        if self.threads < 1:
            raise UsageError("--threads must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        if self.command == "run" and self.s < 0:
            raise UsageError("--s must be nonnegative")
        if self.command == "sweep":
            if self.s_step <= 0:
                raise UsageError("--s-step must be positive")
            if self.s_min > self.s_max:
                raise UsageError("--s-min must not exceed --s-max")
            if self.s_min < 0:
                raise UsageError("--s-min must be nonnegative")
        if self.command == "plot" and (not self.in_path or not self.out_path):
            raise UsageError("plot requires --in and --out")
        return self


_CASTS = {"s": float, "s_min": float, "s_max": float, "s_step": float,
          "trials": int, "seed": int, "threads": int,
          "out_path": str, "in_path": str, "format": str}
_CONFIG_ALIASES = {"out": "out_path", "in": "in_path"}


def load_config_file(path: str) -> dict:
    """Read ``key = value`` pairs; an optional ``[lhvmc]`` section header is allowed."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config file {path}: {exc.strerror}") from exc
    parser = configparser.ConfigParser()
    try:
        if not text.lstrip().startswith("["):
            text = "[lhvmc]\n" + text
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise UsageError(f"malformed config file {path}: {exc}") from None
    out = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            name = _CONFIG_ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
            if name not in _CASTS:
                raise UsageError(f"unknown config key {key!r} in {path}")
            try:
                out[name] = _CASTS[name](raw)
            except ValueError:
                raise UsageError(f"bad value {raw!r} for {key} in {path}") from None
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides defaults."""
    values = load_config_file(args.config) if getattr(args, "config", None) else {}
    for name in _CASTS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return RunConfig(command=args.command, **values).validate()


# -- verify -------------------------------------------------------------------


def verification_checks(theorem_trials: int = 100_000, seed: int = DEFAULT_SEED):
    """Yield ``(name, passed, detail)`` for every exact identity and invariant."""
    sq = build_magic_square()
    o = sq.observable
    eye = np.eye(4)

    def close(x, y):
        return max_abs(np.asarray(x) - np.asarray(y)) <= ATOL

    products = [
        ("AB = C", o("A").matrix @ o("B").matrix, o("C").matrix),
        ("ab = c", o("a").matrix @ o("b").matrix, o("c").matrix),
        ("Aa = α", o("A").matrix @ o("a").matrix, o("α").matrix),
        ("Bb = β", o("B").matrix @ o("b").matrix, o("β").matrix),
        ("αβ = γ", o("α").matrix @ o("β").matrix, o("γ").matrix),
        ("Cc = -γ", o("C").matrix @ o("c").matrix, -o("γ").matrix),
    ]
    for name, lhs, rhs in products:
        yield name, close(lhs, rhs), f"max deviation {max_abs(lhs - rhs):.1e}"

    worst = 0.0
    for line in sq.lines():
        for x in line:
            for y in line:
                worst = max(worst, max_abs(x.matrix @ y.matrix - y.matrix @ x.matrix))
    yield "rows and columns commute", worst <= ATOL, f"max commutator {worst:.1e}"

    ok = all(
        close(x.matrix @ x.matrix, eye)
        and is_projector(x.proj_plus)
        and is_projector(x.proj_minus)
        and close(x.proj_plus + x.proj_minus, eye)
        and close(x.proj_plus @ x.proj_minus, 0)
        for x in sq.observables
    )
    yield "observables dichotomic with complementary projectors", ok, ""

    for ctx in sq.contexts:
        projs = {st: joint_projector(ctx, st) for st in SIGN_TRIPLES}
        orth = all(
            close(projs[a] @ projs[b], 0) for a in SIGN_TRIPLES for b in SIGN_TRIPLES if a != b
        )
        complete = close(sum(projs.values()), eye)
        idem = all(is_projector(p) for p in projs.values())
        wrong = [st for st in SIGN_TRIPLES if int(np.prod(st)) != ctx.parity]
        vanish = all(close(projs[st], 0) for st in wrong)
        right = sum(projs[st] for st in SIGN_TRIPLES if int(np.prod(st)) == ctx.parity)
        yield (
            f"joint projectors of {ctx.label} (parity {ctx.parity:+d})",
            orth and complete and idem and vanish and close(right, eye),
            "",
        )

    chi, s_val, omega = ideal_witnesses()
    yield "ideal chi = 6", abs(chi - 6) <= ATOL, f"chi = {chi:.1f}"
    yield "ideal S = 12", abs(s_val - 12) <= ATOL, f"S = {s_val:.1f}"
    yield "ideal omega = 18", abs(omega - 18) <= ATOL, f"omega = {omega:.1f}"
    values = ideal_term_values()
    expected = {t.label: float(t.sign) for t in ALL_TERMS if t.kind == "correlation"}
    bad = [k for k, v in expected.items() if abs(values[k] - v) > ATOL]
    yield "ideal S-term values", not bad, ", ".join(bad)

    alice_multi, bob_multi = detection_census(1.0, seed, theorem_trials)
    total = sum(alice_multi.values()) + sum(bob_multi.values())
    yield (
        f"no multi-detections at s = 1 ({theorem_trials} trials)",
        total == 0,
        f"{total} multi-detections",
    )


def cmd_verify(out=None) -> int:
    out = out or sys.stdout
    failed = 0
    for name, ok, detail in verification_checks():
        failed += not ok
        tail = f"  ({detail})" if detail else ""
        print(f"{'PASS' if ok else 'FAIL'}  {name}{tail}", file=out)
    print(f"{'all checks passed' if not failed else f'{failed} check(s) failed'}", file=out)
    return EXIT_OK if not failed else EXIT_VERIFY


# -- run / sweep / plot -------------------------------------------------------


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    with fh:
        yield fh


def cmd_run(cfg: RunConfig) -> int:
    point = run_sweep_point(ModelParams(cfg.s, cfg.seed, cfg.trials), threads=cfg.threads)
    with _output(cfg.out_path) as fh:
        if cfg.format == "json":
            write_json([point], fh, single=True)
        else:
            write_csv([point], fh)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    grid = make_grid(cfg.s_min, cfg.s_max, cfg.s_step)
    points = run_sweep(cfg.seed, cfg.trials, grid, threads=cfg.threads)
    with _output(cfg.out_path) as fh:
        if cfg.format == "json":
            write_json(points, fh)
        else:
            write_csv(points, fh)
    return EXIT_OK


def cmd_plot(cfg: RunConfig) -> int:
    try:
        with open(cfg.in_path, newline="", encoding="utf-8") as fh:
            rows = read_csv(fh)
    except OSError as exc:
        raise OSError(f"cannot read {cfg.in_path}: {exc.strerror}") from exc
    svg = render_sweep(rows)
    with _output(cfg.out_path) as fh:
        fh.write(svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="maximum worker threads (output does not depend on it)")
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="key = value config file; flags take precedence")

    p = argparse.ArgumentParser(
        prog="lhvmc",
        description="Threshold-detection hidden-variable simulation of a magic-square Bell test.",
        parents=[common],
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("verify", parents=[common], help="check exact identities and invariants")

    def sim_options(sp):
        sp.add_argument("--trials", type=int, help=f"ensemble size (default {DEFAULT_TRIALS})")
        sp.add_argument("--seed", type=int, help=f"master seed (default {DEFAULT_SEED})")
        sp.add_argument("--out", dest="out_path", help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"))

    run = sub.add_parser("run", parents=[common], help="estimate every term at one value of s")
    run.add_argument("--s", type=float, help="scale factor (default 2.1)")
    sim_options(run)

    sweep = sub.add_parser("sweep", parents=[common], help="estimate over a grid of s values")
    sweep.add_argument("--s-min", dest="s_min", type=float)
    sweep.add_argument("--s-max", dest="s_max", type=float)
    sweep.add_argument("--s-step", dest="s_step", type=float)
    sim_options(sweep)

    plot = sub.add_parser("plot", parents=[common], help="render a sweep CSV as SVG")
    plot.add_argument("--in", dest="in_path", required=True)
    plot.add_argument("--out", dest="out_path", required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify()
        cfg = resolve_config(args)
        return {"run": cmd_run, "sweep": cmd_sweep, "plot": cmd_plot}[args.command](cfg)
    except (UsageError, ValueError) as exc:
        if isinstance(exc, RecordError):
            print(f"lhvmc: {args.in_path}: {exc}", file=sys.stderr)
        else:
            print(f"lhvmc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"lhvmc: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
