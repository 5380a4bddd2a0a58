"""Command-line entry point: ``qocolab {run,trials,gradcheck,calibrate}``.

Exit codes: 0 success, 2 configuration error, 3 runtime error (a query left
the loss domain or the memory guard tripped), 4 calibration failure.
Diagnostics go to stderr; the machine-readable summary goes to stdout.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness.config import ConfigError, load_config
from .harness.io import atomic_write, format_summary, transcript_to_csv
from .harness.trials import gradcheck, run_one, run_summary, run_trials, trials_summary
from .losses import DomainError
from .ogd import MODES
from .qgrad import MemoryGuardError, TRANSFORM_SIGN, calibrate

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_CALIBRATION = 0, 2, 3, 4
SMOOTH_FAMILIES = ("linear", "quadratic", "constant")


def _err(msg: str) -> None:
    print(f"qocolab: {msg}", file=sys.stderr)


def _load(args):
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, mode=args.mode, memory_guard=args.memory_guard)


def cmd_run(args) -> int:
    cfg = _load(args)
    tr, rep = run_one(cfg)
    out = Path(args.out_dir)
    summary = run_summary(tr, rep)
    atomic_write(out / "transcript.csv", transcript_to_csv(tr))
    atomic_write(out / "summary.txt", summary)
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_trials(args) -> int:
    cfg = _load(args)
    num = args.num if args.num is not None else cfg.trials
    rep = run_trials(cfg, num, args.seed if args.seed is not None else cfg.seed, out_dir=args.out_dir)
    sys.stdout.write(trials_summary(rep))
    for seed, msg in sorted(rep.failures.items()):
        _err(f"trial with seed {seed} failed: {msg}")
    return EXIT_OK if not rep.failures else EXIT_RUNTIME


def cmd_gradcheck(args) -> int:
    cfg = _load(args)
    family = cfg.adversary.get("family")
    if family not in SMOOTH_FAMILIES:
        raise ConfigError(f"gradcheck needs a smooth loss family, not {family!r}")
    rep = gradcheck(cfg, args.trials, round_index=args.round)
    text = rep.summary()
    atomic_write(Path(args.out_dir) / "gradcheck.txt", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    rec = calibrate(sign=args.transform_sign)
    lines = [f"transform sign {rec.transform_sign}, zero outcome {rec.zero_outcome}, window {rec.window}",
             f"worst exact-recovery probability {rec.worst_exact_probability:.17g}"]
    sys.stdout.write(format_summary("calibrate", lines, rec.as_dict()))
    if not rec.passed:
        _err("calibration failed: linear losses with on-grid slopes are not recovered exactly")
        return EXIT_CALIBRATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qocolab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("config", help="experiment config (JSON)")
        p.add_argument("--seed", type=int, default=None, help="override runtime.seed")
        p.add_argument("--out-dir", default=".", help="directory for output files")
        p.add_argument("--mode", choices=MODES, default=None, help="r' schedule mode")
        p.add_argument("--memory-guard", type=int, default=None,
                       help="largest statevector (amplitudes) the simulator may allocate")

    p = sub.add_parser("run", help="play one game")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trials", help="play independent seeded games")
    common(p)
    p.add_argument("--num", type=int, default=None, help="number of trials (default runtime.trials)")
    p.set_defaults(func=cmd_trials)

    p = sub.add_parser("gradcheck", help="empirical gradient-error distribution")
    common(p)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--round", type=int, default=1, help="schedule round whose parameters are used")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("calibrate", help="resolve the Fourier sign/offset convention")
    p.add_argument("--out-dir", default=".", help=argparse.SUPPRESS)
    p.add_argument("--transform-sign", type=int, choices=(-1, 1), default=TRANSFORM_SIGN,
                   help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    except MemoryGuardError as exc:
        _err(f"memory guard: {exc}")
        return EXIT_RUNTIME
    except (DomainError, ValueError, ArithmeticError) as exc:
        _err(f"runtime error: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
