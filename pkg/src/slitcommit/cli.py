"""Command-line front end: pattern export, protocol runs, sweeps, demos.

Exit codes are strict: 0 for success/accept, 1 for a verification-level
rejection (protocol reject, low fidelity, mismatched marginals), 2 for
usage, configuration, or I/O errors.  Numeric output always goes through
repr() so reruns with the same seed are byte-identical, threads included.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

import numpy as np

from . import nogo
from .config import (
    DEFAULT_CONFIG_TOML,
    ConfigError,
    ExperimentConfig,
    config_hash,
    load_config,
)
from .montecarlo import binding_sweep, concealing_experiment
from .optics import SlitConfig, WhichSlit, density_at
from .protocol import (
    TAG_NOGO,
    TAG_TRIAL,
    ProtocolError,
    bob_draw_configs,
    bob_verify,
    run_commit_phase,
    substream,
)
from .strategies import behavior_for, build_unveil

THREADS_ENV_VAR = "SLITCOMMIT_THREADS"
CONCEALING_MIN_TRIALS = 10_000
FIDELITY_FLOOR = 1.0 - 1e-9

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_USAGE = 2


def _fmt(value: float) -> str:
    return repr(float(value))


def _comment_line(cfg: ExperimentConfig) -> str:
    return f"# config_hash={config_hash(cfg)} seed={cfg.master_seed}"


def _emit(out_path: str | None, text: str) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


PATTERN_POINTS = 1001


def cmd_pattern(cfg: ExperimentConfig) -> int:
    """CSV of the analytic screen densities for plotting.

    Emitted on an endpoint-inclusive uniform grid rather than the sampling
    tabulation's bin centers: with the default window this grid contains the
    interference nulls (odd multiples of half the fringe period) exactly, so
    the zero shows up in the data instead of being straddled by two bins.
    """
    w = cfg.optics.screen_half_width_W
    xs = np.linspace(-w, w, PATTERN_POINTS)
    both = density_at(cfg.optics, SlitConfig.BOTH_OPEN, xs)
    left = density_at(cfg.optics, SlitConfig.LEFT_ONLY, xs)
    right = density_at(cfg.optics, SlitConfig.RIGHT_ONLY, xs)
    mixture = 0.5 * (left + right)
    buf = io.StringIO()
    buf.write(_comment_line(cfg) + "\n")
    buf.write("x_m,density_both_open,density_single,density_mixture\n")
    for x, db, ds, dm in zip(xs, both, left, mixture):
        buf.write(f"{_fmt(x)},{_fmt(db)},{_fmt(ds)},{_fmt(dm)}\n")
    _emit(cfg.output_path, buf.getvalue())
    return EXIT_OK


def _evidence_json(entry):
    if entry is None:
        return None
    if isinstance(entry, WhichSlit):
        return {"kind": "which_slit", "value": entry.value}
    return {"kind": "position", "value": float(entry)}


def cmd_run(cfg: ExperimentConfig) -> int:
    """One full protocol run as line-delimited JSON; exit 0 iff accepted.

    Uses the same substream as trial 0 of the Monte Carlo estimators, so a
    single run can be replayed out of any sweep cell.
    """
    params = cfg.protocol
    rng = substream(cfg.master_seed, TAG_TRIAL, params.n_rounds, 0)
    behavior = behavior_for(cfg.strategy)
    secrets = bob_draw_configs(params, rng)
    transcript, state = run_commit_phase(behavior, secrets, params, rng)
    unveil = build_unveil(cfg.strategy, state, params, rng)
    verdict = bob_verify(unveil, secrets, transcript, params)

    lines = []
    for i, secret in enumerate(secrets):
        lines.append(
            json.dumps(
                {
                    "round": i,
                    "detected": bool(transcript.announcements[i]),
                    "config": secret.config.value,
                    "evidence": _evidence_json(unveil.entries[i]),
                }
            )
        )
    lines.append(
        json.dumps(
            {
                "verdict": {
                    "accepted": bool(verdict.accepted),
                    "strategy": cfg.strategy.label(),
                    "unveiled_bit": int(unveil.bit),
                    "n_rounds": params.n_rounds,
                    "seed": cfg.master_seed,
                    "config_hash": config_hash(cfg),
                    "checks": [
                        {
                            "name": c.name,
                            "passed": bool(c.passed),
                            "applicable": bool(c.applicable),
                            "statistic": None if c.statistic is None else float(c.statistic),
                            "p_value": None if c.p_value is None else float(c.p_value),
                            "detail": c.detail,
                        }
                        for c in verdict.checks
                    ],
                }
            }
        )
    )
    _emit(cfg.output_path, "\n".join(lines) + "\n")
    return EXIT_OK if verdict.accepted else EXIT_REJECT


def cmd_binding_sweep(cfg: ExperimentConfig) -> int:
    """estimate_cheat_success across sweep_N as CSV plus a log2 fit."""
    if cfg.sweep_n is None or len(cfg.sweep_n) == 0:
        raise ConfigError("binding-sweep needs [run].sweep_N in the config")
    result = binding_sweep(
        cfg.strategy, cfg.protocol, list(cfg.sweep_n), cfg.trials, cfg.threads
    )
    buf = io.StringIO()
    buf.write(_comment_line(cfg) + "\n")
    buf.write("strategy,N,trials,accepted,acceptance,ci_low,ci_high,zero_flag\n")
    for r in result.rows:
        zero = "wilson_upper_bound" if r.zero_upper_bound is not None else ""
        buf.write(
            f"{r.strategy_label},{r.n_rounds},{r.trials},{r.accepted},"
            f"{_fmt(r.acceptance_rate)},{_fmt(r.ci_low)},{_fmt(r.ci_high)},{zero}\n"
        )
    fit = result.fit
    if fit.upper_bound_only:
        buf.write("# fit: upper-bound only (no sweep cell had an accepted trial)\n")
    buf.write(
        f"# fit_log2_slope={_fmt(fit.slope)} fit_log2_intercept={_fmt(fit.intercept)} "
        f"fit_points={fit.n_points} upper_bound_only={fit.upper_bound_only}\n"
    )
    _emit(cfg.output_path, buf.getvalue())
    return EXIT_OK


def cmd_concealing_test(cfg: ExperimentConfig) -> int:
    """Structural and statistical concealment report (plain text)."""
    trials = max(cfg.trials, CONCEALING_MIN_TRIALS)
    report = concealing_experiment(cfg.protocol, trials, cfg.threads)
    lines = [
        _comment_line(cfg),
        f"n_rounds={report.n_rounds} trials_per_bit={report.trials_per_bit} "
        f"efficiency_eta={_fmt(report.efficiency_eta)}",
        f"structural: {report.structural_pairs} shared-secret pairs, "
        f"max transcript distance = {_fmt(report.structural_max_distance)}",
        f"statistical: TV distance of detected-count histograms = {_fmt(report.tv_distance)}",
    ]
    _emit(cfg.output_path, "\n".join(lines) + "\n")
    return EXIT_OK


def _format_matrix(m: np.ndarray) -> str:
    rows = []
    for row in m:
        rows.append("  [" + ", ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in row) + "]")
    return "\n".join(rows)


def _nogo_example(args, rng) -> tuple[nogo.PureState, nogo.PureState]:
    s = 1.0 / np.sqrt(2.0)
    if args.mismatched:
        # Marginals diag(1, 0) vs I/2: trace distance 1/2, hypothesis fails.
        psi0 = nogo.PureState(2, 2, np.array([1, 0, 0, 0], dtype=complex))
        psi1 = nogo.PureState(2, 2, np.array([s, 0, 0, s], dtype=complex))
        return psi0, psi1
    if args.random:
        dim_a, dim_b = args.dims
        if not (1 <= dim_a <= 16 and 1 <= dim_b <= 16):
            raise ConfigError("dims must lie in [1, 16]")
        rho = nogo.random_density_matrix(dim_b, rng, rank=min(dim_a, dim_b))
        psi0 = nogo.random_purification(rho, dim_a, rng)
        psi1 = nogo.random_purification(rho, dim_a, rng)
        return psi0, psi1
    psi0 = nogo.PureState(2, 2, np.array([s, 0, 0, s], dtype=complex))  # (|00> + |11>)/sqrt2
    psi1 = nogo.PureState(2, 2, np.array([0, s, s, 0], dtype=complex))  # (|01> + |10>)/sqrt2
    return psi0, psi1


def cmd_nogo_demo(cfg: ExperimentConfig, args) -> int:
    """Worked example: two purifications of one marginal and the A-side map."""
    rng = substream(cfg.master_seed, TAG_NOGO, 0)
    psi0, psi1 = _nogo_example(args, rng)
    buf = io.StringIO()
    buf.write(_comment_line(cfg) + "\n")
    buf.write(f"state psi0 (dim_A={psi0.dim_a}, dim_B={psi0.dim_b}):\n")
    buf.write(_format_matrix(psi0.as_matrix()) + "\n")
    buf.write(f"state psi1 (dim_A={psi1.dim_a}, dim_B={psi1.dim_b}):\n")
    buf.write(_format_matrix(psi1.as_matrix()) + "\n")
    dist = nogo.trace_distance(nogo.partial_trace_A(psi0), nogo.partial_trace_A(psi1))
    buf.write(f"marginal trace distance: {_fmt(dist)}\n")
    try:
        u = nogo.cheating_unitary(psi0, psi1)
    except nogo.NotEquallyConcealingError as exc:
        buf.write(f"error: {exc}\n")
        _emit(cfg.output_path, buf.getvalue())
        return EXIT_REJECT
    mapped = nogo.apply_on_A(u, psi0)
    fid = nogo.fidelity(psi1, mapped)
    buf.write("A-side unitary U_A:\n")
    buf.write(_format_matrix(u.entries) + "\n")
    buf.write(f"unitarity defect: {_fmt(nogo.unitarity_defect(u.entries))}\n")
    buf.write(f"fidelity |<psi1|(U_A x I)|psi0>|: {_fmt(fid)}\n")
    _emit(cfg.output_path, buf.getvalue())
    if args.csv_out is not None:
        rows = [_comment_line(cfg), "row,col,re,im"]
        for i in range(u.dim):
            for j in range(u.dim):
                z = u.entries[i, j]
                rows.append(f"{i},{j},{_fmt(z.real)},{_fmt(z.imag)}")
        with open(args.csv_out, "w") as fh:
            fh.write("\n".join(rows) + "\n")
    return EXIT_OK if fid >= FIDELITY_FLOOR else EXIT_REJECT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slitcommit",
        description=(
            "Desk-scale interference bit-commitment simulator: "
            "screen patterns, protocol runs, cheat sweeps, concealment tests, "
            "and a purification-attack demo."
        ),
    )
    parser.add_argument("--config", metavar="PATH", help="TOML config file")
    parser.add_argument("--seed", type=int, metavar="U64", help="master seed override")
    parser.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    parser.add_argument("--trials", type=int, metavar="N", help="Monte Carlo trials override")
    parser.add_argument(
        "--threads",
        type=int,
        metavar="N",
        help=f"worker threads (or set {THREADS_ENV_VAR}); never changes output bytes",
    )
    parser.add_argument(
        "--print-default-config",
        action="store_true",
        help="print the built-in TOML defaults and exit",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.add_parser("pattern", help="write screen-density CSV")
    sub.add_parser("run", help="run one protocol and report the verdict (exit 1 on reject)")
    sub.add_parser("binding-sweep", help="cheat acceptance vs round count, with log2 fit")
    sub.add_parser("concealing-test", help="transcript-identity and TV-distance report")
    p_nogo = sub.add_parser("nogo-demo", help="purification cheating-unitary worked example")
    p_nogo.add_argument("--random", action="store_true", help="random case instead of the built-in pair")
    p_nogo.add_argument(
        "--mismatched",
        action="store_true",
        help="deliberately use states with different marginals (exits 1)",
    )
    p_nogo.add_argument(
        "--dims",
        type=int,
        nargs=2,
        default=(4, 4),
        metavar=("DIM_A", "DIM_B"),
        help="dimensions for --random (each at most 16)",
    )
    p_nogo.add_argument("--csv-out", metavar="PATH", help="also write U_A as row,col,re,im CSV")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.print_default_config:
        sys.stdout.write(DEFAULT_CONFIG_TOML)
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        sys.stderr.write("slitcommit: error: a command is required\n")
        return EXIT_USAGE

    threads = args.threads
    if threads is None and THREADS_ENV_VAR in os.environ:
        try:
            threads = int(os.environ[THREADS_ENV_VAR])
        except ValueError:
            sys.stderr.write(f"slitcommit: error: {THREADS_ENV_VAR} must be an integer\n")
            return EXIT_USAGE

    try:
        cfg = load_config(
            args.config,
            seed=args.seed,
            out=args.out,
            trials=args.trials,
            threads=threads,
        )
        if args.command == "pattern":
            return cmd_pattern(cfg)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "binding-sweep":
            return cmd_binding_sweep(cfg)
        if args.command == "concealing-test":
            return cmd_concealing_test(cfg)
        if args.command == "nogo-demo":
            return cmd_nogo_demo(cfg, args)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ProtocolError, nogo.NogoError, ValueError) as exc:
        sys.stderr.write(f"slitcommit: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"slitcommit: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
