"""Monte Carlo estimation: cheat success rates, completeness, concealing tests.

Two execution paths exist on purpose.  The *reference path* runs the actual
protocol objects end to end (bob_draw_configs -> run_commit_phase ->
build_unveil -> bob_verify) with one substream per trial.  The *fast path*
vectorizes the GuessSlit-at-unit-efficiency game (whose verdict reduces to
exact per-round checks plus a binomial balance lookup) over fixed-size trial
chunks; it exists so 2e5-trial binding sweeps take seconds.  The two paths
use different substream layouts, so they agree in law rather than draw for
draw; tests reconcile them both ways.

Determinism: every stream is derived from (master_seed, tag, indices); chunk
results are merged in index order, so thread counts never change output.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .protocol import (
    _CONFIG_CUMPROB,
    TAG_CONCEAL,
    TAG_FAST,
    TAG_TRIAL,
    Bit,
    ProtocolParams,
    Verdict,
    bob_draw_configs,
    bob_verify,
    run_commit_phase,
    substream,
)
from .stats import exact_binomial_two_sided_pvalue, fit_log2_acceptance, Log2Fit, wilson_interval
from .strategies import StrategyKind, StrategySpec, behavior_for, build_unveil

CHUNK_TRIALS = 1024
MIN_TRIALS = 100

# Column indices produced by the vectorized config draw (must match the
# cumulative thresholds in protocol._CONFIG_CUMPROB).
_IDX_BOTH_OPEN = 0
_IDX_BOTH_CLOSED = 1
_IDX_LEFT_ONLY = 2
_IDX_RIGHT_ONLY = 3


@dataclass(frozen=True)
class CheatEstimate:
    strategy: StrategySpec
    n_rounds: int
    trials: int
    accepted: int
    acceptance_rate: float
    wilson_ci_95: tuple[float, float]

    def __post_init__(self) -> None:
        lo, hi = self.wilson_ci_95
        if not (0.0 <= lo <= self.acceptance_rate <= hi <= 1.0):
            raise ValueError("Wilson interval must bracket the acceptance rate")


@dataclass(frozen=True)
class GuessSlitTrials:
    """Per-trial detail of the vectorized GuessSlit game."""

    n_rounds: int
    k_single: np.ndarray  # detected single-slit rounds per trial
    all_match: np.ndarray  # every single-slit claim matched Bob's secret
    balance_pass: np.ndarray
    accepted: np.ndarray


@dataclass(frozen=True)
class ConsistencyEstimate:
    """All-round announcement-consistency of a NoDetection Alice."""

    announce_prob: float
    n_rounds: int
    trials: int
    successes: int
    rate: float
    wilson_ci_95: tuple[float, float]


@dataclass(frozen=True)
class ConcealingReport:
    n_rounds: int
    trials_per_bit: int
    efficiency_eta: float
    structural_pairs: int
    structural_max_distance: float
    tv_distance: float


@dataclass(frozen=True)
class SweepRow:
    strategy_label: str
    n_rounds: int
    trials: int
    accepted: int
    acceptance_rate: float
    ci_low: float
    ci_high: float
    zero_upper_bound: float | None  # Wilson upper bound when no trial accepted


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    fit: Log2Fit


def _chunk_ranges(trials: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + CHUNK_TRIALS, trials)) for lo in range(0, trials, CHUNK_TRIALS)]


def _map_chunks(fn, n_chunks: int, threads: int) -> list:
    """Apply fn to chunk indices, preserving chunk order regardless of threads."""
    if threads <= 1 or n_chunks <= 1:
        return [fn(c) for c in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_chunks)))


def run_single_protocol(
    spec: StrategySpec, params: ProtocolParams, rng: np.random.Generator
) -> Verdict:
    """One full commit+unveil+verify run; consumes one sequential stream."""
    behavior = behavior_for(spec)
    secrets = bob_draw_configs(params, rng)
    transcript, state = run_commit_phase(behavior, secrets, params, rng)
    unveil = build_unveil(spec, state, params, rng)
    return bob_verify(unveil, secrets, transcript, params)


def _reference_acceptance(
    spec: StrategySpec, params: ProtocolParams, trials: int, threads: int
) -> np.ndarray:
    def one_chunk(c: int) -> np.ndarray:
        lo, hi = ranges[c]
        out = np.empty(hi - lo, dtype=bool)
        for t in range(lo, hi):
            rng = substream(params.master_seed, TAG_TRIAL, params.n_rounds, t)
            out[t - lo] = run_single_protocol(spec, params, rng).accepted
        return out

    ranges = _chunk_ranges(trials)
    return np.concatenate(_map_chunks(one_chunk, len(ranges), threads))


def _balance_pass_table(max_n: int, alpha_half: float) -> list[np.ndarray]:
    """pass/fail of the exact balance test for every (n, k_left), n <= max_n."""
    table = []
    for n in range(max_n + 1):
        if n == 0:
            table.append(np.array([True]))  # no both-open claims: test skipped
            continue
        row = np.array(
            [exact_binomial_two_sided_pvalue(k, n, 0.5) >= alpha_half for k in range(n + 1)]
        )
        table.append(row)
    return table


def guess_slit_trials(
    params: ProtocolParams, trials: int, threads: int = 1
) -> GuessSlitTrials:
    """Vectorized GuessSlit game at unit efficiency.

    Per trial: Bob draws configs; honest announcements equal the open-slit
    pattern; Alice claims slits uniformly.  The verdict is exactly
    (every single-slit claim matches) AND (both-open claims pass the exact
    balance test); detection-consistency holds by construction.
    """
    if params.optics.efficiency_eta < 1.0:
        raise ValueError("fast GuessSlit path requires efficiency_eta = 1")
    n = params.n_rounds
    table = _balance_pass_table(n, params.significance_alpha / 2)
    ranges = _chunk_ranges(trials)

    def one_chunk(c: int):
        lo, hi = ranges[c]
        b = hi - lo
        g = substream(params.master_seed, TAG_FAST, n, c)
        cfg = np.searchsorted(_CONFIG_CUMPROB, g.random((b, n)), side="right")
        claims_left = g.random((b, n)) < 0.5
        single = cfg >= _IDX_LEFT_ONLY
        both = cfg == _IDX_BOTH_OPEN
        match = np.where(single, claims_left == (cfg == _IDX_LEFT_ONLY), True)
        all_match = match.all(axis=1)
        k_single = single.sum(axis=1)
        n_both = both.sum(axis=1)
        k_left = (both & claims_left).sum(axis=1)
        balance = np.fromiter(
            (table[nb][kl] for nb, kl in zip(n_both, k_left)), dtype=bool, count=b
        )
        return k_single, all_match, balance

    parts = _map_chunks(one_chunk, len(ranges), threads)
    k_single = np.concatenate([p[0] for p in parts]) if parts else np.empty(0, dtype=int)
    all_match = np.concatenate([p[1] for p in parts]) if parts else np.empty(0, dtype=bool)
    balance = np.concatenate([p[2] for p in parts]) if parts else np.empty(0, dtype=bool)
    return GuessSlitTrials(
        n_rounds=n,
        k_single=k_single,
        all_match=all_match,
        balance_pass=balance,
        accepted=all_match & balance,
    )


def estimate_cheat_success(
    spec: StrategySpec, params: ProtocolParams, trials: int, threads: int = 1
) -> CheatEstimate:
    """Acceptance rate of a strategy over fresh-secret protocol runs.

    GuessSlit at unit efficiency uses the vectorized fast path; every other
    strategy runs the reference protocol objects per trial.
    """
    if trials < MIN_TRIALS:
        raise ValueError(f"trials too small: need >= {MIN_TRIALS}, got {trials}")
    if spec.kind is StrategyKind.GUESS_SLIT and params.optics.efficiency_eta >= 1.0:
        accepted_arr = guess_slit_trials(params, trials, threads).accepted
    else:
        accepted_arr = _reference_acceptance(spec, params, trials, threads)
    accepted = int(accepted_arr.sum())
    return CheatEstimate(
        strategy=spec,
        n_rounds=params.n_rounds,
        trials=trials,
        accepted=accepted,
        acceptance_rate=accepted / trials,
        wilson_ci_95=wilson_interval(accepted, trials),
    )


def binding_sweep(
    spec: StrategySpec,
    base_params: ProtocolParams,
    sweep_n: list[int],
    trials: int,
    threads: int = 1,
) -> SweepResult:
    """estimate_cheat_success across round counts plus a log2-acceptance fit."""
    if sorted(sweep_n) != list(sweep_n) or len(set(sweep_n)) != len(sweep_n):
        raise ValueError("sweep_N must be strictly increasing")
    rows = []
    for n in sweep_n:
        params = ProtocolParams(
            n_rounds=int(n),
            optics=base_params.optics,
            significance_alpha=base_params.significance_alpha,
            master_seed=base_params.master_seed,
        )
        est = estimate_cheat_success(spec, params, trials, threads)
        lo, hi = est.wilson_ci_95
        rows.append(
            SweepRow(
                strategy_label=spec.label(),
                n_rounds=est.n_rounds,
                trials=est.trials,
                accepted=est.accepted,
                acceptance_rate=est.acceptance_rate,
                ci_low=lo,
                ci_high=hi,
                zero_upper_bound=hi if est.accepted == 0 else None,
            )
        )
    fit = fit_log2_acceptance(
        [r.n_rounds for r in rows],
        [r.acceptance_rate for r in rows],
        [r.trials for r in rows],
    )
    return SweepResult(rows=tuple(rows), fit=fit)


def no_detection_consistency(
    announce_prob: float, params: ProtocolParams, trials: int, threads: int = 1
) -> ConsistencyEstimate:
    """P(announcements equal the true arrival pattern for all N rounds).

    For announce_prob p and unit efficiency, each round is consistent with
    probability p*(2/3) + (1-p)*(1/3), i.e. 5/9 at p = 2/3; all-round
    consistency decays as its N-th power.
    """
    n = params.n_rounds
    eta = params.optics.efficiency_eta
    ranges = _chunk_ranges(trials)

    def one_chunk(c: int) -> int:
        lo, hi = ranges[c]
        b = hi - lo
        g = substream(params.master_seed, TAG_TRIAL, n, 100_000 + c)
        cfg = np.searchsorted(_CONFIG_CUMPROB, g.random((b, n)), side="right")
        is_open = cfg != _IDX_BOTH_CLOSED
        arrivals = is_open & (g.random((b, n)) < eta) if eta < 1.0 else is_open
        announce = g.random((b, n)) < announce_prob
        return int((announce == arrivals).all(axis=1).sum())

    successes = sum(_map_chunks(one_chunk, len(ranges), threads))
    return ConsistencyEstimate(
        announce_prob=announce_prob,
        n_rounds=n,
        trials=trials,
        successes=successes,
        rate=successes / trials,
        wilson_ci_95=wilson_interval(successes, trials),
    )


def concealing_experiment(
    params: ProtocolParams, trials: int, threads: int = 1, structural_pairs: int = 32
) -> ConcealingReport:
    """Concealment evidence on Bob's pre-unveil view.

    Structural part: for pairs of honest runs sharing secrets and seed but
    committing different bits, the transcripts must be byte-identical
    (distance exactly 0 at unit efficiency; arrival draws are
    strategy-independent at any efficiency).  Statistical part: empirical TV
    distance between the detected-count histograms of the two bits over
    independent-secret commit phases.
    """
    n = params.n_rounds
    eta = params.optics.efficiency_eta

    max_dist = 0.0
    for pair in range(structural_pairs):
        secrets = bob_draw_configs(params, substream(params.master_seed, TAG_CONCEAL, 0, pair))
        transcripts = []
        for bit in (Bit.ZERO, Bit.ONE):
            rng = substream(params.master_seed, TAG_CONCEAL, 1, pair)
            t, _ = run_commit_phase(behavior_for(StrategySpec.honest(bit)), secrets, params, rng)
            transcripts.append(t.to_bytes())
        if transcripts[0] != transcripts[1]:
            max_dist = 1.0

    ranges = _chunk_ranges(trials)

    def counts_for_bit(bit: int) -> np.ndarray:
        def one_chunk(c: int) -> np.ndarray:
            lo, hi = ranges[c]
            b = hi - lo
            g = substream(params.master_seed, TAG_CONCEAL, 2 + bit, c)
            cfg = np.searchsorted(_CONFIG_CUMPROB, g.random((b, n)), side="right")
            is_open = cfg != _IDX_BOTH_CLOSED
            arrivals = is_open & (g.random((b, n)) < eta) if eta < 1.0 else is_open
            # Honest announcements equal arrivals for either committed bit;
            # simulating both bits with independent streams estimates the TV
            # of a distance-0 pair.
            return np.bincount(arrivals.sum(axis=1), minlength=n + 1)

        parts = _map_chunks(one_chunk, len(ranges), threads)
        return np.sum(parts, axis=0)

    h0 = counts_for_bit(0)
    h1 = counts_for_bit(1)
    tv = float(0.5 * np.abs(h0 / h0.sum() - h1 / h1.sum()).sum())
    return ConcealingReport(
        n_rounds=n,
        trials_per_bit=trials,
        efficiency_eta=eta,
        structural_pairs=structural_pairs,
        structural_max_distance=max_dist,
        tv_distance=tv,
    )
