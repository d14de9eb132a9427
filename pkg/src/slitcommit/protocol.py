"""Commit/unveil protocol state machine, Bob's secret draws, and verification.

Round structure: Bob secretly sets the slit configuration and sends one
photon; Alice announces whether she detected it (her announcement is part of
the public transcript); privately she records either the slit the photon came
from (telescopes, committed bit 0) or its landing position on the screen
(committed bit 1).  At unveil she reveals the bit and her per-round records,
and Bob cross-checks them against his secret configurations with exact checks
where he knows ground truth and statistical tests where he knows only the
distribution.

The engine performs all physical sampling (arrivals, telescope outcomes,
landing positions) because only it knows Bob's configuration; a strategy sees
the arrival flag and its own measurement outcome, never the configuration.
Arrival randomness for all rounds is drawn up front, before any strategy
interaction, so announcements of honest parties are a function of (secrets,
seed) alone.
"""

from __future__ import annotations

import enum
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats as _sps

from .optics import (
    OpticsParams,
    ScreenPdf,
    SlitConfig,
    WhichSlit,
    count_dark_hits,
    dark_fringe_mass,
    sample_screen_position,
    sample_which_slit,
    screen_pdf,
)
from .stats import (
    MIN_EXPECTED_PER_BIN,
    DEFAULT_TEST_BINS,
    binomial_balance_test,
    chi_squared_gof,
    exact_binomial_two_sided_pvalue,
)

# Named substream tags: every random stream in the package is derived as
# SeedSequence(master_seed, spawn_key=(tag, index...)).  Fixed tags keep
# parallel execution and replays byte-identical.
TAG_SECRETS = 1
TAG_COMMIT = 2
TAG_UNVEIL = 3
TAG_TRIAL = 4
TAG_FAST = 5
TAG_CONCEAL = 6
TAG_NOGO = 7


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Deterministic child generator for (master_seed, key)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=key)))


class ProtocolError(ValueError):
    """Invalid protocol input (length mismatch, bad parameters)."""


class ProtocolAbort(ProtocolError):
    """A party failed to produce a required protocol message."""


class Bit(enum.IntEnum):
    ZERO = 0
    ONE = 1


class MeasurementKind(enum.Enum):
    """What Alice's apparatus records for a detected photon."""

    WHICH_SLIT = "which_slit"
    SCREEN = "screen"
    NONE = "none"


@dataclass(frozen=True)
class ProtocolParams:
    n_rounds: int
    optics: OpticsParams = field(default_factory=OpticsParams)
    significance_alpha: float = 0.01
    master_seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.n_rounds, int) or self.n_rounds < 0:
            raise ProtocolError(f"n_rounds must be a nonnegative integer, got {self.n_rounds!r}")
        if not (0.0 < self.significance_alpha < 1.0):
            raise ProtocolError(f"significance_alpha must lie in (0, 1), got {self.significance_alpha!r}")
        if not isinstance(self.master_seed, int) or not (0 <= self.master_seed < 2**64):
            raise ProtocolError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed!r}")


@dataclass(frozen=True)
class RoundSecret:
    config: SlitConfig


@dataclass(frozen=True)
class RoundAnnouncement:
    detected: bool


@dataclass(frozen=True)
class CommitTranscript:
    """Bob's pre-unveil view: the announcement for every round."""

    n_rounds: int
    announcements: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.announcements) != self.n_rounds:
            raise ProtocolError("announcement count must equal n_rounds")

    def to_bytes(self) -> bytes:
        return bytes(b"1"[0] if a else b"0"[0] for a in self.announcements)


@dataclass(frozen=True)
class UnveilData:
    """Alice's revealed bit plus per-round evidence.

    entries[i] is None for rounds announced undetected; otherwise a WhichSlit
    (bit 0) or a screen position in meters (bit 1).  Content is *not*
    validated here — judging it is the verifier's job.
    """

    bit: Bit
    entries: tuple


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    applicable: bool = True
    statistic: float | None = None
    p_value: float | None = None
    detail: str = ""


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    checks: tuple[CheckResult, ...]

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


class AliceBehavior(ABC):
    """Commit-phase interface a strategy presents to the engine.

    `measurement_kind` declares what the engine should measure for detected
    photons on the strategy's behalf; `announce` returns the public
    detected/undetected announcement for one round given only the arrival
    flag (never Bob's configuration).
    """

    measurement_kind: MeasurementKind = MeasurementKind.NONE

    @abstractmethod
    def announce(self, arrival: bool, rng: np.random.Generator) -> bool: ...


@dataclass(frozen=True)
class AliceState:
    """Alice's private per-round records from the commit phase."""

    measurement: MeasurementKind
    announcements: tuple[bool, ...]
    outcomes: tuple  # None | WhichSlit | float, aligned with rounds


# Bob's step-1 configuration distribution: cumulative thresholds for
# BothOpen 1/3, BothClosed 1/3, LeftOnly 1/6, RightOnly 1/6.
_CONFIG_ORDER = (
    SlitConfig.BOTH_OPEN,
    SlitConfig.BOTH_CLOSED,
    SlitConfig.LEFT_ONLY,
    SlitConfig.RIGHT_ONLY,
)
_CONFIG_CUMPROB = np.array([1 / 3, 2 / 3, 5 / 6, 1.0])


def bob_draw_configs(params: ProtocolParams, rng: np.random.Generator) -> list[RoundSecret]:
    """Bob's secret per-round configurations for one protocol run."""
    u = rng.random(params.n_rounds)
    idx = np.searchsorted(_CONFIG_CUMPROB, u, side="right")
    return [RoundSecret(_CONFIG_ORDER[i]) for i in idx]


@lru_cache(maxsize=32)
def cached_screen_pdf(optics: OpticsParams, config: SlitConfig) -> ScreenPdf:
    """Memoized pdf tabulation (OpticsParams is frozen, hence hashable)."""
    return screen_pdf(optics, config)


def run_commit_phase(
    strategy: AliceBehavior,
    secrets: list[RoundSecret],
    params: ProtocolParams,
    rng: np.random.Generator,
) -> tuple[CommitTranscript, AliceState]:
    """Execute the N-round commit phase for one Alice behavior.

    Returns Bob's transcript (announcements only) and Alice's private state.
    """
    if len(secrets) != params.n_rounds:
        raise ProtocolError(f"secrets length {len(secrets)} != n_rounds {params.n_rounds}")
    n = params.n_rounds
    eta = params.optics.efficiency_eta

    open_mask = np.fromiter((s.config.is_open for s in secrets), dtype=bool, count=n)
    # One up-front draw decides every arrival: strategies cannot influence it,
    # and the draw happens whether or not eta < 1 so downstream streams align.
    arrival_u = rng.random(n)
    arrivals = open_mask & (arrival_u < eta)

    kind = strategy.measurement_kind
    announcements: list[bool] = []
    outcomes: list = []
    for i, secret in enumerate(secrets):
        outcome = None
        if arrivals[i]:
            if kind is MeasurementKind.WHICH_SLIT:
                outcome = sample_which_slit(secret.config, rng)
            elif kind is MeasurementKind.SCREEN:
                outcome = sample_screen_position(cached_screen_pdf(params.optics, secret.config), rng)
        announced = strategy.announce(bool(arrivals[i]), rng)
        if not isinstance(announced, (bool, np.bool_)):
            raise ProtocolAbort(f"strategy announcement missing for round {i}")
        announcements.append(bool(announced))
        outcomes.append(outcome)

    transcript = CommitTranscript(n_rounds=n, announcements=tuple(announcements))
    state = AliceState(measurement=kind, announcements=tuple(announcements), outcomes=tuple(outcomes))
    return transcript, state


def _malformed_reason(unveil: UnveilData, transcript: CommitTranscript, optics: OpticsParams) -> str | None:
    W = optics.screen_half_width_W
    for i, entry in enumerate(unveil.entries):
        if (entry is not None) != transcript.announcements[i]:
            return f"evidence presence contradicts announcement at round {i}"
        if entry is None:
            continue
        if unveil.bit is Bit.ZERO:
            if not isinstance(entry, WhichSlit):
                return f"round {i}: bit 0 evidence must be a which-slit record"
        else:
            if isinstance(entry, bool) or not isinstance(entry, (int, float, np.floating)):
                return f"round {i}: bit 1 evidence must be a screen position"
            x = float(entry)
            if not np.isfinite(x) or abs(x) > W:
                return f"round {i}: screen position {x!r} outside [-{W}, {W}]"
    return None


def dark_fringe_occupancy_test(
    positions, pdf: ScreenPdf, alpha: float
) -> tuple[float, float, bool, int]:
    """Binned chi-squared (df=1) on the bright/dark fringe partition.

    Screen bins are classified bright or dark by the sign of
    cos(2*pi*x/period) at the bin center; expected masses come from the
    tabulated pdf.  This is the verifier's interference check: fringeless
    forgeries overfill the dark-fringe bins (mass 0.18 under the two-slit
    law vs 0.50 under a fringeless envelope at default geometry), giving
    power ~0.91 already at 28 positions where equal-probability interval
    bins are nearly blind (power ~0.02 at 40).

    Returns (statistic, p_value, passed, n).
    """
    positions = np.asarray(positions, dtype=float)
    n = positions.size
    p_dark = dark_fringe_mass(pdf)
    if n * min(p_dark, 1.0 - p_dark) < MIN_EXPECTED_PER_BIN:
        raise ValueError("too few positions for the occupancy test")
    obs = count_dark_hits(positions, pdf)
    statistic = (obs - n * p_dark) ** 2 / (n * p_dark * (1.0 - p_dark))
    p_value = float(_sps.chi2.sf(statistic, df=1))
    return float(statistic), p_value, bool(p_value >= alpha), n


def min_positions_for_occupancy_test(pdf: ScreenPdf) -> int:
    p_dark = dark_fringe_mass(pdf)
    return int(np.ceil(MIN_EXPECTED_PER_BIN / min(p_dark, 1.0 - p_dark)))


def bob_verify(
    unveil: UnveilData,
    secrets: list[RoundSecret],
    transcript: CommitTranscript,
    params: ProtocolParams,
) -> Verdict:
    """Bob's unveil-time decision.

    Checks run in order: evidence well-formedness (immediate reject),
    detection-consistency, then per committed bit either the exact
    which-slit/balance checks (bit 0) or the two goodness-of-fit checks
    (bit 1), each statistical test Bonferroni-split at alpha/2 (alpha/4 for
    the eta < 1 detection-rate test).  Pure function: no randomness.
    """
    n = params.n_rounds
    if not (len(secrets) == n and len(transcript.announcements) == n and len(unveil.entries) == n):
        raise ProtocolError("length mismatch between secrets, transcript, and unveil data")
    alpha = params.significance_alpha
    optics = params.optics
    eta = optics.efficiency_eta
    checks: list[CheckResult] = []

    reason = _malformed_reason(unveil, transcript, optics)
    checks.append(CheckResult("malformed-evidence", passed=reason is None, detail=reason or ""))
    if reason is not None:
        return Verdict(accepted=False, checks=tuple(checks))

    announced = np.fromiter(transcript.announcements, dtype=bool, count=n)
    open_mask = np.fromiter((s.config.is_open for s in secrets), dtype=bool, count=n)

    if eta >= 1.0:
        mismatches = int(np.count_nonzero(announced != open_mask))
        checks.append(
            CheckResult(
                "detection-consistency",
                passed=mismatches == 0,
                statistic=float(mismatches),
                detail="announcements must equal slit-open pattern at unit efficiency",
            )
        )
    else:
        closed_detected = int(np.count_nonzero(announced & ~open_mask))
        m_open = int(open_mask.sum())
        k_det = int(np.count_nonzero(announced & open_mask))
        if m_open > 0:
            p_det = exact_binomial_two_sided_pvalue(k_det, m_open, eta)
        else:
            p_det = 1.0
        ok = closed_detected == 0 and p_det >= alpha / 4
        checks.append(
            CheckResult(
                "detection-consistency",
                passed=ok,
                statistic=float(k_det),
                p_value=p_det,
                detail=f"{closed_detected} closed-round detections; detection rate tested against eta={eta}",
            )
        )

    detected = announced  # evidence present exactly on announced rounds (checked above)

    if unveil.bit is Bit.ZERO:
        claim_mismatch = 0
        n_single_checked = 0
        n_left = n_right = 0
        for i, secret in enumerate(secrets):
            entry = unveil.entries[i]
            if entry is None:
                continue
            cfg = secret.config
            if cfg is SlitConfig.LEFT_ONLY or cfg is SlitConfig.RIGHT_ONLY:
                n_single_checked += 1
                actual = WhichSlit.LEFT if cfg is SlitConfig.LEFT_ONLY else WhichSlit.RIGHT
                if entry is not actual:
                    claim_mismatch += 1
            elif cfg is SlitConfig.BOTH_OPEN:
                if entry is WhichSlit.LEFT:
                    n_left += 1
                else:
                    n_right += 1
        checks.append(
            CheckResult(
                "which-slit-match",
                passed=claim_mismatch == 0,
                statistic=float(claim_mismatch),
                detail=f"{claim_mismatch} mismatched claims out of {n_single_checked} detected single-slit rounds",
            )
        )
        if n_left + n_right == 0:
            checks.append(
                CheckResult(
                    "balance-test",
                    passed=True,
                    applicable=False,
                    detail="skipped: no detected both-open claims",
                )
            )
        else:
            res = binomial_balance_test(n_left, n_right, alpha / 2)
            checks.append(
                CheckResult(
                    "balance-test",
                    passed=res.passed,
                    statistic=float(n_left),
                    p_value=res.p_value,
                    detail=f"left/right claims {n_left}/{n_right} on both-open rounds",
                )
            )
    else:
        both_positions = [
            float(unveil.entries[i])
            for i in range(n)
            if detected[i] and secrets[i].config is SlitConfig.BOTH_OPEN
        ]
        single_positions = [
            float(unveil.entries[i])
            for i in range(n)
            if detected[i] and secrets[i].config.is_single
        ]
        pdf_both = cached_screen_pdf(optics, SlitConfig.BOTH_OPEN)
        pdf_single = cached_screen_pdf(optics, SlitConfig.LEFT_ONLY)

        if len(both_positions) >= min_positions_for_occupancy_test(pdf_both):
            stat, pv, ok, nn = dark_fringe_occupancy_test(both_positions, pdf_both, alpha / 2)
            checks.append(
                CheckResult(
                    "gof-both-open",
                    passed=ok,
                    statistic=stat,
                    p_value=pv,
                    detail=f"dark-fringe occupancy on {nn} both-open positions",
                )
            )
        else:
            checks.append(
                CheckResult(
                    "gof-both-open",
                    passed=True,
                    applicable=False,
                    detail=f"skipped: {len(both_positions)} both-open positions below test minimum",
                )
            )

        if len(single_positions) >= MIN_EXPECTED_PER_BIN * 4:
            res = chi_squared_gof(single_positions, pdf_single, DEFAULT_TEST_BINS, alpha / 2)
            checks.append(
                CheckResult(
                    "gof-single",
                    passed=res.passed,
                    statistic=res.statistic,
                    p_value=res.p_value,
                    detail=f"{res.n_samples} pooled single-slit positions in {res.n_bins} bins",
                )
            )
        else:
            checks.append(
                CheckResult(
                    "gof-single",
                    passed=True,
                    applicable=False,
                    detail=f"skipped: {len(single_positions)} single-slit positions below test minimum",
                )
            )

    accepted = all(c.passed for c in checks)
    return Verdict(accepted=accepted, checks=tuple(checks))
