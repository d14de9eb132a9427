"""Alice strategy catalog: honest behavior and the cheating strategies.

Each strategy couples a commit-phase behavior (what to announce, what the
apparatus measures) with an unveil builder (what evidence to reveal, for
which bit).  Cheaters here are format-honest — they produce well-formed
messages and forge only content — because malformed messages are rejected
trivially by the verifier.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .optics import SlitConfig, WhichSlit, sample_screen_position
from .protocol import (
    AliceBehavior,
    AliceState,
    Bit,
    MeasurementKind,
    ProtocolError,
    ProtocolParams,
    UnveilData,
    cached_screen_pdf,
)


class StrategyKind(enum.Enum):
    HONEST = "honest"
    FABRICATE_SCREEN = "fabricate_screen"
    GUESS_SLIT = "guess_slit"
    NO_DETECTION = "no_detection"


@dataclass(frozen=True)
class StrategySpec:
    """Which Alice drives the protocol, with its per-kind parameters.

    - HONEST(bit): truthful announcements; telescopes for bit 0, screen for
      bit 1; unveils its own records.
    - FABRICATE_SCREEN: commits 0 (telescopes) but unveils 1, fabricating
      positions from the single-slit law of the slit it observed
      (`fabricate_from="both_open"` is the documented blind variant that
      samples from the two-slit law instead).
    - GUESS_SLIT(mode): commits 1 (screen) but unveils 0, claiming slits
      uniformly at random or by single-slit likelihood ("posterior" — with
      identical left/right densities every comparison ties and the fair-coin
      tie-break makes it uniform in law).
    - NO_DETECTION(announce_prob): never measures; announces "detected" with
      the given probability regardless of arrivals; unveils bit 0 with
      uniform slit claims.
    """

    kind: StrategyKind
    bit: Bit | None = None
    mode: str = "uniform"
    announce_prob: float = 2.0 / 3.0
    fabricate_from: str = "single"

    def __post_init__(self) -> None:
        if self.kind is StrategyKind.HONEST and self.bit is None:
            raise ProtocolError("honest strategy needs a bit")
        if self.mode not in ("uniform", "posterior"):
            raise ProtocolError(f"unknown guess mode {self.mode!r}")
        if not (0.0 <= self.announce_prob <= 1.0):
            raise ProtocolError(f"announce_prob must lie in [0, 1], got {self.announce_prob!r}")
        if self.fabricate_from not in ("single", "both_open"):
            raise ProtocolError(f"unknown fabricate_from {self.fabricate_from!r}")

    @staticmethod
    def honest(bit: Bit | int) -> "StrategySpec":
        return StrategySpec(kind=StrategyKind.HONEST, bit=Bit(bit))

    @staticmethod
    def fabricate_screen(fabricate_from: str = "single") -> "StrategySpec":
        return StrategySpec(kind=StrategyKind.FABRICATE_SCREEN, fabricate_from=fabricate_from)

    @staticmethod
    def guess_slit(mode: str = "uniform") -> "StrategySpec":
        return StrategySpec(kind=StrategyKind.GUESS_SLIT, mode=mode)

    @staticmethod
    def no_detection(announce_prob: float = 2.0 / 3.0) -> "StrategySpec":
        return StrategySpec(kind=StrategyKind.NO_DETECTION, announce_prob=announce_prob)

    @property
    def committed_bit(self) -> Bit:
        if self.kind is StrategyKind.HONEST:
            return self.bit
        if self.kind is StrategyKind.FABRICATE_SCREEN:
            return Bit.ZERO
        if self.kind is StrategyKind.GUESS_SLIT:
            return Bit.ONE
        return Bit.ZERO  # NO_DETECTION measures nothing; bit 0 format at unveil

    @property
    def unveiled_bit(self) -> Bit:
        if self.kind is StrategyKind.HONEST:
            return self.bit
        if self.kind is StrategyKind.FABRICATE_SCREEN:
            return Bit.ONE
        return Bit.ZERO

    def label(self) -> str:
        if self.kind is StrategyKind.HONEST:
            return f"honest-b{int(self.bit)}"
        if self.kind is StrategyKind.GUESS_SLIT:
            return f"guess-slit-{self.mode}"
        if self.kind is StrategyKind.NO_DETECTION:
            return f"no-detection-{self.announce_prob:g}"
        if self.fabricate_from == "both_open":
            return "fabricate-screen-blind"
        return "fabricate-screen"


class _TruthfulBehavior(AliceBehavior):
    def __init__(self, measurement: MeasurementKind):
        self.measurement_kind = measurement

    def announce(self, arrival: bool, rng: np.random.Generator) -> bool:
        return bool(arrival)


class _NoDetectionBehavior(AliceBehavior):
    measurement_kind = MeasurementKind.NONE

    def __init__(self, announce_prob: float):
        self._p = announce_prob

    def announce(self, arrival: bool, rng: np.random.Generator) -> bool:
        return bool(rng.random() < self._p)


def behavior_for(spec: StrategySpec) -> AliceBehavior:
    """Commit-phase behavior object for a strategy."""
    if spec.kind is StrategyKind.HONEST:
        kind = MeasurementKind.WHICH_SLIT if spec.bit is Bit.ZERO else MeasurementKind.SCREEN
        return _TruthfulBehavior(kind)
    if spec.kind is StrategyKind.FABRICATE_SCREEN:
        return _TruthfulBehavior(MeasurementKind.WHICH_SLIT)
    if spec.kind is StrategyKind.GUESS_SLIT:
        return _TruthfulBehavior(MeasurementKind.SCREEN)
    return _NoDetectionBehavior(spec.announce_prob)


def honest_unveil(state: AliceState, bit: Bit) -> UnveilData:
    """Reveal the honest records with the honestly committed bit."""
    return UnveilData(bit=bit, entries=state.outcomes)


def fabricate_screen_unveil(
    state: AliceState, optics, rng: np.random.Generator, fabricate_from: str = "single"
) -> UnveilData:
    """Unveil bit 1 from a telescope commitment by forging screen positions.

    For each announced round the forged position is drawn from the
    single-slit law of the slit Alice actually observed (left and right
    densities coincide in this model, so one table serves both).  Having
    only which-slit records, she cannot reproduce the two-slit interference
    on the rounds where both slits were open — that is what the verifier's
    dark-fringe check exploits.  The "both_open" variant forges every
    position from the two-slit law instead, which instead mismatches the
    genuinely single-slit rounds.
    """
    if state.measurement is not MeasurementKind.WHICH_SLIT:
        raise ProtocolError("fabricate_screen_unveil needs a which-slit commitment state")
    config = SlitConfig.BOTH_OPEN if fabricate_from == "both_open" else SlitConfig.LEFT_ONLY
    pdf = cached_screen_pdf(optics, config)
    announced_idx = [i for i, a in enumerate(state.announcements) if a]
    forged = sample_screen_position(pdf, rng, size=len(announced_idx)) if announced_idx else []
    entries: list = [None] * len(state.announcements)
    for j, i in enumerate(announced_idx):
        entries[i] = float(forged[j])
    return UnveilData(bit=Bit.ONE, entries=tuple(entries))


def guess_slit_unveil(state: AliceState, mode: str, optics, rng: np.random.Generator) -> UnveilData:
    """Unveil bit 0 from a screen commitment by guessing slit claims.

    uniform: fair coin per announced round.  posterior: pick the slit whose
    single-slit density is larger at the recorded position; ties (always,
    with the identical-envelope model) break by fair coin.
    """
    if state.measurement is not MeasurementKind.SCREEN:
        raise ProtocolError("guess_slit_unveil needs a screen commitment state")
    entries: list = [None] * len(state.announcements)
    if mode == "posterior":
        pdf_left = cached_screen_pdf(optics, SlitConfig.LEFT_ONLY)
        pdf_right = cached_screen_pdf(optics, SlitConfig.RIGHT_ONLY)
    for i, announced in enumerate(state.announcements):
        if not announced:
            continue
        if mode == "posterior" and state.outcomes[i] is not None:
            x = float(state.outcomes[i])
            dl = float(pdf_left.density[pdf_left.grid.bin_index(x)])
            dr = float(pdf_right.density[pdf_right.grid.bin_index(x)])
            if dl > dr:
                entries[i] = WhichSlit.LEFT
                continue
            if dr > dl:
                entries[i] = WhichSlit.RIGHT
                continue
        entries[i] = WhichSlit.LEFT if rng.random() < 0.5 else WhichSlit.RIGHT
    return UnveilData(bit=Bit.ZERO, entries=tuple(entries))


def no_detection_unveil(state: AliceState, rng: np.random.Generator) -> UnveilData:
    """Unveil bit 0 with uniform slit claims for every announced round."""
    entries: list = [None] * len(state.announcements)
    for i, announced in enumerate(state.announcements):
        if announced:
            entries[i] = WhichSlit.LEFT if rng.random() < 0.5 else WhichSlit.RIGHT
    return UnveilData(bit=Bit.ZERO, entries=tuple(entries))


def build_unveil(
    spec: StrategySpec, state: AliceState, params: ProtocolParams, rng: np.random.Generator
) -> UnveilData:
    """Dispatch to the strategy's unveil builder."""
    if spec.kind is StrategyKind.HONEST:
        return honest_unveil(state, spec.bit)
    if spec.kind is StrategyKind.FABRICATE_SCREEN:
        return fabricate_screen_unveil(state, params.optics, rng, spec.fabricate_from)
    if spec.kind is StrategyKind.GUESS_SLIT:
        return guess_slit_unveil(state, spec.mode, params.optics, rng)
    return no_detection_unveil(state, rng)
