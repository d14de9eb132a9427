"""Experiment configuration: embedded TOML defaults, file loading, overrides.

A configuration document has four sections — [optics], [protocol],
[strategy], [run] — whose keys mirror the corresponding dataclass fields.
Unknown sections or keys are errors, not warnings: a typo that silently
falls back to a default would quietly change an experiment.

The config hash recorded in output headers covers everything that affects
results (optics, protocol, strategy, trials, sweep); it deliberately
excludes threads and output paths, which must never change the bytes
produced.
"""

from __future__ import annotations

import hashlib
import json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass

from .optics import OpticsParams
from .protocol import Bit, ProtocolParams
from .strategies import StrategyKind, StrategySpec


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG_TOML = """\
# Default experiment configuration.  Values mirror the library defaults:
# red-diode wavelength, slit pair on a 2 m throw, +/-5 cm screen window.

[optics]
wavelength_m = 670e-9
slit_width_m = 20e-6
slit_separation_m = 100e-6
screen_distance_m = 2.0
screen_half_width_m = 0.05
n_bins = 1024
efficiency_eta = 1.0

[protocol]
n_rounds = 60
significance_alpha = 0.01
master_seed = 0

[strategy]
# kind: honest | fabricate_screen | guess_slit | no_detection
kind = "honest"
bit = 1                  # honest only: the committed bit
mode = "uniform"         # guess_slit only: uniform | posterior
announce_prob = 0.6666666666666666   # no_detection only
fabricate_from = "single"            # fabricate_screen only: single | both_open

[run]
trials = 2000
sweep_N = [12, 24, 36, 48]
threads = 1
# Wall-clock delay between commit and unveil; recorded for documentation
# only, no statistical role.
unveil_delay_s = 0.0
"""

_OPTICS_KEYS = {
    "wavelength_m": "wavelength",
    "slit_width_m": "slit_width_a",
    "slit_separation_m": "slit_separation_d",
    "screen_distance_m": "distance_L",
    "screen_half_width_m": "screen_half_width_W",
    "n_bins": "n_bins",
    "efficiency_eta": "efficiency_eta",
}
_PROTOCOL_KEYS = ("n_rounds", "significance_alpha", "master_seed")
_STRATEGY_KEYS = ("kind", "bit", "mode", "announce_prob", "fabricate_from")
_RUN_KEYS = ("trials", "sweep_N", "threads", "unveil_delay_s")
_INT_KEYS = {"n_bins", "n_rounds", "master_seed", "bit", "trials", "threads"}


@dataclass(frozen=True)
class ExperimentConfig:
    optics: OpticsParams
    protocol: ProtocolParams
    strategy: StrategySpec
    trials: int
    sweep_n: tuple[int, ...] | None
    output_path: str | None
    master_seed: int
    threads: int
    unveil_delay_s: float

    def __post_init__(self) -> None:
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if self.sweep_n is not None:
            if not all(isinstance(n, int) and n >= 0 for n in self.sweep_n):
                raise ConfigError("sweep_N entries must be nonnegative integers")
            if list(self.sweep_n) != sorted(set(self.sweep_n)):
                raise ConfigError("sweep_N must be strictly increasing")
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ConfigError(f"threads must be a positive integer, got {self.threads!r}")
        if self.protocol.master_seed != self.master_seed:
            raise ConfigError("protocol seed must equal the experiment master seed")


def _check_keys(data: dict, section: str, allowed) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown config key: [{section}].{key}")


def _coerce(section: str, key: str, value):
    if isinstance(value, bool):
        raise ConfigError(f"[{section}].{key} must be a number, got a boolean")
    if key in _INT_KEYS:
        if not isinstance(value, int):
            raise ConfigError(f"[{section}].{key} must be an integer, got {value!r}")
        return value
    if key in ("significance_alpha", "announce_prob", "unveil_delay_s") or section == "optics":
        if not isinstance(value, (int, float)):
            raise ConfigError(f"[{section}].{key} must be a number, got {value!r}")
        return float(value)
    return value


def _strategy_from_section(sec: dict) -> StrategySpec:
    kind_raw = sec.get("kind", "honest")
    if not isinstance(kind_raw, str):
        raise ConfigError(f"[strategy].kind must be a string, got {kind_raw!r}")
    try:
        kind = StrategyKind(kind_raw.replace("-", "_"))
    except ValueError:
        names = ", ".join(k.value for k in StrategyKind)
        raise ConfigError(f"unknown strategy kind {kind_raw!r} (expected one of: {names})")
    if kind is StrategyKind.HONEST:
        bit = _coerce("strategy", "bit", sec.get("bit", 1))
        if bit not in (0, 1):
            raise ConfigError(f"[strategy].bit must be 0 or 1, got {bit!r}")
        return StrategySpec.honest(Bit(bit))
    if kind is StrategyKind.GUESS_SLIT:
        return StrategySpec.guess_slit(str(sec.get("mode", "uniform")))
    if kind is StrategyKind.NO_DETECTION:
        prob = _coerce("strategy", "announce_prob", sec.get("announce_prob", 2.0 / 3.0))
        return StrategySpec.no_detection(prob)
    source = str(sec.get("fabricate_from", "single")).replace("-", "_")
    return StrategySpec.fabricate_screen(source)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a validated config from a parsed TOML document."""
    _check_keys(data, "", ("optics", "protocol", "strategy", "run"))
    defaults = tomllib.loads(DEFAULT_CONFIG_TOML)

    merged: dict[str, dict] = {}
    for section, allowed in (
        ("optics", _OPTICS_KEYS),
        ("protocol", _PROTOCOL_KEYS),
        ("strategy", _STRATEGY_KEYS),
        ("run", _RUN_KEYS),
    ):
        given = data.get(section, {})
        if not isinstance(given, dict):
            raise ConfigError(f"[{section}] must be a table")
        _check_keys(given, section, allowed)
        merged[section] = {**defaults[section], **given}

    optics_kwargs = {
        field: _coerce("optics", key, merged["optics"][key])
        for key, field in _OPTICS_KEYS.items()
    }
    optics = OpticsParams(**optics_kwargs)

    seed = _coerce("protocol", "master_seed", merged["protocol"]["master_seed"])
    protocol = ProtocolParams(
        n_rounds=_coerce("protocol", "n_rounds", merged["protocol"]["n_rounds"]),
        optics=optics,
        significance_alpha=_coerce(
            "protocol", "significance_alpha", merged["protocol"]["significance_alpha"]
        ),
        master_seed=seed,
    )
    strategy = _strategy_from_section(merged["strategy"])

    run = merged["run"]
    sweep = run.get("sweep_N")
    if sweep is not None:
        if not isinstance(sweep, list):
            raise ConfigError("[run].sweep_N must be a list of integers")
        sweep = tuple(_coerce("run", "n_rounds", n) for n in sweep)

    return ExperimentConfig(
        optics=optics,
        protocol=protocol,
        strategy=strategy,
        trials=_coerce("run", "trials", run["trials"]),
        sweep_n=sweep,
        output_path=None,
        master_seed=seed,
        threads=_coerce("run", "threads", run["threads"]),
        unveil_delay_s=_coerce("run", "unveil_delay_s", run["unveil_delay_s"]),
    )


def load_config(
    path: str | None = None,
    *,
    seed: int | None = None,
    out: str | None = None,
    trials: int | None = None,
    threads: int | None = None,
) -> ExperimentConfig:
    """Load defaults, overlay an optional TOML file, then CLI overrides."""
    if path is None:
        data = {}
    else:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid TOML: {exc}")
    if seed is not None:
        data.setdefault("protocol", {})["master_seed"] = seed
    if trials is not None:
        data.setdefault("run", {})["trials"] = trials
    if threads is not None:
        data.setdefault("run", {})["threads"] = threads
    cfg = config_from_dict(data)
    if out is not None:
        object.__setattr__(cfg, "output_path", out)
    return cfg


def config_hash(cfg: ExperimentConfig) -> str:
    """12-hex digest over every result-affecting field (not threads/paths)."""
    doc = {
        "optics": {
            "wavelength_m": cfg.optics.wavelength,
            "slit_width_m": cfg.optics.slit_width_a,
            "slit_separation_m": cfg.optics.slit_separation_d,
            "screen_distance_m": cfg.optics.distance_L,
            "screen_half_width_m": cfg.optics.screen_half_width_W,
            "n_bins": cfg.optics.n_bins,
            "efficiency_eta": cfg.optics.efficiency_eta,
        },
        "protocol": {
            "n_rounds": cfg.protocol.n_rounds,
            "significance_alpha": cfg.protocol.significance_alpha,
            "master_seed": cfg.master_seed,
        },
        "strategy": {
            "kind": cfg.strategy.kind.value,
            "bit": None if cfg.strategy.bit is None else int(cfg.strategy.bit),
            "mode": cfg.strategy.mode,
            "announce_prob": cfg.strategy.announce_prob,
            "fabricate_from": cfg.strategy.fabricate_from,
        },
        "run": {
            "trials": cfg.trials,
            "sweep_N": None if cfg.sweep_n is None else list(cfg.sweep_n),
            "unveil_delay_s": cfg.unveil_delay_s,
        },
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]
