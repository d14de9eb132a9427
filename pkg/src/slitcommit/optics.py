"""Far-field double-slit optics: tabulated screen densities and measurement sampling.

The physical model is the standard Fraunhofer result for a two-slit aperture
(slit width a, center-to-center separation d > a) illuminated by single
photons of wavelength lambda, observed on a screen at distance L:

    I_single(x)  ∝ sinc^2(pi a x / (lambda L))
    I_double(x)  ∝ sinc^2(pi a x / (lambda L)) * cos^2(pi d x / (lambda L))

Both single-slit configurations share the same envelope (the d/2 lateral
offset is dropped), so screen data alone cannot reveal which slit was open.
Densities are tabulated on a uniform grid over the screen window [-W, W],
normalized over the window, and sampled by inverse CDF with within-bin
uniform jitter.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact
EARTH_DIAMETER = 1.2742e7  # m, mean diameter

# Tabulation contracts.
NORMALIZATION_ATOL = 1e-9
CDF_TERMINAL_ATOL = 1e-12
SYMMETRY_RTOL = 1e-9

# Window-coverage guard: constructing a pdf fails if more than this fraction
# of the pre-truncation probability mass (evaluated on an auxiliary grid
# AUX_GRID_FACTOR times wider than the window) falls outside [-W, W].  The
# sinc^2 envelope has ~1/x^2 tails, so even a well-chosen window clips a few
# percent; the guard exists to reject windows that miss a large share of the
# pattern, not to demand negligible clipping.
MAX_MASS_OUTSIDE_WINDOW = 0.25
AUX_GRID_FACTOR = 4


class OpticsError(ValueError):
    """Invalid optics input or geometry."""


class NoPhotonError(OpticsError):
    """Raised when an operation needs a photon but both slits are closed."""


class WindowTooNarrowError(OpticsError):
    """Raised when the screen window misses too much of the diffraction pattern."""


class SlitConfig(enum.Enum):
    """Bob's per-round slit configuration."""

    BOTH_OPEN = "both_open"
    LEFT_ONLY = "left_only"
    RIGHT_ONLY = "right_only"
    BOTH_CLOSED = "both_closed"

    @property
    def is_open(self) -> bool:
        return self is not SlitConfig.BOTH_CLOSED

    @property
    def is_single(self) -> bool:
        return self in (SlitConfig.LEFT_ONLY, SlitConfig.RIGHT_ONLY)


class WhichSlit(enum.Enum):
    """Outcome of a telescope (which-slit) measurement."""

    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class OpticsParams:
    """Slit geometry, screen window, tabulation resolution, detector efficiency.

    Defaults put ~7 interference fringes (fringe spacing lambda*L/d = 13.4 mm)
    inside the screen window, well within the central diffraction envelope
    (first envelope zero at lambda*L/a = 67 mm > W).
    """

    wavelength: float = 670e-9
    slit_width_a: float = 20e-6
    slit_separation_d: float = 100e-6
    distance_L: float = 2.0
    screen_half_width_W: float = 0.05
    n_bins: int = 1024
    efficiency_eta: float = 1.0

    def __post_init__(self) -> None:
        for name in (
            "wavelength",
            "slit_width_a",
            "slit_separation_d",
            "distance_L",
            "screen_half_width_W",
        ):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise OpticsError(f"{name} must be a positive finite length, got {v!r}")
        if self.slit_separation_d <= self.slit_width_a:
            raise OpticsError(
                "slit_separation_d must exceed slit_width_a "
                f"({self.slit_separation_d!r} <= {self.slit_width_a!r})"
            )
        if not (isinstance(self.n_bins, int) and self.n_bins >= 16 and self.n_bins % 2 == 0):
            raise OpticsError(f"n_bins must be an even integer >= 16, got {self.n_bins!r}")
        if not (0.0 <= self.efficiency_eta <= 1.0):
            raise OpticsError(f"efficiency_eta must lie in [0, 1], got {self.efficiency_eta!r}")

    @property
    def fringe_period(self) -> float:
        """Interference fringe spacing lambda*L/d on the screen."""
        return self.wavelength * self.distance_L / self.slit_separation_d

    @property
    def envelope_zero(self) -> float:
        """Position of the first diffraction-envelope zero lambda*L/a."""
        return self.wavelength * self.distance_L / self.slit_width_a


@dataclass(frozen=True)
class ScreenGrid:
    """Uniform discretization of the screen coordinate over [-W, W]."""

    centers: np.ndarray
    bin_width: float

    def __post_init__(self) -> None:
        self.centers.flags.writeable = False

    @property
    def n_bins(self) -> int:
        return self.centers.size

    @property
    def half_width(self) -> float:
        return self.centers[-1] + 0.5 * self.bin_width

    @cached_property
    def edges(self) -> np.ndarray:
        e = np.concatenate([self.centers - 0.5 * self.bin_width, [self.half_width]])
        e.flags.writeable = False
        return e

    def bin_index(self, x) -> np.ndarray:
        """Bin index for position(s) x in [-W, W], clipped at the ends."""
        idx = np.floor((np.asarray(x, dtype=float) + self.half_width) / self.bin_width)
        return np.clip(idx, 0, self.n_bins - 1).astype(np.int64)


@dataclass(frozen=True)
class ScreenPdf:
    """Tabulated landing-position density for one slit configuration.

    `config` is None for the incoherent equal mixture of the two single-slit
    densities (identical to either single-slit density in this model, kept as
    a separate constructor for the diagnostic CSV output).
    """

    grid: ScreenGrid
    density: np.ndarray
    cdf: np.ndarray
    params: OpticsParams
    config: SlitConfig | None

    def __post_init__(self) -> None:
        self.density.flags.writeable = False
        self.cdf.flags.writeable = False
        total = float(self.density.sum() * self.grid.bin_width)
        if abs(total - 1.0) > NORMALIZATION_ATOL:
            raise OpticsError(f"density does not integrate to 1 over the window: {total!r}")
        if abs(float(self.cdf[-1]) - 1.0) > CDF_TERMINAL_ATOL:
            raise OpticsError(f"cdf terminal value is not 1: {self.cdf[-1]!r}")
        if np.any(np.diff(self.cdf) < -1e-15) or np.any(self.density < 0):
            raise OpticsError("density/cdf must be non-negative and non-decreasing")

    @property
    def bin_masses(self) -> np.ndarray:
        return self.density * self.grid.bin_width


def _intensity(params: OpticsParams, config: SlitConfig, x) -> np.ndarray:
    """Unnormalized far-field intensity at screen position(s) x."""
    x = np.asarray(x, dtype=float)
    u = x / (params.wavelength * params.distance_L)
    envelope = np.sinc(params.slit_width_a * u) ** 2
    if config is SlitConfig.BOTH_OPEN:
        return envelope * np.cos(np.pi * params.slit_separation_d * u) ** 2
    if config.is_single:
        return envelope
    raise NoPhotonError("no photon distribution exists: both slits are closed")


def _check_window_coverage(params: OpticsParams, config: SlitConfig) -> None:
    """Fail loudly if the window misses too much pre-truncation mass.

    Evaluated by midpoint sums on an AUX_GRID_FACTOR-times wider auxiliary
    grid at the same bin width.
    """
    n_aux = AUX_GRID_FACTOR * params.n_bins
    wide = AUX_GRID_FACTOR * params.screen_half_width_W
    edges = np.linspace(-wide, wide, n_aux + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    intensity = _intensity(params, config, centers)
    total = intensity.sum()
    if total <= 0:
        raise OpticsError("intensity vanishes on the auxiliary grid")
    outside = intensity[np.abs(centers) > params.screen_half_width_W].sum()
    if outside / total > MAX_MASS_OUTSIDE_WINDOW:
        raise WindowTooNarrowError(
            "screen window too narrow: "
            f"{outside / total:.3f} of the diffraction pattern falls outside |x| <= "
            f"{params.screen_half_width_W} (limit {MAX_MASS_OUTSIDE_WINDOW})"
        )


def make_grid(params: OpticsParams) -> ScreenGrid:
    W, n = params.screen_half_width_W, params.n_bins
    bw = 2.0 * W / n
    centers = -W + (np.arange(n) + 0.5) * bw
    return ScreenGrid(centers=centers, bin_width=bw)


def screen_pdf(params: OpticsParams, config: SlitConfig) -> ScreenPdf:
    """Tabulated, window-normalized landing-position density for `config`.

    Raises NoPhotonError for BOTH_CLOSED and WindowTooNarrowError when the
    window coverage guard trips.
    """
    if config is SlitConfig.BOTH_CLOSED:
        raise NoPhotonError("no photon distribution exists: both slits are closed")
    _check_window_coverage(params, config)
    grid = make_grid(params)
    intensity = _intensity(params, config, grid.centers)
    norm = intensity.sum() * grid.bin_width
    density = intensity / norm
    cdf = np.cumsum(density) * grid.bin_width
    cdf /= cdf[-1]
    return ScreenPdf(grid=grid, density=density, cdf=cdf, params=params, config=config)


def mixture_screen_pdf(params: OpticsParams) -> ScreenPdf:
    """Equal incoherent mixture of the LeftOnly and RightOnly densities."""
    left = screen_pdf(params, SlitConfig.LEFT_ONLY)
    right = screen_pdf(params, SlitConfig.RIGHT_ONLY)
    density = 0.5 * (left.density + right.density)
    cdf = np.cumsum(density) * left.grid.bin_width
    cdf /= cdf[-1]
    return ScreenPdf(grid=left.grid, density=density, cdf=cdf, params=params, config=None)


def density_at(params: OpticsParams, config: SlitConfig, x) -> np.ndarray:
    """Continuous normalized density evaluated at exact position(s) x.

    Uses the same window normalization constant as the tabulation, so it
    agrees with ScreenPdf.density at bin centers to machine precision.
    """
    grid = make_grid(params)
    norm = _intensity(params, config, grid.centers).sum() * grid.bin_width
    return _intensity(params, config, x) / norm


def sample_screen_position(pdf: ScreenPdf, rng: np.random.Generator, size: int | None = None):
    """Landing position(s) drawn from the tabulated density.

    Inverse-CDF sampling with uniform within-bin interpolation; returns a
    float for size=None, else an ndarray of length `size`.
    """
    scalar = size is None
    u = rng.random(1 if scalar else size)
    idx = np.searchsorted(pdf.cdf, u, side="left")
    idx = np.minimum(idx, pdf.grid.n_bins - 1)
    cdf_below = np.where(idx > 0, pdf.cdf[np.maximum(idx - 1, 0)], 0.0)
    bw = pdf.grid.bin_width
    dens = pdf.density[idx]
    # Offset inside the bin; a zero-density bin can only be hit on an exact
    # cdf tie, in which case the midpoint is as good as any point.
    offset = np.where(dens > 0, (u - cdf_below) / np.where(dens > 0, dens, 1.0), 0.5 * bw)
    x = pdf.grid.edges[idx] + np.clip(offset, 0.0, bw)
    return float(x[0]) if scalar else x


def sample_which_slit(config: SlitConfig, rng: np.random.Generator) -> WhichSlit:
    """Telescope outcome: the open slit, or a fair coin when both are open."""
    if config is SlitConfig.LEFT_ONLY:
        return WhichSlit.LEFT
    if config is SlitConfig.RIGHT_ONLY:
        return WhichSlit.RIGHT
    if config is SlitConfig.BOTH_OPEN:
        return WhichSlit.LEFT if rng.random() < 0.5 else WhichSlit.RIGHT
    raise NoPhotonError("no photon to observe: both slits are closed")


def photon_arrives(config: SlitConfig, params: OpticsParams, rng: np.random.Generator) -> bool:
    """Whether a photon is detected this round (False for closed slits)."""
    if not config.is_open:
        return False
    if params.efficiency_eta >= 1.0:
        return True
    return bool(rng.random() < params.efficiency_eta)


def fringe_visibility(pdf: ScreenPdf, window_half_width: float) -> float:
    """(Imax - Imin)/(Imax + Imin) over tabulated bins within the window.

    The window (full width 2*window_half_width) must contain at least one
    full fringe period lambda*L/d.
    """
    period = pdf.params.fringe_period
    if 2.0 * window_half_width < period * (1.0 - 1e-12):
        raise OpticsError(
            f"visibility window (full width {2 * window_half_width}) must contain at "
            f"least one fringe period ({period})"
        )
    sel = np.abs(pdf.grid.centers) <= window_half_width
    if not np.any(sel):
        raise OpticsError("visibility window contains no grid bins")
    vmax = float(pdf.density[sel].max())
    vmin = float(pdf.density[sel].min())
    if vmax + vmin == 0.0:
        return 0.0
    return (vmax - vmin) / (vmax + vmin)


def fringe_phase(x, params: OpticsParams) -> np.ndarray:
    """Position folded to fringe phase in [0, 1): phase 0 = bright, 0.5 = dark."""
    return np.mod(np.asarray(x, dtype=float) / params.fringe_period, 1.0)


def dark_fringe_bin_mask(pdf: ScreenPdf) -> np.ndarray:
    """Boolean mask of grid bins lying in the dark half of each fringe period.

    A bin is dark when cos(2*pi*x_center/period) < 0, i.e. its center sits in
    the low half of the cos^2 fringe profile.
    """
    return np.cos(2.0 * np.pi * pdf.grid.centers / pdf.params.fringe_period) < 0.0


def dark_fringe_mass(pdf: ScreenPdf) -> float:
    """Tabulated probability mass of the dark-fringe bin set."""
    return float(pdf.bin_masses[dark_fringe_bin_mask(pdf)].sum())


def count_dark_hits(positions, pdf: ScreenPdf) -> int:
    """Number of positions landing in dark-fringe bins (bin-index classified)."""
    positions = np.asarray(positions, dtype=float)
    if positions.size == 0:
        return 0
    mask = dark_fringe_bin_mask(pdf)
    return int(mask[pdf.grid.bin_index(positions)].sum())


def fringe_visibility_from_positions(positions, params: OpticsParams) -> float:
    """Cosine-quadrature visibility estimate from sampled landing positions.

    For a density envelope(x)*(1 + V*cos(2*pi*x/period))/Z the statistic
    2*mean(cos(2*pi*x_j/period)) estimates V: the envelope contributes no
    fringe-frequency component (its transform has support below d/(lambda*L)
    since d > a), so fringeless data gives 0 in expectation.  Clipped to
    [0, 1]; returns 0.0 for an empty sample.
    """
    positions = np.asarray(positions, dtype=float)
    if positions.size == 0:
        return 0.0
    v = 2.0 * float(np.mean(np.cos(2.0 * np.pi * positions / params.fringe_period)))
    return float(np.clip(v, 0.0, 1.0))


def wavefront_extent(delta_t: float) -> float:
    """Radius c*delta_t reached by a photon wavefront after delta_t seconds."""
    if delta_t < 0:
        raise OpticsError(f"delta_t must be nonnegative, got {delta_t!r}")
    return SPEED_OF_LIGHT * delta_t


def wavefront_earth_ratio(delta_t: float) -> float:
    """Wavefront extent expressed in Earth diameters."""
    return wavefront_extent(delta_t) / EARTH_DIAMETER
