"""Absorption profiles over one standing-wave period and their peaks.

Profiles live on the periodic grid ``linspace(-pi, pi, n, endpoint=False)``.
Peak search rotates the samples so the global minimum comes first; a peak can
then never straddle the array ends, and prominences computed on the rotated
array equal the circular ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .dressed import branch_decays
from .model import ModelParams, chi_grid
from .roots import branch_curves, level_crossings

DEFAULT_POINTS = 4001
MIN_POINTS = 64
PROMINENCE_FRAC = 0.05
FLAT_TOL = 1e-9

TWO_PI = 2 * math.pi

REGIMES = ("node-localization", "sub-half-wavelength", "multi-peak", "flat", "no-localization")


def wrap(x):
    """Map angles into [-pi, pi)."""
    return (np.asarray(x, dtype=float) + math.pi) % TWO_PI - math.pi


def periodic_grid(n_points: int) -> np.ndarray:
    return np.linspace(-math.pi, math.pi, n_points, endpoint=False)


@dataclass(frozen=True)
class AbsorptionProfile:
    """Absorption (prefactor units) sampled over one period at fixed detuning.

    Degenerate samples are NaN and flagged in ``gaps``.
    """

    kx_grid: np.ndarray
    values: np.ndarray
    params: ModelParams
    delta: float
    gaps: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.kx_grid.shape != self.values.shape or self.kx_grid.ndim != 1:
            raise ValueError("kx_grid and values must be 1-D arrays of equal length")
        if self.kx_grid.size < 3:
            raise ValueError("a profile needs at least 3 samples")
        if self.gaps is None:
            object.__setattr__(self, "gaps", ~np.isfinite(self.values))

    @property
    def step(self) -> float:
        return TWO_PI / self.kx_grid.size

    @property
    def n_gaps(self) -> int:
        return int(np.count_nonzero(self.gaps))

    def filled(self) -> np.ndarray:
        """Values with gaps bridged by periodic linear interpolation."""
        if not self.gaps.any():
            return self.values
        ok = ~self.gaps
        if not ok.any():
            raise ValueError("profile has no finite samples")
        return np.interp(self.kx_grid, self.kx_grid[ok], self.values[ok], period=TWO_PI)

    def spread(self) -> float:
        v = self.values[~self.gaps]
        mean = float(np.mean(v))
        return float((v.max() - v.min()) / mean) if mean != 0 else math.inf


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    fwhm: float
    prominence: float


@dataclass(frozen=True)
class RegimeReport:
    regime: str
    peaks: list
    occupancy: tuple  # subset of ("(-pi,0)", "(0,pi)", "node")
    phi: float = 0.0
    mirror_ok: bool | None = None

    @property
    def positions(self) -> np.ndarray:
        return np.array([p.position for p in self.peaks])


def scan_profile(params: ModelParams, delta: float, n_points: int = DEFAULT_POINTS,
                 backend=None) -> AbsorptionProfile:
    if n_points < MIN_POINTS:
        raise ValueError(f"n_points must be >= {MIN_POINTS}, got {n_points}")
    kx = periodic_grid(n_points)
    _, im = chi_grid(params, float(delta), kx, backend=backend)
    return AbsorptionProfile(kx, np.asarray(im, dtype=float) / params.prefactor,
                             params, float(delta))


def _parabolic(y0, y1, y2):
    den = y0 - 2.0 * y1 + y2
    if den >= 0:
        return 0.0, y1
    off = 0.5 * (y0 - y2) / den
    return off, y1 - 0.25 * (y0 - y2) * off


def find_peaks(profile: AbsorptionProfile, prominence_frac: float = PROMINENCE_FRAC,
               min_prominence: float | None = None) -> list[Peak]:
    """Local maxima with prominence >= prominence_frac * global max.

    ``min_prominence``, when given, replaces the relative threshold with an
    absolute one.  Positions are refined by a 3-point parabola; FWHM is the
    width at half prominence, linearly interpolated (for peaks rising from a
    zero baseline that is the width at half height).
    """
    if not 0 < prominence_frac < 1:
        raise ValueError(f"prominence_frac must lie in (0, 1), got {prominence_frac!r}")
    y = profile.filled()
    n = y.size
    top = float(np.max(y))
    if top <= 0 or (top - float(np.min(y))) <= FLAT_TOL * abs(top):
        return []
    thresh = prominence_frac * top if min_prominence is None else float(min_prominence)
    shift = int(np.argmin(y))
    yr = np.roll(y, -shift)
    idx, props = signal.find_peaks(yr, prominence=thresh)
    if idx.size == 0:
        return []
    widths = signal.peak_widths(yr, idx, rel_height=0.5, prominence_data=(
        props["prominences"], props["left_bases"], props["right_bases"]))[0]
    peaks = []
    for i, prom, w in zip(idx, props["prominences"], widths):
        off, h = _parabolic(yr[i - 1], yr[i], yr[(i + 1) % n])
        pos = wrap(profile.kx_grid[(i + shift) % n] + off * profile.step)
        peaks.append(Peak(float(pos), float(h), float(w * profile.step), float(prom)))
    peaks.sort(key=lambda p: p.position)
    return peaks


def occupancy(peaks, node_tol: float) -> tuple:
    halves = set()
    for p in peaks:
        if abs(math.sin(p.position)) <= node_tol:
            halves.add("node")
        elif p.position < 0:
            halves.add("(-pi,0)")
        else:
            halves.add("(0,pi)")
    return tuple(h for h in ("(-pi,0)", "(0,pi)", "node") if h in halves)


def classify_profile(profile: AbsorptionProfile, prominence_frac: float = PROMINENCE_FRAC,
                     flat_tol: float = FLAT_TOL) -> RegimeReport:
    """Regime of a single profile.

    flat: relative spread <= flat_tol.  node-localization: every peak sits on
    a node.  sub-half-wavelength: at most two peaks, all inside one open
    half-period.  multi-peak: anything else with peaks.  no-localization:
    non-flat without any peak above threshold.
    """
    phi = profile.params.phi
    if profile.spread() <= flat_tol:
        return RegimeReport("flat", [], (), phi)
    peaks = find_peaks(profile, prominence_frac)
    occ = occupancy(peaks, node_tol=2 * profile.step)
    if not peaks:
        regime = "no-localization"
    elif occ == ("node",):
        regime = "node-localization"
    elif len(occ) == 1 and len(peaks) <= 2:
        regime = "sub-half-wavelength"
    else:
        regime = "multi-peak"
    return RegimeReport(regime, peaks, occ, phi)


def mirror_matches(peaks_a, peaks_b, tol: float) -> bool:
    """Whether peaks_b positions are the negated peaks_a positions within tol."""
    if len(peaks_a) != len(peaks_b):
        return False
    a = np.sort(wrap(-np.array([p.position for p in peaks_a])))
    b = np.sort(np.array([p.position for p in peaks_b]))
    d = np.abs(wrap(a - b))
    return bool(np.all(d <= tol))


def classify_regime(profiles, prominence_frac: float = PROMINENCE_FRAC,
                    flat_tol: float = FLAT_TOL) -> dict:
    """Classify profiles that differ only in phi; returns ``{phi: RegimeReport}``.

    Where both phi and phi + pi are present their reports carry the mirror
    check (peaks of one are the negated peaks of the other).
    """
    profiles = list(profiles.values()) if isinstance(profiles, dict) else list(profiles)
    if not profiles:
        return {}
    ref = profiles[0]
    for p in profiles[1:]:
        if p.params.with_(phi=ref.params.phi) != ref.params or p.delta != ref.delta \
                or p.kx_grid.size != ref.kx_grid.size:
            raise ValueError("profiles must share params, delta and grid except phi")
    reports = {p.params.phi: classify_profile(p, prominence_frac, flat_tol) for p in profiles}
    out = {}
    for phi, rep in reports.items():
        partner = next((r for f, r in reports.items()
                        if abs(wrap(f - phi - math.pi)) < 1e-12), None)
        mirror = None
        if partner is not None:
            mirror = mirror_matches(rep.peaks, partner.peaks, tol=2 * ref.step)
        out[phi] = RegimeReport(rep.regime, rep.peaks, rep.occupancy, phi, mirror)
    return out


def scan_regimes(params: ModelParams, delta: float, phis, n_points: int = DEFAULT_POINTS,
                 prominence_frac: float = PROMINENCE_FRAC) -> dict:
    return classify_regime([scan_profile(params.with_(phi=f), delta, n_points) for f in phis],
                           prominence_frac)


# --- peaks against resonance branches --------------------------------------

def branch_values(params: ModelParams, kx) -> np.ndarray:
    """delta1..delta5 at kx, shape (n, 5)."""
    kx = np.atleast_1d(np.asarray(kx, dtype=float))
    order = np.argsort(kx)
    br = branch_curves(params, kx[order])
    cols = np.stack([br.delta1, br.delta2, br.delta3, br.delta4, br.delta5], axis=1)
    out = np.empty_like(cols)
    out[order] = cols
    return out


def branch_slopes(params: ModelParams, kx, h: float = 1e-6) -> np.ndarray:
    kx = np.atleast_1d(np.asarray(kx, dtype=float))
    return (branch_values(params, kx + h) - branch_values(params, kx - h)) / (2 * h)


def nearest_branch(params: ModelParams, delta: float, position: float, n_points: int):
    """(branch number 1..5, |delta_i(position) - delta|, allowed tolerance) of
    the resonance curve closest to ``delta`` at ``position``.

    The tolerance is the larger of the branch linewidth and the detuning
    change across one grid step.
    """
    vals = branch_values(params, position)[0]
    slopes = np.abs(branch_slopes(params, position)[0])
    dec = branch_decays(params, [position])[0]  # (delta5, delta3, delta4)
    bare = max(params.gamma1, params.gamma2)
    widths = np.array([bare, bare, dec[1], dec[2], dec[0]])
    tols = np.maximum(widths, TWO_PI / n_points * slopes)
    miss = np.abs(vals - delta)
    i = int(np.argmin(miss / tols))
    return i + 1, float(miss[i]), float(tols[i])


def branch_peaks(profile: AbsorptionProfile, branch: int, min_prominence: float,
                 window: float | None = None) -> list:
    """Peaks sitting where resonance curve ``branch`` crosses the profile detuning.

    Searches with an absolute prominence floor so weak peaks are kept, then
    keeps the peak nearest each crossing within ``window`` radians.
    """
    params = profile.params
    kx = profile.kx_grid
    curve = branch_values(params, kx)[:, branch - 1]
    hits = level_crossings(kx, curve, profile.delta)
    if hits.size == 0:
        return []
    found = find_peaks(profile, min_prominence=min_prominence)
    if not found:
        return []
    window = window if window is not None else 0.3
    pos = np.array([p.position for p in found])
    chosen = {}
    for h in hits:
        d = np.abs(wrap(pos - h))
        j = int(np.argmin(d))
        if d[j] <= window:
            chosen[j] = found[j]
    return [chosen[j] for j in sorted(chosen)]


def detuning_fwhm(params: ModelParams, kx: float, center: float, half_window: float = 10.0,
                  n_points: int = 20001) -> float:
    """FWHM in detuning of the absorption peak nearest ``center`` at fixed kx.

    This is the direction in which a resonance width equals its dressed-state
    decay rate; widths along kx are additionally scaled by the branch slope.
    """
    dg = np.linspace(center - half_window, center + half_window, n_points)
    _, im = chi_grid(params, dg, float(kx))
    im = np.asarray(im, dtype=float)
    idx, _ = signal.find_peaks(im)
    if idx.size == 0:
        return math.nan
    i = idx[np.argmin(np.abs(dg[idx] - center))]
    w = signal.peak_widths(im, [i], rel_height=0.5)[0][0]
    return float(w * (dg[1] - dg[0]))
