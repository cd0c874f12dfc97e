"""Peak detection on correlator output and conversion to candidate distances.

Works on |m(t)|: the dominant peak is the line-of-sight component; echoes are
local maxima inside the window [t0 + 2*d_min/c, t0 + 2*d_max/c].  Candidates
must be prominent relative to their own height, clear a floor relative to the
line-of-sight magnitude, and pass a greedy minimum-separation selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .acoustic import Correlation, SPEED_OF_SOUND
from .forward import EchoSet


class AllZeroError(ValueError):
    """Correlator output is identically zero."""


@dataclass(frozen=True)
class PeakConfig:
    """Detection window and selection thresholds.

    ``min_separation`` is the minimum TDOA between two kept peaks expressed
    as distance (threshold in lag is ``min_separation / c``), so two echoes
    must differ in half-path distance by at least ``min_separation / 2``.
    ``min_magnitude_ratio`` sets an absolute floor relative to the
    line-of-sight magnitude; ``taper_to_ratio`` lets that floor decay
    linearly across the window (off by default).
    """

    d_min: float
    d_max: float
    min_separation: float
    c: float = SPEED_OF_SOUND
    prominence_ratio: float = 0.3
    max_peaks: int = 10
    min_magnitude_ratio: float = 0.02
    taper_to_ratio: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.d_min < self.d_max):
            raise ValueError("need 0 < d_min < d_max")
        if self.min_separation <= 0:
            raise ValueError("min_separation must be positive")
        if not (0.0 < self.prominence_ratio < 1.0):
            raise ValueError("prominence_ratio must be in (0, 1)")
        if self.c <= 0:
            raise ValueError("speed of sound must be positive")
        if self.max_peaks < 1:
            raise ValueError("max_peaks must be >= 1")


@dataclass(frozen=True)
class DetectedPeak:
    """One correlation peak: absolute lag (s), magnitude and echo distance (m)."""

    lag: float
    magnitude: float
    distance: float


def _parabolic_refine(a: np.ndarray, i: int) -> tuple[float, float]:
    """Sub-sample vertex of the parabola through (i-1, i, i+1)."""
    if i <= 0 or i >= a.size - 1:
        return float(i), float(a[i])
    y0, y1, y2 = a[i - 1], a[i], a[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return float(i), float(y1)
    delta = 0.5 * (y0 - y2) / denom
    delta = max(-0.5, min(0.5, delta))
    return i + delta, float(y1 - 0.25 * (y0 - y2) * delta)


def find_los(m: Correlation) -> DetectedPeak:
    """Global maximum of |m|: the first and dominant line-of-sight peak."""
    a = np.abs(m.samples)
    if a.size == 0 or np.max(a) == 0.0:
        raise AllZeroError("correlator output has no energy")
    i = int(np.argmax(a))
    i_ref, mag = _parabolic_refine(a, i)
    return DetectedPeak(lag=m.lag_seconds(i_ref), magnitude=mag, distance=0.0)


def detect_peaks(m: Correlation, cfg: PeakConfig) -> list[DetectedPeak]:
    """Echo peaks of a correlator output, sorted by lag.

    Local maxima of |m| inside the distance window are kept when their
    prominence (height above the larger flanking minimum) reaches
    ``prominence_ratio`` times their height and they clear the magnitude
    floor; survivors go through greedy largest-first selection discarding
    anything within ``min_separation / c`` lag of an already kept peak.
    Lags are refined by 3-point parabolic interpolation.
    """
    los = find_los(m)
    a = np.abs(m.samples)
    fs = m.sample_rate
    t0 = los.lag
    lo = int(math.ceil((t0 + 2.0 * cfg.d_min / cfg.c) * fs)) + m.zero_lag_index
    hi = int(math.floor((t0 + 2.0 * cfg.d_max / cfg.c) * fs)) + m.zero_lag_index
    lo = max(lo, 1)
    hi = min(hi, a.size - 2)
    if hi <= lo:
        return []

    floor_start = cfg.min_magnitude_ratio * los.magnitude
    floor_end = floor_start
    if cfg.taper_to_ratio is not None:
        floor_end = cfg.taper_to_ratio * los.magnitude

    candidates = []  # (magnitude, index)
    for i in range(lo, hi + 1):
        if not (a[i] >= a[i - 1] and a[i] > a[i + 1]):
            continue
        # flanking minima: walk downhill on each side
        j = i - 1
        while j > 0 and a[j - 1] <= a[j]:
            j -= 1
        left_min = a[j]
        j = i + 1
        while j < a.size - 1 and a[j + 1] <= a[j]:
            j += 1
        right_min = a[j]
        prominence = a[i] - max(left_min, right_min)
        if prominence < cfg.prominence_ratio * a[i]:
            continue
        frac = (i - lo) / max(hi - lo, 1)
        if a[i] < floor_start + (floor_end - floor_start) * frac:
            continue
        candidates.append((float(a[i]), i))

    candidates.sort(key=lambda c: (-c[0], c[1]))
    min_lag_gap = cfg.min_separation / cfg.c
    selected: list[int] = []
    for mag, i in candidates:
        if len(selected) >= cfg.max_peaks:
            break
        lag_i = m.lag_seconds(i)
        if all(abs(lag_i - m.lag_seconds(j)) >= min_lag_gap - 1e-12 for j in selected):
            selected.append(i)

    peaks = []
    for i in sorted(selected):
        i_ref, mag = _parabolic_refine(a, i)
        lag = m.lag_seconds(i_ref)
        dist = (lag - t0) * cfg.c / 2.0
        if cfg.d_min <= dist <= cfg.d_max:
            peaks.append(DetectedPeak(lag=lag, magnitude=mag, distance=dist))
    return peaks


def to_candidate_distances(peaks: list[DetectedPeak]) -> EchoSet:
    """Ungrouped echo set of the detected peak distances."""
    return EchoSet(np.sort([p.distance for p in peaks]), labels=None)
