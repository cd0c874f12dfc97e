"""Synthetic acoustics: chirp source, sparse echo RIRs and matched filtering.

A room impulse response is a sum of scaled, delayed impulses: the co-located
line-of-sight path plus one reflective path per echo with round-trip delay
2 * distance / c.  The pipeline correlates the received signal against a
(triangularly windowed) copy of the emitted chirp; echo delays are then read
off the correlation peaks relative to the line-of-sight peak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .forward import echo_set
from .geometry import ConvexRoom

SPEED_OF_SOUND = 346.0  # m/s


@dataclass
class Waveform:
    """Uniformly sampled real signal."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        return self.n / self.sample_rate


@dataclass
class Correlation:
    """Cross-correlation output with a recoverable zero-lag index."""

    samples: np.ndarray
    sample_rate: float
    zero_lag_index: int

    def lag_seconds(self, index: float) -> float:
        return (index - self.zero_lag_index) / self.sample_rate


@dataclass
class RirSpec:
    """Sparse room impulse response: per-path delays (s) and gains.

    The first entry is the line-of-sight path and carries the minimal delay.
    """

    delays: np.ndarray
    gains: np.ndarray

    def __post_init__(self) -> None:
        self.delays = np.asarray(self.delays, dtype=float)
        self.gains = np.asarray(self.gains, dtype=float)
        if self.delays.shape != self.gains.shape or self.delays.ndim != 1:
            raise ValueError("delays and gains must be 1-D and equal length")
        if self.delays.size == 0:
            raise ValueError("need at least one path")
        if np.min(self.delays) < 0:
            raise ValueError("delays must be non-negative")
        if self.delays[0] != np.min(self.delays):
            raise ValueError("first path must carry the minimal (line-of-sight) delay")


def make_chirp(f0: float, f1: float, duration: float, sample_rate: float) -> Waveform:
    """Linear frequency sweep from f0 to f1 with unit peak amplitude."""
    if not (0.0 < f0 < f1):
        raise ValueError("need 0 < f0 < f1")
    if f1 >= sample_rate / 2:
        raise ValueError("f1 violates the Nyquist limit")
    if duration <= 0:
        raise ValueError("duration must be positive")
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    phase = 2.0 * math.pi * (f0 * t + 0.5 * (f1 - f0) / duration * t * t)
    return Waveform(np.sin(phase), sample_rate)


def rir_from_room(
    room: ConvexRoom,
    p,
    max_order: int = 1,
    d_max: float = np.inf,
    c: float = SPEED_OF_SOUND,
    tau0: float = 1e-3,
    reflection_gain: float = 0.9,
    los_gain: float = 2.0,
) -> RirSpec:
    """Sparse RIR for a feasible point inside a room.

    Line-of-sight path at ``tau0`` (co-located device latency); each echo at
    ``tau0 + 2 d / c`` with gain ``reflection_gain**order / max(2 d, 1)``.
    The co-located direct path is far shorter than any reflection, so its
    default gain keeps it dominant even where several image sources land at
    the same delay (parallel pairs in symmetric rooms).  Everything
    downstream uses delay differences, so the tau0 value itself is inert.
    """
    echoes = echo_set(room, p, max_order=max_order, d_max=d_max)
    delays = [tau0]
    gains = [los_gain]
    for dist, label in zip(echoes.distances, echoes.labels):
        delays.append(tau0 + 2.0 * dist / c)
        gains.append(reflection_gain ** len(label) / max(2.0 * dist, 1.0))
    order = np.argsort(delays[1:], kind="stable") + 1
    delays = np.concatenate([[delays[0]], np.asarray(delays)[order]])
    gains = np.concatenate([[gains[0]], np.asarray(gains)[order]])
    return RirSpec(delays, gains)


def _fractional_delay_kernel(frac: float, taps: int = 32) -> tuple[np.ndarray, int]:
    """Windowed-sinc interpolation kernel for a sub-sample shift.

    Returns (kernel, center): convolving with the kernel delays a signal by
    ``center + frac`` samples.
    """
    center = taps // 2 - 1
    x = np.arange(taps) - center - frac
    window = np.where(np.abs(x) <= taps / 2, 0.5 * (1.0 + np.cos(2 * math.pi * x / taps)), 0.0)
    return np.sinc(x) * window, center


def simulate_received(
    s: Waveform,
    rir: RirSpec,
    snr_db: float = math.inf,
    seed: int | None = None,
    taps: int = 32,
) -> Waveform:
    """Received signal: delayed/scaled copies of s plus white Gaussian noise.

    Sub-sample delays use band-limited (windowed sinc) interpolation; delays
    that land on a sample grid are applied exactly.  Noise power is set
    relative to the line-of-sight component power; requires a seed whenever
    noise is added.
    """
    fs = s.sample_rate
    max_delay = float(np.max(rir.delays))
    out = np.zeros(s.n + int(math.ceil(max_delay * fs)) + taps)
    for delay, gain in zip(rir.delays, rir.gains):
        d_samp = delay * fs
        i = int(math.floor(d_samp))
        frac = d_samp - i
        if frac < 1e-9 or frac > 1 - 1e-9:
            i = int(round(d_samp))
            out[i : i + s.n] += gain * s.samples
        else:
            kernel, center = _fractional_delay_kernel(frac, taps)
            shifted = np.convolve(s.samples, kernel)
            start = i - center
            lo = max(0, -start)
            out[start + lo : start + shifted.size] += gain * shifted[lo:]
    if math.isfinite(snr_db):
        if seed is None:
            raise ValueError("seed is required when adding noise")
        rng = np.random.default_rng(seed)
        p_los = rir.gains[0] ** 2 * float(np.mean(s.samples**2))
        noise_std = math.sqrt(p_los / 10.0 ** (snr_db / 10.0))
        out = out + rng.normal(0.0, noise_std, size=out.size)
    return Waveform(out, fs)


def correlate_windowed(
    r: Waveform, s: Waveform, window: str = "triangular"
) -> Correlation:
    """Full cross-correlation of r against the (windowed) template s.

    ``window="triangular"`` tapers the template with a symmetric triangle,
    which trades a slightly wider main lobe for much lower sidelobes;
    ``window="none"`` correlates against the raw template.
    """
    if r.sample_rate != s.sample_rate:
        raise ValueError("sample rates must match")
    if window == "triangular":
        template = s.samples * np.bartlett(s.n)
    elif window == "none":
        template = s.samples
    else:
        raise ValueError(f"unknown window {window!r}")
    out = sps.correlate(r.samples, template, mode="full", method="fft")
    return Correlation(out, r.sample_rate, zero_lag_index=s.n - 1)
