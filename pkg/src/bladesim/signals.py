"""Post-processing of simulated displacement histories.

Amplitude spectra are single-sided and calibrated so that a sinusoid of
unit amplitude centred on a frequency bin reads 1.0 in that bin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TimeSeries",
    "Spectrum",
    "Spectrogram",
    "radial",
    "spectrum",
    "stft",
    "stage_difference_spectrum",
    "band_amplitude",
]


@dataclass(frozen=True)
class TimeSeries:
    dt: float
    start: float
    channels: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        lengths = {len(v) for v in self.channels.values()}
        if len(lengths) > 1:
            raise ValueError("all channels must have equal length")

    def __len__(self):
        return len(next(iter(self.channels.values()))) if self.channels else 0

    def __getitem__(self, name):
        return self.channels[name]

    @property
    def time(self) -> np.ndarray:
        return self.start + self.dt * np.arange(len(self))

    def window(self, t0: float, t1: float | None = None) -> "TimeSeries":
        """Samples with ``t0 <= time < t1``."""
        t = self.time
        mask = t >= t0 - 1e-12 * self.dt
        if t1 is not None:
            mask &= t < t1 - 1e-12 * self.dt
        idx = np.flatnonzero(mask)
        start = t[idx[0]] if len(idx) else t0
        return TimeSeries(self.dt, float(start), {k: v[idx] for k, v in self.channels.items()})


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    n_samples: int

    def peak(self, fmin: float = 0.0, fmax: float = np.inf) -> tuple[float, float]:
        """``(frequency, amplitude)`` of the largest bin in ``[fmin, fmax]``."""
        band = (self.frequencies >= fmin) & (self.frequencies <= fmax)
        k = np.flatnonzero(band)[np.argmax(self.amplitude[band])]
        return float(self.frequencies[k]), float(self.amplitude[k])

    def at(self, f: float) -> int:
        """Index of the bin nearest to ``f``."""
        return int(np.argmin(np.abs(self.frequencies - f)))

    def energy(self) -> float:
        """Sum of squared samples implied by the single-sided amplitudes (Parseval)."""
        a2 = self.amplitude**2
        n = self.n_samples
        w = np.full(a2.shape, 0.5)
        w[0] = 1.0
        if n % 2 == 0:
            w[-1] = 1.0
        return float(n * np.sum(w * a2))


@dataclass(frozen=True)
class Spectrogram:
    times: np.ndarray
    frequencies: np.ndarray
    grid: np.ndarray  # (n_times, n_frequencies) amplitudes
    window_length: int
    hop: int
    window: np.ndarray


def radial(u_y, u_z) -> np.ndarray:
    """Radial displacement ``sqrt(u_y^2 + u_z^2)``."""
    u_y = np.asarray(u_y, dtype=float)
    u_z = np.asarray(u_z, dtype=float)
    if u_y.shape != u_z.shape:
        raise ValueError("u_y and u_z must have equal length")
    return np.hypot(u_y, u_z)


def _phase(x):
    ph = np.angle(x)
    ph[ph <= -np.pi] = np.pi
    return ph


def spectrum(channel, dt: float) -> Spectrum:
    """Single-sided amplitude and phase spectrum of a real signal."""
    x = np.asarray(channel, dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError("spectrum needs at least two samples")
    X = np.fft.rfft(x)
    amp = np.abs(X) / n
    amp[1:] *= 2.0
    if n % 2 == 0:
        amp[-1] /= 2.0
    return Spectrum(np.fft.rfftfreq(n, dt), amp, _phase(X), n)


def stft(channel, dt: float, window_length: int, hop: int | None = None, window: str = "hann") -> Spectrogram:
    """Moving-window amplitude spectra.

    Each column is a tapered DFT of ``window_length`` samples, advanced by
    ``hop`` samples (default 50% overlap), amplitude-corrected for the
    taper's coherent gain. ``times`` are window centres relative to the
    first sample.
    """
    x = np.asarray(channel, dtype=float)
    n = int(window_length)
    hop = n // 2 if hop is None else int(hop)
    if not 1 < n <= len(x):
        raise ValueError("window_length must lie in (1, len(signal)]")
    if not 0 < hop <= n:
        raise ValueError("hop must lie in (0, window_length]")
    if window == "hann":
        w = np.hanning(n + 1)[:n]  # periodic Hann
    elif window in ("rect", "boxcar"):
        w = np.ones(n)
    else:
        raise ValueError(f"unknown window {window!r}")
    starts = np.arange(0, len(x) - n + 1, hop)
    frames = np.lib.stride_tricks.sliding_window_view(x, n)[starts] * w
    X = np.fft.rfft(frames, axis=1)
    grid = np.abs(X) * (2.0 / w.sum())
    grid[:, 0] /= 2.0
    if n % 2 == 0:
        grid[:, -1] /= 2.0
    times = (starts + n / 2.0) * dt
    return Spectrogram(times, np.fft.rfftfreq(n, dt), grid, n, hop, w)


def stage_difference_spectrum(stage1_radial, stage2_radial, dt: float) -> Spectrum:
    """Spectrum of ``stage2 - stage1`` radial displacement."""
    a = np.asarray(stage1_radial, dtype=float)
    b = np.asarray(stage2_radial, dtype=float)
    if a.shape != b.shape:
        raise ValueError("stage channels must have equal length")
    return spectrum(b - a, dt)


def band_amplitude(channel, dt: float, frequency: float) -> float:
    """Amplitude of one frequency component, by projection on that frequency.

    Exact for a sinusoid when the record spans a whole number of its periods.
    """
    x = np.asarray(channel, dtype=float)
    t = dt * np.arange(len(x))
    z = np.exp(-2j * np.pi * frequency * t)
    return float(2.0 * abs(np.mean(x * z)))
