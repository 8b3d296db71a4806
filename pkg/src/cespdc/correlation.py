"""Second-order signal-idler cross-correlation: analytic model, Monte-Carlo
event streams, TDC-style binning, and envelope fitting.

Delay convention: tau = t_signal - t_idler. The unnormalized envelope is the
double exponential exp(-gamma_s tau / 2) for tau > 0 and exp(+gamma_i tau / 2)
for tau < 0 (continuous and equal to 1 at tau = 0). With several doubly
resonant mode pairs the envelope is multiplied by the normalized comb factor
|sum_m sqrt(w_m) exp(i 2 pi delta_m tau)|^2, delta_m the pair's signal
frequency offset from the anchor pair, producing peaks spaced by the cavity
round-trip time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from . import _kernels
from .cavity import pair_photon_fwhm

MAX_SIMULATED_PAIRS = 50_000_000
CDF_GRID_POINTS = 2 ** 16
CDF_SPAN_TIME_CONSTANTS = 10.0


class FitError(RuntimeError):
    """Envelope fit did not converge; carries the last parameter iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass(frozen=True)
class G2Model:
    """gamma_s/gamma_i are angular cavity decay rates; mode_deltas_hz and
    mode_weights describe the contributing pairs (a single pair means a
    filtered, comb-free correlation). background_rate is the uncorrelated
    singles rate per detection channel (Hz) used by the event simulation."""

    gamma_s: float
    gamma_i: float
    round_trip_time_s: float
    mode_deltas_hz: tuple = (0.0,)
    mode_weights: tuple = (1.0,)
    background_rate: float = 0.0

    def __post_init__(self):
        if self.gamma_s <= 0 or self.gamma_i <= 0:
            raise ValueError("decay rates must be positive")
        if len(self.mode_deltas_hz) != len(self.mode_weights) or not self.mode_deltas_hz:
            raise ValueError("mode deltas and weights must align and be non-empty")
        if any(w < 0 for w in self.mode_weights):
            raise ValueError("mode weights must be nonnegative")
        if self.background_rate < 0:
            raise ValueError("background rate must be nonnegative")

    @property
    def envelope_time_constant_s(self) -> float:
        return max(2.0 / self.gamma_s, 2.0 / self.gamma_i)

    @property
    def photon_fwhm_hz(self) -> float:
        """Sub-natural pair linewidth from the mean decay rate."""
        return pair_photon_fwhm(0.5 * (self.gamma_s + self.gamma_i))


def model_from_source(config, pairs, background_rate: float = 0.0) -> G2Model:
    """Build the correlation model for a set of enumerated mode pairs: deltas
    are signal-frequency offsets from the brightest pair, weights the
    linewidth-integrated brightnesses."""
    from .spectrum import brightest_pair

    if not pairs:
        raise ValueError("need at least one mode pair")
    anchor = brightest_pair(pairs)
    fsr_mean = config.cavity.fsr_mean(config.signal_pol, config.idler_pol)
    gamma = config.cavity.decay_rate()
    return G2Model(
        gamma_s=gamma,
        gamma_i=gamma,
        round_trip_time_s=1.0 / fsr_mean,
        mode_deltas_hz=tuple(p.signal_freq_hz - anchor.signal_freq_hz for p in pairs),
        mode_weights=tuple(p.brightness for p in pairs),
        background_rate=background_rate,
    )


def g2_envelope(model: G2Model, tau_s):
    tau = np.asarray(tau_s, dtype=float)
    out = np.where(tau >= 0.0,
                   np.exp(-0.5 * model.gamma_s * tau),
                   np.exp(0.5 * model.gamma_i * tau))
    return out if out.ndim else float(out)


def g2_multimode(model: G2Model, tau_s):
    """Envelope times the normalized mode-beat comb; reduces exactly to the
    envelope for a single pair."""
    env = g2_envelope(model, tau_s)
    if len(model.mode_deltas_hz) == 1:
        return env
    comb = _kernels.comb_factor(np.asarray(tau_s, dtype=float),
                                np.asarray(model.mode_deltas_hz),
                                np.asarray(model.mode_weights))
    out = env * comb
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class DetectionEventStream:
    """Sorted int64 picosecond timestamps per detection channel."""

    signal_ps: np.ndarray
    idler_ps: np.ndarray
    duration_s: float
    seed: int | None = None

    def __len__(self):
        return len(self.signal_ps) + len(self.idler_ps)

    def merged(self):
        """(channel, timestamp_ps) rows in time order, channel in {s, i}."""
        chans = np.concatenate([np.full(len(self.signal_ps), "s"),
                                np.full(len(self.idler_ps), "i")])
        times = np.concatenate([self.signal_ps, self.idler_ps])
        order = np.argsort(times, kind="stable")
        return list(zip(chans[order], times[order]))


def _delay_sampler(model: G2Model):
    span = CDF_SPAN_TIME_CONSTANTS * model.envelope_time_constant_s
    grid = np.linspace(-span, span, CDF_GRID_POINTS)
    pdf = g2_multimode(model, grid)
    cdf = np.concatenate([[0.0], np.cumsum((pdf[1:] + pdf[:-1]) / 2.0 * np.diff(grid))])
    cdf /= cdf[-1]
    # strictly increasing knots only, so interp inverts cleanly
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return grid[keep], cdf[keep]


def simulate_events(model: G2Model, duration_s: float, pair_rate_hz: float,
                    seed: int) -> DetectionEventStream:
    """Monte-Carlo time tags: Poisson pair emissions, signal-idler delays
    drawn from the normalized g2 by inverse-CDF on a dense grid, plus
    uncorrelated background singles on both channels. Deterministic per seed.
    """
    if duration_s <= 0:
        raise ValueError("duration must be positive")
    if pair_rate_hz < 0:
        raise ValueError("pair rate must be nonnegative")
    expected = pair_rate_hz * duration_s
    if expected > MAX_SIMULATED_PAIRS:
        raise ValueError(f"{expected:.2e} expected pairs exceeds the "
                         f"{MAX_SIMULATED_PAIRS:.0e} budget")
    rng = np.random.default_rng(seed)
    n_pairs = rng.poisson(expected)
    t_idler = rng.uniform(0.0, duration_s, n_pairs)
    grid, cdf = _delay_sampler(model)
    tau = np.interp(rng.random(n_pairs), cdf, grid)
    t_signal = t_idler + tau
    streams = []
    for t in (t_signal, t_idler):
        n_bg = rng.poisson(model.background_rate * duration_s)
        t = np.concatenate([t, rng.uniform(0.0, duration_s, n_bg)])
        t = t[(t >= 0.0) & (t <= duration_s)]
        streams.append(np.sort(np.rint(t * 1e12).astype(np.int64)))
    return DetectionEventStream(signal_ps=streams[0], idler_ps=streams[1],
                                duration_s=duration_s, seed=seed)


@dataclass(frozen=True)
class G2Histogram:
    bin_width_s: float
    counts: np.ndarray
    delay_origin: int

    def __post_init__(self):
        if self.bin_width_s <= 0:
            raise ValueError("bin width must be positive")
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")

    @property
    def tau_edges_s(self):
        idx = np.arange(len(self.counts)) - self.delay_origin
        return idx * self.bin_width_s

    @property
    def tau_centers_s(self):
        return self.tau_edges_s + self.bin_width_s / 2.0

    def relative_bin(self, tau_s: float) -> int:
        """Bin index relative to the tau = 0 edge (floor convention)."""
        return int(math.floor(tau_s / self.bin_width_s))


def bin_coincidences(stream: DetectionEventStream, bin_width_s: float = 625e-12,
                     window_s: float = 100e-9) -> G2Histogram:
    """Start-stop histogram of tau = t_signal - t_idler over [-window, window).

    The window is trimmed to a whole number of bins. Bin edges sit on integer
    multiples of the bin width, left-edge convention.
    """
    if bin_width_s <= 0:
        raise ValueError("bin width must be positive")
    bin_ps = int(round(bin_width_s * 1e12))
    half_bins = max(1, int(window_s * 1e12) // bin_ps)
    window_ps = half_bins * bin_ps
    counts = _kernels.bin_pairs(stream.idler_ps, stream.signal_ps, bin_ps, window_ps)
    return G2Histogram(bin_width_s=bin_ps * 1e-12, counts=np.asarray(counts),
                       delay_origin=half_bins)


@dataclass(frozen=True)
class EnvelopeFit:
    gamma_s: float
    gamma_i: float
    peak: float
    background: float
    errors: dict = field(default_factory=dict)
    degenerate: bool = False

    @property
    def photon_fwhm_hz(self) -> float:
        return pair_photon_fwhm(0.5 * (self.gamma_s + self.gamma_i))


def fit_envelope(hist: G2Histogram) -> EnvelopeFit:
    """Weighted least squares of the double-exponential envelope plus a flat
    background; Poisson weights (variance = max(count, 1))."""
    counts = np.asarray(hist.counts, dtype=float)
    if np.count_nonzero(counts) < 50:
        raise FitError("need at least 50 nonzero bins to fit")
    tau = hist.tau_centers_s
    if tau.min() >= 0 or tau.max() <= 0:
        raise FitError("histogram must span both sides of tau = 0")

    def shape(t, gamma_s, gamma_i, peak, background):
        env = np.where(t >= 0.0, np.exp(-0.5 * gamma_s * t), np.exp(0.5 * gamma_i * t))
        return peak * env + background

    bg0 = float(np.median(np.concatenate([counts[: max(1, len(counts)//20)],
                                          counts[-max(1, len(counts)//20):]])))
    peak0 = float(counts.max() - bg0)
    if peak0 <= 0:
        raise FitError("histogram has no peak above background",
                       last_iterate={"background": bg0})
    # crude width estimate from the half-maximum crossings on each side
    above = counts > bg0 + peak0 / 2.0
    t_above = tau[above]
    g_s0 = 2.0 * math.log(2.0) / max(t_above.max(), hist.bin_width_s)
    g_i0 = 2.0 * math.log(2.0) / max(-t_above.min(), hist.bin_width_s)
    p0 = (g_s0, g_i0, peak0, max(bg0, 0.0))
    sigma = np.sqrt(np.maximum(counts, 1.0))
    try:
        popt, pcov = curve_fit(shape, tau, counts, p0=p0, sigma=sigma,
                               absolute_sigma=True, maxfev=20000)
    except RuntimeError as exc:
        raise FitError(f"envelope fit did not converge: {exc}",
                       last_iterate=dict(zip(("gamma_s", "gamma_i", "peak", "background"), p0)))
    perr = np.sqrt(np.diag(pcov))
    names = ("gamma_s", "gamma_i", "peak", "background")
    errors = dict(zip(names, perr))
    degenerate = bool(errors["gamma_s"] > abs(popt[0]) or errors["gamma_i"] > abs(popt[1]))
    return EnvelopeFit(gamma_s=float(popt[0]), gamma_i=float(popt[1]),
                       peak=float(popt[2]), background=float(popt[3]),
                       errors=errors, degenerate=degenerate)


def comb_power_ratio(hist: G2Histogram, frequency_hz: float,
                     background: float | None = None) -> float:
    """Fourier power of the background-subtracted histogram at a given beat
    frequency, relative to DC. A comb at the cavity round-trip rate shows up
    as a ratio of order 0.1; a single-pair stream sits at the noise floor."""
    counts = np.asarray(hist.counts, dtype=float)
    if background is None:
        edge = max(1, len(counts) // 20)
        background = float(np.median(np.concatenate([counts[:edge], counts[-edge:]])))
    sig = counts - background
    tau = hist.tau_centers_s
    dc = np.sum(sig)
    if dc == 0:
        raise ValueError("histogram has no integrated signal")
    amp = np.sum(sig * np.exp(-2j * np.pi * frequency_hz * tau))
    return float(np.abs(amp) ** 2 / dc ** 2)


def comb_period_estimate(model_or_hist, fsr_hint_hz: float) -> float:
    """Comb period (s) from the strongest Fourier component near the hinted
    beat frequency, evaluated on the analytic g2 or a histogram."""
    if isinstance(model_or_hist, G2Histogram):
        tau = model_or_hist.tau_centers_s
        y = np.asarray(model_or_hist.counts, dtype=float)
    else:
        model = model_or_hist
        span = 5.0 * model.envelope_time_constant_s
        tau = np.linspace(-span, span, 1 << 15)
        y = g2_multimode(model, tau)
    y = y - y.mean()
    freqs = np.linspace(0.7 * fsr_hint_hz, 1.3 * fsr_hint_hz, 4001)
    power = np.abs(np.exp(-2j * np.pi * np.outer(freqs, tau)) @ y) ** 2
    return 1.0 / float(freqs[int(np.argmax(power))])


@dataclass(frozen=True)
class RateReport:
    detected_pair_rate: float
    heralding_efficiency: float
    detector_qe: float
    corrected_pair_rate: float
    corrected_heralding: float


def correct_rates(detected_rate, heralding, qe) -> RateReport:
    """Undo the detector quantum efficiency: corrected pair rate and
    heralding are the detected values divided by qe."""
    if not 0.0 < qe <= 1.0:
        raise ValueError("quantum efficiency must be in (0, 1]")
    if detected_rate < 0 or not 0.0 <= heralding <= 1.0:
        raise ValueError("rates must be nonnegative, heralding in [0, 1]")
    return RateReport(
        detected_pair_rate=float(detected_rate),
        heralding_efficiency=float(heralding),
        detector_qe=float(qe),
        corrected_pair_rate=float(detected_rate / qe),
        corrected_heralding=float(heralding / qe),
    )
