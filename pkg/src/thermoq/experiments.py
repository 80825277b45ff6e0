"""Synthetic decay experiments and relaxation-rate measurement campaigns.

``simulate_trace`` produces the three standard excited-state-probability
records (relaxation, Ramsey, echo) with optional binomial shot noise at
a given averaging count; ``fit_trace`` inverts a trace back to a decay
rate by nonlinear least squares; ``simulate_campaign`` chains the two
over a long tick grid, drawing the instantaneous true rate from a
supplied source, to produce the estimator-noise-broadened rate-vs-time
series that spectral analysis consumes.

The campaign layer is mechanism-agnostic: whatever makes the true rate
move (microscopic defect dynamics, photon-number drift, nothing at all)
is the source's business; this module only measures it the way an
experiment would, one shot-noise-limited trace at a time.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import fitting
from .errors import DomainError, FitError, NoDecayError
from .tlssim import TimeSeries

_KINDS = ("relaxation", "ramsey", "echo")
_CAMPAIGN_TRACE_POINTS = 25
_CAMPAIGN_TRACE_SPAN = 3.0  # decay constants covered by each trace


@dataclass
class ExperimentTrace:
    """One decay record: excited-state probability versus delay.

    ``detuning`` is the programmed Ramsey fringe frequency (rad/s) and
    exists only on ramsey traces; ``n_averages`` is the per-point
    averaging count, or None for a noiseless model curve.
    """

    kind: str
    times: np.ndarray
    p_e: np.ndarray
    detuning: float | None = None
    n_averages: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(
                f"kind must be one of {_KINDS}, got {self.kind!r}")
        self.times = np.asarray(self.times, dtype=float)
        self.p_e = np.asarray(self.p_e, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.p_e.shape:
            raise DomainError("times and p_e must be matching 1-d arrays")
        if self.times.size < 1 or self.times[0] != 0.0:
            raise DomainError("times must start at 0")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("times must be strictly ascending")
        if not np.all(np.isfinite(self.p_e)):
            raise DomainError("p_e must be finite")
        if np.any((self.p_e < 0.0) | (self.p_e > 1.0)):
            raise DomainError("p_e must lie in [0, 1]")
        if self.kind == "ramsey":
            if self.detuning is None or not math.isfinite(self.detuning):
                raise DomainError("ramsey traces require a finite detuning")
        elif self.detuning is not None:
            raise DomainError(f"{self.kind} traces carry no detuning")
        if self.n_averages is not None and self.n_averages < 1:
            raise DomainError("n_averages must be a positive count")


def _model_p_e(kind, rate, detuning, times):
    envelope = np.exp(-rate * times)
    if kind == "relaxation":
        return envelope
    if kind == "ramsey":
        return 0.5 + 0.5 * envelope * np.cos(detuning * times)
    return 0.5 + 0.5 * envelope


def simulate_trace(kind, rate, detuning, times, n_averages=None, seed=None):
    """Simulate one decay record, optionally with binomial shot noise.

    Noiseless models: relaxation p = exp(-rate*t); ramsey
    p = 1/2 + exp(-rate*t)*cos(detuning*t)/2; echo
    p = 1/2 + exp(-rate*t)/2.  With ``n_averages`` set, each point is
    replaced by the fraction of successes in that many Bernoulli trials,
    which lands in [0, 1] by construction.
    """
    if kind not in _KINDS:
        raise DomainError(f"kind must be one of {_KINDS}, got {kind!r}")
    if not rate > 0:
        raise DomainError("decay rate must be positive")
    times = np.asarray(times, dtype=float)
    if kind != "ramsey":
        detuning = None
    p = np.clip(_model_p_e(kind, rate, detuning, times), 0.0, 1.0)
    if n_averages is not None:
        if n_averages < 1:
            raise DomainError("n_averages must be a positive count")
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        p = rng.binomial(n_averages, p) / n_averages
    return ExperimentTrace(kind, times, p, detuning, n_averages)


def _initial_rate(times, decaying):
    """Log-linear slope of the decaying part, with a coarse fallback."""
    span = times[-1]
    floor = max(decaying.max() * 0.05, 1e-12)
    sel = decaying > floor
    if np.sum(sel) >= 3:
        try:
            fit = fitting.linear_fit(times[sel], np.log(decaying[sel]))
            slope = fit.parameters["slope"]
            if slope < 0:
                return -slope
        except FitError:
            pass
    return 2.0 / span


def fit_trace(trace: ExperimentTrace) -> fitting.FitResult:
    """Fit the matching decay model; returns rate with 1-sigma error.

    Raises NoDecayError when the fitted rate is not positive at 2 sigma
    (or the fit cannot be formed at all, e.g. on a flat trace), and
    DomainError when the record is too short or spans fewer than 1.5
    fitted decay constants.
    """
    times, p = trace.times, trace.p_e
    if times.size < 8:
        raise DomainError("trace fit needs at least 8 points")

    if trace.kind == "ramsey":
        offset0 = float(p.mean())
        amplitude0 = float(p[0] - offset0)
        names = ("rate", "detuning", "amplitude", "offset")
        initial = [2.0 / times[-1], trace.detuning, amplitude0, offset0]

        def residuals(params):
            rate, detuning, amplitude, offset = params
            model = offset + amplitude * np.exp(-rate * times) * np.cos(
                detuning * times)
            return model - p
    else:
        offset0 = float(p.min())
        amplitude0 = float(p[0] - offset0)
        decaying = p - offset0
        names = ("rate", "amplitude", "offset")
        initial = [_initial_rate(times, decaying), amplitude0, offset0]

        def residuals(params):
            rate, amplitude, offset = params
            return offset + amplitude * np.exp(-rate * times) - p

    try:
        result = fitting.least_squares(residuals, initial, names=names)
    except FitError as exc:
        raise NoDecayError(f"trace fit failed: {exc}") from exc
    rate = result.parameters["rate"]
    if not rate > 2 * result.stderr("rate"):
        raise NoDecayError("fitted rate is not positive at 2 sigma")
    if times[-1] * rate < 1.5:
        raise DomainError("trace spans fewer than 1.5 fitted decay constants")
    return result


@dataclass(frozen=True)
class CampaignConfig:
    """Long-run measurement schedule: tick rate, span, averaging, seed."""

    point_rate: float
    duration: float
    n_averages: int
    temperature: float
    seed: int

    def __post_init__(self):
        if not self.point_rate > 0:
            raise DomainError("point_rate must be positive")
        if self.duration * self.point_rate < 64:
            raise DomainError("campaign needs at least 64 points")
        if self.n_averages < 1:
            raise DomainError("n_averages must be a positive count")
        if self.temperature < 0:
            raise DomainError("temperature must be non-negative")


@dataclass(frozen=True)
class CampaignResult:
    """Fitted-rate series plus the ticks whose fits carried no decay.

    Gap ticks hold the previous successful estimate (the first one, for
    leading gaps) so the series stays finite and uniformly sampled.
    """

    series: TimeSeries
    gap_indices: tuple


def simulate_campaign(config: CampaignConfig, gamma1_source) -> CampaignResult:
    """Measure a drifting relaxation rate the way an experiment would.

    ``gamma1_source`` is either a TimeSeries of true rates (sampled by
    zero-order hold) or a callable t -> rate.  Each campaign tick
    simulates one shot-noise-limited relaxation trace at the
    instantaneous true rate and records the fitted rate; ticks whose
    fit shows no significant decay become gaps.
    """
    if isinstance(gamma1_source, TimeSeries):
        source_ts = gamma1_source

        def true_rate(t):
            index = int((t - source_ts.t0) // source_ts.dt)
            return float(source_ts.values[
                min(max(index, 0), source_ts.values.size - 1)])
    else:
        true_rate = gamma1_source

    n_points = int(round(config.duration * config.point_rate))
    dt = 1.0 / config.point_rate
    children = np.random.SeedSequence(config.seed).spawn(n_points)
    values = np.empty(n_points)
    gaps = []
    last_good = None
    for i, child in enumerate(children):
        rate_true = true_rate(i * dt)
        if not rate_true > 0:
            raise DomainError("gamma1 source produced a non-positive rate")
        trace_times = np.linspace(
            0.0, _CAMPAIGN_TRACE_SPAN / rate_true, _CAMPAIGN_TRACE_POINTS)
        trace = simulate_trace("relaxation", rate_true, None, trace_times,
                               n_averages=config.n_averages,
                               seed=int(child.generate_state(1)[0]))
        try:
            values[i] = fit_trace(trace).parameters["rate"]
            last_good = values[i]
        except (NoDecayError, DomainError):
            # DomainError here can only be the fitted-span check (the
            # grid always has 25 points): a wild fit at low averaging
            # is as unusable as no decay, so both become gaps.
            gaps.append(i)
            values[i] = math.nan if last_good is None else last_good
    if last_good is None:
        raise FitError("every campaign tick failed to fit a decay")
    first_good = values[np.isfinite(values)][0] if gaps else None
    for i in gaps:
        if not math.isfinite(values[i]):
            values[i] = first_good
        else:
            break
    series = TimeSeries(0.0, dt, values, seed_used=config.seed)
    return CampaignResult(series=series, gap_indices=tuple(gaps))
