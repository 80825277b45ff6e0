"""Monte Carlo generation of fluctuating relaxation-rate time series.

Two generators: a microscopic two-level-system (TLS) ensemble whose
members telegraph-switch their frequencies and imprint Lorentzian
contributions on gamma1(t), and a phenomenological generator with
exactly controllable spectral content (an omega^-beta branch crossing
over into a white floor at a prescribed knee).

Temperature enters the microscopic model only as a linear scale factor
T/T_ref (T_ref = 1 K) on the switching rates -- the simplest monotone
thermal-activation proxy; no quantitative microscopic rate law is
asserted.  Telegraph switching is event-driven (exponential waiting
times), which keeps the statistics correct for switch rates far below
the sampling rate.

Every realization derives its random stream from the integer seed (one
independent substream per TLS), so results are reproducible regardless
of execution parallelism.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import TWO_PI, hbar
from .errors import DomainError, NonNormalizableError

T_REF = 1.0  # K, reference temperature of the switching-rate scale


@dataclass(frozen=True)
class Tls:
    """One two-level system.

    epsilon and delta_t are the asymmetry and tunnel-splitting energies
    (J); coupling is the maximum contribution to gamma1 when resonant
    (rad/s); linewidth (rad/s) sets its Lorentzian footprint;
    switch_rate (1/s) and jump (rad/s) parametrize the telegraph motion
    of its center frequency between omega_tls +/- jump/2.
    """

    epsilon: float
    delta_t: float
    coupling: float
    linewidth: float
    switch_rate: float
    jump: float

    def __post_init__(self):
        for name in ("epsilon", "delta_t", "coupling", "linewidth", "switch_rate", "jump"):
            if not getattr(self, name) > 0:
                raise DomainError(f"Tls.{name} must be strictly positive")

    @property
    def omega_tls(self) -> float:
        """Excitation frequency sqrt(epsilon^2 + delta_t^2)/hbar, rad/s."""
        return math.hypot(self.epsilon, self.delta_t) / hbar


@dataclass(frozen=True)
class EnsembleConfig:
    """Sampling parameters of the TLS ensemble.

    epsilon follows the density ~ epsilon^x_exponent on (0, epsilon_max];
    delta_t and switch_rate are log-uniform on their ranges (each must
    span at least one decade).  linewidth_range and jump_fraction fix
    the Lorentzian footprints (free modeling choices, made explicit and
    serializable here); coupling_scale is the per-TLS resonant
    amplitude.
    """

    n_tls: int
    x_exponent: float = 0.0
    epsilon_max: float = hbar * TWO_PI * 10e9
    delta_range: tuple = (hbar * TWO_PI * 1e9, hbar * TWO_PI * 10e9)
    rate_decades: tuple = (1e-5, 1e-1)
    coupling_scale: float = TWO_PI * 10e3
    base_gamma1: float = TWO_PI * 3.9e6
    seed: int = 0
    linewidth_range: tuple = (TWO_PI * 1e9, TWO_PI * 10e9)
    jump_fraction: float = 0.5

    def __post_init__(self):
        if self.n_tls < 0:
            raise DomainError("n_tls must be >= 0")
        if self.n_tls > 0:
            for name in ("delta_range", "rate_decades"):
                lo, hi = getattr(self, name)
                # log-space comparison so an exact one-decade span passes
                # regardless of rounding in hi / (10 * lo)
                if not (0 < lo and math.log10(hi / lo) >= 1 - 1e-9):
                    raise DomainError(f"{name} must span at least one decade")
            lo, hi = self.linewidth_range
            if not 0 < lo <= hi:
                raise DomainError("linewidth_range must be positive and ordered")
            if not self.epsilon_max > 0:
                raise DomainError("epsilon_max must be > 0")
            if not self.jump_fraction > 0:
                raise DomainError("jump_fraction must be > 0")
        if self.coupling_scale < 0 or self.base_gamma1 < 0:
            raise DomainError("coupling_scale and base_gamma1 must be >= 0")


@dataclass(eq=False)
class TimeSeries:
    """Uniformly sampled record of a fluctuating quantity.

    values are rad/s for gamma1 series; seed_used records provenance.
    """

    t0: float
    dt: float
    values: np.ndarray
    seed_used: int | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not self.dt > 0:
            raise DomainError("dt must be > 0")
        if self.values.size < 2:
            raise DomainError("a time series needs at least 2 samples")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("time series values must be finite")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)


def _log_uniform(rng, lo, hi, n):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


def sample_ensemble(config: EnsembleConfig) -> list[Tls]:
    """Draw a TLS ensemble from the configured distributions.

    Deterministic given config.seed.  Raises NonNormalizableError for
    x_exponent <= -1 (epsilon^x is not normalizable on (0, epsilon_max]).
    """
    if config.x_exponent <= -1:
        raise NonNormalizableError(
            f"epsilon^x density with x = {config.x_exponent} is not normalizable"
        )
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
    n = config.n_tls
    # inverse-CDF sampling of p(eps) ~ eps^x on (0, eps_max]
    u = 1.0 - rng.random(n)  # in (0, 1]
    eps = config.epsilon_max * u ** (1.0 / (1.0 + config.x_exponent))
    delta = _log_uniform(rng, *config.delta_range, n)
    rate = _log_uniform(rng, *config.rate_decades, n)
    linewidth = _log_uniform(rng, *config.linewidth_range, n)
    return [
        Tls(
            epsilon=float(eps[i]),
            delta_t=float(delta[i]),
            coupling=float(config.coupling_scale),
            linewidth=float(linewidth[i]),
            switch_rate=float(rate[i]),
            jump=float(config.jump_fraction * linewidth[i]),
        )
        for i in range(n)
    ]


def _telegraph_states(rng, rate: float, times: np.ndarray, duration: float) -> np.ndarray:
    """State (+/-1) of a symmetric telegraph process at the sample times."""
    state0 = 1 if rng.random() < 0.5 else -1
    if rate <= 0:
        return np.full(times.size, state0)
    switch_times = []
    total = 0.0
    chunk = max(16, int(rate * duration * 1.2) + 16)
    while total <= duration:
        waits = rng.exponential(1.0 / rate, chunk)
        cum = total + np.cumsum(waits)
        switch_times.append(cum)
        total = float(cum[-1])
    switch_times = np.concatenate(switch_times)
    n_switches = np.searchsorted(switch_times, times, side="right")
    return np.where(n_switches % 2 == 0, state0, -state0)


def simulate_microscopic(ensemble, omega_q: float, T: float, duration: float,
                         dt: float, seed: int, *, base_gamma1: float = 0.0) -> TimeSeries:
    """Simulate gamma1(t) = base_gamma1 + sum of telegraphing Lorentzians.

    Each TLS switches its center frequency between omega_tls +/- jump/2
    at the temperature-scaled rate switch_rate * (T/T_ref), with exact
    exponential waiting times; its contribution at time t is
    coupling * (linewidth/2)^2 / [(linewidth/2)^2 + (omega_q - omega(t))^2].
    Identical output for identical seed, independent of parallelism.
    """
    if not dt > 0:
        raise DomainError("dt must be > 0")
    if duration < 10 * dt:
        raise DomainError("duration must be at least 10 * dt")
    if T < 0:
        raise DomainError("temperature must be >= 0")
    n = int(round(duration / dt))
    times = dt * np.arange(n)
    values = np.full(n, float(base_gamma1))
    children = np.random.SeedSequence(seed).spawn(len(list(ensemble))) if ensemble else []
    for tls, child in zip(ensemble, children):
        rng = np.random.Generator(np.random.PCG64(child))
        state = _telegraph_states(rng, tls.switch_rate * (T / T_REF), times, duration)
        half = tls.linewidth / 2
        v_up = tls.coupling * half**2 / (half**2 + (omega_q - (tls.omega_tls + tls.jump / 2)) ** 2)
        v_dn = tls.coupling * half**2 / (half**2 + (omega_q - (tls.omega_tls - tls.jump / 2)) ** 2)
        values += np.where(state == 1, v_up, v_dn)
    return TimeSeries(t0=0.0, dt=dt, values=values, seed_used=seed)


def simulate_phenomenological(mean: float, beta: float, knee: float, white_sigma: float,
                              duration: float, dt: float, seed: int) -> TimeSeries:
    """Gaussian series with one-sided PSD  mu (omega/knee)^-beta + mu.

    The white floor mu is set by the per-sample deviation white_sigma
    (mu = 2 white_sigma^2 dt in series units); the omega^-beta branch is
    synthesized by spectral shaping of white noise with its amplitude
    tied to the floor through the knee, so the injected knee is exactly
    the crossover frequency.  white_sigma = 0 therefore yields a
    constant series at ``mean``.  The sample mean is adjusted to
    ``mean`` exactly.
    """
    if not 0 <= beta <= 2:
        raise DomainError("beta must lie in [0, 2]")
    if white_sigma < 0:
        raise DomainError("white_sigma must be >= 0")
    if not knee > 0:
        raise DomainError("knee must be > 0")
    if not dt > 0:
        raise DomainError("dt must be > 0")
    n = int(round(duration / dt))
    if n < 2:
        raise DomainError("need at least 2 samples")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    if white_sigma == 0.0:
        return TimeSeries(0.0, dt, np.full(n, float(mean)), seed_used=seed)

    fluct = white_sigma * rng.standard_normal(n)
    g_white = 2 * white_sigma**2 * dt  # one-sided PSD of the floor, (rad/s)^2/Hz
    n_half = n // 2
    k = np.arange(1, n_half + 1)
    omega_k = TWO_PI * k / (n * dt)
    g_col = g_white * (omega_k / knee) ** (-beta)
    z = rng.standard_normal((k.size, 2))
    coeff = np.zeros(n_half + 1, dtype=complex)
    coeff[1:] = np.sqrt(g_col * n / (4 * dt)) * (z[:, 0] + 1j * z[:, 1])
    if n % 2 == 0:
        coeff[-1] = math.sqrt(g_col[-1] * n / (2 * dt)) * z[-1, 0]
    fluct += np.fft.irfft(coeff, n)
    values = mean + fluct - fluct.mean()
    return TimeSeries(0.0, dt, values, seed_used=seed)


def phenomenological_sigma(beta: float, knee: float, white_sigma: float,
                           duration: float, dt: float) -> float:
    """Expected total standard deviation of ``simulate_phenomenological``."""
    n = int(round(duration / dt))
    if white_sigma == 0.0 or n < 2:
        return 0.0
    g_white = 2 * white_sigma**2 * dt
    df = 1.0 / (n * dt)
    n_half = n // 2
    k = np.arange(1, n_half + 1)
    omega_k = TWO_PI * k / (n * dt)
    g_col = g_white * (omega_k / knee) ** (-beta)
    var_col = float(np.sum(g_col * df))
    if n % 2 == 0:
        var_col -= g_col[-1] * df / 2  # Nyquist carries half a bin
    return math.sqrt(white_sigma**2 + var_col)
