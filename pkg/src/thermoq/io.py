"""CSV interchange with fixed schemas and lossless numeric rendering.

Frequency-like columns are stored on disk in Hz (omega/2pi) while the
in-memory API is rad/s throughout.  The Hz boundary is crossed with
exact rational arithmetic so a write-then-read cycle reproduces every
IEEE double bit-for-bit; a naive divide/multiply by 2*pi perturbs
roughly one value in eight by one ulp.  Plain columns are rendered with
17 significant digits, which also round-trips doubles exactly.  The
field separator is always "," and the decimal mark always ".",
independent of locale.
"""

from __future__ import annotations

from decimal import Decimal, InvalidOperation, localcontext
from fractions import Fraction
from pathlib import Path

import numpy as np

from .cavity import StarkSweepPoint
from .constants import TWO_PI
from .errors import CsvFormatError
from .spectral import Spectrum
from .tlssim import TimeSeries

TIME_SERIES_HEADER = ("time_s", "gamma1_hz")
SPECTRUM_HEADER = ("freq_hz", "psd_w_per_hz")
STARK_HEADER = ("temp_k", "shift_hz")
FLOOR_HEADER = ("temp_k", "psd_w_per_hz")

_TWO_PI_EXACT = Fraction(TWO_PI)


def render_float(x: float) -> str:
    """Render a double with 17 significant digits; parses back exactly."""
    return f"{float(x):.17g}"


def hz_token(omega: float) -> str:
    """Render omega/2pi: 17 significant digits of the exact real quotient.

    Rounding the true quotient (rather than the nearest-double quotient)
    keeps the relative error below half an ulp of omega, so the reader's
    exact multiply-and-round recovers omega without loss.
    """
    omega = float(omega)
    if omega == 0.0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = 17
        return str(Decimal(omega) / Decimal(TWO_PI))


def _from_hz_token(token: str, row: int, column: str) -> float:
    try:
        hz = Decimal(token)
        value = float(Fraction(hz) * _TWO_PI_EXACT)
    except (InvalidOperation, ValueError, OverflowError, ZeroDivisionError):
        raise CsvFormatError(
            f"row {row}: could not parse {token!r} in column '{column}'"
        ) from None
    if not np.isfinite(value):
        raise CsvFormatError(f"row {row}: non-finite value in column '{column}'")
    return value


def _parse_plain(token: str, row: int, column: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise CsvFormatError(
            f"row {row}: could not parse {token!r} in column '{column}'"
        ) from None
    if not np.isfinite(value):
        raise CsvFormatError(f"row {row}: non-finite value in column '{column}'")
    return value


def _read_rows(path, header: tuple) -> list:
    """Return [(row_number, (token, token)), ...] for a two-column CSV."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    expected = ",".join(header)
    if not lines or lines[0] != expected:
        raise CsvFormatError(f"row 1: expected header '{expected}'")
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise CsvFormatError(
                f"row {number}: expected {len(header)} columns, got {len(parts)}"
            )
        rows.append((number, tuple(parts)))
    if not rows:
        raise CsvFormatError("row 2: no data rows")
    return rows


def _write_lines(path, header: tuple, lines: list) -> None:
    body = "\n".join([",".join(header), *lines])
    Path(path).write_text(body + "\n", encoding="utf-8")


def write_time_series(path, series: TimeSeries) -> None:
    lines = [f"{render_float(t)},{hz_token(v)}"
             for t, v in zip(series.times, series.values)]
    _write_lines(path, TIME_SERIES_HEADER, lines)


def read_time_series(path) -> TimeSeries:
    rows = _read_rows(path, TIME_SERIES_HEADER)
    times = np.array([_parse_plain(t, n, "time_s") for n, (t, _) in rows])
    values = np.array([_from_hz_token(v, n, "gamma1_hz") for n, (_, v) in rows])
    if times.size < 2:
        raise CsvFormatError("need at least 2 rows to infer the sampling interval")
    dt = times[1] - times[0]
    if not dt > 0:
        raise CsvFormatError("row 3: time column must be strictly increasing")
    grid = times[0] + dt * np.arange(times.size)
    if not np.allclose(times, grid, rtol=0.0, atol=1e-9 * dt):
        raise CsvFormatError("time column is not uniformly sampled")
    return TimeSeries(t0=float(times[0]), dt=float(dt), values=values)


def write_spectrum(path, spectrum: Spectrum) -> None:
    lines = [f"{hz_token(w)},{render_float(v)}"
             for w, v in zip(spectrum.omegas, spectrum.values)]
    _write_lines(path, SPECTRUM_HEADER, lines)


def read_spectrum(path) -> Spectrum:
    rows = _read_rows(path, SPECTRUM_HEADER)
    omegas = np.array([_from_hz_token(f, n, "freq_hz") for n, (f, _) in rows])
    values = np.array([_parse_plain(v, n, "psd_w_per_hz") for n, (_, v) in rows])
    return Spectrum(omegas=omegas, values=values)


def write_stark_sweep(path, points) -> None:
    lines = [f"{render_float(p.temperature)},{hz_token(p.delta_omega_q)}"
             for p in points]
    _write_lines(path, STARK_HEADER, lines)


def read_stark_sweep(path) -> list:
    rows = _read_rows(path, STARK_HEADER)
    return [StarkSweepPoint(temperature=_parse_plain(t, n, "temp_k"),
                            delta_omega_q=_from_hz_token(s, n, "shift_hz"))
            for n, (t, s) in rows]


def write_floor_points(path, points) -> None:
    lines = [f"{render_float(t)},{render_float(mu)}" for t, mu in points]
    _write_lines(path, FLOOR_HEADER, lines)


def read_floor_points(path) -> list:
    rows = _read_rows(path, FLOOR_HEADER)
    return [(_parse_plain(t, n, "temp_k"), _parse_plain(mu, n, "psd_w_per_hz"))
            for n, (t, mu) in rows]
