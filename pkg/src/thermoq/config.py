"""JSON run configuration: strict schema, one unit conversion at load.

On disk, frequency-like quantities carry a ``_hz`` suffix and are in
Hz; temperatures are K (``_k``), inductances H (``_h``), impedances
Ohm (``_ohm``).  Loading multiplies Hz values by 2*pi exactly once, so
everything downstream works in rad/s.  Two deliberate exceptions:
TLS energy scales (``epsilon_max_hz``, ``delta_range_hz``) become
Joules via hbar * 2*pi * f, and the campaign cadence
(``point_rate_hz``) is a samples-per-second count, not an oscillation,
so it passes through unscaled.

Unknown keys are rejected, and every diagnostic names the offending
field path (e.g. ``circuit.g_hz``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .cavity import PORT_LABELS, CircuitParams, ThermalPort
from .constants import TWO_PI, hbar
from .decoherence import CouplingGeometry
from .errors import ConfigError, ValidationError
from .experiments import CampaignConfig
from .tlssim import EnsembleConfig


@dataclass(frozen=True)
class PhenomenologicalConfig:
    """Parameters of the phenomenological gamma1(t) generator (rad/s)."""

    mean: float
    beta: float
    knee: float
    white_sigma: float


@dataclass(frozen=True)
class RunConfig:
    """Fully validated, unit-converted run configuration."""

    circuit: CircuitParams
    geometry: CouplingGeometry
    ports: tuple
    tls: EnsembleConfig
    campaign: CampaignConfig
    phenomenological: PhenomenologicalConfig | None
    s_delta: float
    gamma_phi_photon_shot: float
    seed: int
    output_dir: str

    def port(self, label: str) -> ThermalPort:
        for port in self.ports:
            if port.label == label:
                return port
        raise KeyError(label)


class _Node:
    """A dict being consumed key by key; leftovers are unknown keys."""

    def __init__(self, data, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path or 'config'}: expected an object")
        self._data = dict(data)
        self._path = path

    def _at(self, key: str) -> str:
        return f"{self._path}.{key}" if self._path else key

    def _pop(self, key: str, required: bool, default):
        if key in self._data:
            return self._data.pop(key)
        if required:
            raise ConfigError(f"{self._at(key)}: missing required key")
        return default

    def number(self, key: str, *, required: bool = True, default=None) -> float:
        raw = self._pop(key, required, default)
        if raw is default and not required:
            return default
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"{self._at(key)}: expected a number")
        return float(raw)

    def integer(self, key: str, *, minimum: int | None = None) -> int:
        raw = self._pop(key, True, None)
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{self._at(key)}: expected an integer")
        if minimum is not None and raw < minimum:
            raise ConfigError(f"{self._at(key)}: must be >= {minimum}")
        return raw

    def string(self, key: str) -> str:
        raw = self._pop(key, True, None)
        if not isinstance(raw, str):
            raise ConfigError(f"{self._at(key)}: expected a string")
        return raw

    def pair(self, key: str) -> tuple:
        raw = self._pop(key, True, None)
        ok = (isinstance(raw, list) and len(raw) == 2
              and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                      for v in raw))
        if not ok:
            raise ConfigError(f"{self._at(key)}: expected a pair of numbers")
        return (float(raw[0]), float(raw[1]))

    def child(self, key: str, *, required: bool = True):
        raw = self._pop(key, required, None)
        if raw is None and not required:
            return None
        return _Node(raw, self._at(key))

    def child_list(self, key: str) -> list:
        raw = self._pop(key, True, None)
        if not isinstance(raw, list):
            raise ConfigError(f"{self._at(key)}: expected a list")
        return [_Node(item, f"{self._at(key)}[{i}]")
                for i, item in enumerate(raw)]

    def close(self) -> None:
        if self._data:
            unknown = ", ".join(sorted(repr(k) for k in self._data))
            raise ConfigError(f"{self._path or 'config'}: unknown key(s) {unknown}")


def _build(path: str, factory, /, **kwargs):
    """Construct a domain type, prefixing invariant failures with the path."""
    try:
        return factory(**kwargs)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_circuit(node: _Node) -> CircuitParams:
    hz_fields = ("omega_q0", "E_c", "omega_r", "g", "kappa_i", "kappa_x",
                 "kappa_a", "gamma1_0", "gamma2_ramsey", "gamma2_echo",
                 "gamma1_antenna")
    kwargs = {name: TWO_PI * node.number(f"{name}_hz") for name in hz_fields}
    kwargs["Z0"] = node.number("Z0_ohm")
    e_j0 = node.number("E_J0_hz", required=False)
    kwargs["E_J0"] = None if e_j0 is None else TWO_PI * e_j0
    node.close()
    return _build("circuit", CircuitParams, **kwargs)


def _parse_geometry(node: _Node) -> CouplingGeometry:
    kwargs = {
        "M_a": node.number("M_a_h"),
        "L_loop": node.number("L_loop_h"),
        "L_a": node.number("L_a_h"),
        "Z0": node.number("Z0_ohm"),
    }
    node.close()
    return _build("geometry", CouplingGeometry, **kwargs)


def _parse_ports(nodes: list) -> tuple:
    by_label = {}
    for node in nodes:
        kwargs = {
            "label": node.string("label"),
            "temperature": node.number("temperature_k"),
            "kappa": TWO_PI * node.number("kappa_hz"),
            "attenuation": node.number("attenuation"),
        }
        node.close()
        port = _build(node._path, ThermalPort, **kwargs)
        if port.label in by_label:
            raise ConfigError(f"ports: duplicate label '{port.label}'")
        by_label[port.label] = port
    missing = [label for label in PORT_LABELS if label not in by_label]
    if missing:
        raise ConfigError(f"ports: missing label(s) {', '.join(missing)}")
    return tuple(by_label[label] for label in PORT_LABELS)


def _parse_tls(node: _Node, seed: int) -> EnsembleConfig:
    energy = hbar * TWO_PI
    delta_lo, delta_hi = node.pair("delta_range_hz")
    lw_lo, lw_hi = node.pair("linewidth_range_hz")
    kwargs = {
        "n_tls": node.integer("n_tls", minimum=1),
        "x_exponent": node.number("x_exponent"),
        "epsilon_max": energy * node.number("epsilon_max_hz"),
        "delta_range": (energy * delta_lo, energy * delta_hi),
        "rate_decades": node.pair("rate_decades"),
        "coupling_scale": TWO_PI * node.number("coupling_scale_hz"),
        "base_gamma1": TWO_PI * node.number("base_gamma1_hz"),
        "seed": seed,
        "linewidth_range": (TWO_PI * lw_lo, TWO_PI * lw_hi),
        "jump_fraction": node.number("jump_fraction"),
    }
    node.close()
    return _build("tls", EnsembleConfig, **kwargs)


def _parse_campaign(node: _Node, seed: int) -> CampaignConfig:
    kwargs = {
        "point_rate": node.number("point_rate_hz"),
        "duration": node.number("duration_s"),
        "n_averages": node.integer("n_averages", minimum=1),
        "temperature": node.number("temperature_k"),
        "seed": seed,
    }
    node.close()
    return _build("campaign", CampaignConfig, **kwargs)


def _parse_phenomenological(node: _Node | None):
    if node is None:
        return None
    kwargs = {
        "mean": TWO_PI * node.number("mean_hz"),
        "beta": node.number("beta"),
        "knee": TWO_PI * node.number("knee_hz"),
        "white_sigma": TWO_PI * node.number("white_sigma_hz"),
    }
    node.close()
    return PhenomenologicalConfig(**kwargs)


def parse_config(data) -> RunConfig:
    """Validate a decoded JSON object and convert units to internal form.

    The single top-level seed is the whole configuration's randomness
    authority: the ensemble and campaign blocks inherit it, so one
    override (flag or environment) retargets every stochastic command.
    """
    root = _Node(data, "")
    seed = root.integer("seed", minimum=0)
    run = RunConfig(
        circuit=_parse_circuit(root.child("circuit")),
        geometry=_parse_geometry(root.child("geometry")),
        ports=_parse_ports(root.child_list("ports")),
        tls=_parse_tls(root.child("tls"), seed),
        campaign=_parse_campaign(root.child("campaign"), seed),
        phenomenological=_parse_phenomenological(
            root.child("phenomenological", required=False)),
        s_delta=root.number("s_delta_w_per_hz"),
        gamma_phi_photon_shot=TWO_PI * root.number(
            "gamma_phi_photon_shot_hz", required=False, default=0.0),
        seed=seed,
        output_dir=root.string("output_dir"),
    )
    root.close()
    if not run.s_delta > 0:
        raise ConfigError("s_delta_w_per_hz: must be > 0")
    return run


def load_config(path) -> RunConfig:
    """Read and parse a JSON run configuration file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_config(data)
