"""Scenario description and the flat ``key = value`` config format."""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import SystemConfig, db_to_linear
from .errors import ConfigError, DomainError

# config key -> value type; these map one-to-one onto SystemConfig fields
_SYSTEM_KEYS = {
    "n_antennas": int,
    "n_ues": int,
    "bandwidth": float,
    "pilot_len": int,
    "tx_power": float,
    "noise_power": float,
    "pathloss_exp": float,
    "d_min": float,
    "d_max": float,
    "circuit_power": float,
    "amp_eff": float,
    "p_max": float,
}
# keys that need a unit conversion before reaching SystemConfig
_DERIVED_KEYS = {
    "slot_ms": float,        # t_DE
    "pathloss_db": float,    # mu_cp
    "shadow_db": float,      # sigma_beta
    "n_cu": int,             # sets bandwidth = n_cu / t_DE
}
_SCENARIO_KEYS = {
    "theta": float,
    "rate": float,
    "arrival_rate": float,
    "eps": float,
    "delay_ms": "floatlist",
    "seed": int,
    "inf_theta": bool,
    "random_drop": bool,
    "verify_exhaustive": bool,
    "laplace": bool,
    "optimize_power": bool,
    "eps_inner": float,
    "eps_outer": float,
    "max_iter": int,
    "lower_b": float,
    "workers": int,
}
KNOWN_KEYS = {**_SYSTEM_KEYS, **_DERIVED_KEYS, **_SCENARIO_KEYS}
SWEEPABLE = {k for k, t in KNOWN_KEYS.items() if t in (int, float, "floatlist")} - {"seed", "workers", "n_ues", "pilot_len"}


@dataclass(frozen=True)
class SweepAxis:
    """One swept key. ``log`` makes ``step`` a count of points per decade."""

    name: str
    start: float
    stop: float
    step: float
    log: bool = False

    def values(self):
        kind = KNOWN_KEYS[self.name]
        if self.log:
            decades = math.log10(self.stop / self.start)
            n = int(round(decades * self.step)) + 1
            vals = list(np.logspace(math.log10(self.start), math.log10(self.stop), n))
        else:
            n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
            vals = [self.start + k * self.step for k in range(n)]
        if kind is int:
            return [int(round(v)) for v in vals]
        return [float(v) for v in vals]


@dataclass(frozen=True)
class Scenario:
    """A system configuration plus everything a sweep point needs."""

    system: SystemConfig = field(default_factory=SystemConfig)
    theta: float = 0.2
    rate: float = 0.2
    arrival_rate: float = 40.0
    eps: float = 1e-6
    delay_ms: tuple = (5.0,)
    shadow_db: float = 0.0
    seed: int = 0
    sweep: SweepAxis | None = None
    inf_theta: bool = False
    random_drop: bool = False
    verify_exhaustive: bool = False
    laplace: bool = True
    optimize_power: bool = False
    eps_inner: float = 1e-5
    eps_outer: float = 1e-5
    max_iter: int = 100
    lower_b: float = 1e-6
    workers: int = 1

    @property
    def slot_ms(self):
        return self.system.slot_duration * 1e3

    def delay_slots(self):
        return tuple(ms_to_slots(d, self.slot_ms) for d in self.delay_ms)

    def with_value(self, name, value):
        """Copy with a single key overridden, routing system keys to SystemConfig."""
        return apply_settings(self, {name: value})


def ms_to_slots(delay_ms, slot_ms):
    """Whole slots within ``delay_ms`` (rounded down)."""
    if delay_ms < 0:
        raise DomainError("delay must be non-negative")
    return int(math.floor(delay_ms / slot_ms + 1e-9))


def _coerce(key, raw):
    kind = KNOWN_KEYS[key]
    if not isinstance(raw, str):
        if kind == "floatlist":
            return tuple(float(v) for v in np.atleast_1d(raw))
        return kind(raw)
    text = raw.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            val = float(text)
            if val != int(val):
                raise ValueError(text)
            return int(val)
        if kind == "floatlist":
            return tuple(float(v) for v in text.split(",") if v.strip())
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {getattr(kind, '__name__', kind)}") from None


def apply_settings(scenario, settings):
    """Return ``scenario`` with ``settings`` (key -> value) applied and validated."""
    sys_changes = {}
    top = {}
    values = {k: _coerce(k, v) for k, v in settings.items() if k in KNOWN_KEYS}
    for key in settings:
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}")
    slot = values.get("slot_ms", scenario.slot_ms) * 1e-3
    if "slot_ms" in values:
        if not slot > 0:
            raise ConfigError("slot_ms: must be positive")
        sys_changes["slot_duration"] = slot
        if "n_cu" not in values and "bandwidth" not in values:
            # keep the blocklength, not the bandwidth, when only t_DE changes
            sys_changes["bandwidth"] = scenario.system.blocklength / slot
    for key, val in values.items():
        if key in _SYSTEM_KEYS:
            sys_changes[key] = val
        elif key == "pathloss_db":
            sys_changes["pathloss_const"] = db_to_linear(val)
        elif key == "shadow_db":
            if val < 0:
                raise ConfigError("shadow_db: must be >= 0")
            sys_changes["shadow_sigma"] = val
            top["shadow_db"] = val
        elif key == "n_cu":
            sys_changes["bandwidth"] = val / slot
        elif key in _SCENARIO_KEYS:
            top[key] = val
    try:
        system = replace(scenario.system, **sys_changes)
    except DomainError as exc:
        names = ", ".join(sorted(values)) or "defaults"
        raise ConfigError(f"{names}: {exc}") from None
    out = replace(scenario, system=system, **top)
    _check_scenario(out)
    return out


def _check_scenario(s):
    checks = [
        ("theta", s.theta > 0, "must be > 0"),
        ("rate", s.rate >= 0, "must be >= 0"),
        ("arrival_rate", s.arrival_rate >= 0, "must be >= 0"),
        ("eps", 0 < s.eps < 1, "must lie in (0, 1)"),
        ("delay_ms", len(s.delay_ms) > 0 and min(s.delay_ms) >= 0, "needs non-negative values"),
        ("eps_inner", s.eps_inner > 0, "must be > 0"),
        ("eps_outer", s.eps_outer > 0, "must be > 0"),
        ("max_iter", s.max_iter >= 1, "must be >= 1"),
        ("lower_b", 0 < s.lower_b < s.system.p_max, "must lie in (0, p_max)"),
        ("workers", s.workers >= 1, "must be >= 1"),
    ]
    for name, ok, what in checks:
        if not ok:
            raise ConfigError(f"{name}: {what}")


def parse_sweep(text):
    parts = [p.strip() for p in text.split(":")]
    if len(parts) not in (4, 5) or (len(parts) == 5 and parts[4] != "log"):
        raise ConfigError(f"sweep: expected name:start:stop:step[:log], got {text!r}")
    name = parts[0]
    if name not in SWEEPABLE:
        raise ConfigError(f"sweep: {name!r} is not a sweepable key")
    try:
        start, stop, step = (float(p) for p in parts[1:4])
    except ValueError:
        raise ConfigError(f"sweep: non-numeric bounds in {text!r}") from None
    log = len(parts) == 5
    if not step > 0 or stop < start or (log and not start > 0):
        raise ConfigError("sweep: need step > 0, stop >= start and start > 0 for log axes")
    return SweepAxis(name, start, stop, step, log)


def parse_text(text, base=None):
    settings = {}
    sweep = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (p.strip() for p in line.split("=", 1))
        if key == "sweep":
            if sweep is not None:
                raise ConfigError("sweep: only one sweep axis is allowed")
            sweep = parse_sweep(val)
            continue
        if key in settings:
            raise ConfigError(f"{key}: given twice")
        settings[key] = val
    scenario = apply_settings(base or Scenario(), settings)
    if sweep is not None:
        scenario = replace(scenario, sweep=sweep)
        for v in sweep.values():
            scenario.with_value(sweep.name, v)
    return scenario


def parse_config(path=None, overrides=None, base=None):
    """Read a config file (or nothing, giving the defaults) then apply ``overrides``."""
    text = ""
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    scenario = parse_text(text, base)
    if overrides:
        scenario = apply_settings(scenario, overrides)
    return scenario
