"""Experiment configuration: flat ``key = value`` files with command-line overrides.

Blank lines and ``#`` comments are ignored. Every key except ``master_seed``
has a default; a missing seed is an error so that no run ever falls back to a
wall-clock seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources

import numpy as np

from ivfunctional import basis
from ivfunctional.basis import DomainError, WeightConfig
from ivfunctional.dgp import DEFAULT_J
from ivfunctional.rates import THRESHOLD_MODES

DIMENSION_RULES = ("kstar", "power")
BUILTIN = ("polynomial", "parametric", "exponential")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration; ``where`` locates the offending line."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    weights: WeightConfig = field(default_factory=WeightConfig)
    sigma: float = 0.5
    representer: str = "smooth"
    structural: str = "smooth"
    J: int | None = None
    margin: float = 0.1
    n_grid: tuple = (1000, 2000, 4000, 8000, 16000)
    reps: int = 500
    master_seed: int | None = None
    threshold: str = "theorem"
    coef_length: int = 64
    eta: float = 2.0
    dimension_rule: str = "kstar"
    power_delta: float = 1.0

    @property
    def spectrum_J(self) -> int:
        return DEFAULT_J[self.weights.kind] if self.J is None else int(self.J)

    def representer_coefs(self) -> np.ndarray:
        return parse_coef_spec(self.representer, "representer", self.weights.s,
                               self.weights.tau, self.coef_length)

    def structural_coefs(self) -> np.ndarray:
        return parse_coef_spec(self.structural, "structural", self.weights.p,
                               self.weights.rho, self.coef_length)

    def validate(self) -> "Scenario":
        if self.master_seed is None:
            raise ConfigError("master_seed is required")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be nonnegative")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if not self.n_grid:
            raise ConfigError("n_grid must be nonempty")
        if any(n < 1 for n in self.n_grid) or list(self.n_grid) != sorted(set(self.n_grid)):
            raise ConfigError("n_grid must be strictly increasing positive integers")
        if self.threshold not in THRESHOLD_MODES:
            raise ConfigError(f"threshold must be one of {THRESHOLD_MODES}")
        if self.dimension_rule not in DIMENSION_RULES:
            raise ConfigError(f"dimension_rule must be one of {DIMENSION_RULES}")
        if not self.power_delta > 0:
            raise ConfigError("power_delta must be positive")
        if self.coef_length < 1:
            raise ConfigError("coef_length must be at least 1")
        if self.spectrum_J < 1:
            raise ConfigError("J must be at least 1")
        if not 0 < self.margin < 1:
            raise ConfigError("margin must lie in (0, 1)")
        if not self.eta >= 1:
            raise ConfigError("eta must be at least 1")
        try:
            self.representer_coefs()
            self.structural_coefs()
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def to_text(self) -> str:
        """Canonical ``key = value`` text; parsing it gives back an equal scenario."""
        return "".join(f"{k} = {v}\n" for k, v in self.items())

    def as_dict(self) -> dict:
        """Typed key/value view of the scenario, in config-file order."""
        out = {"name": self.name}
        out.update({f.name: getattr(self.weights, f.name) for f in fields(WeightConfig)})
        for key in ("sigma", "representer", "structural"):
            out[key] = getattr(self, key)
        out["J"] = self.spectrum_J
        for key in ("margin", "n_grid", "reps", "master_seed", "threshold", "coef_length",
                    "eta", "dimension_rule", "power_delta"):
            out[key] = getattr(self, key)
        out["n_grid"] = list(self.n_grid)
        return out

    def items(self):
        w = self.weights
        out = [("name", self.name)]
        out += [(f.name, _fmt(getattr(w, f.name))) for f in fields(WeightConfig)]
        out += [
            ("sigma", _fmt(self.sigma)),
            ("representer", self.representer),
            ("structural", self.structural),
            ("J", str(self.spectrum_J)),
            ("margin", _fmt(self.margin)),
            ("n_grid", ",".join(str(n) for n in self.n_grid)),
            ("reps", str(self.reps)),
            ("master_seed", str(self.master_seed)),
            ("threshold", self.threshold),
            ("coef_length", str(self.coef_length)),
            ("eta", _fmt(self.eta)),
            ("dimension_rule", self.dimension_rule),
            ("power_delta", _fmt(self.power_delta)),
        ]
        return out


def _fmt(x):
    if isinstance(x, str):
        return x
    return repr(float(x))


def _int(text):
    return int(text)


def _float(text):
    val = float(text)
    if not math.isfinite(val):
        raise ValueError("value must be finite")
    return val


def _grid(text):
    return tuple(int(t) for t in text.split(",") if t.strip())


_WEIGHT_KEYS = {f.name: (str if f.name == "kind" else _float) for f in fields(WeightConfig)}
_KEYS = {
    "name": str, "sigma": _float, "representer": str, "structural": str, "J": _int,
    "margin": _float, "n_grid": _grid, "reps": _int, "master_seed": _int,
    "threshold": str, "coef_length": _int, "eta": _float, "dimension_rule": str,
    "power_delta": _float,
}


def parse_coef_spec(spec: str, role: str, order: float, radius: float, length: int) -> np.ndarray:
    """Coefficients from ``indicator:lo,hi``, ``smooth``, ``smooth:exponent,scale`` or ``coefs:x1,...``.

    Bare ``smooth`` means exponent ``order + 1`` with the scale calibrated to the
    ellipsoid radius.
    """
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    args = [t.strip() for t in rest.split(",") if t.strip()]
    try:
        nums = [float(t) for t in args]
    except ValueError:
        raise DomainError(f"{role}: non-numeric argument in {spec!r}") from None
    if kind == "smooth":
        if not nums:
            e = order + 1.0
            return basis.smooth_coefs(e, basis.calibrated_scale(e, order, radius), length)
        if len(nums) != 2:
            raise DomainError(f"{role}: smooth takes exponent,scale")
        return basis.smooth_coefs(nums[0], nums[1], length)
    if kind == "indicator":
        if len(nums) != 2:
            raise DomainError(f"{role}: indicator takes lo,hi")
        return basis.indicator_representer(nums[0], nums[1], length)
    if kind == "coefs":
        if not nums or not all(math.isfinite(x) for x in nums):
            raise DomainError(f"{role}: coefs needs finite values")
        out = np.zeros(max(length, len(nums)))
        out[:len(nums)] = nums
        return out
    raise DomainError(f"{role}: unknown specification {spec!r}")


def _apply(values: dict, key: str, raw: str, where: str):
    key = key.strip()
    raw = raw.strip()
    conv = _KEYS.get(key) or _WEIGHT_KEYS.get(key)
    if conv is None:
        raise ConfigError(f"unknown key {key!r}", where)
    if raw == "" and key != "J":
        raise ConfigError(f"empty value for {key!r}", where)
    try:
        values[key] = None if (key == "J" and raw in ("", "auto")) else conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})", where) from None


def parse_lines(lines, source="<config>", overrides=()) -> Scenario:
    """Build a validated scenario from config lines plus ``key=value`` overrides."""
    values = {}
    where_of = {}
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        where = f"{source}:{lineno}"
        if "=" not in text:
            raise ConfigError("expected 'key = value'", where)
        key, raw = text.split("=", 1)
        if key.strip() in values:
            raise ConfigError(f"duplicate key {key.strip()!r}", where)
        _apply(values, key, raw, where)
        where_of[key.strip()] = where
    for i, item in enumerate(overrides, start=1):
        where = f"--set #{i}"
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}", where)
        key, raw = item.split("=", 1)
        _apply(values, key, raw, where)
        where_of[key.strip()] = where
    return _build(values, where_of)


def _build(values, where_of) -> Scenario:
    wkw = {k: values.pop(k) for k in list(values) if k in _WEIGHT_KEYS}
    try:
        cfg = WeightConfig(**wkw)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    sc = Scenario(weights=cfg, **values)
    return sc.validate()


def load(path, overrides=()) -> Scenario:
    """Parse a config file; ``builtin:NAME`` selects a shipped scenario."""
    path = str(path)
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        return parse_lines(builtin_text(name).splitlines(), source=path, overrides=overrides)
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    return parse_lines(lines, source=path, overrides=overrides)


def builtin_text(name: str) -> str:
    if name not in BUILTIN:
        raise ConfigError(f"unknown builtin scenario {name!r}; choose from {BUILTIN}")
    return resources.files("ivfunctional").joinpath("scenarios", f"{name}.cfg").read_text()


def builtin(name: str, **changes) -> Scenario:
    """Shipped scenario with optional field changes; weight keys such as ``p`` are accepted."""
    sc = parse_lines(builtin_text(name).splitlines(), source=f"builtin:{name}")
    if not changes:
        return sc
    wkw = {k: changes.pop(k) for k in list(changes) if k in _WEIGHT_KEYS}
    if wkw:
        try:
            changes["weights"] = replace(sc.weights, **wkw)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
    return replace(sc, **changes).validate()
