"""Plain-text ``key = value`` experiment configuration.

One key per line; ``#`` starts a comment; blank lines are ignored. Values are
typed by the key schema below. Shape, motion and flow parameters use dotted
keys (``shape.radius = 2``) and are passed through as floats.
"""

from dataclasses import dataclass, field

from .errors import ConfigError

SUITES = ("geometry", "transport", "evolve", "verify", "laws", "ns", "all")


def _int_list(s):
    return [int(x) for x in s.replace(",", " ").split()]


def _name_list(s):
    return [x.strip() for x in s.split(",") if x.strip()]


def _float_list(s):
    return [float(x) for x in s.replace(",", " ").split()]


def _sign(s):
    v = int(s)
    if v not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return v


def _bool(s):
    s = s.lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


# key -> parser
SCHEMA = {
    "suite": str,
    "shapes": _name_list,
    "motions": _name_list,
    "flows": _name_list,
    "resolutions": _int_list,
    "order": int,
    "layout": str,
    "tolerance": float,
    "order_min": float,
    "seed": int,
    "out": str,
    "format": str,
    "dump": str,
    "time": float,
    "dt_probe": float,
    "mode": str,
    "shape": str,
    "rho0": float,
    "lambda0": float,
    "c0": float,
    "dt": float,
    "steps": int,
    "periods": float,
    "curvature_sign": _sign,
    "wave_sign": _sign,
    "record_every": int,
    "trajectory": str,
    "n_fields": int,
    "v_min": float,
    "semantics": str,
    "environment": str,
    "fields": str,
    "static_table": str,
    "radii": _float_list,
    "kT": float,
    "v_m": float,
    "rigid_count": int,
    "parallel": _bool,
}
PARAM_PREFIXES = ("shape.", "motion.", "flow.")


@dataclass
class ExperimentConfig:
    suite: str = None
    values: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def params_for(self, prefix):
        p = prefix + "."
        return {k[len(p):]: v for k, v in self.params.items() if k.startswith(p)}


def parse_config(text, suite=None):
    """Parse config ``text``; ``suite`` (from the command line) must agree with any ``suite`` key."""
    values, params = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key or not val:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in values or key in params:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key.startswith(PARAM_PREFIXES):
            try:
                params[key] = float(val)
            except ValueError:
                raise ConfigError(f"line {lineno}: parameter {key!r} must be a number") from None
            continue
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = SCHEMA[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    file_suite = values.get("suite")
    if suite is not None and file_suite is not None and suite != file_suite:
        raise ConfigError(f"config is for suite {file_suite!r}, not {suite!r}")
    suite = suite or file_suite
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    res = values.get("resolutions")
    if res is not None:
        if len(res) < 2 and suite in ("geometry", "transport", "ns"):
            raise ConfigError("convergence suites need at least two resolutions")
        if any(n < 8 for n in res):
            raise ConfigError("resolutions must be at least 8")
    if values.get("format", "csv") not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    return ExperimentConfig(suite, values, params)


def load_config(path, suite=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, suite)
