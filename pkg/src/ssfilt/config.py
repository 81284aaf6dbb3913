"""``key = value`` configuration files for the pipelines."""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from .kappamap import NltParamError
from .pipelines import BLUR_MODES, PipelineConfig, preset, PRESETS
from .ssfilter import COLOR_MODES, HSV_VALUE, PER_CHANNEL, UNIFORM, FilterParamError


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _scale(text: str):
    return UNIFORM if text.strip().lower() == UNIFORM else float(text)


def _choice(options):
    def parse(text: str) -> str:
        value = text.strip().lower()
        if value not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return value

    return parse


def _int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _preset_name(text: str) -> str:
    name = text.strip()
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}")
    return name


SCHEMA = {
    "preset": _preset_name,
    "radius": _int,
    "epsilon": float,
    "kappa": float,
    "scale": _scale,
    "weights": _choice(("uniform", "adaptive")),
    "iterations": _int,
    "color_mode": _choice(COLOR_MODES),
    "hsv": _bool,
    "kappa_min": float,
    "kappa_max": float,
    "growth": float,
    "midpoint": float,
    "window": _int,
    "refine_radius": _int,
    "refine_epsilon": float,
    "mode": _choice(BLUR_MODES),
    "resolution_ratio": float,
    "histogram_match": _bool,
}

ALIASES = {"iters": "iterations", "n_iter": "iterations", "r": "radius", "ratio": "resolution_ratio", "s": "scale"}


def read_config(path) -> dict:
    """Parse a config file into typed values keyed by canonical name."""
    values: dict = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = ALIASES.get(key.lower(), key.lower())
        if key not in SCHEMA:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = SCHEMA[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: key {key!r}: {exc}") from None
    return values


def build_config(values: dict, base: PipelineConfig | str) -> PipelineConfig:
    """Apply typed ``values`` on top of a base config or preset name."""
    unknown = set(values) - set(SCHEMA)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    if "preset" in values:
        base = values["preset"]
    cfg = preset(base) if isinstance(base, str) else base

    f = cfg.filter
    fkw = {}
    for key in ("radius", "epsilon", "kappa", "iterations", "color_mode"):
        if key in values:
            fkw[key] = values[key]
    if values.get("hsv"):
        fkw["color_mode"] = HSV_VALUE
    elif values.get("hsv") is False and "color_mode" not in values:
        fkw["color_mode"] = PER_CHANNEL
    if "scale" in values:
        fkw["scale"] = values["scale"]
    if values.get("weights") == "uniform":
        fkw["scale"] = UNIFORM
    elif values.get("weights") == "adaptive":
        current = fkw.get("scale", f.scale)
        if current == UNIFORM:
            if "scale" in values:
                raise ConfigError("keys 'weights' = adaptive and 'scale' = uniform conflict")
            fkw["scale"] = 1.0

    nkw = {k: values[k] for k in ("kappa_min", "kappa_max", "growth", "midpoint") if k in values}
    ckw = {k: values[k] for k in ("window", "refine_radius", "refine_epsilon", "mode", "resolution_ratio", "histogram_match") if k in values}

    try:
        params = replace(f, **fkw) if fkw else f
    except FilterParamError as exc:
        raise ConfigError(str(exc)) from None
    try:
        nlt = replace(cfg.nlt, **nkw) if nkw else cfg.nlt
    except NltParamError as exc:
        raise ConfigError(str(exc)) from None
    try:
        return replace(cfg, filter=params, nlt=nlt, **ckw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(path=None, overrides: dict | None = None, base: PipelineConfig | str = "fig4-smooth") -> PipelineConfig:
    """Read ``path`` (optional), let ``overrides`` win, validate, return the config."""
    values = read_config(path) if path is not None else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_config(values, base)

