"""Experiment configuration: INI files with [model], [sim], [run], [output].

Example::

    [model]
    mu = 3
    a = 2
    b = 1
    epsilon = 0.1
    rho = 0.99

    [sim]
    n = 100
    reps = 10000
    seed = 2019
    u_grid = logspace(0, 5, 20)

    [run]
    estimators = new_crude, new_cv_max, pk_crude, pk_cv_max

    [output]
    path = fig2.csv
    format = csv

``u_grid`` is a comma-separated list or ``logspace(lo, hi, count)`` /
``linspace(lo, hi, count)`` (numpy semantics). Supply ``lambda`` instead of
``rho`` to fix the arrival rate.
"""

import configparser
from dataclasses import dataclass, replace
import math
import re

import numpy as np

from ..estimators import ALL_KINDS, EstimatorKind
from ..exceptions import ConfigError, NetProfitError, ValidationError
from ..model import ModelParams, derive_rates

_GRID_FN = re.compile(r"^(logspace|linspace)\(\s*([^,]+),\s*([^,]+),\s*(\d+)\s*\)$")


@dataclass(frozen=True)
class ExperimentConfig:
    mu: float = 3.0
    a: float = 2.0
    b: float = 1.0
    epsilon: float = 0.1
    rho: float = None
    lam: float = None
    n: int = 100
    reps: int = 10_000
    seed: int = 2019
    u_grid: tuple = (1.0, 10.0, 100.0)
    estimators: tuple = ALL_KINDS
    output_path: str = None
    output_format: str = "csv"
    name: str = "experiment"

    def model_params(self):
        return ModelParams.exp_pareto(self.mu, self.a, self.b, self.epsilon,
                                      rho=self.rho, lam=self.lam)

    def rates(self):
        return derive_rates(self.model_params())

    def with_overrides(self, **changes):
        """Copy with the non-None entries of ``changes`` applied, then validated."""
        return validate(replace(self, **{k: v for k, v in changes.items() if v is not None}))


def validate(cfg):
    """Check a config; raise ``ConfigError`` naming the offending key."""
    if cfg.rho is not None and cfg.lam is not None:
        raise ConfigError("give either rho or lambda, not both", key="rho/lambda")
    if cfg.rho is None and cfg.lam is None:
        raise ConfigError("missing key 'rho' (or 'lambda') in [model]", key="rho")
    if cfg.rho is not None and not cfg.rho < 1.0:
        raise ConfigError(f"rho={cfg.rho} violates the net profit condition rho < 1", key="rho")
    if not cfg.a > 1.0:
        raise ConfigError(f"a={cfg.a} must exceed 1 (finite heavy-claim mean)", key="a")
    for key in ("mu", "b"):
        if not getattr(cfg, key) > 0:
            raise ConfigError(f"{key} must be positive", key=key)
    if not 0.0 < cfg.epsilon < 1.0:
        raise ConfigError("epsilon must lie in (0, 1)", key="epsilon")
    if cfg.n < 2:
        raise ConfigError("n must be at least 2", key="n")
    if cfg.reps < 2:
        raise ConfigError("reps must be at least 2", key="reps")
    if not (0 <= cfg.seed < 2 ** 64):
        raise ConfigError("seed must be a 64-bit nonnegative integer", key="seed")
    grid = cfg.u_grid
    if not grid:
        raise ConfigError("u_grid is empty", key="u_grid")
    if any(not (math.isfinite(u) and u >= 0) for u in grid):
        raise ConfigError("u_grid values must be finite and nonnegative", key="u_grid")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ConfigError("u_grid must be sorted ascending", key="u_grid")
    if not cfg.estimators:
        raise ConfigError("no estimators selected", key="estimators")
    if cfg.output_format != "csv":
        raise ConfigError(f"unsupported output format {cfg.output_format!r}", key="format")
    try:
        cfg.rates()
    except NetProfitError as exc:
        raise ConfigError(str(exc), key="lambda" if cfg.lam is not None else "rho") from exc
    except ValidationError as exc:
        raise ConfigError(str(exc), key="model") from exc
    return cfg


def parse_grid(text):
    text = text.strip()
    m = _GRID_FN.match(text)
    if m:
        fn, lo, hi, count = m.groups()
        values = getattr(np, fn)(float(lo), float(hi), int(count))
        return tuple(float(v) for v in values)
    return tuple(float(v) for v in text.split(",") if v.strip())


def parse_estimators(text):
    kinds = []
    for label in text.split(","):
        if label.strip():
            try:
                kinds.append(EstimatorKind.parse(label))
            except ValueError as exc:
                raise ConfigError(str(exc), key="estimators") from exc
    # keep the canonical order regardless of how they were listed
    return tuple(k for k in ALL_KINDS if k in kinds)


def _get(section, key, cast, required=True, default=None):
    if key not in section:
        if required:
            raise ConfigError(f"missing key '{key}' in [{section.name}]", key=key)
        return default
    try:
        return cast(section[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for '{key}': {section[key]!r}", key=key) from exc


def parse_config(text, name="experiment"):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc
    for sec in ("model", "sim", "run", "output"):
        if not parser.has_section(sec):
            raise ConfigError(f"missing section [{sec}]", key=sec)
    model, sim, run, out = (parser[s] for s in ("model", "sim", "run", "output"))
    cfg = ExperimentConfig(
        mu=_get(model, "mu", float),
        a=_get(model, "a", float),
        b=_get(model, "b", float),
        epsilon=_get(model, "epsilon", float),
        rho=_get(model, "rho", float, required=False),
        lam=_get(model, "lambda", float, required=False),
        n=_get(sim, "n", int),
        reps=_get(sim, "reps", int),
        seed=_get(sim, "seed", int),
        u_grid=_get(sim, "u_grid", parse_grid),
        estimators=_get(run, "estimators", parse_estimators),
        output_path=_get(out, "path", str, required=False),
        output_format=_get(out, "format", str, required=False, default="csv"),
        name=name,
    )
    return validate(cfg)


def load_config(path):
    """Read and validate an INI experiment file."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    stem = re.sub(r"\.[^.]*$", "", str(path).replace("\\", "/").rsplit("/", 1)[-1])
    return parse_config(text, name=stem)


def _kinds(*labels):
    return tuple(EstimatorKind.parse(label) for label in labels)


_LOG_GRID = parse_grid("logspace(0, 5, 20)")
_LIN_GRID = parse_grid("linspace(0, 100, 21)")
_FIG_BASE = ExperimentConfig(mu=3.0, a=2.0, b=1.0, epsilon=0.1, rho=0.99, n=100,
                             reps=10_000, seed=2019, u_grid=_LOG_GRID)

PRESETS = {
    "fig1": (
        replace(_FIG_BASE, name="fig1_left", a=3.0, epsilon=0.7, rho=0.9,
                u_grid=_LIN_GRID, estimators=_kinds("new_crude")),
        replace(_FIG_BASE, name="fig1_right", a=3.0, epsilon=0.1, rho=0.7,
                u_grid=_LIN_GRID, estimators=_kinds("new_crude")),
    ),
    "fig2": (replace(_FIG_BASE, name="fig2", estimators=_kinds(
        "new_crude", "new_cv_max", "pk_crude", "pk_cv_max")),),
    "fig3": (replace(_FIG_BASE, name="fig3", estimators=_kinds(
        "new_ak", "new_ak_cv", "pk_ak", "pk_ak_cv")),),
    "fig4": (replace(_FIG_BASE, name="fig4", estimators=_kinds(
        "new_cv_max", "new_ak_cv", "pk_cv_max", "pk_ak_cv")),),
}


def preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}",
                          key="preset") from None
