"""TOML configuration for the CLI client.

A config file is a flat set of tables:

    [problem]
    p = 2.0
    a_plus = "pi^2"
    a_minus = "pi^2"
    lambda = 0.0
    f = "tanh(xi)"
    f_plus = "1"
    f_minus = "-1"
    # rho, K0, K1 optional

    [tolerances]          # all optional, positive
    eig_tol = 1e-9
    ode_rel = 1e-10

    [run]                 # all optional
    k_max = 3
    out = "out"
    format = "both"       # csv | json | both
    fucik_k = 1
    fucik_branch = "+"
    fucik_alpha_plus = [40.0, 60.0, 90.0]
    solve_samples = 1025
    tau_bracket = [-5.0, 5.0]   # manual shooting bracket (optional)
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import SpecError, Tolerances
from .exprlang import ExprError

__all__ = ["Config", "RunOptions", "ConfigError", "load_config"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunOptions:
    k_max: int = 3
    out: str = "."
    format: str = "both"
    fucik_k: int = 1
    fucik_branch: str = "+"
    fucik_alpha_plus: tuple[float, ...] = ()
    solve_samples: int = 1025
    tau_bracket: tuple[float, float] | None = None


@dataclass(frozen=True)
class Config:
    problem: dict
    tolerances: Tolerances
    run: RunOptions


_PROBLEM_KEYS = {"p", "a_plus", "a_minus", "lambda", "f", "f_plus", "f_minus",
                 "rho", "K0", "K1"}
_TOL_KEYS = set(Tolerances().to_dict())
_RUN_KEYS = {"k_max", "out", "format", "fucik_k", "fucik_branch",
             "fucik_alpha_plus", "solve_samples", "tau_bracket"}


def load_config(path: str) -> Config:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from None
    return parse_config(raw)


def parse_config(raw: dict) -> Config:
    problem = dict(raw.get("problem", {}))
    unknown = set(problem) - _PROBLEM_KEYS
    if unknown:
        raise ConfigError(f"unknown problem keys: {sorted(unknown)}")
    if "p" not in problem:
        raise ConfigError("problem.p is required")

    tols = dict(raw.get("tolerances", {}))
    unknown = set(tols) - _TOL_KEYS
    if unknown:
        raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
    try:
        tol = Tolerances(**tols)
    except (SpecError, TypeError) as exc:
        raise ConfigError(f"invalid tolerances: {exc}") from exc

    run_raw = dict(raw.get("run", {}))
    unknown = set(run_raw) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown run keys: {sorted(unknown)}")
    if "fucik_alpha_plus" in run_raw:
        run_raw["fucik_alpha_plus"] = tuple(float(a) for a in run_raw["fucik_alpha_plus"])
    if "tau_bracket" in run_raw:
        tb = run_raw["tau_bracket"]
        if len(tb) != 2:
            raise ConfigError("run.tau_bracket must have exactly two entries")
        run_raw["tau_bracket"] = (float(tb[0]), float(tb[1]))
    run = RunOptions(**run_raw)
    if run.format not in ("csv", "json", "both"):
        raise ConfigError(f"run.format must be csv|json|both, got {run.format!r}")
    if run.fucik_branch not in ("+", "-"):
        raise ConfigError("run.fucik_branch must be '+' or '-'")
    return Config(problem=problem, tolerances=tol, run=run)


def problem_payload(cfg: Config) -> dict:
    """The [problem] table as a service request payload."""
    out = {"p": float(cfg.problem["p"])}
    for key in ("a_plus", "a_minus", "f", "f_plus", "f_minus"):
        if key in cfg.problem:
            out[key] = str(cfg.problem[key])
    if "lambda" in cfg.problem:
        out["lambda"] = float(cfg.problem["lambda"])
    for key in ("rho", "K0", "K1"):
        if key in cfg.problem:
            out[key] = float(cfg.problem[key])
    return out
