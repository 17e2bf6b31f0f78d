"""Run configuration: a flat key-value text format.

Lines look like ``key = value``; ``#`` starts a comment. Term settings use
dotted keys numbered from one, e.g. ``term.1.null_space = polynomial:2``.
Unknown keys are rejected. See the README for the full key reference.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError
from .model import SmoothTerm

GLOBAL_KEYS = {
    "command", "data", "response", "output", "seed",
    "iterations", "warmup", "thin", "chains",
    "intercept", "center_terms",
    "xi0", "fixed_xi", "a0", "b0",
}
TERM_KEYS = {"covariate", "null_space", "prior", "inner_knots", "c", "alpha", "nu", "domain"}
COMMANDS = ("fit", "simulate", "study", "energy")

DEFAULT_ITERATIONS = 10000
DEFAULT_WARMUP = 5000


@dataclass
class TermConfig:
    """One term as named in a config file (covariate referenced by column name)."""

    covariate: str
    null_space: str | None = None
    prior: str = "subspace_shrinkage"
    inner_knots: int = 20
    c: float | None = None
    alpha: float = 0.05
    nu: float | None = None
    domain: tuple[float, float] | None = None


@dataclass
class RunConfig:
    """Validated settings for one command invocation."""

    command: str
    data: str | None = None
    response: str = "y"
    output: str = "results"
    seed: int = 0
    iterations: int = DEFAULT_ITERATIONS
    warmup: int = DEFAULT_WARMUP
    thin: int = 1
    chains: int = 1
    intercept: bool | str = "auto"
    center_terms: bool | str = "auto"
    xi0: float | None = None
    fixed_xi: float | None = None
    a0: float = 0.001
    b0: float = 0.001
    terms: list[TermConfig] = field(default_factory=list)


def _parse_bool(key: str, value: str):
    lowered = value.lower()
    if lowered == "auto":
        return "auto"
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected true/false/auto, got {value!r}")


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _parse_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _read_pairs(path: str) -> list[tuple[str, str]]:
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    pairs = []
    with open(path, encoding="utf-8") as handle:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {line_number}: expected 'key = value', got {raw.strip()!r}")
            key, value = line.split("=", 1)
            pairs.append((key.strip(), value.strip()))
    return pairs


def parse_config(path: str, command: str | None = None) -> RunConfig:
    """Parse and validate a config file; the CLI subcommand, when given,
    takes precedence over any ``command`` key in the file."""
    pairs = _read_pairs(path)
    cfg = RunConfig(command=command or "fit")
    term_values: dict[int, dict[str, str]] = {}
    seen: set[str] = set()
    for key, value in pairs:
        if key in seen:
            raise ConfigError(f"{key}: duplicate key")
        seen.add(key)
        if key.startswith("term."):
            parts = key.split(".")
            if len(parts) != 3 or not parts[1].isdigit():
                raise ConfigError(f"{key}: term keys look like term.<n>.<field>")
            index, fieldname = int(parts[1]), parts[2]
            if fieldname not in TERM_KEYS:
                raise ConfigError(f"{key}: unknown term field {fieldname!r}")
            term_values.setdefault(index, {})[fieldname] = value
            continue
        if key not in GLOBAL_KEYS:
            raise ConfigError(f"{key}: unknown key")
        if key == "command":
            if value not in COMMANDS:
                raise ConfigError(f"command: must be one of {COMMANDS}, got {value!r}")
            if command is None:
                cfg.command = value
        elif key in ("data", "response", "output"):
            setattr(cfg, key, value)
        elif key in ("seed", "iterations", "warmup", "thin", "chains"):
            setattr(cfg, key, _parse_int(key, value))
        elif key in ("intercept", "center_terms"):
            setattr(cfg, key, _parse_bool(key, value))
        else:  # xi0, fixed_xi, a0, b0
            setattr(cfg, key, _parse_float(key, value))

    if cfg.xi0 is not None and cfg.fixed_xi is not None:
        raise ConfigError("xi0 and fixed_xi are mutually exclusive")
    if cfg.warmup >= cfg.iterations:
        raise ConfigError("warmup must be smaller than iterations")
    for name, value in (("thin", cfg.thin), ("chains", cfg.chains)):
        if value < 1:
            raise ConfigError(f"{name} must be >= 1")

    for index in sorted(term_values):
        values = term_values[index]
        if "covariate" not in values:
            raise ConfigError(f"term.{index}.covariate: required")
        term = TermConfig(covariate=values["covariate"])
        if "null_space" in values:
            term.null_space = values["null_space"]
        if "prior" in values:
            if values["prior"] not in ("subspace_shrinkage", "pspline_rw2"):
                raise ConfigError(
                    f"term.{index}.prior: unknown prior {values['prior']!r}"
                )
            term.prior = values["prior"]
        if "inner_knots" in values:
            term.inner_knots = _parse_int(f"term.{index}.inner_knots", values["inner_knots"])
        if "c" in values:
            term.c = _parse_float(f"term.{index}.c", values["c"])
        if "alpha" in values:
            term.alpha = _parse_float(f"term.{index}.alpha", values["alpha"])
        if "nu" in values:
            term.nu = _parse_float(f"term.{index}.nu", values["nu"])
        if "domain" in values:
            fields = values["domain"].split(",")
            if len(fields) != 2:
                raise ConfigError(f"term.{index}.domain: expected 'lo,hi'")
            term.domain = (
                _parse_float(f"term.{index}.domain", fields[0]),
                _parse_float(f"term.{index}.domain", fields[1]),
            )
        if term.prior == "subspace_shrinkage" and term.null_space is None:
            raise ConfigError(f"term.{index}.null_space: required for shrinkage terms")
        cfg.terms.append(term)

    if cfg.command == "fit":
        if cfg.data is None:
            raise ConfigError("data: required for the fit command")
        if not cfg.terms:
            raise ConfigError("fit needs at least one term.<n>.covariate entry")
    if cfg.command in ("fit", "energy") and cfg.data is not None:
        if not os.path.isfile(cfg.data):
            raise ConfigError(f"data: file not found: {cfg.data}")
    _check_output_writable(cfg.output)
    return cfg


def _check_output_writable(path: str) -> None:
    """The output directory (or its nearest existing ancestor) must be writable."""
    if os.path.exists(path):
        if not os.path.isdir(path):
            raise ConfigError(f"output: {path} exists and is not a directory")
        if not os.access(path, os.W_OK):
            raise ConfigError(f"output: directory {path} is not writable")
        return
    probe = os.path.abspath(path)
    while probe and not os.path.exists(probe):
        parent = os.path.dirname(probe)
        if parent == probe:
            break
        probe = parent
    if os.path.exists(probe) and not os.access(probe, os.W_OK):
        raise ConfigError(f"output: cannot create {path} (no write access to {probe})")


def load_table_csv(path: str) -> dict[str, np.ndarray]:
    """Read a comma-separated data file with a header into named columns."""
    if not os.path.isfile(path):
        raise ConfigError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file, header required") from None
        columns: list[list[float]] = [[] for _ in header]
        for line_number, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ConfigError(
                    f"{path} line {line_number}: expected {len(header)} fields, got {len(row)}"
                )
            for i, cell in enumerate(row):
                try:
                    columns[i].append(float(cell))
                except ValueError:
                    raise ConfigError(
                        f"{path} line {line_number}: non-numeric value {cell!r}"
                    ) from None
    return {name.strip(): np.asarray(col) for name, col in zip(header, columns)}


def build_estimator(cfg: RunConfig, column_names: list[str]):
    """Translate a fit config (column names) into an estimator (column indices)."""
    from .model import SubspaceShrinkageRegressor

    indices = {name: i for i, name in enumerate(column_names)}
    terms = []
    for i, tc in enumerate(cfg.terms, start=1):
        if tc.covariate not in indices:
            raise ConfigError(
                f"term.{i}.covariate: column {tc.covariate!r} not in the data file"
            )
        terms.append(
            SmoothTerm(
                covariate=indices[tc.covariate],
                null_space=tc.null_space,
                prior=tc.prior,
                inner_knots=tc.inner_knots,
                c=tc.c,
                alpha=tc.alpha,
                nu=tc.nu,
                domain=tc.domain,
                name=tc.covariate,
            )
        )
    return SubspaceShrinkageRegressor(
        terms=terms,
        intercept=cfg.intercept,
        center_terms=cfg.center_terms,
        xi0=cfg.xi0,
        fixed_xi=cfg.fixed_xi,
        a0=cfg.a0,
        b0=cfg.b0,
        n_iter=cfg.iterations,
        warmup=cfg.warmup,
        thin=cfg.thin,
        n_chains=cfg.chains,
        seed=cfg.seed,
    )
