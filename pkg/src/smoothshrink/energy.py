"""Quarter-hourly energy consumption pipeline.

Ingests daily load curves (96 readings per day), preprocesses them by
rescaling with the global mean absolute value and removing each day's mean,
and fits one shrinkage model per day against an order-4 trigonometric
polynomial over the 24-hour cycle. A synthetic fixture generator stands in
for user-supplied market exports.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, IncompleteDay, MalformedRow
from .model import SmoothTerm, SubspaceShrinkageRegressor
from .simulate import parametric_max_curvature
from .subspace import trig

READINGS_PER_DAY = 96
HOURS = np.arange(READINGS_PER_DAY) / 4.0  # quarter hours: 0.0 .. 23.75

DEFAULT_N_ITER = 12000
DEFAULT_WARMUP = 2000
FIXED_XI = 0.001
CURVATURE_FACTOR = 2.0
ALPHA = 0.05


@dataclass
class EnergyDay:
    """One preprocessed day: 96 quarter-hourly consumption values, mean zero."""

    day_id: dt.date
    is_weekend: bool
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (READINGS_PER_DAY,):
            raise IncompleteDay(str(self.day_id), int(self.values.size))


def _parse_timestamp(text: str, line_number: int) -> tuple[dt.date, float]:
    text = text.strip()
    for fmt in ("%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M", "%d.%m.%Y %H:%M"):
        try:
            stamp = dt.datetime.strptime(text, fmt)
            return stamp.date(), stamp.hour + stamp.minute / 60.0
        except ValueError:
            continue
    raise MalformedRow(line_number, f"unparseable timestamp {text!r}")


def _parse_consumption(text: str, line_number: int) -> float:
    # market exports use decimal commas and thousands separators
    cleaned = text.strip().replace('"', "")
    if "," in cleaned:
        cleaned = cleaned.replace(".", "").replace(",", ".")
    try:
        return float(cleaned)
    except ValueError:
        raise MalformedRow(line_number, f"unparseable consumption {text!r}") from None


def ingest_energy_csv(path: str) -> list[EnergyDay]:
    """Read a consumption CSV (timestamp, consumption; header required),
    group rows into complete days and preprocess.

    Preprocessing divides all values by the global mean absolute value and
    subtracts each day's mean, so every returned day has mean zero.
    """
    per_day: dict[dt.date, dict[float, float]] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(1, "empty file: header required") from None
        if len(header) < 2:
            raise MalformedRow(1, "expected columns: timestamp, consumption")
        for line_number, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise MalformedRow(line_number, f"expected 2 columns, got {len(row)}")
            day, hour = _parse_timestamp(row[0], line_number)
            value = _parse_consumption(row[1], line_number)
            slots = per_day.setdefault(day, {})
            if hour in slots:
                raise MalformedRow(line_number, f"duplicate reading for {day} {hour}h")
            slots[hour] = value

    days: list[EnergyDay] = []
    raw = []
    for day in sorted(per_day):
        slots = per_day[day]
        if len(slots) != READINGS_PER_DAY:
            raise IncompleteDay(str(day), len(slots))
        values = np.array([slots[h] for h in HOURS])
        raw.append((day, values))
    if not raw:
        return []
    global_scale = float(np.mean([np.abs(v).mean() for _, v in raw]))
    if global_scale <= 0:
        global_scale = 1.0
    for day, values in raw:
        rescaled = values / global_scale
        rescaled = rescaled - rescaled.mean()
        days.append(
            EnergyDay(day_id=day, is_weekend=day.weekday() >= 5, values=rescaled)
        )
    return days


@dataclass
class EnergyDayFit:
    """Shrinkage summary for one fitted day."""

    day_id: dt.date
    is_weekend: bool
    kappa_mean: float
    c_used: float
    result: object = field(repr=False)


def energy_fit(
    days: list[EnergyDay],
    n_iter: int = DEFAULT_N_ITER,
    warmup: int = DEFAULT_WARMUP,
    seed: int = 0,
    trig_order: int = 4,
) -> list[EnergyDayFit]:
    """Fit each day separately over hour-of-day with the order-4
    trigonometric null space and a fixed global shrinkage scale.

    The curvature cutoff per day is twice the largest absolute second
    derivative of the parametric trigonometric fit; alpha is 0.05.
    """
    if not days:
        raise DomainError("need at least one day to fit")
    fits = []
    null_space = trig(trig_order, 24.0)
    lo, hi = float(HOURS[0]), float(HOURS[-1])
    for i, day in enumerate(days):
        c_p = parametric_max_curvature(null_space, HOURS, day.values, lo, hi)
        c = CURVATURE_FACTOR * max(c_p, 1e-6)
        term = SmoothTerm(
            covariate=0, null_space=null_space, inner_knots=20,
            c=c, alpha=ALPHA, domain=(lo, hi),
        )
        est = SubspaceShrinkageRegressor(
            terms=[term], intercept=False, fixed_xi=FIXED_XI,
            n_iter=n_iter, warmup=warmup, seed=seed + i,
        )
        est.fit(HOURS[:, None], day.values)
        summary = est.result_.term_summaries[0]
        fits.append(
            EnergyDayFit(
                day_id=day.day_id,
                is_weekend=day.is_weekend,
                kappa_mean=summary.kappa_mean,
                c_used=c,
                result=est.result_,
            )
        )
    return fits


# ----------------------------------------------------------- synthetic fixtures


def synthetic_trig_day(
    amplitude: float = 100.0, noise: float = 1.0, seed: int = 0
) -> np.ndarray:
    """A day generated exactly from an order-4 trigonometric polynomial."""
    rng = np.random.default_rng(seed)
    base = 2.0 * np.pi * HOURS / 24.0
    values = 400.0 + amplitude * (
        np.cos(base) - 0.6 * np.sin(2 * base) + 0.3 * np.cos(3 * base)
        + 0.15 * np.sin(4 * base)
    )
    return values + rng.normal(0.0, noise, size=READINGS_PER_DAY)


def synthetic_ramp_day(
    amplitude: float = 100.0, noise: float = 1.0, seed: int = 0
) -> np.ndarray:
    """A weekday-like curve with a sharp morning ramp a low-order
    trigonometric polynomial cannot follow."""
    rng = np.random.default_rng(seed)
    values = np.full(READINGS_PER_DAY, 350.0)
    ramp = np.clip((HOURS - 5.0) / 1.5, 0.0, 1.0)  # steep rise between 5h and 6.5h
    drop = np.clip((HOURS - 20.0) / 2.0, 0.0, 1.0)
    values = values + amplitude * ramp - 0.8 * amplitude * drop
    return values + rng.normal(0.0, noise, size=READINGS_PER_DAY)


def write_energy_fixture(path: str, days: list[tuple[dt.date, np.ndarray]]) -> None:
    """Write raw (unpreprocessed) days in the ingestible CSV format, using
    decimal commas as market exports do."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["timestamp", "consumption"])
        for day, values in days:
            for slot, value in enumerate(values):
                hour, minute = divmod(slot * 15, 60)
                stamp = f"{day.isoformat()} {hour:02d}:{minute:02d}"
                writer.writerow([stamp, f"{value:.3f}".replace(".", ",")])


def make_fixture_days(seed: int = 0) -> list[tuple[dt.date, np.ndarray]]:
    """Two synthetic days: a weekend-like trigonometric day (Saturday) and a
    weekday-like ramp day (Monday)."""
    saturday = dt.date(2018, 11, 3)
    monday = dt.date(2018, 11, 5)
    return [
        (saturday, synthetic_trig_day(seed=seed)),
        (monday, synthetic_ramp_day(seed=seed + 1)),
    ]
