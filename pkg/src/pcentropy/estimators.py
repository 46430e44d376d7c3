"""Limit extrapolation for subadditive growth sequences, plus the series record type."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SubadditivityError


@dataclass(frozen=True)
class SequenceFit:
    slope: float
    intercept: float
    residual: float
    window: tuple[int, int]


@dataclass(frozen=True)
class SeriesRecord:
    n: int
    value: float
    aux: float | None = None  # e.g. the epsilon a Bowen count was taken at
    flag: str | None = None


@dataclass(frozen=True)
class EntropySeries:
    method: str
    records: tuple[SeriesRecord, ...]
    estimate: float
    estimate_method: str
    estimates: dict[str, float] = field(default_factory=dict)
    truncated: bool = False


def last_ratio(values: list[tuple[int, float]]) -> float:
    n, v = values[-1]
    return v / n


def fekete_estimate(values: list[tuple[int, float]], check: bool = True, slack: float = 1e-9) -> float:
    """min of value/n over the records.

    For a subadditive sequence this is both an upper bound for the limit and
    equal to it in the n -> infinity limit (Fekete).  Subadditivity is
    asserted over every recorded pair unless ``check`` is off; a violation
    points at a tolerance undercount upstream, not at this routine.
    """
    if len(values) < 2:
        raise ValueError("need at least two records")
    table = dict(values)
    if check:
        ns = sorted(table)
        for n in ns:
            for k in ns:
                if n + k in table and table[n + k] > table[n] + table[k] + slack:
                    raise SubadditivityError(
                        f"a_{n + k}={table[n + k]:.12g} > a_{n}+a_{k}={table[n] + table[k]:.12g}",
                        witness=(n, k),
                    )
    return min(v / n for n, v in values)


def slope_fit(values: list[tuple[int, float]], window_fraction: float = 0.5) -> SequenceFit:
    """Least-squares line over the top ``window_fraction`` of the n-range.

    The slope is the entropy estimate; small-n records carry additive
    transients, so the default window drops the lower half.
    """
    if len(values) < 4:
        raise ValueError("need at least four records for a slope fit")
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must be in (0, 1]")
    ns = np.asarray([n for n, _ in values], dtype=float)
    ys = np.asarray([v for _, v in values], dtype=float)
    cutoff = ns[-1] - window_fraction * (ns[-1] - ns[0])
    mask = ns >= cutoff
    if mask.sum() < 2:
        raise ValueError("degenerate window: fewer than two records")
    nw, yw = ns[mask], ys[mask]
    slope, intercept = np.polyfit(nw, yw, 1)
    residual = float(np.sqrt(np.mean((slope * nw + intercept - yw) ** 2)))
    return SequenceFit(float(slope), float(intercept), residual, (int(nw[0]), int(nw[-1])))


def estimate_table(
    values: list[tuple[int, float]],
    primary: str,
    window_fraction: float = 0.5,
    fallback: bool = False,
):
    """All applicable estimates for a log-count series.

    Returns (value, method actually used, table).  With ``fallback`` (used for
    cap-truncated series) an uncomputable primary degrades to the best
    available estimator instead of failing.
    """
    table: dict[str, float] = {"last-ratio": last_ratio(values)}
    try:
        table["fekete-min"] = fekete_estimate(values)
    except (ValueError, SubadditivityError):
        pass
    try:
        table["slope-fit"] = slope_fit(values, window_fraction).slope
    except ValueError:
        pass
    method = primary
    if method not in table:
        if not fallback:
            raise ValueError(f"estimator {primary!r} not computable for this series "
                             f"(available: {sorted(table)})")
        method = "fekete-min" if "fekete-min" in table else "last-ratio"
    return table[method], method, table
