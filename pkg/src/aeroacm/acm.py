"""Distance-based adaptive coding and modulation design and selection.

A mode family (modulation order, code rate, spectral efficiency) is laid
over the closed-form rate-versus-distance curve. Mode k serves the distance
interval [d_k, d_{k-1}); each switching threshold is pushed as far out as
the curve allows, i.e. d_k is the largest distance at which the next mode's
spectral efficiency still sits below the achievable rate. The last (highest
order) mode extends down to the minimum aircraft separation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .channel import SystemConfig
from .errors import (BelowMinimumSeparation, DomainError, EmptyTable,
                     OutOfRange)
from .sinr import closed_form_rate


@dataclass(frozen=True)
class AcmMode:
    """One coding-and-modulation mode."""

    index: int
    modulation_order: int
    code_rate: float
    spectral_efficiency: float


# Default seven-mode family (VersaFEC-style short-block LDPC pairs). The
# spectral efficiencies are the modem datasheet values; they differ from the
# cyclic-prefix formula below by at most a few tenths of a percent due to
# rounding in the published code rates.
DEFAULT_MODES: tuple[AcmMode, ...] = (
    AcmMode(1, 2, 0.488, 0.459),
    AcmMode(2, 4, 0.533, 1.000),
    AcmMode(3, 4, 0.706, 1.322),
    AcmMode(4, 8, 0.642, 1.809),
    AcmMode(5, 8, 0.780, 2.194),
    AcmMode(6, 16, 0.731, 2.747),
    AcmMode(7, 16, 0.853, 3.197),
)


def spectral_efficiency(modulation_order: int, code_rate: float, n: int,
                        n_cp: int) -> float:
    """Spectral efficiency of a mode after cyclic-prefix overhead.

    ``log2(order) * rate * (n - n_cp) / n``.
    """
    if modulation_order < 2:
        raise DomainError("modulation order must be >= 2")
    if not 0.0 < code_rate <= 1.0:
        raise DomainError("code rate must lie in (0, 1]")
    if n < 1 or n_cp < 0 or n_cp >= n:
        raise DomainError("need 0 <= n_cp < n")
    return math.log2(modulation_order) * code_rate * (n - n_cp) / n


@dataclass(frozen=True)
class AcmTable:
    """Designed mode set with switching thresholds.

    ``thresholds_m[k]`` is the lower edge of mode ``modes[k]``'s distance
    interval; the upper edge is the previous threshold (``d_max`` for the
    first mode). Thresholds decrease strictly with the mode index.
    ``dropped`` records modes that were infeasible everywhere on the curve.
    """

    modes: tuple[AcmMode, ...]
    thresholds_m: tuple[float, ...]
    d_max: float
    dropped: tuple[AcmMode, ...] = ()

    def __post_init__(self) -> None:
        if len(self.modes) != len(self.thresholds_m):
            raise DomainError("one threshold per mode required")
        edges = (self.d_max,) + self.thresholds_m
        for hi, lo in zip(edges, self.thresholds_m):
            if not lo < hi:
                raise DomainError("thresholds must decrease strictly")

    def intervals(self) -> list[tuple[float, float]]:
        """[(lower, upper)) distance interval of each mode, in meters."""
        edges = (self.d_max,) + self.thresholds_m
        return [(lo, hi) for lo, hi in zip(self.thresholds_m, edges)]

    def validate_against_curve(self, distances: Sequence[float],
                               rates: Sequence[float]) -> bool:
        """True if every mode's SE stays below the curve on its interval."""
        distances = np.asarray(distances, dtype=float)
        rates = np.asarray(rates, dtype=float)
        for mode, (lo, hi) in zip(self.modes, self.intervals()):
            mask = (distances >= lo) & (distances < hi)
            if np.any(rates[mask] < mode.spectral_efficiency):
                return False
        return True


def rate_curve(config: SystemConfig, d_grid: Sequence[float],
               mode: str = "theoretical") -> np.ndarray:
    """Closed-form rate per receive antenna at each grid distance."""
    rates = []
    for d in d_grid:
        if not (config.d_min <= d <= config.d_max):
            raise DomainError(f"grid point {d} outside [d_min, d_max]")
        cfg = replace(config, link_distance=min(d, np.nextafter(config.d_max, 0.0)))
        rates.append(closed_form_rate(cfg, mode=mode))
    return np.asarray(rates)


def _largest_distance_at_or_above(distances: np.ndarray, rates: np.ndarray,
                                  se: float,
                                  refine: Callable[[float], float] | None,
                                  refine_step: float) -> float | None:
    """Largest distance with rate >= se, refined by bisection when possible.

    Returns None when the curve is below ``se`` everywhere.
    """
    above = rates >= se
    if not above.any():
        return None
    idx = int(np.max(np.nonzero(above)[0]))
    if idx == len(distances) - 1 or refine is None:
        return float(distances[idx])
    lo, hi = float(distances[idx]), float(distances[idx + 1])
    while hi - lo > refine_step:
        mid = 0.5 * (lo + hi)
        if refine(mid) >= se:
            lo = mid
        else:
            hi = mid
    return lo


def design_thresholds(distances: Sequence[float], rates: Sequence[float],
                      modes: Sequence[AcmMode], d_min: float, d_max: float,
                      refine: Callable[[float], float] | None = None,
                      refine_step: float = 100.0,
                      margin: float = 0.0) -> AcmTable:
    """Design switching thresholds for a mode family over a rate curve.

    ``distances``/``rates`` sample the (nonincreasing) rate curve;
    ``refine`` optionally re-evaluates the curve at arbitrary distances so
    crossings are located to within ``refine_step`` meters. ``margin`` is
    subtracted from the curve before thresholding (a deployment back-off;
    zero by default). Modes whose spectral efficiency exceeds the curve
    everywhere are dropped and reported in ``AcmTable.dropped``.
    """
    distances = np.asarray(distances, dtype=float)
    order = np.argsort(distances)
    distances = distances[order]
    rates = np.asarray(rates, dtype=float)[order] - margin
    modes = sorted(modes, key=lambda m: m.spectral_efficiency)
    refine_fn = (None if refine is None
                 else (lambda d: refine(d) - margin))

    kept: list[AcmMode] = []
    dropped: list[AcmMode] = []
    crossings: list[float] = []
    for mode in modes:
        c = _largest_distance_at_or_above(distances, rates,
                                          mode.spectral_efficiency,
                                          refine_fn, refine_step)
        if c is None or c < d_min:
            dropped.append(mode)
        else:
            kept.append(mode)
            crossings.append(c)
    if not kept:
        raise EmptyTable("no mode lies below the rate curve anywhere")

    # The table's ceiling is where the weakest mode stops being feasible.
    top = min(float(crossings[0]), d_max)
    thresholds: list[float] = []
    prev = top
    for k in range(len(kept)):
        if k < len(kept) - 1:
            # Mode k may be used out to the point where mode k+1 takes over;
            # that hand-off must keep mode k+1 below the curve, and the
            # interval must stay nonempty.
            d_k = min(crossings[k + 1], prev - refine_step)
        else:
            d_k = d_min
        d_k = max(d_k, d_min)
        if not d_k < prev:
            raise EmptyTable("rate curve too flat to separate mode intervals")
        thresholds.append(d_k)
        prev = d_k
    return AcmTable(modes=tuple(kept), thresholds_m=tuple(thresholds),
                    d_max=top, dropped=tuple(dropped))


def select_mode(d: float, table: AcmTable) -> AcmMode:
    """Mode serving distance ``d`` (meters) under the designed table."""
    floor = table.thresholds_m[-1]
    if d < floor:
        raise BelowMinimumSeparation(
            f"distance {d / 1e3:.2f} km below minimum separation {floor / 1e3:.2f} km")
    if d >= table.d_max:
        raise OutOfRange(
            f"distance {d / 1e3:.2f} km at or beyond maximum range {table.d_max / 1e3:.2f} km")
    for mode, (lo, hi) in zip(table.modes, table.intervals()):
        if lo <= d < hi:
            return mode
    raise OutOfRange(f"distance {d / 1e3:.2f} km not covered by the table")


def mode_data_rates(mode: AcmMode, b_total: float, n_r: int) -> tuple[float, float]:
    """(per-antenna, total) data rate in bits/s for a mode."""
    per_dra = mode.spectral_efficiency * b_total
    return per_dra, per_dra * n_r


def format_table(table: AcmTable, b_total: float, n_r: int) -> str:
    """Human-readable listing of the designed table."""
    lines = ["mode  modulation  code_rate  se_bps_hz  range_km  total_rate_mbps"]
    for mode, (lo, hi) in zip(table.modes, table.intervals()):
        _, total = mode_data_rates(mode, b_total, n_r)
        lines.append(
            f"{mode.index:>4}  {mode.modulation_order:>10}  {mode.code_rate:>9.3f}"
            f"  {mode.spectral_efficiency:>9.3f}"
            f"  {lo / 1e3:>7.1f}-{hi / 1e3:<8.1f}  {total / 1e6:>10.3f}")
    for mode in table.dropped:
        lines.append(f"{mode.index:>4}  dropped (spectral efficiency "
                     f"{mode.spectral_efficiency} above the rate curve)")
    return "\n".join(lines)


CSV_HEADER = ("mode", "modulation", "code_rate", "se_bps_hz", "threshold_km",
              "rate_per_dra_mbps", "total_rate_mbps")


def write_table_csv(table: AcmTable, b_total: float, n_r: int, path) -> None:
    """Write the designed table with the standard column layout."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for mode, thr in zip(table.modes, table.thresholds_m):
            per_dra, total = mode_data_rates(mode, b_total, n_r)
            writer.writerow([
                mode.index, mode.modulation_order,
                format(mode.code_rate, ".15g"),
                format(mode.spectral_efficiency, ".15g"),
                format(thr / 1e3, ".15g"),
                format(per_dra / 1e6, ".15g"),
                format(total / 1e6, ".15g"),
            ])


def read_table_csv(path, d_max: float) -> AcmTable:
    """Load a designed table previously written by :func:`write_table_csv`.

    The CSV stores only the per-mode thresholds, so the ceiling of the first
    mode's interval (``d_max``) must be supplied, normally from the scenario
    the table was designed for.
    """
    modes: list[AcmMode] = []
    thresholds: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_HEADER:
            raise DomainError(f"unexpected table header in {path}")
        for row in reader:
            modes.append(AcmMode(index=int(row["mode"]),
                                 modulation_order=int(row["modulation"]),
                                 code_rate=float(row["code_rate"]),
                                 spectral_efficiency=float(row["se_bps_hz"])))
            thresholds.append(float(row["threshold_km"]) * 1e3)
    if not modes:
        raise EmptyTable(f"no modes found in {path}")
    return AcmTable(modes=tuple(modes), thresholds_m=tuple(thresholds),
                    d_max=d_max)
