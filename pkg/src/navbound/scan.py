"""Full-day sweep of along-track magnification coefficients at a track site.

For every epoch the visible satellites are projected onto the track
tangent; every pair with opposite-sign along-track cosines yields an
admissible along-track bound, and the best (smallest) magnification is
recorded. Epochs with no admissible pair are kept as explicit gaps.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

from .orbits import (EphemerisRecord, GpsTime, PositionTable, SiteLocation,
                     VisibleSat, visible_satellites,
                     visible_satellites_from_positions)
from .track import directional_cosines, frenet_frame


@dataclass(frozen=True)
class ScanConfig:
    site: SiteLocation
    track_azimuth: float  # degrees, clockwise from north
    mask: float
    step: float
    start: GpsTime
    end: GpsTime
    pair_policy: str = "best-pair"  # or "all-pairs"

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if not self.start < self.end:
            raise ValueError("start must precede end")
        if not 0 <= self.mask < 90:
            raise ValueError("mask must be in [0, 90) degrees")
        if self.pair_policy not in ("best-pair", "all-pairs"):
            raise ValueError("pair_policy must be best-pair or all-pairs")


@dataclass(frozen=True)
class EpochResult:
    t: GpsTime
    n_visible: int
    visible_ids: tuple[str, ...]
    best_m_s: Optional[float] = None
    best_pair: Optional[tuple[str, str]] = None
    all_pair_values: Optional[list] = None


@dataclass(frozen=True)
class Histogram:
    bin_edges: list[float]
    relative_frequency: list[float]
    overflow: float = 0.0


def _epoch_pairs(visible: Sequence[VisibleSat], track_azimuth_deg: float):
    """All admissible (m_s, id_a, id_b) pair values at one epoch, sorted."""
    frame = frenet_frame([0.0, 0.0, 0.0], math.radians(track_azimuth_deg),
                         "straight")
    sats = directional_cosines([v.enu_unit_dir for v in visible], frame,
                               sat_ids=[v.sat_id for v in visible])
    values = []
    for a, b in combinations(sats, 2):
        if a.f * b.f < 0:
            values.append((1.0 / min(abs(a.f), abs(b.f)), a.sat_id, b.sat_id))
    values.sort()
    return values


def _scan(config: ScanConfig, visibility) -> list[EpochResult]:
    results = []
    t = config.start
    while t < config.end:
        visible = visibility(t)
        pairs = _epoch_pairs(visible, config.track_azimuth)
        best = pairs[0] if pairs else None
        results.append(EpochResult(
            t=t,
            n_visible=len(visible),
            visible_ids=tuple(v.sat_id for v in visible),
            best_m_s=best[0] if best else None,
            best_pair=(best[1], best[2]) if best else None,
            all_pair_values=pairs if config.pair_policy == "all-pairs" else None,
        ))
        t = t.add_seconds(config.step)
    return results


def scan_ms(config: ScanConfig,
            ephemerides: Sequence[EphemerisRecord]) -> list[EpochResult]:
    """Sweep epochs using broadcast ephemerides."""
    if not ephemerides:
        raise ValueError("empty ephemeris set")
    toes = [e.toe for e in ephemerides]
    if max(toes).add_seconds(max(e.validity_window for e in ephemerides)) < config.start \
            or min(toes) > config.end.add_seconds(max(e.validity_window for e in ephemerides)):
        raise ValueError("ephemerides do not overlap the scan span")

    def visibility(t):
        return visible_satellites(ephemerides, config.site, t, config.mask)

    return _scan(config, visibility)


def scan_ms_positions(config: ScanConfig, table: PositionTable,
                      tolerance: float = 1e-6) -> list[EpochResult]:
    """Sweep epochs using a precomputed satellite position table."""

    def visibility(t):
        return visible_satellites_from_positions(table, config.site, t,
                                                 config.mask, tolerance)

    return _scan(config, visibility)


def histogram(results: Sequence[EpochResult], bin_width: float = 0.1,
              value_range: tuple[float, float] = (1.0, 3.0)) -> Histogram:
    """Relative-frequency histogram of present best_m_s values.

    Frequencies are normalized by the number of epochs with a value;
    values above the range fall in the overflow bin.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    values = [r.best_m_s for r in results if r.best_m_s is not None]
    if not values:
        raise ValueError("no epochs with an admissible pair")
    lo, hi = value_range
    n_bins = int(round((hi - lo) / bin_width))
    edges = [lo + i * bin_width for i in range(n_bins + 1)]
    counts = [0] * n_bins
    overflow = 0
    for v in values:
        if v >= edges[-1]:
            overflow += 1
            continue
        idx = int((v - lo) / bin_width)
        counts[max(0, min(idx, n_bins - 1))] += 1
    total = len(values)
    return Histogram(
        bin_edges=edges,
        relative_frequency=[c / total for c in counts],
        overflow=overflow / total,
    )


# --- serialization ----------------------------------------------------------

def series_csv(results: Sequence[EpochResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["week", "sow", "n_visible", "best_m_s", "sat_a", "sat_b"])
    for r in results:
        if r.best_m_s is None:
            writer.writerow([r.t.week, f"{r.t.seconds_of_week:.3f}",
                             r.n_visible, "", "", ""])
        else:
            writer.writerow([r.t.week, f"{r.t.seconds_of_week:.3f}", r.n_visible,
                             f"{r.best_m_s:.9f}", r.best_pair[0], r.best_pair[1]])
    return buf.getvalue()


def series_json(results: Sequence[EpochResult]) -> str:
    return json.dumps([
        {
            "week": r.t.week,
            "sow": r.t.seconds_of_week,
            "n_visible": r.n_visible,
            "best_m_s": r.best_m_s,
            "sat_a": r.best_pair[0] if r.best_pair else None,
            "sat_b": r.best_pair[1] if r.best_pair else None,
        }
        for r in results
    ], indent=2)


def parse_series_csv(text: str) -> list[EpochResult]:
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for row in reader:
        has_value = row["best_m_s"] not in ("", None)
        out.append(EpochResult(
            t=GpsTime(int(row["week"]), float(row["sow"])),
            n_visible=int(row["n_visible"]),
            visible_ids=(),
            best_m_s=float(row["best_m_s"]) if has_value else None,
            best_pair=(row["sat_a"], row["sat_b"]) if has_value else None,
        ))
    return out


def hist_csv(hist: Histogram) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bin_low", "bin_high", "rel_freq"])
    for lo, hi, f in zip(hist.bin_edges[:-1], hist.bin_edges[1:],
                         hist.relative_frequency):
        writer.writerow([f"{lo:.6f}", f"{hi:.6f}", f"{f:.9f}"])
    writer.writerow([f"{hist.bin_edges[-1]:.6f}", "inf", f"{hist.overflow:.9f}"])
    return buf.getvalue()


def hist_json(hist: Histogram) -> str:
    return json.dumps({
        "bin_edges": hist.bin_edges,
        "relative_frequency": hist.relative_frequency,
        "overflow": hist.overflow,
    }, indent=2)
