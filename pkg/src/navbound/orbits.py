"""GPS broadcast ephemeris ingestion, orbit propagation and local geometry.

Handles RINEX 2.x navigation files (or a plain CSV of precomputed ECEF
positions), propagates Kepler broadcast elements to ECEF, and converts
to local East-North-Up directions with elevation masking.
"""

from __future__ import annotations

import datetime as dt
import logging
import math
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Optional, Sequence

import numpy as np

from .constants import (GM_EARTH, OMEGA_EARTH, SECONDS_PER_WEEK, WGS84_A,
                        WGS84_B, WGS84_E2)

log = logging.getLogger(__name__)

GPS_EPOCH = dt.datetime(1980, 1, 6)

# GPS - UTC leap-second offset; 16 s was current through 2013-2015.
DEFAULT_GPS_UTC_OFFSET = 16.0


class RinexParseError(ValueError):
    """Fatal navigation-file format problem (bad header / version)."""


class EphemerisError(RuntimeError):
    """Propagation failure: stale record or non-converging Kepler iteration."""


@total_ordering
@dataclass(frozen=True)
class GpsTime:
    """GPS time as (week, seconds-of-week)."""

    week: int
    seconds_of_week: float

    def __post_init__(self):
        if not 0 <= self.seconds_of_week < SECONDS_PER_WEEK:
            raise ValueError("seconds_of_week out of [0, 604800)")

    def total_seconds(self) -> float:
        return self.week * SECONDS_PER_WEEK + self.seconds_of_week

    def __sub__(self, other: "GpsTime") -> float:
        return self.total_seconds() - other.total_seconds()

    def add_seconds(self, seconds: float) -> "GpsTime":
        total = self.total_seconds() + seconds
        week = int(total // SECONDS_PER_WEEK)
        return GpsTime(week, total - week * SECONDS_PER_WEEK)

    def __lt__(self, other: "GpsTime") -> bool:
        return self.total_seconds() < other.total_seconds()

    @classmethod
    def from_utc(cls, utc: dt.datetime,
                 gps_utc_offset: float = DEFAULT_GPS_UTC_OFFSET) -> "GpsTime":
        delta = (utc - GPS_EPOCH).total_seconds() + gps_utc_offset
        week = int(delta // SECONDS_PER_WEEK)
        return cls(week, delta - week * SECONDS_PER_WEEK)

    def to_utc(self, gps_utc_offset: float = DEFAULT_GPS_UTC_OFFSET) -> dt.datetime:
        return GPS_EPOCH + dt.timedelta(seconds=self.total_seconds() - gps_utc_offset)


@dataclass(frozen=True)
class EphemerisRecord:
    """Kepler broadcast elements of one satellite for one issue epoch."""

    sat_id: str
    toe: GpsTime
    sqrt_a: float
    e: float
    m0: float
    delta_n: float
    i0: float
    idot: float
    omega0: float
    omega_dot: float
    w_arg: float
    cuc: float = 0.0
    cus: float = 0.0
    crc: float = 0.0
    crs: float = 0.0
    cic: float = 0.0
    cis: float = 0.0
    validity_window: float = 4 * 3600.0

    def __post_init__(self):
        if not 0 <= self.e < 1:
            raise ValueError(f"eccentricity {self.e} out of [0, 1)")
        if self.sqrt_a <= 0:
            raise ValueError("sqrt_a must be positive")
        a = self.sqrt_a ** 2
        if not 2.0e7 <= a <= 3.5e7:
            raise ValueError(f"semi-major axis {a} m implausible for GPS")


@dataclass(frozen=True)
class SiteLocation:
    """WGS-84 geodetic site coordinates (degrees, degrees, meters)."""

    latitude: float
    longitude: float
    height: float = 0.0

    def __post_init__(self):
        if abs(self.latitude) > 90:
            raise ValueError("latitude out of range")
        if not -180 < self.longitude <= 180:
            raise ValueError("longitude out of (-180, 180]")


@dataclass(frozen=True)
class VisibleSat:
    sat_id: str
    enu_unit_dir: np.ndarray
    elevation: float
    azimuth: float

    @property
    def g(self) -> np.ndarray:
        return -self.enu_unit_dir


def _rinex_floats(line: str, start: int, count: int) -> list[float]:
    """Parse `count` D19.12 fields from a (possibly trimmed) RINEX line."""
    line = line.rstrip("\r\n").ljust(start + 19 * count)
    out = []
    for i in range(count):
        chunk = line[start + 19 * i: start + 19 * (i + 1)]
        chunk = chunk.replace("D", "E").replace("d", "e").strip()
        out.append(float(chunk) if chunk else 0.0)
    return out


def parse_rinex_nav(text: str, validity_window: float = 4 * 3600.0,
                    ) -> list[EphemerisRecord]:
    """Parse a RINEX 2.x GPS navigation file into ephemeris records.

    Malformed records are skipped with a logged diagnostic; a bad header
    or unsupported version is fatal.
    """
    lines = text.splitlines()
    if not lines:
        raise RinexParseError("empty input")

    first = lines[0]
    if "RINEX VERSION / TYPE" not in first:
        raise RinexParseError("line 1: missing RINEX VERSION / TYPE header")
    try:
        version = float(first[:9])
    except ValueError as exc:
        raise RinexParseError(f"line 1: unreadable version field: {exc}") from exc
    if not 2.0 <= version < 3.0:
        raise RinexParseError(f"line 1: unsupported RINEX version {version}")
    ftype = first[20:21].upper()
    if ftype != "N":
        raise RinexParseError(f"line 1: not a navigation file (type {ftype!r})")

    body_start = None
    for i, line in enumerate(lines):
        if "END OF HEADER" in line:
            body_start = i + 1
            break
    if body_start is None:
        raise RinexParseError("missing END OF HEADER")

    records: list[EphemerisRecord] = []
    i = body_start
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        block = lines[i:i + 8]
        if len(block) < 8:
            log.warning("line %d: truncated record block, skipped", i + 1)
            break
        try:
            records.append(_parse_record_block(block, validity_window))
        except (ValueError, IndexError) as exc:
            log.warning("line %d: skipping malformed record: %s", i + 1, exc)
        i += 8
    return records


def _parse_record_block(block: list[str], validity_window: float) -> EphemerisRecord:
    head = block[0]
    prn = int(head[0:2])
    # Epoch (toc) is parsed only to sanity-check the two-digit year mapping;
    # propagation keys on toe + GPS week from the orbit lines.
    yy = int(head[3:5])
    year = 2000 + yy if yy < 80 else 1900 + yy
    month, day, hour, minute = (int(head[k:k + 3]) for k in (5, 8, 11, 14))
    second = float(head[17:22])
    dt.datetime(year, month, day, hour, minute) + dt.timedelta(seconds=second)

    orbit = []
    for line in block[1:]:
        orbit.extend(_rinex_floats(line, 3, 4))
    # orbit[0..]: IODE, Crs, Delta_n, M0 | Cuc, e, Cus, sqrtA
    #             Toe, Cic, OMEGA0, Cis | i0, Crc, omega, OMEGAdot
    #             IDOT, codesL2, week, L2Pflag | accuracy, health, TGD, IODC
    week = int(orbit[18])
    toe_sow = orbit[8]
    return EphemerisRecord(
        sat_id=f"G{prn:02d}",
        toe=GpsTime(week, toe_sow),
        sqrt_a=orbit[7], e=orbit[5],
        m0=orbit[3], delta_n=orbit[2],
        i0=orbit[12], idot=orbit[16],
        omega0=orbit[10], omega_dot=orbit[15],
        w_arg=orbit[14],
        cuc=orbit[4], cus=orbit[6],
        crc=orbit[13], crs=orbit[1],
        cic=orbit[9], cis=orbit[11],
        validity_window=validity_window,
    )


def solve_kepler(mean_anomaly: float, e: float, tol: float = 1e-12,
                 max_iter: int = 30) -> float:
    """Eccentric anomaly from M = E - e sin E by Newton iteration."""
    m = math.remainder(mean_anomaly, 2 * math.pi)
    ecc = m if e < 0.8 else math.pi
    for _ in range(max_iter):
        delta = (ecc - e * math.sin(ecc) - m) / (1 - e * math.cos(ecc))
        ecc -= delta
        if abs(delta) <= tol:
            return ecc
    raise EphemerisError(f"Kepler iteration did not converge (e={e}, M={m})")


def sat_position_ecef(eph: EphemerisRecord, t: GpsTime) -> np.ndarray:
    """ECEF satellite position from broadcast elements at GPS time t."""
    tk = t - eph.toe
    if abs(tk) > eph.validity_window:
        raise EphemerisError(
            f"{eph.sat_id}: ephemeris stale by {abs(tk):.0f} s at requested epoch"
        )
    a = eph.sqrt_a ** 2
    n = math.sqrt(GM_EARTH / a ** 3) + eph.delta_n
    m = eph.m0 + n * tk
    ecc_anom = solve_kepler(m, eph.e)

    nu = math.atan2(math.sqrt(1 - eph.e ** 2) * math.sin(ecc_anom),
                    math.cos(ecc_anom) - eph.e)
    phi = nu + eph.w_arg
    s2p, c2p = math.sin(2 * phi), math.cos(2 * phi)
    u = phi + eph.cus * s2p + eph.cuc * c2p
    r = a * (1 - eph.e * math.cos(ecc_anom)) + eph.crs * s2p + eph.crc * c2p
    inc = eph.i0 + eph.idot * tk + eph.cis * s2p + eph.cic * c2p

    x_orb = r * math.cos(u)
    y_orb = r * math.sin(u)
    node = (eph.omega0 + (eph.omega_dot - OMEGA_EARTH) * tk
            - OMEGA_EARTH * eph.toe.seconds_of_week)
    sn, cn = math.sin(node), math.cos(node)
    si, ci = math.sin(inc), math.cos(inc)
    return np.array([
        x_orb * cn - y_orb * ci * sn,
        x_orb * sn + y_orb * ci * cn,
        y_orb * si,
    ])


def geodetic_to_ecef(site: SiteLocation) -> np.ndarray:
    """WGS-84 geodetic coordinates to ECEF."""
    lat = math.radians(site.latitude)
    lon = math.radians(site.longitude)
    sl, cl = math.sin(lat), math.cos(lat)
    n = WGS84_A / math.sqrt(1 - WGS84_E2 * sl * sl)
    return np.array([
        (n + site.height) * cl * math.cos(lon),
        (n + site.height) * cl * math.sin(lon),
        (n * (1 - WGS84_E2) + site.height) * sl,
    ])


def enu_rotation(site: SiteLocation) -> np.ndarray:
    """Rows are the local East, North and Up unit vectors in ECEF."""
    lat = math.radians(site.latitude)
    lon = math.radians(site.longitude)
    sl, cl = math.sin(lat), math.cos(lat)
    so, co = math.sin(lon), math.cos(lon)
    return np.array([
        [-so, co, 0.0],
        [-sl * co, -sl * so, cl],
        [cl * co, cl * so, sl],
    ])


def ecef_to_enu(site: SiteLocation, point) -> tuple[np.ndarray, float, float]:
    """ENU vector of an ECEF point about the site, plus elevation/azimuth in degrees."""
    diff = np.asarray(point, dtype=float) - geodetic_to_ecef(site)
    rng = np.linalg.norm(diff)
    if rng == 0:
        raise ValueError("point coincides with the site")
    enu = enu_rotation(site) @ diff
    elevation = math.degrees(math.asin(enu[2] / rng))
    azimuth = math.degrees(math.atan2(enu[0], enu[1])) % 360.0
    return enu, elevation, azimuth


def visible_satellites(ephemerides: Sequence[EphemerisRecord],
                       site: SiteLocation, t: GpsTime,
                       mask: float = 15.0) -> list[VisibleSat]:
    """Satellites above the elevation mask at GPS time t.

    For each satellite the record with the nearest toe inside its validity
    window is used; satellites with no usable record are dropped.
    """
    if not ephemerides:
        raise ValueError("empty ephemeris set")
    if not 0 <= mask < 90:
        raise ValueError("mask must be in [0, 90) degrees")

    by_sat: dict[str, EphemerisRecord] = {}
    for eph in ephemerides:
        dt_cur = abs(t - eph.toe)
        if dt_cur > eph.validity_window:
            continue
        prev = by_sat.get(eph.sat_id)
        if prev is None or dt_cur < abs(t - prev.toe):
            by_sat[eph.sat_id] = eph

    out = []
    for sat_id in sorted(by_sat):
        pos = sat_position_ecef(by_sat[sat_id], t)
        enu, elevation, azimuth = ecef_to_enu(site, pos)
        if elevation >= mask:
            out.append(VisibleSat(
                sat_id=sat_id,
                enu_unit_dir=enu / np.linalg.norm(enu),
                elevation=elevation, azimuth=azimuth,
            ))
    return out


# --- alternative CSV ingestion (sat_id,week,sow,x_m,y_m,z_m) ---------------

@dataclass
class PositionTable:
    """Precomputed ECEF satellite positions keyed by satellite and epoch."""

    entries: dict = field(default_factory=dict)  # sat_id -> list[(GpsTime, ndarray)]

    def add(self, sat_id: str, t: GpsTime, pos: np.ndarray):
        self.entries.setdefault(sat_id, []).append((t, pos))

    def position(self, sat_id: str, t: GpsTime,
                 tolerance: float = 1e-6) -> Optional[np.ndarray]:
        for tt, pos in self.entries.get(sat_id, ()):
            if abs(tt - t) <= tolerance:
                return pos
        return None


def parse_position_csv(text: str) -> PositionTable:
    """Parse the alternative `sat_id,week,sow,x_m,y_m,z_m` position format."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].lower().startswith("sat_id"):
        raise ValueError("position CSV must start with a sat_id,... header row")
    table = PositionTable()
    for k, line in enumerate(lines[1:], start=2):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 6:
            log.warning("line %d: expected 6 CSV fields, skipped", k)
            continue
        sat_id, week, sow, x, y, z = parts
        table.add(sat_id, GpsTime(int(week), float(sow)),
                  np.array([float(x), float(y), float(z)]))
    return table


def visible_satellites_from_positions(table: PositionTable, site: SiteLocation,
                                      t: GpsTime, mask: float = 15.0,
                                      tolerance: float = 1e-6) -> list[VisibleSat]:
    """Visibility filter over a precomputed position table (exact-epoch match)."""
    if not table.entries:
        raise ValueError("empty position table")
    if not 0 <= mask < 90:
        raise ValueError("mask must be in [0, 90) degrees")
    out = []
    for sat_id in sorted(table.entries):
        pos = table.position(sat_id, t, tolerance)
        if pos is None:
            continue
        enu, elevation, azimuth = ecef_to_enu(site, pos)
        if elevation >= mask:
            out.append(VisibleSat(
                sat_id=sat_id,
                enu_unit_dir=enu / np.linalg.norm(enu),
                elevation=elevation, azimuth=azimuth,
            ))
    return out
