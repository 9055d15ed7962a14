"""Track-constrained positioning geometry and clock-anchored error bounds.

A receiver confined to a known track is described locally by a Frenet
frame and the osculating circle. With three satellites the along-track
and cross-track deviations plus the clock bias solve a 3x3 linear
system; with two satellites and the track constraint (a "virtual
satellite" at infinite cross-track cosine) a 2x2 system suffices. When
all unmodeled pseudorange residuals are positive and the satellite
layout satisfies an orientation condition, the deviations are bounded
by magnification coefficients times the clock-bias error.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class DegenerateGeometryError(ValueError):
    """Satellite configuration is too close to singular to invert."""


DETERMINANT_TOL = 1e-9


@dataclass(frozen=True)
class FrenetFrame:
    """Orthonormal track frame: tangent U, normal V (toward the osculating
    center), binormal W = U x V, with osculating radius R (math.inf for a
    straight track)."""

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    radius: float
    base_point: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        w = np.asarray(self.w, dtype=float)
        for name, vec in (("u", u), ("v", v), ("w", w)):
            if abs(np.linalg.norm(vec) - 1.0) > 1e-12:
                raise ValueError(f"{name} is not a unit vector")
        if abs(np.dot(u, v)) > 1e-12 or abs(np.dot(u, w)) > 1e-12 \
                or abs(np.dot(v, w)) > 1e-12:
            raise ValueError("frame vectors are not orthogonal")
        if np.linalg.norm(np.cross(u, v) - w) > 1e-12:
            raise ValueError("w must equal u x v")
        if not (self.radius > 0):
            raise ValueError("radius must be positive (math.inf for straight)")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "base_point",
                           np.asarray(self.base_point, dtype=float))

    @property
    def is_straight(self) -> bool:
        return math.isinf(self.radius)


@dataclass(frozen=True)
class SatGeometry:
    """Per-satellite geometry: g = -unit direction to the satellite, and its
    directional cosines f = <g, U>, h = <g, V> against the track frame.

    g may be None for a synthetic (virtual) satellite used in limit
    analysis; physical-geometry invariants are then not enforced.
    """

    sat_id: str
    g: Optional[np.ndarray]
    f: float
    h: float

    def __post_init__(self):
        if self.g is None:
            return
        g = np.asarray(self.g, dtype=float)
        if abs(np.linalg.norm(g) - 1.0) > 1e-9:
            raise ValueError("g must be a unit vector")
        if self.f * self.f + self.h * self.h > 1.0 + 1e-12:
            raise ValueError("f^2 + h^2 exceeds 1")
        object.__setattr__(self, "g", g)


def synthetic_geometry(sat_id: str, f: float, h: float) -> SatGeometry:
    """A satellite given by bare directional cosines (e.g. the virtual
    satellite of the track constraint, which has no physical direction)."""
    return SatGeometry(sat_id=sat_id, g=None, f=f, h=h)


@dataclass(frozen=True)
class PseudorangeDelta:
    """Pseudorange change and its modeled correction; residual = delta_rho - epsilon."""

    sat_id: str
    delta_rho: float
    epsilon: float = 0.0

    @property
    def residual(self) -> float:
        return self.delta_rho - self.epsilon


@dataclass(frozen=True)
class SolveResult:
    delta_u: float
    delta_v: float
    delta_b: float
    determinant: float
    kind: str  # "three-sat" | "virtual-sat"


@dataclass(frozen=True)
class MagnificationUV:
    m_u: Optional[float]
    m_v: Optional[float]
    admissible: bool
    permutation: Optional[tuple[int, int, int]]


@dataclass(frozen=True)
class MagnificationS:
    m_s: Optional[float]
    admissible: bool


def frenet_frame(base_point, track_azimuth: float,
                 curvature_center_side: str = "straight",
                 radius: float = math.inf) -> FrenetFrame:
    """Horizontal track frame in local ENU coordinates.

    track_azimuth is measured clockwise from north, in radians. The
    normal V points toward the curvature center; for a straight track its
    direction is fixed to the left of travel.
    """
    if curvature_center_side not in ("left", "right", "straight"):
        raise ValueError("curvature_center_side must be left, right or straight")
    if curvature_center_side == "straight":
        radius = math.inf
    elif not (radius > 0) or math.isinf(radius):
        raise ValueError("a curved track needs a finite positive radius")
    if not (radius > 0):
        raise ValueError("radius must be positive")

    u = np.array([math.sin(track_azimuth), math.cos(track_azimuth), 0.0])
    side = -1.0 if curvature_center_side == "right" else 1.0
    # left of travel = azimuth - 90 degrees
    v = side * np.array([-math.cos(track_azimuth), math.sin(track_azimuth), 0.0])
    w = np.cross(u, v)
    return FrenetFrame(u=u, v=v, w=w, radius=radius,
                       base_point=np.asarray(base_point, dtype=float))


def arc_project(u: float, v: float, radius: float) -> tuple[float, float, float]:
    """Project a frame-plane point onto arc length along the osculating circle.

    Returns (s, ds/du, ds/dv) with s = R arctan(u / (R - v)), valid for
    v < R. The partial derivatives are the analytic derivatives of that
    expression. A straight track (R = inf) degenerates to s = u.
    """
    if math.isinf(radius):
        return u, 1.0, 0.0
    if v >= radius:
        raise ValueError(f"v = {v} is outside the projection domain v < R = {radius}")
    rv = radius - v
    denom = rv * rv + u * u
    s = radius * math.atan2(u, rv)
    return s, radius * rv / denom, radius * u / denom


def directional_cosines(sat_unit_dirs: Sequence, frame: FrenetFrame,
                        sat_ids: Optional[Sequence[str]] = None) -> list[SatGeometry]:
    """Geometry vectors and track-frame cosines for unit site->satellite directions."""
    if sat_ids is None:
        sat_ids = [str(i + 1) for i in range(len(sat_unit_dirs))]
    out = []
    for sid, d in zip(sat_ids, sat_unit_dirs):
        d = np.asarray(d, dtype=float)
        if abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError(f"direction for sat {sid} is not a unit vector")
        g = -d
        out.append(SatGeometry(sat_id=str(sid), g=g,
                               f=float(np.dot(g, frame.u)),
                               h=float(np.dot(g, frame.v))))
    return out


def determinant_d(sats: Sequence[SatGeometry]) -> float:
    """Configuration determinant D = f1 h2 - f2 h1 + f2 h3 - f3 h2 + f3 h1 - f1 h3."""
    if len(sats) != 3:
        raise ValueError("exactly three satellites required")
    (f1, h1), (f2, h2), (f3, h3) = ((s.f, s.h) for s in sats)
    return f1 * h2 - f2 * h1 + f2 * h3 - f3 * h2 + f3 * h1 - f1 * h3


def _cofactors(sats: Sequence[SatGeometry]) -> tuple[float, float, float]:
    """(f2 h3 - f3 h2, f3 h1 - f1 h3, f1 h2 - f2 h1)."""
    (f1, h1), (f2, h2), (f3, h3) = ((s.f, s.h) for s in sats)
    return (f2 * h3 - f3 * h2, f3 * h1 - f1 * h3, f1 * h2 - f2 * h1)


def solve_three_sat(sats: Sequence[SatGeometry],
                    deltas: Sequence[PseudorangeDelta]) -> SolveResult:
    """Closed-form inversion of the 3-satellite observation system.

    [du, dv, db]^T = (1/D) * adj(A) * r with A = [[f_j, h_j, 1]] and
    r_j = delta_rho_j - epsilon_j.
    """
    if len(sats) != 3 or len(deltas) != 3:
        raise ValueError("exactly three satellites and three deltas required")
    d = determinant_d(sats)
    if abs(d) <= DETERMINANT_TOL:
        raise DegenerateGeometryError(f"|D| = {abs(d)} below threshold")
    (f1, h1), (f2, h2), (f3, h3) = ((s.f, s.h) for s in sats)
    r = np.array([x.residual for x in deltas])
    adj = np.array([
        [h2 - h3, h3 - h1, h1 - h2],
        [f3 - f2, f1 - f3, f2 - f1],
        [f2 * h3 - f3 * h2, f3 * h1 - f1 * h3, f1 * h2 - f2 * h1],
    ])
    du, dv, db = adj @ r / d
    return SolveResult(delta_u=float(du), delta_v=float(dv), delta_b=float(db),
                       determinant=d, kind="three-sat")


def sign_condition(sats: Sequence[SatGeometry]) -> Optional[tuple[int, int, int]]:
    """Find a satellite relabeling making the configuration counterclockwise.

    With z_j = f_j + i h_j the condition is Im(z_j* z_{j+1}) > 0 for all
    consecutive pairs, cyclically. All 6 suffix permutations are searched;
    returns the first that works, or None.
    """
    if len(sats) != 3:
        raise ValueError("exactly three satellites required")
    z = [complex(s.f, s.h) for s in sats]
    for perm in itertools.permutations(range(3)):
        zs = [z[i] for i in perm]
        if all((zs[j].conjugate() * zs[(j + 1) % 3]).imag > 0 for j in range(3)):
            return perm
    return None


def magnification_uv(sats: Sequence[SatGeometry]) -> MagnificationUV:
    """Along- and cross-track magnification coefficients of a satellite triple.

    M_u = max|h_j - h_k| / min|f_j h_k - f_k h_j| and M_v analogously with
    f-differences in the numerator. Admissible only when the orientation
    condition holds and no cofactor vanishes; then positive residuals give
    |du| <= M_u |db| and |dv| <= M_v |db|.
    """
    perm = sign_condition(sats)
    (f1, h1), (f2, h2), (f3, h3) = ((s.f, s.h) for s in sats)
    cof = [abs(c) for c in _cofactors(sats)]
    if min(cof) == 0.0:
        return MagnificationUV(m_u=None, m_v=None, admissible=False, permutation=perm)
    m_u = max(abs(h2 - h3), abs(h3 - h1), abs(h1 - h2)) / min(cof)
    m_v = max(abs(f2 - f3), abs(f3 - f1), abs(f1 - f2)) / min(cof)
    return MagnificationUV(m_u=m_u, m_v=m_v, admissible=perm is not None,
                           permutation=perm)


def solve_two_sat(sat1: SatGeometry, sat2: SatGeometry,
                  deltas: Sequence[PseudorangeDelta]) -> SolveResult:
    """Two physical satellites plus the track constraint (virtual satellite).

    Solves [[f1, 1], [f2, 1]] (ds, db) = (r1, r2); the cross-track
    deviation is fixed to zero because the virtual observation pins the
    position to the track exactly.
    """
    if len(deltas) != 2:
        raise ValueError("exactly two deltas required")
    dprime = sat2.f - sat1.f
    if abs(dprime) <= DETERMINANT_TOL:
        raise DegenerateGeometryError(f"|f2 - f1| = {abs(dprime)} below threshold")
    r1, r2 = (x.residual for x in deltas)
    ds = (r1 - r2) / (sat1.f - sat2.f)
    db = (sat1.f * r2 - sat2.f * r1) / (sat1.f - sat2.f)
    return SolveResult(delta_u=float(ds), delta_v=0.0, delta_b=float(db),
                       determinant=float(dprime), kind="virtual-sat")


def magnification_s(sat1: SatGeometry, sat2: SatGeometry) -> MagnificationS:
    """Along-track magnification for the two-satellite case.

    Admissible when f1 and f2 have strictly opposite signs; then
    M_s = 1 / min(|f1|, |f2|) bounds |ds| <= M_s |db| for positive residuals.
    """
    if sat1.f * sat2.f < 0:
        return MagnificationS(m_s=1.0 / min(abs(sat1.f), abs(sat2.f)),
                              admissible=True)
    return MagnificationS(m_s=None, admissible=False)
