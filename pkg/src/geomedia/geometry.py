"""Great-circle geometry underlying the spatial predicates.

Distances use the haversine formula and bearings the standard initial
great-circle bearing, both on a spherical earth of mean radius 6371 km.
The four cardinal cones partition the compass into 90-degree sectors
centred on north, east, south and west; points lying exactly on a
45-degree boundary belong to the north/south cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0

FRONT_OF = "frontOf"
BEHIND = "behind"
LEFT_OF = "leftOf"
RIGHT_OF = "rightOf"
NEAR = "near"

SPATIAL_RELATIONS = (FRONT_OF, BEHIND, LEFT_OF, RIGHT_OF, NEAR)
CONE_RELATIONS = (FRONT_OF, RIGHT_OF, BEHIND, LEFT_OF)


@dataclass(frozen=True)
class GeometryConfig:
    """Radii (meters) bounding the spatial predicates.

    max_radius_m:  how far a cardinal cone reaches,
    near_radius_m: the 'near' disc,
    here_radius_m: the neighbourhood of the user for deictic queries.
    """

    max_radius_m: float = 500.0
    near_radius_m: float = 100.0
    here_radius_m: float = 100.0


DEFAULT_GEOMETRY = GeometryConfig()


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in meters between two WGS84 points."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))


def initial_bearing_deg(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Initial great-circle bearing from point 1 to point 2, in [0, 360)."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dlam = math.radians(lon2 - lon1)
    y = math.sin(dlam) * math.cos(phi2)
    x = math.cos(phi1) * math.sin(phi2) - math.sin(phi1) * math.cos(phi2) * math.cos(dlam)
    return math.degrees(math.atan2(y, x)) % 360.0


def cone_of_bearing(bearing_deg: float) -> str:
    """Map a bearing to the cardinal cone relation owning it.

    Sectors are half-open so that every bearing belongs to exactly one
    cone; the 45/135/225/315 boundaries go to the north/south cones.
    """
    b = bearing_deg % 360.0
    if b >= 315.0 or b <= 45.0:
        return FRONT_OF
    if b < 135.0:
        return RIGHT_OF
    if b <= 225.0:
        return BEHIND
    return LEFT_OF


def eval_spatial(
    relation: str,
    anchor: tuple[float, float],
    candidate: tuple[float, float],
    geometry: GeometryConfig = DEFAULT_GEOMETRY,
) -> bool:
    """Decide whether ``candidate`` stands in ``relation`` to ``anchor``.

    Coincident points satisfy no relation. 'near' is a plain distance
    test; the four cardinal relations additionally require the bearing
    from anchor to candidate to fall inside the relation's cone.
    """
    if relation not in SPATIAL_RELATIONS:
        raise ValueError(f"not a spatial relation: {relation!r}")
    dist = haversine_m(anchor[0], anchor[1], candidate[0], candidate[1])
    if dist == 0.0:
        return False
    if relation == NEAR:
        return dist <= geometry.near_radius_m
    if dist > geometry.max_radius_m:
        return False
    bearing = initial_bearing_deg(anchor[0], anchor[1], candidate[0], candidate[1])
    return cone_of_bearing(bearing) == relation
