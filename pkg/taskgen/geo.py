"""
Spherical-earth helpers: distances, offsets and the fixed-size location grid.
"""

import math
from dataclasses import dataclass

from core.exceptions import DomainError

EARTH_RADIUS_M = 6_371_000.0
METERS_PER_DEGREE = EARTH_RADIUS_M * math.pi / 180.0
CELL_TOLERANCE = 1e-6


def haversine_m(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters between two points given in degrees."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlmb = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))


def destination_point(lat, lon, bearing_rad, distance_m):
    """Point reached from (lat, lon) along a great circle with the given bearing."""
    phi1, lmb1 = math.radians(lat), math.radians(lon)
    delta = distance_m / EARTH_RADIUS_M
    phi2 = math.asin(
        math.sin(phi1) * math.cos(delta)
        + math.cos(phi1) * math.sin(delta) * math.cos(bearing_rad)
    )
    lmb2 = lmb1 + math.atan2(
        math.sin(bearing_rad) * math.sin(delta) * math.cos(phi1),
        math.cos(delta) - math.sin(phi1) * math.sin(phi2),
    )
    return math.degrees(phi2), math.degrees(lmb2)


def degree_span(center_lat, meters):
    """Latitude and longitude spans (degrees) covering `meters` around a latitude."""
    dlat = meters / METERS_PER_DEGREE
    dlon = meters / (METERS_PER_DEGREE * math.cos(math.radians(center_lat)))
    return dlat, dlon


def bounding_box_around(center_lat, center_lon, half_side_m):
    """(lat_min, lat_max, lon_min, lon_max) of a square centred on a point."""
    dlat, dlon = degree_span(center_lat, half_side_m)
    return (center_lat - dlat, center_lat + dlat, center_lon - dlon, center_lon + dlon)


@dataclass(frozen=True)
class GridSpec:
    """
    Row-major grid of square cells laid over a bounding box.

    Offsets are measured in a local equirectangular projection anchored at
    the south-west corner; the last row and column absorb any remainder.
    """
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    cell_m: float
    rows: int
    cols: int

    @classmethod
    def for_box(cls, bounding_box, cell_m):
        lat_min, lat_max, lon_min, lon_max = bounding_box
        height_m, width_m = cls._extent(lat_min, lat_max, lon_min, lon_max)
        # tolerance absorbs round-off in boxes built from exact multiples of the cell
        rows = max(1, math.ceil(height_m / cell_m - CELL_TOLERANCE))
        cols = max(1, math.ceil(width_m / cell_m - CELL_TOLERANCE))
        return cls(lat_min, lat_max, lon_min, lon_max, cell_m, rows, cols)

    @staticmethod
    def _extent(lat_min, lat_max, lon_min, lon_max):
        mid = math.radians((lat_min + lat_max) / 2)
        height_m = (lat_max - lat_min) * METERS_PER_DEGREE
        width_m = (lon_max - lon_min) * METERS_PER_DEGREE * math.cos(mid)
        return height_m, width_m

    @property
    def cell_count(self):
        return self.rows * self.cols

    def contains(self, latitude, longitude):
        return (self.lat_min <= latitude <= self.lat_max
                and self.lon_min <= longitude <= self.lon_max)

    def offsets_m(self, latitude, longitude):
        """North and east offsets in meters from the south-west corner."""
        mid = math.radians((self.lat_min + self.lat_max) / 2)
        north = (latitude - self.lat_min) * METERS_PER_DEGREE
        east = (longitude - self.lon_min) * METERS_PER_DEGREE * math.cos(mid)
        return north, east

    def cell_index(self, latitude, longitude):
        if not self.contains(latitude, longitude):
            raise DomainError(
                f"Coordinates ({latitude}, {longitude}) lie outside the bounding box "
                f"[{self.lat_min}, {self.lat_max}] x [{self.lon_min}, {self.lon_max}]."
            )
        north, east = self.offsets_m(latitude, longitude)
        row = min(int(north // self.cell_m), self.rows - 1)
        col = min(int(east // self.cell_m), self.cols - 1)
        return row * self.cols + col
