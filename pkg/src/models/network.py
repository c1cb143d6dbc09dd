"""
Pydantic models describing the radio network geometry.

A `NetworkLayout` is the hexagonal site grid with its sector cells and the
wraparound translations that make the finite cluster behave like an infinite
network. `UserTerminal` records are produced by the UE drop.
"""

from __future__ import annotations

from enum import Enum
from functools import cached_property
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class UeKind(str, Enum):
    """Population a UE belongs to."""
    TERRESTRIAL = "terrestrial"
    AERIAL = "aerial"


class Site(BaseModel):
    """A base-station site on the hexagonal lattice."""

    site_id: int = Field(..., ge=0, description="Index of the site, ring order (center first).")
    x: float = Field(..., description="Easting of the site mast in meters.")
    y: float = Field(..., description="Northing of the site mast in meters.")
    antenna_height: float = Field(..., gt=0, description="Antenna height above ground in meters.")
    ring: int = Field(..., ge=0, description="Hexagonal ring index (0 for the center site).")

    model_config = ConfigDict(frozen=True)


class Cell(BaseModel):
    """A sector cell hosted by a site."""

    cell_id: int = Field(..., ge=0, description="Global cell index; site_id * cells_per_site + sector.")
    site_id: int = Field(..., ge=0, description="Hosting site.")
    azimuth_deg: float = Field(
        ...,
        description="Boresight bearing in degrees, counter-clockwise from the +x axis, in [0, 360).",
    )

    model_config = ConfigDict(frozen=True)


class NetworkLayout(BaseModel):
    """
    Hexagonal multi-cell deployment with geographic wraparound.

    Sites sit on a lattice whose nearest neighbours are `inter_site_distance`
    apart at bearings 0°, 60°, ..., 300°. Each site carries
    `cells_per_site` sectors whose azimuths are 120° apart. Wraparound is
    described by the six translation vectors that tile the plane with copies
    of the cluster; a distance is always measured to the nearest copy.
    """

    sites: List[Site] = Field(..., min_length=1)
    cells: List[Cell] = Field(..., min_length=1)
    cells_per_site: int = Field(default=3, ge=1)
    inter_site_distance: float = Field(..., gt=0, description="ISD in meters.")
    wrap_translations: List[Tuple[float, float]] = Field(
        default_factory=list,
        description="Cluster translation vectors in meters (six for a full cluster).",
    )

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_cells(self) -> "NetworkLayout":
        if len(self.cells) != len(self.sites) * self.cells_per_site:
            raise ValueError("cells must contain cells_per_site entries for every site")
        return self

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @cached_property
    def site_xy(self) -> np.ndarray:
        """(n_sites, 2) site coordinates."""
        xy = np.array([[s.x, s.y] for s in self.sites], dtype=float)
        xy.setflags(write=False)
        return xy

    @cached_property
    def site_heights(self) -> np.ndarray:
        heights = np.array([s.antenna_height for s in self.sites], dtype=float)
        heights.setflags(write=False)
        return heights

    @cached_property
    def cell_site(self) -> np.ndarray:
        """Site index for every cell."""
        idx = np.array([c.site_id for c in self.cells], dtype=np.int64)
        idx.setflags(write=False)
        return idx

    @cached_property
    def cell_azimuths(self) -> np.ndarray:
        az = np.array([c.azimuth_deg for c in self.cells], dtype=float)
        az.setflags(write=False)
        return az

    @cached_property
    def translations(self) -> np.ndarray:
        """(n_translations + 1, 2) array, identity first."""
        shifts = np.vstack([np.zeros((1, 2)), np.asarray(self.wrap_translations, dtype=float).reshape(-1, 2)])
        shifts.setflags(write=False)
        return shifts


class UserTerminal(BaseModel):
    """A dropped UE. Ground is flat in network campaigns, so z equals height_agl."""

    ue_id: int = Field(..., ge=0, description="Identifier, unique within a drop.")
    x: float = Field(..., description="Easting in meters.")
    y: float = Field(..., description="Northing in meters.")
    height_agl: float = Field(..., gt=0, description="Antenna height above ground level in meters.")
    kind: UeKind = Field(default=UeKind.TERRESTRIAL)
    home_cell: int = Field(
        default=-1,
        description="Cell whose area the UE was dropped in; -1 when dropped outside a cell census.",
    )

    model_config = ConfigDict(frozen=True)

    @property
    def position(self) -> Tuple[float, float, float]:
        return (self.x, self.y, self.height_agl)

    @property
    def is_aerial(self) -> bool:
        return self.kind == UeKind.AERIAL
