"""
Base-station antenna: parabolic element model and vertical-array synthesis.

Angles follow the usual convention: theta is the zenith angle (0° straight
up, 90° on the horizon, 180° straight down) and phi the azimuth relative to
the cell boresight. The array is a vertical uniform linear array of M rows
with equal-amplitude 1/sqrt(M) weights phased to steer the main lobe to
theta = 90° + electrical downtilt. No amplitude taper is applied, so the
sidelobes that serve aerial UEs are kept at their natural level.
"""

from __future__ import annotations

import logging
from functools import cached_property

import numpy as np
import pandas as pd
from opentelemetry import trace
from pydantic import BaseModel, ConfigDict, Field
from scipy.interpolate import RegularGridInterpolator

from src.models.radio import AntennaArrayConfig


LOGGER = logging.getLogger(__name__)

THETA_GRID = np.arange(0.0, 181.0, 1.0)
PHI_GRID = np.arange(-180.0, 181.0, 1.0)
# Floor for the array factor so that exact nulls stay finite in dB.
AF_FLOOR = 1e-12


def _normalize_phi(phi: np.ndarray) -> np.ndarray:
	return (np.asarray(phi, dtype=float) + 180.0) % 360.0 - 180.0


def element_gain(theta, phi, cfg: AntennaArrayConfig):
	"""
	Parabolic element gain in dBi.

	A(θ,φ) = G_max - min{-(A_V(θ) + A_H(φ)), A_m} with
	A_V = -min[12((θ-90)/θ_3dB)², SLA_V] and A_H = -min[12(φ/φ_3dB)², A_m].
	"""
	theta = np.clip(np.asarray(theta, dtype=float), 0.0, 180.0)
	phi = _normalize_phi(phi)
	a_v = -np.minimum(12.0 * ((theta - 90.0) / cfg.element_hpbw_v) ** 2, cfg.element_sla_v)
	a_h = -np.minimum(12.0 * (phi / cfg.element_hpbw_h) ** 2, cfg.element_fbr)
	gain = cfg.element_max_gain - np.minimum(-(a_v + a_h), cfg.element_fbr)
	return gain if gain.ndim else float(gain)


def array_factor_db(theta, cfg: AntennaArrayConfig):
	"""Power array factor of the steered vertical array in dB (10 log10 M at the steering angle)."""
	theta = np.radians(np.clip(np.asarray(theta, dtype=float), 0.0, 180.0))
	steer = np.radians(90.0 + cfg.electrical_downtilt)
	rows = np.arange(cfg.m_rows)
	phase = 2.0 * np.pi * cfg.vertical_spacing * np.multiply.outer(np.cos(theta) - np.cos(steer), rows)
	field = np.exp(1j * phase).sum(axis=-1) / np.sqrt(cfg.m_rows)
	power = np.maximum(np.abs(field) ** 2, AF_FLOOR)
	af = 10.0 * np.log10(power)
	return af if af.ndim else float(af)


def array_gain(theta, phi, cfg: AntennaArrayConfig):
	"""Element gain plus array factor; M = 1 reduces to the element gain exactly."""
	if cfg.m_rows == 1:
		return element_gain(theta, phi, cfg)
	gain = np.asarray(element_gain(theta, phi, cfg)) + np.asarray(array_factor_db(theta, cfg))
	return gain if gain.ndim else float(gain)


class AntennaPattern(BaseModel):
	"""Synthesized pattern sampled on a 1° (theta, phi) grid with bilinear lookup."""

	array_config: AntennaArrayConfig
	table: np.ndarray = Field(..., description="(181, 361) gains in dBi over THETA_GRID x PHI_GRID.")

	model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

	@classmethod
	def synthesize(cls, cfg: AntennaArrayConfig) -> "AntennaPattern":
		tracer = trace.get_tracer(__name__)
		with tracer.start_as_current_span("synthesize_pattern") as span:
			span.set_attribute("m_rows", cfg.m_rows)
			span.set_attribute("downtilt_deg", cfg.electrical_downtilt)
			theta, phi = np.meshgrid(THETA_GRID, PHI_GRID, indexing="ij")
			table = np.asarray(array_gain(theta, phi, cfg), dtype=float)
			table.setflags(write=False)
			span.set_attribute("peak_gain_dbi", float(table.max()))
		LOGGER.debug("Synthesized pattern peak %.2f dBi", table.max())
		return cls(array_config=cfg, table=table)

	@cached_property
	def interpolator(self) -> RegularGridInterpolator:
		return RegularGridInterpolator((THETA_GRID, PHI_GRID), self.table, method="linear")

	def gain(self, theta, phi):
		"""Gain in dBi at arbitrary angles, bilinear between grid samples."""
		theta = np.clip(np.asarray(theta, dtype=float), 0.0, 180.0)
		phi = _normalize_phi(phi)
		theta, phi = np.broadcast_arrays(theta, phi)
		values = self.interpolator(np.stack([theta.ravel(), phi.ravel()], axis=-1)).reshape(theta.shape)
		return values if values.ndim else float(values)

	@property
	def peak(self) -> float:
		return float(self.table.max())


def pattern_table(pattern: AntennaPattern) -> pd.DataFrame:
	"""Export rows (theta_deg, phi_deg, gain_dbi) for the whole sampled grid."""
	theta, phi = np.meshgrid(THETA_GRID, PHI_GRID, indexing="ij")
	return pd.DataFrame(
		{
			"theta_deg": theta.ravel(),
			"phi_deg": phi.ravel(),
			"gain_dbi": pattern.table.ravel(),
		}
	)
