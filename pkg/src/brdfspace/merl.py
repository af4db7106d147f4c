"""MERL-format BRDF tables: binary I/O, half-difference angles, direction math, lookups.

A MERL file stores an isotropic BRDF densely tabulated over Rusinkiewicz
half-difference coordinates (theta_h, theta_d, phi_d) on a 90 x 90 x 180 grid,
channel-major (all red, then green, then blue), theta_h on a quadratic scale.
Negative stored values mark invalid entries (directions below the horizon).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

RES_THETA_H = 90
RES_THETA_D = 90
RES_PHI_D = 180
RESOLUTION = (RES_THETA_H, RES_THETA_D, RES_PHI_D)
N_SAMPLES_PER_CHANNEL = RES_THETA_H * RES_THETA_D * RES_PHI_D

# Per-channel scale applied when rendering stored MERL values (R, G, B).
RENDER_SCALE = (1.0 / 1500, 1.5 / 1500, 1.66 / 1500)

_HEADER = struct.Struct("<3i")


class MerlFormatError(ValueError):
    """Malformed MERL file: bad header dimensions or inconsistent payload."""


@dataclass
class MerlBRDF:
    """Tabulated BRDF with samples shaped (3, 90, 90, 180), float64."""

    name: str
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        if self.samples.shape != (3, *RESOLUTION):
            raise MerlFormatError(
                f"samples must have shape {(3, *RESOLUTION)}, got {self.samples.shape}"
            )

    @property
    def resolution(self) -> tuple[int, int, int]:
        return RESOLUTION


def read_merl(path) -> MerlBRDF:
    """Load a MERL binary file, validating header dimensions and payload size."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise IOError(f"{path}: file too short for MERL header")
    dims = _HEADER.unpack_from(raw)
    if dims != RESOLUTION:
        raise MerlFormatError(f"{path}: header dims {dims} != {RESOLUTION}")
    expected = _HEADER.size + 3 * N_SAMPLES_PER_CHANNEL * 8
    if len(raw) != expected:
        raise IOError(
            f"{path}: payload is {len(raw)} bytes, expected {expected}"
        )
    samples = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    samples = samples.reshape(3, *RESOLUTION)
    return MerlBRDF(name=path.stem, samples=samples.copy())


def write_merl(brdf: MerlBRDF, path) -> None:
    """Write a MERL binary file; read_merl(write_merl(b)) round-trips bit-exactly."""
    path = Path(path)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(*RESOLUTION))
        f.write(np.ascontiguousarray(brdf.samples, dtype="<f8").tobytes())


def index_to_angles(i_th, i_td, i_pd):
    """Map table indices to Rusinkiewicz angles in degrees.

    theta_h uses the (nonlinear) quadratic MERL convention
    theta_h = 90 * (i/90)^2; theta_d and phi_d are linear (1 degree per bin).
    """
    i_th = np.asarray(i_th)
    i_td = np.asarray(i_td)
    i_pd = np.asarray(i_pd)
    if np.any((i_th < 0) | (i_th >= RES_THETA_H)):
        raise IndexError(f"theta_h index out of range [0, {RES_THETA_H})")
    if np.any((i_td < 0) | (i_td >= RES_THETA_D)):
        raise IndexError(f"theta_d index out of range [0, {RES_THETA_D})")
    if np.any((i_pd < 0) | (i_pd >= RES_PHI_D)):
        raise IndexError(f"phi_d index out of range [0, {RES_PHI_D})")
    theta_h = 90.0 * (i_th / RES_THETA_H) ** 2
    theta_d = 90.0 * (i_td / RES_THETA_D)
    phi_d = 180.0 * (i_pd / RES_PHI_D)
    return theta_h, theta_d, phi_d


def angles_to_index(theta_h, theta_d, phi_d):
    """Nearest-bin inverse of index_to_angles. Angles in degrees.

    phi_d is folded into [0, 180) by reciprocity before binning; rounding is
    to the nearest bin so bin angles map back to their own index exactly.
    """
    theta_h = np.asarray(theta_h, dtype=np.float64)
    theta_d = np.asarray(theta_d, dtype=np.float64)
    phi_d = np.asarray(phi_d, dtype=np.float64) % 180.0
    i_th = np.rint(RES_THETA_H * np.sqrt(np.clip(theta_h, 0.0, None) / 90.0))
    i_th = np.clip(i_th, 0, RES_THETA_H - 1).astype(np.intp)
    i_td = np.clip(np.rint(theta_d), 0, RES_THETA_D - 1).astype(np.intp)
    i_pd = (np.rint(phi_d).astype(np.intp)) % RES_PHI_D
    return i_th, i_td, i_pd


def half_diff_to_directions(theta_h, theta_d, phi_d):
    """Vectorized (theta_h, theta_d, phi_d) in degrees -> (omega_i, omega_o).

    The half vector is placed at azimuth 0 (isotropy); the difference vector
    (theta_d, phi_d) is expressed in the half-vector frame and rotated out by
    R_y(theta_h). omega_o is omega_i reflected about the half vector. Returned
    directions are unit vectors with shape (..., 3); validity is NOT checked.
    """
    th = np.deg2rad(np.asarray(theta_h, dtype=np.float64))
    td = np.deg2rad(np.asarray(theta_d, dtype=np.float64))
    pd = np.deg2rad(np.asarray(phi_d, dtype=np.float64))
    th, td, pd = np.broadcast_arrays(th, td, pd)

    sin_th, cos_th = np.sin(th), np.cos(th)
    sin_td, cos_td = np.sin(td), np.cos(td)

    dx = sin_td * np.cos(pd)
    dy = sin_td * np.sin(pd)
    dz = cos_td

    # omega_i = R_y(theta_h) @ d
    wi = np.stack(
        [cos_th * dx + sin_th * dz, dy, -sin_th * dx + cos_th * dz], axis=-1
    )
    h = np.stack([sin_th, np.zeros_like(sin_th), cos_th], axis=-1)
    wo = 2.0 * np.sum(wi * h, axis=-1, keepdims=True) * h - wi
    return wi, wo


def angles_to_directions(theta_h: float, theta_d: float, phi_d: float):
    """Scalar version returning (omega_i, omega_o) or None when either
    direction falls below the horizon (z < 0)."""
    wi, wo = half_diff_to_directions(theta_h, theta_d, phi_d)
    if wi[..., 2] < 0 or wo[..., 2] < 0:
        return None
    return wi, wo


def directions_to_half_diff(wi, wo):
    """Vectorized (omega_i, omega_o) -> (theta_h, theta_d, phi_d) in degrees.

    phi_d is folded into [0, 180); inputs are assumed unit length.
    """
    wi = np.asarray(wi, dtype=np.float64)
    wo = np.asarray(wo, dtype=np.float64)
    h = wi + wo
    norm = np.linalg.norm(h, axis=-1, keepdims=True)
    # Degenerate wi == -wo cannot happen for two above-horizon directions
    # except exactly at grazing; guard anyway.
    h = h / np.where(norm > 0, norm, 1.0)

    theta_h = np.arccos(np.clip(h[..., 2], -1.0, 1.0))
    phi_h = np.arctan2(h[..., 1], h[..., 0])

    # d = R_y(-theta_h) @ R_z(-phi_h) @ wi
    sin_ph, cos_ph = np.sin(phi_h), np.cos(phi_h)
    tx = cos_ph * wi[..., 0] + sin_ph * wi[..., 1]
    ty = -sin_ph * wi[..., 0] + cos_ph * wi[..., 1]
    tz = wi[..., 2]
    sin_th, cos_th = np.sin(theta_h), np.cos(theta_h)
    dx = cos_th * tx - sin_th * tz
    dy = ty
    dz = sin_th * tx + cos_th * tz

    theta_d = np.arccos(np.clip(dz, -1.0, 1.0))
    phi_d = np.arctan2(dy, dx)
    return (
        np.rad2deg(theta_h),
        np.rad2deg(theta_d),
        np.rad2deg(phi_d) % 180.0,
    )


def _geometric_validity() -> np.ndarray:
    """(90, 90, 180) bool grid: True where both directions sit above the horizon."""
    ith, itd, ipd = np.meshgrid(
        np.arange(RES_THETA_H), np.arange(RES_THETA_D), np.arange(RES_PHI_D),
        indexing="ij",
    )
    th, td, pd = index_to_angles(ith, itd, ipd)
    wi, wo = half_diff_to_directions(th, td, pd)
    return (wi[..., 2] >= 0) & (wo[..., 2] >= 0)


_GEOMETRIC_VALIDITY: np.ndarray | None = None


def geometric_validity() -> np.ndarray:
    """Cached copy of the above-horizon bin grid."""
    global _GEOMETRIC_VALIDITY
    if _GEOMETRIC_VALIDITY is None:
        _GEOMETRIC_VALIDITY = _geometric_validity()
        _GEOMETRIC_VALIDITY.setflags(write=False)
    return _GEOMETRIC_VALIDITY


def brdf_lookup(samples, wi, wo, scale=RENDER_SCALE):
    """Nearest-bin BRDF evaluation, scaled per channel.

    samples: MerlBRDF or a (3, 90, 90, 180) array of stored values.
    wi, wo: unit directions shaped (..., 3) in the local frame (normal = +z).
    Returns (rgb, valid): rgb has shape (..., 3) and is zero wherever a
    direction lies below the horizon or the addressed bin stores a negative
    (invalid) value; valid is False only for below-horizon direction pairs.
    """
    if isinstance(samples, MerlBRDF):
        samples = samples.samples
    samples = np.asarray(samples)
    wi = np.asarray(wi, dtype=np.float64)
    wo = np.asarray(wo, dtype=np.float64)

    valid = (wi[..., 2] >= 0) & (wo[..., 2] >= 0)
    th, td, pd = directions_to_half_diff(wi, wo)
    ith, itd, ipd = angles_to_index(th, td, pd)

    rgb = samples[:, ith, itd, ipd]  # (3, ...)
    rgb = np.moveaxis(rgb, 0, -1) * np.asarray(scale)
    rgb = np.where(np.any(rgb < 0, axis=-1, keepdims=True), 0.0, rgb)
    rgb = np.where(valid[..., None], rgb, 0.0)
    return rgb, valid
