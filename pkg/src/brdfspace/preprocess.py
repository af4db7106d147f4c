"""Normalization, horizon masking, and slice reduction of MERL tables.

A raw (3, 90, 90, 180) table becomes the 63 x 90 x 90 network input by keeping
21 evenly spread phi_d slices, log-normalizing each channel, and zeroing
entries whose directions fall below the horizon or whose stored value is
negative. The inverse path (denormalize + slice interpolation) restores a full
table from a network output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import merl

EPS_NORM = 0.01
N_SLICES = 21
INPUT_SHAPE = (N_SLICES * 3, merl.RES_THETA_H, merl.RES_THETA_D)

CHANNEL_NAMES = ("red", "green", "blue")


@dataclass(frozen=True)
class NormConfig:
    """Log-normalization constants: rho_hat = (log(rho*S + eps) - log eps) / (log(1 + eps) - log eps)."""

    eps: float = EPS_NORM
    scale: tuple[float, float, float] = merl.RENDER_SCALE

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if any(s <= 0 for s in self.scale):
            raise ValueError("channel scales must be positive")

    def to_dict(self) -> dict:
        return {"eps": self.eps, "scale": list(self.scale)}

    @classmethod
    def from_dict(cls, d: dict) -> "NormConfig":
        return cls(eps=d["eps"], scale=tuple(d["scale"]))


def _channel_scale(channel, cfg: NormConfig) -> float:
    if isinstance(channel, str):
        channel = CHANNEL_NAMES.index(channel)
    return cfg.scale[channel]


def normalize_value(rho, channel, cfg: NormConfig = NormConfig()):
    """Log-normalize raw reflectance for one channel:
    (log(rho*S + eps) - log eps) / (log(1 + eps) - log eps), evaluated in the
    cancellation-free log1p form so 0 -> 0 and 1/S -> 1 hold exactly.

    Rejects negative input; invalid (negative) entries must be masked out by
    the caller instead.
    """
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho < 0):
        raise ValueError("negative reflectance is invalid; mask it, don't normalize it")
    s = _channel_scale(channel, cfg)
    return np.log1p(rho * s / cfg.eps) / np.log1p(1.0 / cfg.eps)


def denormalize_value(rho_hat, channel, cfg: NormConfig = NormConfig()):
    """Inverse of normalize_value (expm1 form, exact at zero), clamped below
    at zero (negative reflectance coming out of the network is unphysical)."""
    rho_hat = np.asarray(rho_hat, dtype=np.float64)
    s = _channel_scale(channel, cfg)
    rho = cfg.eps * np.expm1(rho_hat * np.log1p(1.0 / cfg.eps)) / s
    return np.maximum(rho, 0.0)


def select_slices() -> np.ndarray:
    """The 21 retained phi_d indices: round(j * 179 / 20) for j = 0..20.

    Includes both endpoints so slice re-expansion never extrapolates.
    """
    j = np.arange(N_SLICES)
    return np.rint(j * (merl.RES_PHI_D - 1) / (N_SLICES - 1)).astype(np.intp)


@dataclass
class NetworkInput:
    """Normalized, masked, slice-reduced table.

    values: (63, 90, 90) float32, laid out slice-major with channels inner,
        i.e. values.reshape(21, 3, 90, 90)[s, c] is slice s of channel c.
    mask: (21, 90, 90) bool, shared across channels; False where the bin's
        directions fall below the horizon or any channel stores a negative.
    """

    values: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    slice_indices: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        self.mask = np.ascontiguousarray(self.mask, dtype=bool)
        self.slice_indices = np.asarray(self.slice_indices, dtype=np.intp)
        if self.values.shape != INPUT_SHAPE:
            raise ValueError(f"values must have shape {INPUT_SHAPE}, got {self.values.shape}")
        if self.mask.shape != (N_SLICES, *INPUT_SHAPE[1:]):
            raise ValueError(f"mask must have shape {(N_SLICES, *INPUT_SHAPE[1:])}")

    def channel_mask(self) -> np.ndarray:
        """Mask broadcast to the (63, 90, 90) value layout."""
        return np.repeat(self.mask, 3, axis=0)


def compute_mask(samples: np.ndarray, slice_indices: np.ndarray) -> np.ndarray:
    """(21, 90, 90) validity of the reduced table: above-horizon and non-negative
    in every channel."""
    geo = merl.geometric_validity()[:, :, slice_indices]  # (90, 90, 21)
    nonneg = np.all(samples[:, :, :, slice_indices] >= 0, axis=0)  # (90, 90, 21)
    return np.moveaxis(geo & nonneg, 2, 0)


def to_network_input(brdf: merl.MerlBRDF, cfg: NormConfig = NormConfig()) -> NetworkInput:
    """Reduce, normalize, and mask a MERL table into the 63 x 90 x 90 input."""
    slices = select_slices()
    sub = brdf.samples[:, :, :, slices]  # (3, 90, 90, 21)
    mask = compute_mask(brdf.samples, slices)  # (21, 90, 90)

    stacked = np.empty((N_SLICES, 3, *INPUT_SHAPE[1:]), dtype=np.float64)
    for c in range(3):
        chan = np.moveaxis(sub[c], 2, 0)  # (21, 90, 90)
        stacked[:, c] = normalize_value(np.maximum(chan, 0.0), c, cfg)
    values = stacked.reshape(INPUT_SHAPE).astype(np.float32)
    values[~np.repeat(mask, 3, axis=0)] = 0.0
    return NetworkInput(values=values, mask=mask, slice_indices=slices, name=brdf.name)


def split_channels(values: np.ndarray) -> np.ndarray:
    """(63, 90, 90) network layout -> (3, 21, 90, 90) channel-major view."""
    return np.moveaxis(values.reshape(N_SLICES, 3, *values.shape[1:]), 1, 0)


def merge_channels(channels: np.ndarray) -> np.ndarray:
    """(3, 21, 90, 90) -> (63, 90, 90) network layout."""
    return np.ascontiguousarray(np.moveaxis(channels, 0, 1)).reshape(INPUT_SHAPE)


def denormalize_output(values: np.ndarray, cfg: NormConfig = NormConfig()) -> np.ndarray:
    """(63, 90, 90) network output -> (3, 21, 90, 90) raw reflectance table."""
    chans = split_channels(np.asarray(values, dtype=np.float64))
    return np.stack([denormalize_value(chans[c], c, cfg) for c in range(3)])


def expand_slices(reduced: np.ndarray, slice_indices: np.ndarray | None = None) -> np.ndarray:
    """Linearly interpolate a (..., 21) reduced table back to (..., 180) slices.

    Retained positions pass through bit-exactly.
    """
    reduced = np.asarray(reduced)
    knots = select_slices() if slice_indices is None else np.asarray(slice_indices)
    if reduced.shape[-1] != len(knots):
        raise ValueError(f"expected {len(knots)} slices on the last axis, got {reduced.shape[-1]}")

    pos = np.arange(merl.RES_PHI_D)
    right = np.searchsorted(knots, pos, side="left").clip(1, len(knots) - 1)
    left = right - 1
    span = (knots[right] - knots[left]).astype(np.float64)
    w = (pos - knots[left]) / span

    full = reduced[..., left] * (1.0 - w) + reduced[..., right] * w
    full[..., knots] = reduced  # knots exact, immune to fp in the blend
    return full


def reduce_slices(full: np.ndarray, slice_indices: np.ndarray | None = None) -> np.ndarray:
    """Restrict a (..., 180) table to the retained 21 slices."""
    knots = select_slices() if slice_indices is None else np.asarray(slice_indices)
    return np.asarray(full)[..., knots]


# ---------------------------------------------------------------------------
# Serialization: raw little-endian float32 values + packed mask, described by
# a JSON sidecar naming the slice indices, scales and eps.

INPUT_SCHEMA = "brdfspace.network-input/1"


def save_network_input(ni: NetworkInput, basepath, cfg: NormConfig = NormConfig()) -> Path:
    base = Path(basepath)
    values_file = base.with_suffix(".f32")
    mask_file = base.with_suffix(".mask")
    sidecar = base.with_suffix(".json")

    values_file.write_bytes(ni.values.astype("<f4").tobytes())
    mask_file.write_bytes(np.packbits(ni.mask).tobytes())
    sidecar.write_text(json.dumps({
        "schema": INPUT_SCHEMA,
        "name": ni.name,
        "shape": list(ni.values.shape),
        "mask_shape": list(ni.mask.shape),
        "dtype": "<f4",
        "slice_indices": ni.slice_indices.tolist(),
        "scale": list(cfg.scale),
        "eps_norm": cfg.eps,
        "values_file": values_file.name,
        "mask_file": mask_file.name,
    }, indent=2))
    return sidecar


def load_network_input(sidecar_path) -> NetworkInput:
    sidecar = Path(sidecar_path)
    meta = json.loads(sidecar.read_text())
    if meta.get("schema") != INPUT_SCHEMA:
        raise ValueError(f"{sidecar}: unknown schema {meta.get('schema')!r}")
    shape = tuple(meta["shape"])
    mask_shape = tuple(meta["mask_shape"])
    values = np.frombuffer(
        (sidecar.parent / meta["values_file"]).read_bytes(), dtype=meta["dtype"]
    ).reshape(shape)
    n_mask = int(np.prod(mask_shape))
    bits = np.unpackbits(
        np.frombuffer((sidecar.parent / meta["mask_file"]).read_bytes(), dtype=np.uint8),
        count=n_mask,
    )
    mask = bits.reshape(mask_shape).astype(bool)
    return NetworkInput(
        values=values.copy(),
        mask=mask,
        slice_indices=np.asarray(meta["slice_indices"]),
        name=meta.get("name", sidecar.stem),
    )
