"""Desk-scale sphere previews of tabulated BRDFs.

Orthographic camera looking down +z at a unit sphere, one directional light,
no shadows or bounces: per pixel the BRDF is evaluated in the local shading
frame, weighted by the incident cosine and the light color, then tone-mapped
with clamp-and-gamma. Deterministic by construction (no sampling).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import merl
from .preprocess import NormConfig, expand_slices


@dataclass(frozen=True)
class PreviewScene:
    size: int = 128
    light_dir: tuple[float, float, float] = (0.378, 0.378, 0.845)
    light_rgb: tuple[float, float, float] = (6.0, 6.0, 6.0)
    gamma: float = 2.2
    exposure: float = 1.0
    background: float = 0.0

    def __post_init__(self):
        if self.size < 16:
            raise ValueError("image size must be >= 16")
        d = np.asarray(self.light_dir, dtype=np.float64)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("light direction must be nonzero")
        object.__setattr__(self, "light_dir", tuple(d / n))

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "light_dir": list(self.light_dir),
            "light_rgb": list(self.light_rgb),
            "gamma": self.gamma,
            "exposure": self.exposure,
            "background": self.background,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreviewScene":
        kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**kwargs)


def _local_frame(normals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal tangent/bitangent per normal (branchless construction)."""
    n = normals
    sign = np.where(n[..., 2] >= 0.0, 1.0, -1.0)
    a = -1.0 / (sign + n[..., 2])
    b = n[..., 0] * n[..., 1] * a
    t = np.stack([1.0 + sign * n[..., 0] ** 2 * a, sign * b, -sign * n[..., 0]], axis=-1)
    bt = np.stack([b, sign + n[..., 1] ** 2 * a, -n[..., 1]], axis=-1)
    return t, bt


def render_sphere_raw(brdf, scene: PreviewScene = PreviewScene()) -> np.ndarray:
    """Linear (pre-tonemap) image, float64 (size, size, 3).

    brdf may be a MerlBRDF or a raw (3, 90, 90, 180) table of stored values;
    per-channel render scales are applied by the lookup.
    """
    s = scene.size
    px = (np.arange(s) + 0.5) / s * 2.0 - 1.0
    x, y = np.meshgrid(px, -px)  # image row 0 at the top
    r2 = x * x + y * y
    inside = r2 <= 1.0

    nz = np.sqrt(np.clip(1.0 - r2, 0.0, None))
    normal = np.stack([x, y, nz], axis=-1)

    wo_world = np.array([0.0, 0.0, 1.0])
    wi_world = np.asarray(scene.light_dir)

    t, bt = _local_frame(normal)

    def to_local(v):
        return np.stack(
            [(t * v).sum(-1), (bt * v).sum(-1), (normal * v).sum(-1)], axis=-1
        )

    wi = to_local(wi_world)
    wo = to_local(wo_world)

    cos_i = wi[..., 2]
    lit = inside & (cos_i > 0.0) & (wo[..., 2] > 0.0)

    img = np.full((s, s, 3), float(scene.background), dtype=np.float64)
    if lit.any():
        rgb, _ = merl.brdf_lookup(brdf, wi[lit], wo[lit])
        img[lit] = rgb * np.asarray(scene.light_rgb) * cos_i[lit][:, None]
    return img


def tonemap(img: np.ndarray, gamma: float = 2.2, exposure: float = 1.0) -> np.ndarray:
    """Clamp-and-gamma to 8-bit RGB."""
    out = np.clip(img * exposure, 0.0, 1.0) ** (1.0 / gamma)
    return (out * 255.0 + 0.5).astype(np.uint8)


def render_sphere(brdf, scene: PreviewScene = PreviewScene()) -> np.ndarray:
    """Tone-mapped uint8 preview (size, size, 3)."""
    return tonemap(render_sphere_raw(brdf, scene), scene.gamma, scene.exposure)


def render_reduced_table(reduced: np.ndarray, scene: PreviewScene) -> np.ndarray:
    """Render a (3, 21, 90, 90) denormalized reduced table. Denormalized
    values are in stored-table units, which is what the lookup expects."""
    full = expand_slices(np.moveaxis(reduced, 1, 3))  # (3, 90, 90, 180)
    return render_sphere(full, scene)


def contact_sheet(codes, model, scene: PreviewScene = PreviewScene(),
                  cols: int | None = None,
                  norm: NormConfig = NormConfig()) -> np.ndarray:
    """Decode each code (length 8 plain, length 10 augmented), render, and
    tile row-major into one uint8 image."""
    from .latent import decode_augmented, decode_denormalized  # cycle guard

    codes = [np.asarray(c, dtype=np.float64) for c in codes]
    if not codes:
        raise ValueError("no codes given")
    tiles = []
    for code in codes:
        if code.shape == (10,):
            table = decode_augmented(model, code, norm)
        else:
            table = decode_denormalized(model, code, norm)
        tiles.append(render_reduced_table(table, scene))

    n = len(tiles)
    cols = cols or int(np.ceil(np.sqrt(n)))
    rows = int(np.ceil(n / cols))
    s = scene.size
    sheet = np.zeros((rows * s, cols * s, 3), dtype=np.uint8)
    for i, tile in enumerate(tiles):
        r, c = divmod(i, cols)
        sheet[r * s : (r + 1) * s, c * s : (c + 1) * s] = tile
    return sheet
