"""Parametric stand-in materials in MERL table form.

Useful when no measured data is at hand: a diffuse term plus a Blinn-Phong
style half-angle lobe with a grazing-angle boost, written in stored-table
units (render-scale divided out per channel) with below-horizon bins set to
-1, matching how measured files mark invalid entries.
"""

from __future__ import annotations

import numpy as np

from . import merl


def make_material(name: str, diffuse_rgb, specular_rgb, shininess: float,
                  grazing_boost: float = 0.5) -> merl.MerlBRDF:
    """Build a synthetic MERL table.

    diffuse_rgb, specular_rgb are render-domain values: diffuse is the albedo
    (divided by pi internally), specular the lobe peak BRDF value.
    """
    ith = np.arange(merl.RES_THETA_H)
    itd = np.arange(merl.RES_THETA_D)
    th = np.deg2rad(90.0 * (ith / merl.RES_THETA_H) ** 2)
    td = np.deg2rad(90.0 * (itd / merl.RES_THETA_D))

    lobe = np.cos(th)[:, None] ** shininess
    grazing = 1.0 + grazing_boost * (1.0 - np.cos(td))[None, :] ** 3

    diffuse = np.asarray(diffuse_rgb, dtype=np.float64) / np.pi
    specular = np.asarray(specular_rgb, dtype=np.float64)

    render = (
        diffuse[:, None, None]
        + specular[:, None, None] * (lobe * grazing)[None, :, :]
    )  # (3, 90, 90), constant over phi_d

    stored = render / np.asarray(merl.RENDER_SCALE)[:, None, None]
    samples = np.repeat(stored[:, :, :, None], merl.RES_PHI_D, axis=3)
    samples[:, ~merl.geometric_validity()] = -1.0
    return merl.MerlBRDF(name=name, samples=samples)


_PALETTE = [
    ("white-matte", (0.75, 0.74, 0.72), (0.4, 0.4, 0.4), 6.0),
    ("red-plastic", (0.45, 0.06, 0.05), (1.4, 1.2, 1.1), 28.0),
    ("green-rubber", (0.08, 0.38, 0.10), (0.6, 0.8, 0.6), 12.0),
    ("gold-metal", (0.30, 0.22, 0.05), (1.8, 1.3, 0.5), 45.0),
    ("blue-gloss", (0.05, 0.10, 0.45), (1.0, 1.1, 1.4), 80.0),
    ("violet-satin", (0.28, 0.08, 0.35), (1.8, 1.2, 2.1), 20.0),
    ("silver-metal", (0.12, 0.12, 0.13), (1.5, 1.5, 1.6), 55.0),
    ("teal-gloss", (0.05, 0.30, 0.30), (2.2, 2.8, 2.8), 45.0),
]


_MICRO_SET = [
    ("pearl-white", (0.70, 0.68, 0.65), (0.50, 0.50, 0.55), 8.0),
    ("salmon-matte", (0.50, 0.30, 0.24), (0.90, 0.80, 0.75), 22.0),
    ("sage-rubber", (0.24, 0.40, 0.26), (0.70, 0.85, 0.70), 12.0),
    ("steel-satin", (0.15, 0.16, 0.18), (1.40, 1.40, 1.50), 40.0),
    ("denim-gloss", (0.18, 0.22, 0.38), (1.00, 1.05, 1.25), 55.0),
]


def micro_overfit_set(grazing_boost: float = 0.25) -> list[merl.MerlBRDF]:
    """Five materials sized for a short budgeted fit: distinct hues and lobe
    widths, but moderate channel ratios and peaks."""
    return [make_material(n, d, s, sh, grazing_boost) for n, d, s, sh in _MICRO_SET]


def demo_materials(n: int, seed: int = 0) -> list[merl.MerlBRDF]:
    """n deterministic demo materials: the base palette, then perturbed
    variants of it."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        name, diff, spec, shine = _PALETTE[i % len(_PALETTE)]
        if i < len(_PALETTE):
            out.append(make_material(name, diff, spec, shine))
        else:
            jd = np.clip(np.asarray(diff) * rng.uniform(0.5, 1.6, 3), 0.01, 0.95)
            js = np.asarray(spec) * rng.uniform(0.4, 1.8, 3)
            jn = float(np.clip(shine * rng.uniform(0.5, 2.0), 4.0, 500.0))
            out.append(make_material(f"{name}-{i}", jd, js, jn))
    return out
