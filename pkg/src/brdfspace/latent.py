"""Working in the learned parameter space: traversal, the 10-parameter
augmented code, and interpolation between codes.

Dimensions are numbered 1-based in user-facing arguments, matching how the
parameters are labeled in the editor: 1..8 are the learned latents, 9 and 10
are the manually created green-diffuse and green-specular controls obtained by
repurposing parameters 1 and 8 through a channel swap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .model import BrdfVAE, decode_single
from .preprocess import NormConfig, denormalize_output

LATENT_DIM = 8
AUGMENTED_DIM = 10
# Augmented slots 9 and 10 repurpose these learned color dimensions (1-based).
GREEN_DIFFUSE_SOURCE = 1
GREEN_SPECULAR_SOURCE = 8

DEFAULT_TRAVERSAL_RANGE = (-3.0, 3.0)

CODE_SCHEMA = "brdfspace.code/1"


@dataclass(frozen=True)
class TraversalSpec:
    """Sweep of one latent dimension, others held at base."""

    base: np.ndarray
    dim: int  # 1-based, 1..8
    lo: float = DEFAULT_TRAVERSAL_RANGE[0]
    hi: float = DEFAULT_TRAVERSAL_RANGE[1]
    steps: int = 9

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=np.float64))
        if self.base.shape != (LATENT_DIM,):
            raise ValueError(f"base must be a length-{LATENT_DIM} vector")
        if not 1 <= self.dim <= LATENT_DIM:
            raise ValueError(f"dim must be in 1..{LATENT_DIM}")
        if not self.lo < self.hi:
            raise ValueError("range must satisfy lo < hi")
        if self.steps < 2:
            raise ValueError("steps must be >= 2")


def traverse(spec: TraversalSpec) -> list[np.ndarray]:
    """k codes equal to base except dimension `dim`, set to lo..hi inclusive."""
    values = spec.lo + np.arange(spec.steps) * (spec.hi - spec.lo) / (spec.steps - 1)
    codes = []
    for v in values:
        code = spec.base.copy()
        code[spec.dim - 1] = v
        codes.append(code)
    return codes


def augment(z: np.ndarray) -> np.ndarray:
    """Lift a learned 8-code to a neutral 10-code: the green controls start at
    the values of the parameters they repurpose, so the decode is unchanged."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (LATENT_DIM,):
        raise ValueError(f"expected length-{LATENT_DIM} code")
    return np.concatenate([z, [z[GREEN_DIFFUSE_SOURCE - 1], z[GREEN_SPECULAR_SOURCE - 1]]])


def split_augmented(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """10-code -> (V1, V2): V1 is the learned part; V2 swaps in the green
    controls at the repurposed color dimensions."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (AUGMENTED_DIM,):
        raise ValueError(f"expected length-{AUGMENTED_DIM} code")
    v1 = v[:LATENT_DIM].copy()
    v2 = v1.copy()
    v2[GREEN_DIFFUSE_SOURCE - 1] = v[8]
    v2[GREEN_SPECULAR_SOURCE - 1] = v[9]
    return v1, v2


def decode_denormalized(model: BrdfVAE, z: np.ndarray,
                        norm: NormConfig = NormConfig()) -> np.ndarray:
    """Decode an 8-code to a raw-reflectance table shaped (3, 21, 90, 90)."""
    return denormalize_output(decode_single(model, np.asarray(z, dtype=np.float32)), norm)


def decode_augmented(model: BrdfVAE, v: np.ndarray,
                     norm: NormConfig = NormConfig()) -> np.ndarray:
    """Decode a 10-code via the channel swap; returns (3, 21, 90, 90).

    The red and blue channels come from the decode of the learned part V1;
    the green channel is the red channel of the decode of V2 (V1 with the
    green controls substituted into the color dimensions).
    """
    v1, v2 = split_augmented(v)
    m1 = decode_denormalized(model, v1, norm)
    m2 = decode_denormalized(model, v2, norm)
    out = m1.copy()
    out[1] = m2[0]
    return out


def interpolate_selective(z_a: np.ndarray, z_b: np.ndarray, dims_from_a) -> np.ndarray:
    """Take the listed (1-based) dimensions from z_a, the rest from z_b."""
    z_a = np.asarray(z_a, dtype=np.float64)
    z_b = np.asarray(z_b, dtype=np.float64)
    if z_a.shape != z_b.shape:
        raise ValueError("codes must have the same length")
    dims = set(int(d) for d in dims_from_a)
    if any(d < 1 or d > z_a.shape[0] for d in dims):
        raise ValueError(f"dimension indices must be in 1..{z_a.shape[0]}")
    out = z_b.copy()
    for d in dims:
        out[d - 1] = z_a[d - 1]
    return out


def interpolate_linear(z_a: np.ndarray, z_b: np.ndarray, t: float) -> np.ndarray:
    """Elementwise (1-t) * z_a + t * z_b for t in [0, 1]."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must be in [0, 1]")
    z_a = np.asarray(z_a, dtype=np.float64)
    z_b = np.asarray(z_b, dtype=np.float64)
    if t == 0.0:
        return z_a.copy()
    if t == 1.0:
        return z_b.copy()
    return (1.0 - t) * z_a + t * z_b


def dump_code(v: np.ndarray) -> str:
    """JSON form of a code: schema-tagged array of 8 or 10 numbers."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape not in {(LATENT_DIM,), (AUGMENTED_DIM,)}:
        raise ValueError(f"code must have length {LATENT_DIM} or {AUGMENTED_DIM}")
    return json.dumps({"schema": CODE_SCHEMA, "code": v.tolist()})


def parse_code(text: str) -> np.ndarray:
    """Accepts the schema-tagged JSON object, a bare JSON array, or a
    comma-separated list."""
    text = text.strip()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        obj = [float(x) for x in text.split(",")]
    if isinstance(obj, dict):
        if obj.get("schema") != CODE_SCHEMA:
            raise ValueError(f"unknown code schema {obj.get('schema')!r}")
        obj = obj["code"]
    v = np.asarray(obj, dtype=np.float64)
    if v.shape not in {(LATENT_DIM,), (AUGMENTED_DIM,)}:
        raise ValueError(f"code must have length {LATENT_DIM} or {AUGMENTED_DIM}, got {v.shape}")
    return v
