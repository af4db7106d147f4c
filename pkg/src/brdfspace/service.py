"""HTTP service for interactive editing against a loaded checkpoint.

Stateless per request: codes travel with every call, so identical requests
produce identical responses and concurrent handlers share the checkpoint
read-only. Images travel as base64 PNG in JSON; a raw-bytes render endpoint
exists for throughput.
"""

from __future__ import annotations

import base64
import io
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from PIL import Image
from pydantic import BaseModel

from .latent import (
    AUGMENTED_DIM,
    LATENT_DIM,
    TraversalSpec,
    augment,
    decode_augmented,
    decode_denormalized,
    traverse,
)
from .manifold import ManifoldModel
from .model import Checkpoint, load_checkpoint
from .preview import PreviewScene, contact_sheet, render_reduced_table


def _png_bytes(image: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(image).save(buf, format="PNG")
    return buf.getvalue()


def _png_b64(image: np.ndarray) -> str:
    return base64.b64encode(_png_bytes(image)).decode("ascii")


class DecodeRequest(BaseModel):
    code: list[float] | None = None
    material: str | None = None
    scene: dict | None = None


class RenderRequest(BaseModel):
    code: list[float] | None = None
    material: str | None = None
    scene: dict | None = None


class InvertRequest(BaseModel):
    x: float
    y: float
    scene: dict | None = None


def create_app(checkpoint: Checkpoint | str | Path,
               manifold: ManifoldModel | str | Path | None = None,
               default_scene: PreviewScene = PreviewScene()) -> FastAPI:
    if not isinstance(checkpoint, Checkpoint):
        checkpoint = load_checkpoint(checkpoint)
    if manifold is not None and not isinstance(manifold, ManifoldModel):
        manifold = ManifoldModel.load(manifold)

    model = checkpoint.build_model()
    norm = checkpoint.norm

    app = FastAPI(title="brdfspace edit service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def resolve_code(code, material) -> np.ndarray:
        if code is not None:
            v = np.asarray(code, dtype=np.float64)
            if v.shape not in {(LATENT_DIM,), (AUGMENTED_DIM,)}:
                raise HTTPException(
                    status_code=400,
                    detail=f"code must have length {LATENT_DIM} or {AUGMENTED_DIM}, "
                           f"got {v.size}",
                )
            if not np.all(np.isfinite(v)):
                raise HTTPException(status_code=400, detail="code values must be finite")
            return v
        if material is not None:
            stats = checkpoint.latent_table.get(material)
            if stats is None:
                raise HTTPException(status_code=404, detail=f"unknown material {material!r}")
            return np.asarray(stats.mu, dtype=np.float64)
        raise HTTPException(status_code=400, detail="provide either code or material")

    def resolve_scene(overrides) -> PreviewScene:
        if not overrides:
            return default_scene
        base = default_scene.to_dict()
        base.update(overrides)
        try:
            return PreviewScene.from_dict(base)
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad scene: {exc}")

    def decode_table(v: np.ndarray) -> np.ndarray:
        if v.shape == (AUGMENTED_DIM,):
            return decode_augmented(model, v, norm)
        return decode_denormalized(model, v, norm)

    @app.get("/health")
    def health():
        return {"status": "ok", "materials": len(checkpoint.latent_table),
                "manifold": manifold is not None}

    @app.get("/materials")
    def materials():
        return {
            "materials": [
                {
                    "name": name,
                    "mu": stats.mu.tolist(),
                    "sigma": stats.sigma.tolist(),
                    "log_var": stats.log_var.tolist(),
                }
                for name, stats in checkpoint.latent_table.items()
            ]
        }

    @app.post("/decode")
    def decode(req: DecodeRequest):
        t0 = time.perf_counter()
        v = resolve_code(req.code, req.material)
        table = decode_table(v)
        scene = resolve_scene(req.scene)
        image = render_reduced_table(table, scene)
        return {
            "code": v.tolist(),
            "table_stats": {
                "min": float(table.min()),
                "max": float(table.max()),
                "mean_rgb": [float(table[c].mean()) for c in range(3)],
            },
            "preview_png": _png_b64(image),
            "elapsed_ms": (time.perf_counter() - t0) * 1000.0,
        }

    @app.post("/render")
    def render(req: RenderRequest):
        t0 = time.perf_counter()
        v = resolve_code(req.code, req.material)
        scene = resolve_scene(req.scene)
        image = render_reduced_table(decode_table(v), scene)
        return {
            "code": v.tolist(),
            "preview_png": _png_b64(image),
            "elapsed_ms": (time.perf_counter() - t0) * 1000.0,
        }

    @app.post("/render.png")
    def render_raw(req: RenderRequest):
        v = resolve_code(req.code, req.material)
        scene = resolve_scene(req.scene)
        image = render_reduced_table(decode_table(v), scene)
        return Response(content=_png_bytes(image), media_type="image/png")

    @app.get("/manifold")
    def manifold_points():
        if manifold is None:
            raise HTTPException(status_code=503, detail="no manifold model loaded")
        return {
            "names": manifold.names,
            "points": manifold.embedding.tolist(),
            "latents": manifold.latents.tolist(),
            "bounding_box": list(manifold.bounding_box()),
        }

    @app.post("/manifold/invert")
    def manifold_invert(req: InvertRequest):
        if manifold is None:
            raise HTTPException(status_code=503, detail="no manifold model loaded")
        point = np.array([req.x, req.y], dtype=np.float64)
        if not np.all(np.isfinite(point)):
            raise HTTPException(status_code=400, detail="coordinates must be finite")
        z = manifold.inverse(point)[0]
        scene = resolve_scene(req.scene)
        image = render_reduced_table(decode_denormalized(model, z, norm), scene)
        return {
            "latent": z.tolist(),
            "extrapolated": manifold.is_extrapolated(point),
            "preview_png": _png_b64(image),
        }

    @app.get("/traverse")
    def traverse_sheet(
        dim: int = Query(ge=1, le=LATENT_DIM),
        steps: int = Query(default=7, ge=2, le=25),
        lo: float = Query(default=-3.0),
        hi: float = Query(default=3.0),
        range_: str | None = Query(default=None, alias="range",
                                   description="'lo,hi' shorthand"),
        material: str | None = None,
        size: int = Query(default=96, ge=16, le=512),
    ):
        if range_ is not None:
            try:
                lo, hi = (float(x) for x in range_.split(","))
            except ValueError:
                raise HTTPException(status_code=400,
                                    detail="range must be 'lo,hi' numbers")
        base = resolve_code(None, material) if material else np.zeros(LATENT_DIM)
        spec = TraversalSpec(base=base, dim=dim, lo=lo, hi=hi, steps=steps)
        scene = PreviewScene(size=size,
                             light_dir=default_scene.light_dir,
                             light_rgb=default_scene.light_rgb,
                             gamma=default_scene.gamma,
                             exposure=default_scene.exposure)
        sheet = contact_sheet(traverse(spec), model, scene, cols=steps, norm=norm)
        return Response(content=_png_bytes(sheet), media_type="image/png")

    @app.get("/augment/{material}")
    def augmented_base(material: str):
        stats = checkpoint.latent_table.get(material)
        if stats is None:
            raise HTTPException(status_code=404, detail=f"unknown material {material!r}")
        return {"code": augment(np.asarray(stats.mu, dtype=np.float64)).tolist()}

    return app
