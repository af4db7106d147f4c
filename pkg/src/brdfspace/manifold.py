"""2D manifold over per-material latents: UMAP embedding plus an invertible map.

The embedding follows the UMAP recipe: a fuzzy k-NN graph with smoothed local
connectivity, symmetrized by the probabilistic t-conorm, laid out in 2D by
stochastic gradient descent on the cross-entropy between graph and embedding
memberships (negative sampling for repulsion). Updates are batched per epoch,
matching UMAP's parallel mode, and all randomness comes from one seeded
generator, so a fixed seed reproduces the embedding bit for bit.

Forward (latent -> 2D) and inverse (2D -> latent) maps are thin-plate-spline
interpolators anchored at the embedded training materials, so they are exact
at those anchors and smooth in between; the inverse is what drag-to-edit uses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import curve_fit
from scipy.interpolate import RBFInterpolator
from sklearn.neighbors import NearestNeighbors

MIN_POINTS = 10

SMOOTH_KNN_TOL = 1e-5
SMOOTH_KNN_ITER = 64
NEGATIVE_SAMPLE_RATE = 5
REPULSION_STRENGTH = 1.0
CLIP_GRAD = 4.0


def fit_membership_curve(min_dist: float = 0.1, spread: float = 1.0) -> tuple[float, float]:
    """Fit a, b of the embedding membership 1 / (1 + a d^(2b)) to the target
    curve (flat out to min_dist, exponential decay beyond)."""
    x = np.linspace(0.0, 3.0 * spread, 300)
    y = np.where(x < min_dist, 1.0, np.exp(-(x - min_dist) / spread))
    (a, b), _ = curve_fit(lambda d, a, b: 1.0 / (1.0 + a * d ** (2 * b)), x, y)
    return float(a), float(b)


def _smooth_knn(dists: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-point (rho, sigma): rho is the nearest-neighbor distance, sigma the
    bandwidth making the smoothed neighborhood's effective size log2(k)."""
    n, k = dists.shape
    target = np.log2(k)
    rho = np.where(dists[:, 0] > 0, dists[:, 0],
                   np.where((dists > 0).any(axis=1),
                            dists[np.arange(n), (dists > 0).argmax(axis=1)], 0.0))
    sigma = np.ones(n)
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    for _ in range(SMOOTH_KNN_ITER):
        psum = np.exp(-np.maximum(dists - rho[:, None], 0.0) / sigma[:, None]).sum(axis=1)
        err = psum - target
        if np.all(np.abs(err) < SMOOTH_KNN_TOL):
            break
        too_big = err > 0
        hi = np.where(too_big, sigma, hi)
        lo = np.where(too_big, lo, sigma)
        sigma = np.where(too_big, (lo + hi) / 2.0,
                         np.where(np.isinf(hi), sigma * 2.0, (lo + hi) / 2.0))
    mean_d = dists.mean()
    sigma = np.maximum(sigma, 1e-3 * mean_d if mean_d > 0 else 1e-8)
    return rho, sigma


def _fuzzy_graph(latents: np.ndarray, n_neighbors: int):
    """Symmetric fuzzy simplicial set as edge arrays (heads, tails, weights)."""
    n = latents.shape[0]
    k = min(n_neighbors, n - 1)
    nn = NearestNeighbors(n_neighbors=k + 1).fit(latents)
    dists, idx = nn.kneighbors(latents)
    dists, idx = dists[:, 1:], idx[:, 1:]  # drop self

    rho, sigma = _smooth_knn(dists)
    w = np.exp(-np.maximum(dists - rho[:, None], 0.0) / sigma[:, None])

    dense = np.zeros((n, n))
    rows = np.repeat(np.arange(n), k)
    dense[rows, idx.ravel()] = w.ravel()
    sym = dense + dense.T - dense * dense.T  # probabilistic t-conorm

    heads, tails = np.nonzero(np.triu(sym, 1))
    return heads, tails, sym[heads, tails]


def _pca_init(latents: np.ndarray, scale: float = 10.0) -> np.ndarray:
    centered = latents - latents.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    emb = centered @ vt[:2].T
    span = np.abs(emb).max()
    return emb * (scale / span) if span > 0 else emb


def _optimize_layout(init: np.ndarray, heads, tails, weights, n_epochs: int,
                     a: float, b: float, rng: np.random.Generator,
                     initial_alpha: float = 1.0) -> np.ndarray:
    y = init.copy()
    n = y.shape[0]
    epochs_per_sample = weights.max() / weights
    next_due = epochs_per_sample.copy()
    neg_per_edge = NEGATIVE_SAMPLE_RATE

    for epoch in range(1, n_epochs + 1):
        alpha = initial_alpha * (1.0 - (epoch - 1) / n_epochs)
        due = next_due <= epoch
        if not due.any():
            continue
        next_due[due] += epochs_per_sample[due]
        h, t = heads[due], tails[due]

        d = y[h] - y[t]
        d2 = (d * d).sum(axis=1)
        pos = np.where(d2 > 0.0,
                       (-2.0 * a * b * d2 ** (b - 1.0)) / (1.0 + a * d2 ** b), 0.0)
        g = np.clip(pos[:, None] * d, -CLIP_GRAD, CLIP_GRAD)
        np.add.at(y, h, alpha * g)
        np.add.at(y, t, -alpha * g)

        for _ in range(neg_per_edge):
            k = rng.integers(0, n, size=h.shape[0])
            d = y[h] - y[k]
            d2 = (d * d).sum(axis=1)
            rep = (2.0 * REPULSION_STRENGTH * b) / ((0.001 + d2) * (1.0 + a * d2 ** b))
            g = np.clip(rep[:, None] * d, -CLIP_GRAD, CLIP_GRAD)
            g[k == h] = 0.0
            np.add.at(y, h, alpha * g)
    return y


def _unique_rows(anchors: np.ndarray, values: np.ndarray):
    _, keep = np.unique(anchors.round(12), axis=0, return_index=True)
    keep.sort()
    return anchors[keep], values[keep]


@dataclass
class ManifoldModel:
    """Fitted embedding with exact-at-anchors forward and inverse maps."""

    names: list[str]
    latents: np.ndarray
    embedding: np.ndarray
    seed: int
    n_neighbors: int
    min_dist: float
    n_epochs: int
    _forward: RBFInterpolator | None = field(default=None, repr=False, compare=False)
    _inverse: RBFInterpolator | None = field(default=None, repr=False, compare=False)

    def forward(self, z) -> np.ndarray:
        """Latent vector(s) (..., M) -> 2D point(s)."""
        if self._forward is None:
            anchors, values = _unique_rows(self.latents, self.embedding)
            self._forward = RBFInterpolator(anchors, values, kernel="thin_plate_spline")
        z = np.atleast_2d(np.asarray(z, dtype=np.float64))
        return self._forward(z)

    def inverse(self, pts) -> np.ndarray:
        """2D point(s) (..., 2) -> latent vector(s)."""
        if self._inverse is None:
            anchors, values = _unique_rows(self.embedding, self.latents)
            self._inverse = RBFInterpolator(anchors, values, kernel="thin_plate_spline")
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        return self._inverse(pts)

    def bounding_box(self) -> tuple[float, float, float, float]:
        lo = self.embedding.min(axis=0)
        hi = self.embedding.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def is_extrapolated(self, pt, margin: float = 0.02) -> bool:
        """True when the point falls outside the fitted bounding box (grown by
        `margin` of its extent per side)."""
        x0, y0, x1, y1 = self.bounding_box()
        mx = (x1 - x0) * margin
        my = (y1 - y0) * margin
        x, y = float(pt[0]), float(pt[1])
        return not (x0 - mx <= x <= x1 + mx and y0 - my <= y <= y1 + my)

    def save(self, path) -> None:
        meta = json.dumps({
            "names": self.names,
            "seed": self.seed,
            "n_neighbors": self.n_neighbors,
            "min_dist": self.min_dist,
            "n_epochs": self.n_epochs,
        })
        np.savez(path, latents=self.latents, embedding=self.embedding,
                 meta=np.array(meta))

    @classmethod
    def load(cls, path) -> "ManifoldModel":
        with np.load(path) as data:
            meta = json.loads(str(data["meta"]))
            return cls(
                names=list(meta["names"]),
                latents=data["latents"],
                embedding=data["embedding"],
                seed=meta["seed"],
                n_neighbors=meta["n_neighbors"],
                min_dist=meta["min_dist"],
                n_epochs=meta["n_epochs"],
            )


def fit_manifold(latents: np.ndarray, names: list[str] | None = None, *,
                 seed: int = 0, n_neighbors: int = 15, min_dist: float = 0.1,
                 n_epochs: int = 500) -> ManifoldModel:
    """Embed per-material latent means into 2D. Requires >= 10 points."""
    latents = np.asarray(latents, dtype=np.float64)
    if latents.ndim != 2:
        raise ValueError("latents must be a (n, M) array")
    n = latents.shape[0]
    if n < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} materials, got {n}")
    if names is None:
        names = [f"material-{i}" for i in range(n)]
    if len(names) != n:
        raise ValueError("names and latents disagree in length")

    rng = np.random.default_rng(seed)
    heads, tails, weights = _fuzzy_graph(latents, n_neighbors)
    a, b = fit_membership_curve(min_dist=min_dist)
    init = _pca_init(latents)
    embedding = _optimize_layout(init, heads, tails, weights, n_epochs, a, b, rng)

    return ManifoldModel(
        names=list(names), latents=latents, embedding=embedding, seed=seed,
        n_neighbors=n_neighbors, min_dist=min_dist, n_epochs=n_epochs,
    )


def sample_grid(m: ManifoldModel, rows: int = 7, cols: int = 7) -> list[np.ndarray]:
    """Uniform rows x cols grid over the embedding bounding box, mapped back to
    latent codes through the inverse. Row-major, corners at the box corners."""
    x0, y0, x1, y1 = m.bounding_box()
    xs = np.linspace(x0, x1, cols)
    ys = np.linspace(y0, y1, rows)
    pts = np.array([[x, y] for y in ys for x in xs])
    return list(m.inverse(pts))
