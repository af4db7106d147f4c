"""Unsupervised beta-VAE training: masked-L2 reconstruction + weighted KL.

Per sample, the reconstruction term is the plain L2 norm of the residual over
valid entries only, and the KL term is the analytic divergence of the
diagonal-Gaussian posterior from the standard normal prior. The total loss is
the mini-batch mean of (recon + beta_norm * kl) where beta_norm scales beta by
latent_dim / input_size.
"""

from __future__ import annotations

import csv
import json
import time

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import torch

from .model import BrdfVAE, Checkpoint, LatentStats, ModelConfig, reparameterize
from .preprocess import NetworkInput, NormConfig


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int, batch: int, value: float):
        super().__init__(f"non-finite loss ({value}) at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 3e-5
    batch_size: int = 2
    epochs: int = 1000
    beta: float = 12.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError("learning_rate, batch_size and epochs must be positive")

    def beta_norm(self, mcfg: ModelConfig) -> float:
        return self.beta * mcfg.latent_dim / mcfg.input_size

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainRecord:
    epochs: list[int] = field(default_factory=list)
    recon: list[float] = field(default_factory=list)
    kl: list[float] = field(default_factory=list)
    total: list[float] = field(default_factory=list)
    wall_clock: float = 0.0
    seed: int = 0

    def append(self, epoch: int, recon: float, kl: float, total: float) -> None:
        self.epochs.append(epoch)
        self.recon.append(recon)
        self.kl.append(kl)
        self.total.append(total)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["epoch", "recon", "kl", "total"])
            for row in zip(self.epochs, self.recon, self.kl, self.total):
                w.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3])])

    @classmethod
    def from_csv(cls, path) -> "TrainRecord":
        rec = cls()
        with open(path, newline="") as f:
            for row in csv.DictReader(f):
                rec.append(int(row["epoch"]), float(row["recon"]),
                           float(row["kl"]), float(row["total"]))
        return rec


def _as_value_mask(mask, channels: int) -> torch.Tensor:
    """Accept a (n_slices, H, W) slice mask or a (C, H, W) value-layout mask
    and return bool in value layout (channels inner within each slice)."""
    m = mask if torch.is_tensor(mask) else torch.as_tensor(np.asarray(mask))
    m = m.bool()
    if m.shape[-3] * 3 == channels:
        m = m.repeat_interleave(3, dim=-3)
    elif m.shape[-3] != channels:
        raise ValueError(f"mask channel axis {m.shape[-3]} incompatible with {channels}")
    return m


def recon_loss(x_hat, x, mask):
    """Masked L2 norm: sqrt of the sum of squared residuals over valid entries.

    Accepts single samples shaped (C, H, W) with a slice- or value-layout
    mask. Values at masked-out positions never enter the sum, so the result
    is bitwise invariant to them. Returns a 0-dim torch tensor.
    """
    xh = torch.as_tensor(np.asarray(x_hat)) if not torch.is_tensor(x_hat) else x_hat
    xt = torch.as_tensor(np.asarray(x)) if not torch.is_tensor(x) else x
    m = _as_value_mask(mask, xh.shape[-3])
    return torch.linalg.vector_norm(xh[m] - xt[m])


def kl_loss(mu, log_var):
    """Analytic KL of N(mu, sigma^2) from N(0, 1), summed over dimensions.

    Accepts length-M vectors or (batch, M); returns 0-dim or (batch,) tensor.
    """
    mu = torch.as_tensor(np.asarray(mu)) if not torch.is_tensor(mu) else mu
    lv = torch.as_tensor(np.asarray(log_var)) if not torch.is_tensor(log_var) else log_var
    return -0.5 * torch.sum(1.0 + lv - mu * mu - torch.exp(lv), dim=-1)


def batch_losses(model: BrdfVAE, x: torch.Tensor, mask: torch.Tensor,
                 eps: torch.Tensor, beta_norm: float):
    """Forward pass + per-sample losses for one mini-batch.

    x: (B, C, H, W); mask: (B, 21, H, W) bool; eps: (B, latent_dim).
    Returns (total, recon_mean, kl_mean) as 0-dim tensors, where total is the
    batch mean of recon_i + beta_norm * kl_i.
    """
    mu, log_var = model.encoder(x)
    z = reparameterize(mu, log_var, eps)
    x_hat = model.decoder(z)

    vmask = mask.repeat_interleave(3, dim=1)
    recon = torch.stack([
        torch.linalg.vector_norm(x_hat[i][vmask[i]] - x[i][vmask[i]])
        for i in range(x.shape[0])
    ])
    kl = kl_loss(mu, log_var)
    total = (recon + beta_norm * kl).mean()
    return total, recon.mean(), kl.mean()


def train(dataset: list[NetworkInput], cfg: TrainConfig, mcfg: ModelConfig,
          log_every: int = 0) -> tuple[Checkpoint, TrainRecord]:
    """Run the full optimization and return the checkpoint plus loss record.

    Deterministic for a fixed seed: weight init, shuffling and noise draws all
    derive from cfg.seed. The returned checkpoint carries a latent table from
    a final eval-mode encode pass over the dataset.
    """
    if not dataset:
        raise ValueError("dataset is empty")

    torch.manual_seed(cfg.seed)
    order_rng = np.random.default_rng(cfg.seed)

    model = BrdfVAE(mcfg)
    model.train()
    opt = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    beta_norm = cfg.beta_norm(mcfg)

    x_all = torch.from_numpy(np.stack([ni.values for ni in dataset]))
    m_all = torch.from_numpy(np.stack([ni.mask for ni in dataset]))

    record = TrainRecord(seed=cfg.seed)
    start = time.perf_counter()
    n = len(dataset)
    for epoch in range(1, cfg.epochs + 1):
        order = order_rng.permutation(n)
        ep_recon = ep_kl = ep_total = 0.0
        for bi, lo in enumerate(range(0, n, cfg.batch_size)):
            idx = torch.from_numpy(order[lo : lo + cfg.batch_size])
            x = x_all[idx]
            mask = m_all[idx]
            eps = torch.randn(x.shape[0], mcfg.latent_dim)

            total, recon, kl = batch_losses(model, x, mask, eps, beta_norm)
            if not torch.isfinite(total):
                raise TrainingDivergedError(epoch, bi, float(total.detach()))
            opt.zero_grad()
            total.backward()
            opt.step()

            w = x.shape[0] / n
            ep_recon += float(recon.detach()) * w
            ep_kl += float(kl.detach()) * w
            ep_total += float(total.detach()) * w
        record.append(epoch, ep_recon, ep_kl, ep_total)
        if log_every and (epoch % log_every == 0 or epoch == 1):
            print(f"epoch {epoch:5d}  recon {ep_recon:.4f}  kl {ep_kl:.4f}  total {ep_total:.4f}")
    record.wall_clock = time.perf_counter() - start

    model.eval()
    latent_table = {}
    with torch.no_grad():
        for ni in dataset:
            mu, log_var = model.encoder(torch.from_numpy(ni.values).unsqueeze(0))
            latent_table[ni.name] = LatentStats(mu[0].numpy(), log_var[0].numpy())

    ckpt = Checkpoint.from_model(model, latent_table=latent_table)
    return ckpt, record


# ---------------------------------------------------------------------------
# Config file: JSON or TOML key-value naming the dataset, hyperparameters and
# output paths.


@dataclass
class TrainRun:
    dataset_dir: Path
    checkpoint_path: Path
    record_path: Path
    train: TrainConfig
    model: ModelConfig


def load_train_run(path) -> TrainRun:
    path = Path(path)
    if path.suffix == ".toml":
        cfg = tomllib.loads(path.read_text())
    else:
        cfg = json.loads(path.read_text())

    train_keys = {f for f in TrainConfig.__dataclass_fields__}
    tc = TrainConfig(**{k: v for k, v in cfg.get("train", {}).items() if k in train_keys})
    mdict = cfg.get("model", {})
    for key in ("conv_channels", "fc_dims"):
        if key in mdict:
            mdict[key] = tuple(mdict[key])
    mc = ModelConfig(**mdict)

    dataset_dir = Path(cfg["dataset_dir"])
    checkpoint_path = Path(cfg["checkpoint_path"])
    record_path = Path(cfg.get("record_path", checkpoint_path.with_suffix(".csv")))
    return TrainRun(dataset_dir, checkpoint_path, record_path, tc, mc)
