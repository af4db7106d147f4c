"""Convolutional beta-VAE over the 63 x 90 x 90 sliced-BRDF input.

Encoder: three k3/s2/p1 strided convolutions (batch norm + leaky ReLU each),
nine residual blocks, then three fully connected layers producing mean and
log-variance of the 8-dimensional latent posterior. Decoder mirrors it: three
fully connected layers, reshape to the 64 x 12 x 12 bottleneck, three residual
blocks, and transposed convolutions back to 90 x 90 (the final one with a
4 x 4 kernel). Kernel sizes of the upsampling layers are derived from the
spatial chain so the decoder lands exactly on the encoder's input size.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .preprocess import NormConfig, select_slices

CHECKPOINT_MAGIC = b"BVAE1"


def conv_out_size(n: int, kernel: int = 3, stride: int = 2, pad: int = 1) -> int:
    return (n + 2 * pad - kernel) // stride + 1


def conv_transpose_out_size(n: int, kernel: int, stride: int = 2, pad: int = 1) -> int:
    return (n - 1) * stride - 2 * pad + kernel


@dataclass(frozen=True)
class ModelConfig:
    latent_dim: int = 8
    in_channels: int = 63
    spatial: int = 90
    conv_channels: tuple[int, ...] = (64, 64, 64)
    fc_dims: tuple[int, ...] = (512, 128)
    res_blocks_encoder: int = 9
    res_blocks_decoder: int = 3
    leaky_slope: float = 0.2

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")
        self.decoder_kernels()  # raises if the chain cannot be mirrored

    def encoder_spatial_chain(self) -> list[int]:
        """Feature-map sizes through the strided convolutions, input first."""
        chain = [self.spatial]
        for _ in self.conv_channels:
            chain.append(conv_out_size(chain[-1]))
        return chain

    def decoder_kernels(self) -> list[int]:
        """Kernel size per upsampling layer (stride 2, pad 1), chosen so the
        decoder retraces the encoder chain exactly: k=3 doubles to 2n-1,
        k=4 doubles to 2n."""
        chain = self.encoder_spatial_chain()
        kernels = []
        for a, target in zip(chain[:0:-1], chain[-2::-1]):
            if conv_transpose_out_size(a, 3) == target:
                kernels.append(3)
            elif conv_transpose_out_size(a, 4) == target:
                kernels.append(4)
            else:
                raise ValueError(
                    f"spatial size {self.spatial} cannot be rebuilt from "
                    f"{chain[-1]} with stride-2 transposed convolutions"
                )
        return kernels

    @property
    def bottleneck(self) -> tuple[int, int, int]:
        side = self.encoder_spatial_chain()[-1]
        return (self.conv_channels[-1], side, side)

    @property
    def flat_dim(self) -> int:
        c, h, w = self.bottleneck
        return c * h * w

    @property
    def input_size(self) -> int:
        return self.in_channels * self.spatial * self.spatial

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["conv_channels"] = tuple(d["conv_channels"])
        d["fc_dims"] = tuple(d["fc_dims"])
        return cls(**d)


class ResidualBlock(nn.Module):
    """Two 3x3 stride-1 convolutions with leaky ReLU, plus identity skip."""

    def __init__(self, channels: int, slope: float):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, channels, 3, 1, 1)
        self.conv2 = nn.Conv2d(channels, channels, 3, 1, 1)
        self.act = nn.LeakyReLU(slope)

    def forward(self, x):
        y = self.act(self.conv1(x))
        y = self.conv2(y)
        return self.act(x + y)


class Encoder(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        layers = []
        prev = cfg.in_channels
        for ch in cfg.conv_channels:
            layers += [
                nn.Conv2d(prev, ch, 3, 2, 1),
                nn.BatchNorm2d(ch),
                nn.LeakyReLU(cfg.leaky_slope),
            ]
            prev = ch
        self.conv = nn.Sequential(*layers)
        self.res = nn.Sequential(
            *[ResidualBlock(prev, cfg.leaky_slope) for _ in range(cfg.res_blocks_encoder)]
        )
        dims = [cfg.flat_dim, *cfg.fc_dims, 2 * cfg.latent_dim]
        fc = []
        for i, (a, b) in enumerate(zip(dims[:-1], dims[1:])):
            fc.append(nn.Linear(a, b))
            if i < len(dims) - 2:
                fc.append(nn.LeakyReLU(cfg.leaky_slope))
        self.fc = nn.Sequential(*fc)
        self.latent_dim = cfg.latent_dim

    def forward(self, x):
        h = self.res(self.conv(x))
        stats = self.fc(h.flatten(1))
        return stats[:, : self.latent_dim], stats[:, self.latent_dim :]


class Decoder(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        dims = [cfg.latent_dim, *cfg.fc_dims[::-1], cfg.flat_dim]
        fc = []
        for a, b in zip(dims[:-1], dims[1:]):
            fc += [nn.Linear(a, b), nn.LeakyReLU(cfg.leaky_slope)]
        self.fc = nn.Sequential(*fc)
        self.bottleneck = cfg.bottleneck
        self.res = nn.Sequential(
            *[ResidualBlock(cfg.conv_channels[-1], cfg.leaky_slope)
              for _ in range(cfg.res_blocks_decoder)]
        )
        kernels = cfg.decoder_kernels()
        chans = [*cfg.conv_channels[::-1], cfg.in_channels]
        layers = []
        for i, k in enumerate(kernels):
            layers.append(nn.ConvTranspose2d(chans[i], chans[i + 1], k, 2, 1))
            if i < len(kernels) - 1:  # final layer stays linear
                layers += [nn.BatchNorm2d(chans[i + 1]), nn.LeakyReLU(cfg.leaky_slope)]
        self.deconv = nn.Sequential(*layers)

    def forward(self, z):
        h = self.fc(z).view(z.shape[0], *self.bottleneck)
        return self.deconv(self.res(h))


class BrdfVAE(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.encoder = Encoder(cfg)
        self.decoder = Decoder(cfg)
        # Residual blocks start as identities (second conv zeroed) so the deep
        # stack is well-conditioned from the first step.
        for m in self.modules():
            if isinstance(m, ResidualBlock):
                nn.init.zeros_(m.conv2.weight)
                nn.init.zeros_(m.conv2.bias)

    def encode(self, x):
        return self.encoder(x)

    def decode(self, z):
        return self.decoder(z)

    def forward(self, x, eps=None):
        mu, log_var = self.encoder(x)
        if eps is None:
            eps = torch.randn_like(mu)
        z = reparameterize(mu, log_var, eps)
        return self.decoder(z), mu, log_var

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())


def reparameterize(mu, log_var, eps):
    """z = mu + sigma * eps with sigma = exp(log_var / 2)."""
    return mu + torch.exp(0.5 * log_var) * eps


@dataclass
class LatentStats:
    """Per-material posterior: mean and log-variance, each latent_dim long."""

    mu: np.ndarray
    log_var: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=np.float32)
        self.log_var = np.asarray(self.log_var, dtype=np.float32)

    @property
    def sigma(self) -> np.ndarray:
        return np.exp(0.5 * self.log_var)


# ---------------------------------------------------------------------------
# Single-model inference helpers


@torch.no_grad()
def encode_single(model: BrdfVAE, values: np.ndarray) -> LatentStats:
    """Deterministic eval-mode encode of one (63, 90, 90) input."""
    model.eval()
    x = torch.from_numpy(np.ascontiguousarray(values, dtype=np.float32)).unsqueeze(0)
    mu, log_var = model.encode(x)
    return LatentStats(mu[0].numpy(), log_var[0].numpy())


@torch.no_grad()
def decode_single(model: BrdfVAE, z: np.ndarray) -> np.ndarray:
    """Deterministic eval-mode decode of one latent code to (63, 90, 90)."""
    model.eval()
    zt = torch.from_numpy(np.ascontiguousarray(z, dtype=np.float32)).unsqueeze(0)
    return model.decode(zt)[0].numpy()


# ---------------------------------------------------------------------------
# Checkpoint file: magic "BVAE1", u32 little-endian header length, JSON header
# (model config, normalization, slice indices, latent table, weight manifest
# with shapes/dtypes/offsets), then concatenated little-endian float32 blobs.


@dataclass
class Checkpoint:
    config: ModelConfig
    state: dict[str, np.ndarray] = field(repr=False)
    latent_table: dict[str, LatentStats]
    norm: NormConfig = NormConfig()
    slice_indices: np.ndarray = field(default_factory=select_slices)

    def build_model(self) -> BrdfVAE:
        model = BrdfVAE(self.config)
        tensors = {}
        for name, ref in model.state_dict().items():
            if name not in self.state:
                raise ValueError(f"checkpoint is missing weight {name!r}")
            arr = self.state[name]
            if tuple(arr.shape) != tuple(ref.shape):
                raise ValueError(
                    f"weight {name!r} has shape {tuple(arr.shape)}, expected {tuple(ref.shape)}"
                )
            tensors[name] = torch.from_numpy(np.ascontiguousarray(arr)).to(ref.dtype)
        model.load_state_dict(tensors)
        model.eval()
        return model

    @classmethod
    def from_model(cls, model: BrdfVAE, latent_table=None,
                   norm: NormConfig = NormConfig(), slice_indices=None) -> "Checkpoint":
        state = {k: v.detach().cpu().numpy().copy() for k, v in model.state_dict().items()}
        return cls(
            config=model.cfg,
            state=state,
            latent_table=dict(latent_table or {}),
            norm=norm,
            slice_indices=select_slices() if slice_indices is None else np.asarray(slice_indices),
        )


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    manifest = []
    blobs = io.BytesIO()
    for name, arr in ckpt.state.items():
        arr = np.asarray(arr)
        data = np.ascontiguousarray(arr, dtype=np.float32).astype("<f4").tobytes()
        manifest.append({
            "name": name,
            "shape": list(arr.shape),
            "dtype": str(arr.dtype),
            "offset": blobs.tell(),
            "nbytes": len(data),
        })
        blobs.write(data)

    header = {
        "model": ckpt.config.to_dict(),
        "norm": ckpt.norm.to_dict(),
        "slice_indices": np.asarray(ckpt.slice_indices).tolist(),
        "latent_table": {
            name: {"mu": s.mu.tolist(), "log_var": s.log_var.tolist()}
            for name, s in ckpt.latent_table.items()
        },
        "weights": manifest,
    }
    payload = json.dumps(header).encode("utf-8")
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<I", len(payload)))
        f.write(payload)
        f.write(blobs.getvalue())


def load_checkpoint(path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if raw[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a checkpoint file (bad magic)")
    off = len(CHECKPOINT_MAGIC)
    (hlen,) = struct.unpack_from("<I", raw, off)
    off += 4
    header = json.loads(raw[off : off + hlen].decode("utf-8"))
    blob_start = off + hlen

    state = {}
    for entry in header["weights"]:
        start = blob_start + entry["offset"]
        arr = np.frombuffer(raw, dtype="<f4", count=entry["nbytes"] // 4, offset=start)
        state[entry["name"]] = arr.reshape(entry["shape"]).astype(entry["dtype"])

    latent_table = {
        name: LatentStats(np.asarray(d["mu"]), np.asarray(d["log_var"]))
        for name, d in header["latent_table"].items()
    }
    return Checkpoint(
        config=ModelConfig.from_dict(header["model"]),
        state=state,
        latent_table=latent_table,
        norm=NormConfig.from_dict(header["norm"]),
        slice_indices=np.asarray(header["slice_indices"]),
    )
