"""brdfspace: a disentangled latent parameter space for measured BRDFs.

Load MERL tables, train a beta-VAE over them, then edit materials through the
learned 8 parameters (plus two manually created green controls), traverse and
interpolate codes, explore a 2D manifold of the latent space, render sphere
previews, and serve the whole thing over HTTP for interactive editing.
"""

from .merl import MerlBRDF, MerlFormatError, read_merl, write_merl
from .model import BrdfVAE, Checkpoint, LatentStats, ModelConfig, load_checkpoint, save_checkpoint
from .preprocess import NetworkInput, NormConfig, to_network_input
from .training import TrainConfig, TrainRecord, train

__version__ = "0.1.0"

__all__ = [
    "MerlBRDF", "MerlFormatError", "read_merl", "write_merl",
    "BrdfVAE", "Checkpoint", "LatentStats", "ModelConfig",
    "load_checkpoint", "save_checkpoint",
    "NetworkInput", "NormConfig", "to_network_input",
    "TrainConfig", "TrainRecord", "train",
    "__version__",
]
