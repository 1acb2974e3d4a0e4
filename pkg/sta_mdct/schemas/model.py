from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from sta_mdct.config import UNIT_SCALE
from sta_mdct.dsp.features import FRAME_LENGTH
from sta_mdct.errors import ConfigError

Architecture = Literal["convnet-a", "framenet-b"]

ARCHITECTURE_ALIASES: dict[str, Architecture] = {
    "a": "convnet-a",
    "convnet-a": "convnet-a",
    "b": "framenet-b",
    "framenet-b": "framenet-b",
}


class ModelSpec(BaseModel):
    """
    Architecture hyperparameters, stored verbatim in the model file header.

    convnet-a: log-mel -> two 3x3 conv layers (ReLU) -> mean/std pooling -> linear -> L2.
    framenet-b: raw frames -> two dense ReLU layers -> mean/std pooling -> linear -> L2.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    architecture: Architecture
    embedding_dim: int = Field(64, ge=1)
    n_mels: int = Field(40, ge=1)
    conv_channels: tuple[int, int] = (8, 16)
    frame_length: int = Field(512, ge=1)
    frame_hop: int = Field(256, ge=1)
    hidden_dim: int = Field(64, ge=1)
    input_scale: float = Field(1.0 / UNIT_SCALE, gt=0)

    @property
    def min_input_length(self) -> int:
        if self.architecture == "convnet-a":
            return FRAME_LENGTH
        return self.frame_length


def resolve_architecture(name: str) -> Architecture:
    try:
        return ARCHITECTURE_ALIASES[name.strip().lower()]
    except KeyError:
        raise ConfigError(f"unknown architecture '{name}' (expected A, B, convnet-a or framenet-b)")
