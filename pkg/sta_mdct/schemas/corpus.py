from pydantic import BaseModel, ConfigDict, Field

from sta_mdct.config import DEFAULT_SEED


class CorpusSpec(BaseModel):
    """Synthetic multi-speaker corpus definition."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_speakers: int = Field(20, ge=2, description="Number of distinct speakers")
    utterances_per_speaker: int = Field(30, ge=1)
    duration: float = Field(1.0, gt=0, description="Utterance length in seconds")
    noise_snr_db: float = Field(20.0, description="White-noise SNR relative to the harmonic signal")
    target_rms: float = Field(2400.0, gt=0, le=8000, description="Utterance RMS on the 16-bit scale")
    seed: int = DEFAULT_SEED


class TrainConfig(BaseModel):
    """Mini-batch Adam training of an embedding model through a softmax speaker head."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    epochs: int = Field(30, ge=1)
    learning_rate: float = Field(0.002, ge=0)
    batch_size: int = Field(32, ge=1)
    logit_scale: float = Field(16.0, gt=0, description="Fixed scale applied to the speaker-head logits")
    train_utterances: int | None = Field(
        20, ge=1, description="Use only the first n utterances of every speaker; None uses all"
    )
    seed: int = DEFAULT_SEED
