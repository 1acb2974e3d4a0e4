from enum import Enum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from sta_mdct.config import DEFAULT_SEED, KBD_BETA, MDCT_WINDOW
from sta_mdct.dsp.windows import Window, kbd_window
from sta_mdct.utils.config_file import split_list


class TransformVariant(str, Enum):
    MDCT = "mdct"
    DCT = "dct"


class AttackerKind(str, Enum):
    FGSM = "fgsm"
    IFGSM = "i-fgsm"
    MIFGSM = "mi-fgsm"
    NIFGSM = "ni-fgsm"
    ACG = "acg"
    STA_MDCT = "sta-mdct"
    STA_DCT = "sta-dct"

    @property
    def uses_transform(self) -> bool:
        return self in (AttackerKind.STA_MDCT, AttackerKind.STA_DCT)


UpdateRule = Literal["i-fgsm", "mi-fgsm", "ni-fgsm"]


class SpectrumTransformParams(BaseModel):
    """Parameters of the stochastic spectrum transformation."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sigma: float = Field(44.0, ge=0, description="Std-dev of additive Gaussian noise, sample scale")
    rho: float = Field(0.75, ge=0, lt=1, description="Mask tuning factor; M ~ U(1 - rho, 1 + rho)")
    window_length: int = Field(MDCT_WINDOW, ge=4, description="MDCT window / DCT frame length W")
    kbd_beta: float = Field(KBD_BETA, ge=0, description="Kaiser shape parameter of the KBD window")
    variant: TransformVariant = TransformVariant.MDCT

    @field_validator("window_length")
    @classmethod
    def validate_even_window(cls, v: int) -> int:
        if v % 2:
            raise ValueError("window_length must be even")
        return v

    @property
    def is_identity(self) -> bool:
        """No noise and an all-ones mask: the transform reduces to perfect reconstruction."""
        return self.sigma == 0 and self.rho == 0

    def window(self) -> Window:
        return kbd_window(self.window_length, self.kbd_beta)


class AttackConfig(BaseModel):
    """
    Optimizer hyperparameters for every attacker.

    Defaults: epsilon 40 and 10 iterations with step epsilon/T = 4 on the 16-bit sample
    scale; 20 transforms per iteration with sigma 44 and rho 0.75. The ACG step starts
    at 2 * epsilon / T.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    attacker: AttackerKind = AttackerKind.STA_MDCT
    epsilon: float = Field(40.0, gt=0, description="Max L-infinity perturbation, sample scale")
    iterations: int = Field(10, ge=1, description="Outer iterations T")
    alpha: float | None = Field(None, gt=0, description="Step size; defaults to epsilon / iterations")
    momentum: float = Field(1.0, ge=0, description="Momentum decay mu (MI/NI-FGSM)")
    n_transforms: int = Field(20, ge=1, description="Transforms N averaged per iteration")
    sigma: float = Field(44.0, ge=0, description="Std-dev of the Gaussian noise added before the transform")
    rho: float = Field(0.75, ge=0, lt=1, description="Spectrum mask tuning factor")
    window_length: int = Field(MDCT_WINDOW, ge=4, description="MDCT window length")
    kbd_beta: float = Field(KBD_BETA, ge=0)
    update_rule: UpdateRule = Field("i-fgsm", description="Inner update of STA; only i-fgsm is the published form")
    acg_initial_step: float | None = Field(None, gt=0, description="ACG eta_0; defaults to 2 * epsilon / iterations")
    ensemble_weights: list[float] | None = Field(None, description="Surrogate fusion weights; uniform when unset")
    seed: int = DEFAULT_SEED

    @field_validator("ensemble_weights", mode="before")
    @classmethod
    def split_weights(cls, v: object) -> object:
        return split_list(v)

    @field_validator("window_length")
    @classmethod
    def validate_even_window(cls, v: int) -> int:
        if v % 2:
            raise ValueError("window_length must be even")
        return v

    @field_validator("ensemble_weights")
    @classmethod
    def validate_weights(cls, v: list[float] | None) -> list[float] | None:
        if v is None:
            return v
        if not v or any(w < 0 for w in v):
            raise ValueError("ensemble_weights must be non-empty and non-negative")
        if abs(sum(v) - 1.0) > 1e-9:
            raise ValueError(f"ensemble_weights must sum to 1, got {sum(v)}")
        return v

    @property
    def step(self) -> float:
        return self.alpha if self.alpha is not None else self.epsilon / self.iterations

    @property
    def acg_step(self) -> float:
        return self.acg_initial_step if self.acg_initial_step is not None else 2 * self.epsilon / self.iterations

    @property
    def transform(self) -> SpectrumTransformParams:
        variant = TransformVariant.DCT if self.attacker == AttackerKind.STA_DCT else TransformVariant.MDCT
        return SpectrumTransformParams(
            sigma=self.sigma, rho=self.rho, window_length=self.window_length, kbd_beta=self.kbd_beta, variant=variant
        )
