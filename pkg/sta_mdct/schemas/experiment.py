import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from sta_mdct.config import DEFAULT_SEED, RESULTS_DIR, WORKERS
from sta_mdct.schemas.attack import AttackConfig, AttackerKind
from sta_mdct.utils.config_file import split_list, split_mapping

PlanTask = Literal["asv", "csi", "osi"]
AblationParam = Literal["iterations", "n_transforms", "sigma", "rho"]

DEFAULT_BUDGETS = [0.0, 10.0, 20.0, 25.0, 30.0, 32.5, 35.0, 37.5, 40.0, 45.0, 50.0, math.inf]


class ExperimentPlan(BaseModel):
    """
    One attack campaign: every (surrogate, attacker, victim) cell over one trial set.

    Models are named in `models` (`name:path` pairs) and referenced by name from
    `surrogates` and `victims`. A cell whose surrogate is also the victim is a
    white-box cell; it is reported but kept out of the transferability checks.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field("toy", min_length=1, description="Output subdirectory under output_dir")
    task: PlanTask = "asv"

    corpus_dir: str | None = Field(None, description="WAV corpus; a synthetic corpus is generated when unset")
    n_speakers: int = Field(20, ge=2, description="Synthetic corpus only")
    utterances_per_speaker: int = Field(30, ge=2, description="Synthetic corpus only")
    n_train: int = Field(20, ge=0, description="Leading utterances per speaker reserved for training")
    n_enroll: int = Field(3, ge=1, description="Utterances per speaker used for enrollment")

    models: dict[str, str] = Field(default_factory=dict, description="name:path of every model file")
    surrogates: list[str] = Field(default_factory=list)
    victims: list[str] = Field(default_factory=list)
    attackers: list[AttackerKind] = Field(
        default_factory=lambda: [AttackerKind.FGSM, AttackerKind.IFGSM, AttackerKind.STA_MDCT]
    )
    attack: AttackConfig = Field(default_factory=AttackConfig)

    asv_trials: int = Field(100, ge=2, description="Half target, half non-target")
    n_enrolled: int = Field(10, ge=2, description="Enrolled speakers R for identification")
    id_trials: int = Field(50, ge=1, description="Identification test utterances")

    budget_epsilons: list[float] | None = Field(None, description="Trial i is attacked with eps[i mod k]")
    snr_budgets: list[float] = Field(default_factory=lambda: list(DEFAULT_BUDGETS))
    saliency: bool = True
    saliency_trials: int = Field(20, ge=0, description="Trials per cell with before/after maps")
    saliency_images: int = Field(3, ge=0, description="Trials per cell whose maps are also rendered")
    ablate: list[AblationParam] = Field(default_factory=list)
    write_adversarial: bool = False

    seed: int = DEFAULT_SEED
    output_dir: str = RESULTS_DIR
    workers: int = Field(WORKERS, ge=1)

    @field_validator("models", mode="before")
    @classmethod
    def split_models(cls, v: object) -> object:
        return split_mapping(v)

    @field_validator("surrogates", "victims", "attackers", "budget_epsilons", "snr_budgets", "ablate", mode="before")
    @classmethod
    def split_lists(cls, v: object) -> object:
        return split_list(v)

    @field_validator("budget_epsilons")
    @classmethod
    def validate_budget_epsilons(cls, v: list[float] | None) -> list[float] | None:
        if v is not None and (not v or any(e <= 0 for e in v)):
            raise ValueError("budget_epsilons must be non-empty and positive")
        return v

    @model_validator(mode="after")
    def validate_model_names(self) -> "ExperimentPlan":
        if not self.surrogates or not self.victims:
            raise ValueError("a plan needs at least one surrogate and one victim")
        names = [m for s in self.surrogates for m in s.split("+")] + self.victims
        unknown = [n for n in names if n not in self.models]
        if unknown:
            raise ValueError(f"models not listed in 'models': {sorted(set(unknown))}")
        if not self.attackers:
            raise ValueError("a plan needs at least one attacker")
        return self

    def is_white_box(self, surrogate: str, victim: str) -> bool:
        """The victim is the surrogate, or a member of a `a+b` surrogate ensemble."""
        return any(m == victim or self.models[m] == self.models[victim] for m in surrogate.split("+"))
