from sta_mdct.attacks.acg import acg, hestenes_stiefel_beta
from sta_mdct.attacks.common import FusedSurrogate, Surrogate, check_ball, clip, quantize_within_ball
from sta_mdct.attacks.ensemble import ensemble_sta_attack
from sta_mdct.attacks.gradient_sign import fgsm, ifgsm, mifgsm, nifgsm
from sta_mdct.attacks.objectives import AttackObjective, Task, attack_succeeded, decide
from sta_mdct.attacks.registry import AttackResult, run_attack
from sta_mdct.attacks.sta import sta_attack, transformed_gradient

__all__ = [
    "AttackObjective",
    "AttackResult",
    "FusedSurrogate",
    "Surrogate",
    "Task",
    "acg",
    "attack_succeeded",
    "check_ball",
    "clip",
    "decide",
    "ensemble_sta_attack",
    "fgsm",
    "hestenes_stiefel_beta",
    "ifgsm",
    "mifgsm",
    "nifgsm",
    "quantize_within_ball",
    "run_attack",
    "sta_attack",
    "transformed_gradient",
]
