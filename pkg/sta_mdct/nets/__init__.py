from sta_mdct.nets.models import ActivationCache, EmbeddingModel, build_model
from sta_mdct.nets.serialization import load_model, load_profiles, save_model, save_profiles
from sta_mdct.nets.speakers import SpeakerProfile, enroll, profile_matrix, score

__all__ = [
    "ActivationCache",
    "EmbeddingModel",
    "SpeakerProfile",
    "build_model",
    "enroll",
    "load_model",
    "load_profiles",
    "profile_matrix",
    "save_model",
    "save_profiles",
    "score",
]
