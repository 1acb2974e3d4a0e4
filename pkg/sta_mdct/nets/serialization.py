"""
Binary model and profile files.

Layout (all little-endian):

    magic      4 bytes   b"STAM" (model) or b"STAP" (profiles)
    version    uint16
    header_len uint32
    header     header_len bytes of UTF-8 JSON
    payload    float64 block

A model header holds the ModelSpec; a profile header holds the embedding dimension and
the ordered speaker ids, and the payload is the (speakers x dim) embedding matrix.
"""

import json
import logging
import struct
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from sta_mdct.errors import ModelFormatError
from sta_mdct.nets.models import EmbeddingModel, build_model
from sta_mdct.nets.speakers import SpeakerProfile
from sta_mdct.schemas.model import ModelSpec

logger = logging.getLogger(__name__)

MODEL_MAGIC = b"STAM"
PROFILE_MAGIC = b"STAP"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sHI")


def _pack(magic: bytes, header: dict, payload: np.ndarray) -> bytes:
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    return _PREFIX.pack(magic, FORMAT_VERSION, len(header_bytes)) + header_bytes + payload.astype("<f8").tobytes()


def _unpack(data: bytes, magic: bytes, path: Path) -> tuple[dict, np.ndarray]:
    if len(data) < _PREFIX.size:
        raise ModelFormatError(f"{path}: truncated file ({len(data)} bytes)")
    found, version, header_len = _PREFIX.unpack_from(data)
    if found != magic:
        raise ModelFormatError(f"{path}: bad magic {found!r}, expected {magic!r}")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {version}")
    start = _PREFIX.size
    try:
        header = json.loads(data[start : start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"{path}: unreadable header: {e}") from e
    block = data[start + header_len :]
    if len(block) % 8:
        raise ModelFormatError(f"{path}: payload of {len(block)} bytes is not a float64 block")
    return header, np.frombuffer(block, dtype="<f8").astype(np.float64)


def _read(path: Path | str) -> bytes:
    path = Path(path)
    try:
        return path.read_bytes()
    except OSError as e:
        raise ModelFormatError(f"cannot read {path}: {e}") from e


def _write(path: Path | str, data: bytes) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as e:
        raise ModelFormatError(f"cannot write {path}: {e}") from e


def save_model(model: EmbeddingModel, path: Path | str) -> None:
    header = {"spec": model.spec.model_dump(mode="json"), "n_params": model.n_params}
    _write(path, _pack(MODEL_MAGIC, header, model.params))
    logger.info(f"Saved {model.architecture} ({model.n_params} parameters) to {path}")


def load_model(path: Path | str) -> EmbeddingModel:
    """
    Load a model file.

    Raises:
        ModelFormatError: Unreadable file, bad magic/version, or a parameter count that
            does not match the architecture in the header.
    """
    header, params = _unpack(_read(path), MODEL_MAGIC, Path(path))
    try:
        spec = ModelSpec.model_validate(header["spec"])
    except (KeyError, ValidationError) as e:
        raise ModelFormatError(f"{path}: invalid model header: {e}") from e
    if params.shape[0] != header.get("n_params"):
        raise ModelFormatError(f"{path}: header declares {header.get('n_params')} parameters, found {params.shape[0]}")
    return build_model(spec, params=params)


def save_profiles(profiles: list[SpeakerProfile], path: Path | str) -> None:
    if not profiles:
        raise ModelFormatError("refusing to write an empty profile set")
    matrix = np.stack([p.embedding for p in profiles])
    header = {"embedding_dim": int(matrix.shape[1]), "speakers": [p.speaker_id for p in profiles]}
    _write(path, _pack(PROFILE_MAGIC, header, matrix.ravel()))
    logger.info(f"Saved {len(profiles)} speaker profiles to {path}")


def load_profiles(path: Path | str) -> list[SpeakerProfile]:
    header, block = _unpack(_read(path), PROFILE_MAGIC, Path(path))
    try:
        dim = int(header["embedding_dim"])
        speakers = [str(s) for s in header["speakers"]]
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"{path}: invalid profile header: {e}") from e
    if block.shape[0] != dim * len(speakers):
        raise ModelFormatError(f"{path}: expected {len(speakers)}x{dim} values, found {block.shape[0]}")
    matrix = block.reshape(len(speakers), dim)
    return [SpeakerProfile(speaker, matrix[i].copy()) for i, speaker in enumerate(speakers)]
