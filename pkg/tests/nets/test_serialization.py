import numpy as np
import pytest

from sta_mdct.errors import ModelFormatError
from sta_mdct.nets.serialization import load_model, load_profiles, save_model, save_profiles


def test_model_file_round_trip(framenet, speech_like, tmp_path):
    save_model(framenet, tmp_path / "models" / "b.stam")
    loaded = load_model(tmp_path / "models" / "b.stam")

    assert loaded.spec == framenet.spec
    assert np.array_equal(loaded.params, framenet.params)
    assert np.array_equal(loaded.forward(speech_like)[0], framenet.forward(speech_like)[0])


def test_profile_file_round_trip(profiles, tmp_path):
    save_profiles(profiles, tmp_path / "profiles.stap")
    loaded = load_profiles(tmp_path / "profiles.stap")

    assert [p.speaker_id for p in loaded] == [p.speaker_id for p in profiles]
    assert all(np.array_equal(a.embedding, b.embedding) for a, b in zip(loaded, profiles))


def test_malformed_files_are_rejected(framenet, profiles, tmp_path):
    """Missing, truncated, wrong-magic and short-payload files all raise ModelFormatError."""
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "missing.stam")

    (tmp_path / "short.stam").write_bytes(b"ST")
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "short.stam")

    save_profiles(profiles, tmp_path / "profiles.stap")
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "profiles.stap")

    save_model(framenet, tmp_path / "b.stam")
    data = (tmp_path / "b.stam").read_bytes()
    (tmp_path / "cut.stam").write_bytes(data[:-16])
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "cut.stam")

    with pytest.raises(ModelFormatError):
        save_profiles([], tmp_path / "empty.stap")
