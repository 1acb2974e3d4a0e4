import hashlib

import numpy as np

_SEED_MASK = (1 << 63) - 1


def derive_seed(base: int, *path: int) -> int:
    """
    Derive a child seed from a base seed and an integer path, e.g. (t, i).

    The path is hashed with blake2b and XORed into the base, so distinct paths give
    unrelated streams while the same (base, path) always gives the same seed.

    Args:
        base (int): Parent seed.
        *path (int): Coordinates of the child stream.

    Returns:
        int: A non-negative 63-bit seed.
    """
    digest = hashlib.blake2b(repr(tuple(int(p) for p in path)).encode(), digest_size=8).digest()
    return (int(base) ^ int.from_bytes(digest, "little")) & _SEED_MASK


def make_rng(seed: int) -> np.random.Generator:
    """Seeded numpy generator; the only RNG constructor used by the package."""
    return np.random.default_rng(seed)
