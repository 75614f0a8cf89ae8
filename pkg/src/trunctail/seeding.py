"""Deterministic RNG stream derivation.

Every random routine in the package draws from a generator keyed on
(seed, *tags).  Tags are small integers or stable content hashes, so a
replicate's stream depends only on its identity, never on execution
order or worker count.
"""

import hashlib

import numpy as np

__all__ = ["derive_rng", "stable_key"]

_MASK64 = (1 << 64) - 1


def derive_rng(seed: int, *tags: int) -> np.random.Generator:
    """Return a generator for the stream identified by (seed, *tags).

    Args:
        seed: user-facing base seed (any Python int; reduced mod 2**64).
        tags: non-negative integers naming the substream, e.g. a
            purpose code, a cell key, a replicate index.
    """
    entropy = [int(seed) & _MASK64] + [int(t) & _MASK64 for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def stable_key(*parts) -> int:
    """Hash a tuple of parameters to a stable 63-bit stream tag.

    Uses the repr of each part (floats repr round-trip exactly), so the
    key depends on parameter values only.  Unlike builtin hash() it is
    stable across processes and runs.
    """
    text = "|".join(repr(p) for p in parts)
    digest = hashlib.sha256(text.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
