"""Counter-based random streams.

Every random quantity in the package is a pure function of (seed, stream tag,
counter words), so results do not depend on evaluation order or on how work is
scheduled across threads.  The generator is a keyed sequence of splitmix64
finalizer rounds applied to 64-bit words; it is stateless and vectorizes over
numpy arrays of counters.

Stream tags used by the package:

* ``"U"``  latent positions, one counter per vertex (plus a retry word),
* ``"E"``  edge coins, one counter pair (i, j) with i < j,
* ``"B"``  stage-membership coins, one counter per vertex,
* ``"S"``  split/permutation keys, one counter per vertex,
* ``"P"``  deterministic start vectors for eigensolvers.
"""

from __future__ import annotations

import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xD6E8FEB86659FD93)
_W2 = np.uint64(0xA5A5A5A5A5A5A5A5)
_INV53 = float(2.0**-53)


def _mix(z):
    """splitmix64 finalizer, elementwise on uint64 scalars or arrays."""
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _tag_word(tag: str) -> np.uint64:
    h = np.uint64(0)
    for ch in tag:
        h = _mix((h + _GOLD) ^ np.uint64(ord(ch)))
    return h


def hash_words(seed: int, tag: str, *words) -> np.ndarray:
    """Hash (seed, tag, words...) to uint64; broadcasts over array words."""
    with np.errstate(over="ignore"):
        h = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ (_tag_word(tag) * _W1))
        for w in words:
            w = np.asarray(w, dtype=np.uint64)
            h = _mix((h + _GOLD) ^ (w * _W2))
        return _mix(h ^ _GOLD)


def uniforms(seed: int, tag: str, *words) -> np.ndarray:
    """Uniform variates on [0, 1) keyed by (seed, tag, words...)."""
    h = hash_words(seed, tag, *words)
    return (h >> np.uint64(11)).astype(np.float64) * _INV53


def derive_seed(seed: int, tag: str, *words) -> int:
    """A fresh 64-bit seed for an independent substream."""
    return int(hash_words(seed, tag, *words))
