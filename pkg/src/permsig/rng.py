"""Deterministic random-stream derivation for replicated studies.

Every randomized operation in the package draws from a counter-based
Philox stream keyed by ``(master_seed, replicate_index, operation tag)``.
Distinct keys give statistically independent streams, so

* any replicate can be recomputed in isolation,
* replicates never share randomness, and
* results do not depend on scheduling order or worker count.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


def _stream_word(replicate_index: int, tag: str) -> int:
    """Collapse (replicate_index, tag) into one 64-bit key word."""
    digest = hashlib.blake2b(
        f"{replicate_index}:{tag}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class PermutationPlan:
    """Recipe for one replicate's randomness.

    Parameters
    ----------
    master_seed : int
        Study-level seed, interpreted as an unsigned 64-bit integer.
    replicate_index : int
        Non-negative index of the replicate (or iteration) this plan
        belongs to.  Two plans with different indices never share a
        stream, whatever tags they use.
    """

    master_seed: int
    replicate_index: int = 0

    def __post_init__(self):
        if not isinstance(self.master_seed, int) or not (
            0 <= self.master_seed <= _MASK64
        ):
            raise ValueError("master_seed must be an integer in [0, 2**64)")
        if not isinstance(self.replicate_index, int) or self.replicate_index < 0:
            raise ValueError("replicate_index must be a non-negative integer")

    def rng(self, tag: str) -> np.random.Generator:
        """Return a fresh generator for the named operation.

        Calling this twice with the same tag returns two generators that
        produce identical output; different tags give independent streams.
        """
        key = [self.master_seed, _stream_word(self.replicate_index, tag)]
        return np.random.Generator(np.random.Philox(key=key))
