"""Named random substreams derived from a single run seed.

Every random draw in a run flows from one user-supplied seed, split into
independent named streams (sampling, centers, sigmas, ...) so that one
component can be re-drawn without perturbing the others.
"""

from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, *names: str | int) -> np.random.Generator:
    """Generator for the substream identified by ``names`` under ``seed``.

    The same (seed, names) pair always yields an identical stream; distinct
    names yield statistically independent streams.
    """
    keys = [_as_key(n) for n in names]
    return np.random.default_rng(np.random.SeedSequence([int(seed), *keys]))


def _as_key(name: str | int) -> int:
    if isinstance(name, int):
        return name & 0xFFFFFFFF
    return zlib.crc32(name.encode("utf-8"))
