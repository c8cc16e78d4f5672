#           Cp Surrogate
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; either version 2 of the License, or
#  (at your option) any later version.
#
#  This program is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with this program; if not, write to the Free Software
#  Foundation, Inc., 51 Franklin Street, Fifth Floor, Boston,
#  MA 02110-1301, USA.

"""
Seed derivation. Every random stream in the package comes from
derive_rng(master_seed, role, index), so a stream depends only on its
owner (tree i, stage m, node j ...) and never on the order in which work
is scheduled.

The mixing function is numpy's SeedSequence with spawn_key
(ROLE_CODES[role], index). Role codes are part of the model file
contract: changing them changes every fitted model.
"""

import numpy as np

from errors import ParameterError

ROLE_CODES = {
    "split": 1,
    "fold": 2,
    "bootstrap": 3,
    "tree": 4,
    "stage": 5,
    "node": 6,
    "synth": 7,
}


def _sequence(seed: int, role: str, index: int) -> np.random.SeedSequence:
    if int(seed) < 0:
        raise ParameterError(f"Seed must be non-negative. {seed}")
    if role not in ROLE_CODES:
        raise ParameterError(f"Unknown seed role: {role}")
    if int(index) < 0:
        raise ParameterError(f"Seed index must be non-negative. {index}")
    return np.random.SeedSequence(int(seed), spawn_key = (ROLE_CODES[role], int(index)))


def derive_seed(seed: int, role: str, index: int = 0) -> int:
    """Child seed for (seed, role, index) as a non-negative 63 bit integer."""
    word = _sequence(seed, role, index).generate_state(1, dtype = np.uint64)[0]
    return int(word >> np.uint64(1))


def derive_rng(seed: int, role: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(_sequence(seed, role, index))


### Integer mixing for hot paths
# Per-node feature draws happen thousands of times per tree, so they use a
# plain splitmix64 mix of (tree seed, role code, node index) instead of a
# SeedSequence. Frozen for the same reason as ROLE_CODES.
_MASK64 = (1 << 64) - 1

def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix64(*words: int) -> int:
    h = 0
    for w in words:
        h = _splitmix64(h ^ (int(w) & _MASK64))
    return h


def draw_subset(seed: int, role: str, index: int, size: int, population: int) -> tuple:
    """size distinct integers from range(population), ascending."""
    h = mix64(seed, ROLE_CODES[role], index)
    pool = list(range(population))
    chosen = []
    for _ in range(size):
        h = _splitmix64(h)
        chosen.append(pool.pop(h % len(pool)))
    return tuple(sorted(chosen))
