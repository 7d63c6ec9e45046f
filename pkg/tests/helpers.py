"""Shared generators for the test suite.

Everything takes an explicit random.Random so test runs stay repeatable.
"""

from __future__ import annotations

import random

from whitehead.bases import (
    Automorphism,
    compose,
    enumerate_whitehead_transforms,
)
from whitehead.words import CyclicWord, Word


def random_reduced_codes(rank: int, length: int, rng: random.Random) -> list:
    """A freely reduced code sequence of exactly the requested length."""
    codes = []
    choices = [c for c in range(-rank, rank + 1) if c != 0]
    while len(codes) < length:
        c = rng.choice(choices)
        if codes and codes[-1] == -c:
            continue
        codes.append(c)
    return codes


def random_word(rank: int, length: int, rng: random.Random) -> Word:
    return Word(rank, random_reduced_codes(rank, length, rng))


def random_cyclic_word(rank: int, length: int, rng: random.Random) -> CyclicWord:
    # resample until the cyclic reduction keeps the full length, so tests
    # exercise genuine cyclic words of the size they asked for
    while True:
        w = CyclicWord(rank, random_reduced_codes(rank, length, rng))
        if len(w) == length or length < 2:
            return w


def random_automorphism(rank: int, depth: int, rng: random.Random) -> Automorphism:
    """Compose depth random Whitehead transforms (identity at depth 0)."""
    aut = Automorphism.identity(rank)
    transforms = enumerate_whitehead_transforms(rank)
    for _ in range(depth):
        aut = compose(aut, rng.choice(transforms).to_automorphism())
    return aut
