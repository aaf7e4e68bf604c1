"""Seeded generators of example maps and paths for property testing.

Products of positive elementary Nielsen substitutions on a rose are
homotopy equivalences whose edge images contain no inverse letters, so
every turn taken by an image is mixed-sign-free and the map is a train
track map by construction.  Rejection sampling on the transition matrix
keeps only expanding irreducible examples.  All randomness comes from an
explicit seed; nothing reads the environment.
"""

from __future__ import annotations

import random
from typing import Optional, Sequence

from .errors import InvariantViolation
from .graphs import Graph, GraphMap
from .traintrack import is_expanding, is_irreducible, transition_matrix
from .words import Letter, Word

ALPHABET = "abcdefgh"


def _substitute(images: dict[str, str], target: str, replacement: str
                ) -> dict[str, str]:
    return {g: w.replace(target, replacement) for g, w in images.items()}


def _random_positive_images(rng: random.Random, names: Sequence[str],
                            moves: int) -> dict[str, str]:
    images = {g: g for g in names}
    for _ in range(moves):
        i, j = rng.sample(range(len(names)), 2)
        gi, gj = names[i], names[j]
        if rng.random() < 0.5:
            images = _substitute(images, gi, gi + gj)
        else:
            images = _substitute(images, gi, gj + gi)
    return images


def rose_map(images: dict[str, str]) -> GraphMap:
    rose = Graph.rose(sorted(images), vertex="v")
    return GraphMap.from_strings(rose, {"v": "v"}, images)


def random_expanding_map(seed: Optional[int] = None, *,
                         rng: Optional[random.Random] = None,
                         rank: Optional[int] = None,
                         max_moves: int = 8,
                         attempts: int = 200) -> GraphMap:
    """A positive expanding irreducible self-map of a rose.

    Deterministic in ``seed`` (or draws from a caller-supplied ``rng``).
    ``rank`` fixes the rose rank; otherwise 2 or 3 is chosen at random.
    """
    if rng is None:
        rng = random.Random(seed)
    for _ in range(attempts):
        n = rank if rank is not None else rng.choice((2, 3))
        if not 2 <= n <= len(ALPHABET):
            raise InvariantViolation(f"rank {n} out of range")
        names = list(ALPHABET[:n])
        moves = rng.randrange(3, max_moves + 1)
        images = _random_positive_images(rng, names, moves)
        candidate = rose_map(images)
        matrix = transition_matrix(candidate)
        if is_irreducible(matrix) and is_expanding(matrix):
            return candidate
    raise InvariantViolation(
        f"no expanding irreducible map found in {attempts} attempts")


def corpus(count: int, seed: int) -> tuple[GraphMap, ...]:
    """``count`` independent seeded samples from :func:`random_expanding_map`."""
    rng = random.Random(seed)
    return tuple(random_expanding_map(rng=rng) for _ in range(count))


def random_pair(seed: int) -> tuple[GraphMap, GraphMap]:
    """Two maps on the same rose, suitable for composition laws."""
    rng = random.Random(seed)
    rank = rng.choice((2, 3))
    f = random_expanding_map(rng=rng, rank=rank)
    g = random_expanding_map(rng=rng, rank=rank)
    return f, g


def random_path(graph: Graph, length: int, seed: Optional[int] = None, *,
                rng: Optional[random.Random] = None) -> Word:
    """A random edge path (backtracking allowed) of the given length."""
    if rng is None:
        rng = random.Random(seed)
    if length <= 0:
        return ()
    at = rng.choice(graph.vertices)
    out: list[Letter] = []
    for _ in range(length):
        choices = graph.directions(at)
        if not choices:
            raise InvariantViolation(f"vertex {at!r} has no directions")
        lt = rng.choice(choices)
        out.append(lt)
        at = graph.term_of(lt)
    return tuple(out)
