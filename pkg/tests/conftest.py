from __future__ import annotations

import itertools

import numpy as np
import pytest

from versecraft import (
    ConstraintSet,
    Lipogram,
    Pin,
    SuffixRhyme,
    SurfacePredicate,
    TabularModel,
    Vocabulary,
    build_vocabulary,
    compile_masks,
)
from versecraft.errors import InfeasibleError

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def tabular_from_dict(vocab: Vocabulary, length: int, joint: dict[tuple[int, ...], float]) -> TabularModel:
    """Build a TabularModel from the plain-dict joints the oracles work on."""
    v = len(vocab)
    arr = np.empty((v,) * length)
    for ids in itertools.product(range(v), repeat=length):
        arr[ids] = joint[ids]
    return TabularModel(vocab, length, arr)


@pytest.fixture
def tiny_vocab() -> Vocabulary:
    return build_vocabulary(["the", "cat", "sat"])


@pytest.fixture
def pair_vocab() -> Vocabulary:
    return build_vocabulary(["yes", "no"])


@pytest.fixture
def trio_vocab() -> Vocabulary:
    return build_vocabulary(["red", "green", "blue"])


@pytest.fixture
def quad_vocab() -> Vocabulary:
    return build_vocabulary(["north", "south", "east", "west"])


@pytest.fixture
def poem_vocab() -> Vocabulary:
    """Figure-style fixture vocabulary; 'away' is the letter-a casualty."""
    return build_vocabulary(
        ["Beyond", "those", "lines,", "the", "unforeseen.", "away", "worst", "never"]
    )


@pytest.fixture
def wordy_vocab() -> Vocabulary:
    """Varied letters and suffixes for randomized constraint tests."""
    return build_vocabulary(
        ["tree", "stone", "moon", "sun", "rain", "mist", "glow", "ember"]
    )


def random_constraint_set(
    rng: np.random.Generator,
    vocab: Vocabulary,
    length: int,
    max_constraints: int = 3,
    ensure_feasible: bool = True,
) -> ConstraintSet:
    """Seeded random mix of pins, lipograms, rhymes and filters."""
    non_mask = [t.id for t in vocab if t.id != vocab.mask_token_id]
    for _ in range(200):
        constraints = []
        pinned: set[int] = set()
        for _ in range(int(rng.integers(0, max_constraints + 1))):
            kind = rng.integers(4)
            if kind == 0:
                position = int(rng.integers(length))
                if position in pinned:
                    continue
                pinned.add(position)
                constraints.append(Pin(position, int(rng.choice(non_mask))))
            elif kind == 1:
                letters = frozenset(
                    rng.choice(list("aeionrst"), size=int(rng.integers(1, 3)), replace=False)
                )
                everywhere = rng.random() < 0.5
                positions = (
                    None
                    if everywhere
                    else frozenset(int(p) for p in rng.choice(length, size=1))
                )
                constraints.append(Lipogram(letters, positions))
            elif kind == 2:
                surface = vocab.surface(int(rng.choice(non_mask)))
                constraints.append(
                    SuffixRhyme(int(rng.integers(length)), surface[-int(rng.integers(1, 3)):])
                )
            else:
                letter = str(rng.choice(list("semtg")))
                constraints.append(SurfacePredicate("contains", letter, None))
        cs = ConstraintSet(length, tuple(constraints))
        if not ensure_feasible:
            return cs
        try:
            compile_masks(cs, vocab)
        except InfeasibleError:
            continue
        return cs
    raise AssertionError("could not draw a feasible constraint set")
