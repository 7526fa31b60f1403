"""Constraint declarations, the line-oriented spec format, and mask compilation.

Constraints are hard filters on per-position vocabularies. Compilation
intersects, for every position, the allowed-token sets of all constraints
touching it, yielding one boolean vector per position; sampling enforces a
mask by writing -inf into the disallowed logits, which is exactly a product
of indicator experts followed by renormalization.

Kinds:
  pin       - position fixed to one chosen token
  lipogram  - tokens containing any banned letter are disallowed
  rhyme     - token surface must end with a given suffix
  filter    - named surface predicate from ``SURFACE_PREDICATES``
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import (
    BadPositionError,
    BadTokenIdError,
    ConflictingPinsError,
    EmptyMaskError,
    InfeasibleError,
    LengthMismatchError,
    SpecParseError,
)
from .vocabulary import TokenSequence, Vocabulary

# Extension point: predicate(surface, argument) -> token allowed?
SURFACE_PREDICATES: dict[str, Callable[[str, str], bool]] = {
    "startswith": lambda surface, arg: surface.startswith(arg),
    "endswith": lambda surface, arg: surface.endswith(arg),
    "contains": lambda surface, arg: arg in surface,
    "maxlen": lambda surface, arg: len(surface) <= int(arg),
}


def register_surface_predicate(name: str, fn: Callable[[str, str], bool]) -> None:
    SURFACE_PREDICATES[name] = fn


@dataclass(frozen=True)
class Pin:
    """Explicit prompting: exactly one token allowed at the position."""

    position: int
    token_id: int


@dataclass(frozen=True)
class Lipogram:
    """Implicit prompting: bans tokens whose letters meet ``banned_letters``.

    ``positions`` of None means every position.
    """

    banned_letters: frozenset[str]
    positions: frozenset[int] | None = None

    def __post_init__(self):
        letters = frozenset(c.lower() for c in self.banned_letters)
        if not letters or not all(c.isalpha() and c.isascii() for c in letters):
            raise ValueError(f"banned letters must be ascii alphabetic: {self.banned_letters!r}")
        object.__setattr__(self, "banned_letters", letters)


@dataclass(frozen=True)
class SuffixRhyme:
    """Ending constraint: the token surface at ``position`` must end with ``suffix``."""

    position: int
    suffix: str

    def __post_init__(self):
        if not self.suffix:
            raise ValueError("rhyme suffix must be non-empty")


@dataclass(frozen=True)
class SurfacePredicate:
    """Named vocabulary filter applied at ``positions`` (None = all)."""

    name: str
    argument: str
    positions: frozenset[int] | None = None


Constraint = Union[Pin, Lipogram, SuffixRhyme, SurfacePredicate]


def _positions_of(constraint: Constraint) -> list[int]:
    if isinstance(constraint, (Pin, SuffixRhyme)):
        return [constraint.position]
    return sorted(constraint.positions) if constraint.positions is not None else []


@dataclass(frozen=True)
class ConstraintSet:
    """The obligatory length plus an ordered list of constraints."""

    length: int
    constraints: tuple[Constraint, ...] = ()

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("length must be >= 1")
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for c in self.constraints:
            for p in _positions_of(c):
                if not (0 <= p < self.length):
                    raise BadPositionError(f"constraint position {p} outside 0..{self.length - 1}")

    def pins(self) -> dict[int, int]:
        """position -> pinned token id; conflicting pins raise."""
        out: dict[int, int] = {}
        for c in self.constraints:
            if isinstance(c, Pin):
                if c.position in out and out[c.position] != c.token_id:
                    raise ConflictingPinsError(c.position)
                out[c.position] = c.token_id
        return out


class PositionMasks:
    """Per-position boolean allowed-token vectors over the vocabulary."""

    def __init__(self, allowed: np.ndarray, pinned: frozenset[int]):
        allowed = np.asarray(allowed, dtype=bool)
        allowed.setflags(write=False)
        self.allowed = allowed
        self.pinned = pinned

    @property
    def length(self) -> int:
        return self.allowed.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.allowed.shape[1]

    def row(self, position: int) -> np.ndarray:
        if not (0 <= position < self.length):
            raise BadPositionError(f"position {position} out of range")
        return self.allowed[position]

    def allows(self, position: int, token_id: int) -> bool:
        return bool(self.allowed[position, token_id])

    def allowed_counts(self) -> list[int]:
        return [int(n) for n in self.allowed.sum(axis=1)]

    def free_positions(self) -> list[int]:
        return [p for p in range(self.length) if p not in self.pinned]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PositionMasks):
            return NotImplemented
        return self.pinned == other.pinned and np.array_equal(self.allowed, other.allowed)


def _token_filter(vocab: Vocabulary, constraint: Constraint) -> np.ndarray:
    """Boolean allowed-vector over the vocabulary for one constraint kind."""
    if isinstance(constraint, Lipogram):
        banned = constraint.banned_letters
        return np.array([not (tok.letters & banned) for tok in vocab], dtype=bool)
    if isinstance(constraint, SuffixRhyme):
        return np.array([tok.surface.endswith(constraint.suffix) for tok in vocab], dtype=bool)
    if isinstance(constraint, SurfacePredicate):
        try:
            fn = SURFACE_PREDICATES[constraint.name]
        except KeyError:
            raise ValueError(f"unknown surface predicate: {constraint.name!r}") from None
        return np.array([fn(tok.surface, constraint.argument) for tok in vocab], dtype=bool)
    raise TypeError(f"no token filter for {constraint!r}")


def compile_masks(cs: ConstraintSet, vocab: Vocabulary) -> PositionMasks:
    """Intersect the allowed-token sets of every constraint, per position.

    The mask token (when present) is disallowed everywhere. Fails on the
    first position whose intersection comes up empty.
    """
    l, v = cs.length, len(vocab)
    allowed = np.ones((l, v), dtype=bool)
    if vocab.mask_token_id is not None:
        allowed[:, vocab.mask_token_id] = False

    pins = cs.pins()
    for position, token_id in pins.items():
        if not (0 <= token_id < v):
            raise BadTokenIdError(f"pin token id {token_id} out of range")
        onehot = np.zeros(v, dtype=bool)
        onehot[token_id] = True
        allowed[position] &= onehot

    for c in cs.constraints:
        if isinstance(c, Pin):
            continue
        token_ok = _token_filter(vocab, c)
        rows = _positions_of(c) or range(l)
        for p in rows:
            allowed[p] &= token_ok

    counts = allowed.sum(axis=1)
    for p in range(l):
        if counts[p] == 0:
            raise InfeasibleError(p)
    return PositionMasks(allowed, pinned=frozenset(pins))


def apply_mask(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Write -inf into disallowed logits; softmax then puts exactly zero there."""
    logits = np.asarray(logits, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if logits.shape != mask.shape:
        raise LengthMismatchError(f"logits {logits.shape} vs mask {mask.shape}")
    if not mask.any():
        raise EmptyMaskError("mask allows no token")
    return np.where(mask, logits, -np.inf)


def satisfies(seq: TokenSequence, cs: ConstraintSet, vocab: Vocabulary | None = None) -> bool:
    """Evaluate every constraint's predicate directly on the sequence.

    Deliberately independent of compile_masks; agreement between the two
    routes is a tested property. Mask tokens are never legal in a finished
    sequence, matching their exclusion from every compiled mask.
    """
    vocab = vocab or seq.vocabulary
    if seq.length != cs.length:
        raise LengthMismatchError(f"sequence length {seq.length} != constraint length {cs.length}")
    if vocab.mask_token_id is not None and vocab.mask_token_id in seq.ids:
        return False
    for c in cs.constraints:
        if isinstance(c, Pin):
            if seq.ids[c.position] != c.token_id:
                return False
        elif isinstance(c, Lipogram):
            positions = sorted(c.positions) if c.positions is not None else range(cs.length)
            for p in positions:
                if vocab.token(seq.ids[p]).letters & c.banned_letters:
                    return False
        elif isinstance(c, SuffixRhyme):
            if not vocab.surface(seq.ids[c.position]).endswith(c.suffix):
                return False
        elif isinstance(c, SurfacePredicate):
            fn = SURFACE_PREDICATES[c.name]
            positions = sorted(c.positions) if c.positions is not None else range(cs.length)
            for p in positions:
                if not fn(vocab.surface(seq.ids[p]), c.argument):
                    return False
        else:
            raise TypeError(f"unknown constraint: {c!r}")
    return True


def _parse_positions(field: str, line_no: int, length: int) -> frozenset[int] | None:
    if field == "all":
        return None
    try:
        positions = frozenset(int(p) for p in field.split(","))
    except ValueError:
        raise SpecParseError(line_no, f"bad position list: {field!r}") from None
    for p in positions:
        if not (0 <= p < length):
            raise BadPositionError(f"line {line_no}: position {p} outside 0..{length - 1}")
    return positions


def parse_constraint_spec(text: str, vocab: Vocabulary) -> ConstraintSet:
    """Parse the line-oriented constraint spec.

    Grammar (one directive per line, ``#`` lines are comments)::

        length <l>                      # must come first
        pin <position> <surface>
        lipogram <letters> [at <p1,p2,...>]
        rhyme <position> <suffix>
        filter <name> <arg> at <positions|all>
    """
    length: int | None = None
    constraints: list[Constraint] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        keyword = fields[0]
        if length is None:
            if keyword != "length":
                raise SpecParseError(line_no, "length must come first")
            if len(fields) != 2:
                raise SpecParseError(line_no, "usage: length <l>")
            try:
                length = int(fields[1])
            except ValueError:
                raise SpecParseError(line_no, f"bad length: {fields[1]!r}") from None
            if length < 1:
                raise SpecParseError(line_no, "length must be >= 1")
            continue
        if keyword == "length":
            raise SpecParseError(line_no, "duplicate length directive")
        if keyword == "pin":
            if len(fields) != 3:
                raise SpecParseError(line_no, "usage: pin <position> <surface>")
            try:
                position = int(fields[1])
            except ValueError:
                raise SpecParseError(line_no, f"bad position: {fields[1]!r}") from None
            if not (0 <= position < length):
                raise BadPositionError(f"line {line_no}: position {position} outside 0..{length - 1}")
            constraints.append(Pin(position, vocab.id_of(fields[2])))
        elif keyword == "lipogram":
            if len(fields) == 2:
                positions = None
            elif len(fields) == 4 and fields[2] == "at":
                positions = _parse_positions(fields[3], line_no, length)
            else:
                raise SpecParseError(line_no, "usage: lipogram <letters> [at <p1,p2,...>]")
            letters = fields[1]
            if not (letters.isalpha() and letters.isascii()):
                raise SpecParseError(line_no, f"banned letters must be alphabetic: {letters!r}")
            constraints.append(Lipogram(frozenset(letters.lower()), positions))
        elif keyword == "rhyme":
            if len(fields) != 3:
                raise SpecParseError(line_no, "usage: rhyme <position> <suffix>")
            try:
                position = int(fields[1])
            except ValueError:
                raise SpecParseError(line_no, f"bad position: {fields[1]!r}") from None
            if not (0 <= position < length):
                raise BadPositionError(f"line {line_no}: position {position} outside 0..{length - 1}")
            constraints.append(SuffixRhyme(position, fields[2]))
        elif keyword == "filter":
            if len(fields) != 5 or fields[3] != "at":
                raise SpecParseError(line_no, "usage: filter <name> <arg> at <positions|all>")
            name, arg = fields[1], fields[2]
            if name not in SURFACE_PREDICATES:
                raise SpecParseError(line_no, f"unknown filter: {name!r}")
            if name == "maxlen":
                try:
                    int(arg)
                except ValueError:
                    raise SpecParseError(line_no, f"maxlen needs an integer, got {arg!r}") from None
            constraints.append(SurfacePredicate(name, arg, _parse_positions(fields[4], line_no, length)))
        else:
            raise SpecParseError(line_no, f"unknown directive: {keyword!r}")
    if length is None:
        raise SpecParseError(1, "length must come first")
    return ConstraintSet(length, tuple(constraints))


def render_constraint_spec(cs: ConstraintSet, vocab: Vocabulary) -> str:
    """Emit the exact line format parse_constraint_spec reads back."""
    lines = [f"length {cs.length}"]
    for c in cs.constraints:
        if isinstance(c, Pin):
            lines.append(f"pin {c.position} {vocab.surface(c.token_id)}")
        elif isinstance(c, Lipogram):
            letters = "".join(sorted(c.banned_letters))
            if c.positions is None:
                lines.append(f"lipogram {letters}")
            else:
                lines.append(f"lipogram {letters} at {','.join(map(str, sorted(c.positions)))}")
        elif isinstance(c, SuffixRhyme):
            lines.append(f"rhyme {c.position} {c.suffix}")
        elif isinstance(c, SurfacePredicate):
            where = "all" if c.positions is None else ",".join(map(str, sorted(c.positions)))
            lines.append(f"filter {c.name} {c.argument} at {where}")
        else:
            raise TypeError(f"cannot render {c!r}")
    return "\n".join(lines) + "\n"
