"""Tokens, vocabularies and word-level tokenization.

The engine works over a closed word-level vocabulary: token ids are dense
list indices, each token knows the set of lowercase letters occurring in
its surface (the metadata letter constraints filter on), and tokenization
is greedy longest-surface match within whitespace-delimited words.
"""

from __future__ import annotations

import operator
import string
from dataclasses import dataclass

from .errors import (
    BadTokenIdError,
    DuplicateSurfaceError,
    EmptySurfaceError,
    UnknownTokenError,
    UntokenizableError,
)

_ASCII_LETTERS = frozenset(string.ascii_lowercase)


def surface_letters(surface: str) -> frozenset[str]:
    """Lowercase alphabetic characters of a surface; punctuation and digits drop out."""
    return frozenset(c for c in surface.lower() if c in _ASCII_LETTERS)


@dataclass(frozen=True)
class Token:
    id: int
    surface: str
    letters: frozenset[str]


class Vocabulary:
    """Immutable ordered token list with unique surfaces and dense ids."""

    def __init__(self, tokens: list[Token], mask_token_id: int | None = None):
        for i, tok in enumerate(tokens):
            if tok.id != i:
                raise ValueError(f"token ids must be dense: index {i} has id {tok.id}")
        self._tokens = tuple(tokens)
        self._by_surface = {tok.surface: tok.id for tok in tokens}
        if len(self._by_surface) != len(tokens):
            raise DuplicateSurfaceError("duplicate surfaces in vocabulary")
        if mask_token_id is not None and not (0 <= mask_token_id < len(tokens)):
            raise BadTokenIdError(f"mask token id {mask_token_id} out of range")
        self.mask_token_id = mask_token_id
        non_mask = len(tokens) - (0 if mask_token_id is None else 1)
        if non_mask < 2:
            raise ValueError("vocabulary needs at least 2 non-mask tokens")

    def __len__(self) -> int:
        return len(self._tokens)

    def __iter__(self):
        return iter(self._tokens)

    def __contains__(self, surface: str) -> bool:
        return surface in self._by_surface

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return (
            self.mask_token_id == other.mask_token_id
            and [t.surface for t in self._tokens] == [t.surface for t in other._tokens]
        )

    @property
    def tokens(self) -> tuple[Token, ...]:
        return self._tokens

    def token(self, token_id: int) -> Token:
        try:
            token_id = operator.index(token_id)
        except TypeError:
            raise BadTokenIdError(f"bad token id: {token_id!r}") from None
        if not (0 <= token_id < len(self._tokens)):
            raise BadTokenIdError(f"bad token id: {token_id!r}")
        return self._tokens[token_id]

    def id_of(self, surface: str) -> int:
        try:
            return self._by_surface[surface]
        except KeyError:
            raise UnknownTokenError(f"unknown token surface: {surface!r}") from None

    def surface(self, token_id: int) -> str:
        return self.token(token_id).surface


def token_letters(vocab: Vocabulary, token_id: int) -> frozenset[str]:
    """Precomputed letter set of one token."""
    return vocab.token(token_id).letters


def build_vocabulary(surfaces: list[str], mask_surface: str | None = None) -> Vocabulary:
    """Assign dense ids in list order and precompute per-token letter sets."""
    if not surfaces:
        raise EmptySurfaceError("no surfaces given")
    seen: set[str] = set()
    tokens: list[Token] = []
    for i, surface in enumerate(surfaces):
        if not surface:
            raise EmptySurfaceError(f"empty surface at index {i}")
        if any(c.isspace() for c in surface):
            raise ValueError(f"surface contains whitespace: {surface!r}")
        if surface in seen:
            raise DuplicateSurfaceError(f"duplicate surface: {surface!r}")
        seen.add(surface)
        tokens.append(Token(id=i, surface=surface, letters=surface_letters(surface)))
    mask_id = None
    if mask_surface is not None:
        if mask_surface not in seen:
            raise UnknownTokenError(f"mask surface {mask_surface!r} not in vocabulary")
        mask_id = next(t.id for t in tokens if t.surface == mask_surface)
    return Vocabulary(tokens, mask_token_id=mask_id)


@dataclass(frozen=True)
class TokenSequence:
    """Fixed-length vector of token ids over one vocabulary. A value: copies are cheap."""

    vocabulary: Vocabulary
    ids: tuple[int, ...]

    def __post_init__(self):
        if not self.ids:
            raise ValueError("sequence length must be positive")
        n = len(self.vocabulary)
        try:
            ids = tuple(operator.index(i) for i in self.ids)
        except TypeError:
            raise BadTokenIdError(f"bad token id in sequence: {self.ids!r}") from None
        for i in ids:
            if not (0 <= i < n):
                raise BadTokenIdError(f"bad token id in sequence: {i!r}")
        object.__setattr__(self, "ids", ids)

    @property
    def length(self) -> int:
        return len(self.ids)

    def replace(self, position: int, token_id: int) -> "TokenSequence":
        ids = list(self.ids)
        ids[position] = token_id
        return TokenSequence(self.vocabulary, tuple(ids))

    def surfaces(self) -> list[str]:
        return [self.vocabulary.surface(i) for i in self.ids]


def tokenize(text: str, vocab: Vocabulary) -> TokenSequence:
    """Segment each whitespace-delimited word by greedy longest-surface match.

    Ties between equal-length matches cannot arise (surfaces are unique);
    the scan keeps the lowest token id among candidates anyway.
    """
    words = text.split()
    if not words:
        raise UntokenizableError("no tokens in text")
    ids: list[int] = []
    for word in words:
        rest = word
        while rest:
            best: Token | None = None
            for tok in vocab:
                if rest.startswith(tok.surface):
                    if best is None or len(tok.surface) > len(best.surface):
                        best = tok
            if best is None:
                raise UntokenizableError(f"cannot tokenize {rest!r} in word {word!r}")
            ids.append(best.id)
            rest = rest[len(best.surface):]
    return TokenSequence(vocab, tuple(ids))


def detokenize(seq: TokenSequence) -> str:
    """Surfaces joined with single spaces."""
    return " ".join(seq.surfaces())


def parse_vocabulary_text(text: str) -> Vocabulary:
    """Parse the vocabulary file format: one surface per line, line index = token id,
    optional first line ``#mask <surface>``."""
    lines = text.splitlines()
    mask_surface = None
    if lines and lines[0].startswith("#mask"):
        header = lines.pop(0)
        parts = header.split()
        if len(parts) != 2:
            raise EmptySurfaceError("malformed #mask header")
        mask_surface = parts[1]
    while lines and not lines[-1].strip():
        lines.pop()
    surfaces = [line.strip() for line in lines]  # interior blank -> E_EMPTY_SURFACE
    return build_vocabulary(surfaces, mask_surface=mask_surface)


def format_vocabulary(vocab: Vocabulary) -> str:
    """Inverse of :func:`parse_vocabulary_text`."""
    lines = []
    if vocab.mask_token_id is not None:
        lines.append(f"#mask {vocab.surface(vocab.mask_token_id)}")
    lines.extend(tok.surface for tok in vocab)
    return "\n".join(lines) + "\n"


def load_vocabulary(path) -> Vocabulary:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_vocabulary_text(fh.read())
