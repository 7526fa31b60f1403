"""Masked-conditional logit providers and the pseudo-log-likelihood energy.

A provider is anything answering "given this sequence with position i hidden,
what are the logits over the vocabulary for position i?". The sampler treats
softmax(logits) as the model's masked conditional. The target energy of a
sequence is the negative sum of log masked-conditional probabilities of its
actual tokens, so the chain and its verification oracles share one interface.

``TabularModel`` is the desk-scale stand-in: an explicit strictly-positive
joint over all sequences of a fixed length, whose masked conditionals are
exact slices of the table.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np

from .errors import (
    BadPositionError,
    InfiniteEnergyError,
    LengthMismatchError,
    ProviderFailureError,
)
from .vocabulary import TokenSequence, Vocabulary


@runtime_checkable
class MaskedModelProvider(Protocol):
    """Masked-conditional oracle: logits for one hidden position given the rest."""

    @property
    def vocabulary(self) -> Vocabulary: ...

    def masked_logits(self, seq: TokenSequence, position: int) -> np.ndarray: ...


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Shift-invariant log-softmax; -inf entries map to probability exactly zero."""
    m = logits.max()
    if m == -np.inf:
        raise ProviderFailureError("logit vector has no finite entry")
    return logits - (m + np.log(np.exp(logits - m).sum()))


class TabularModel:
    """Explicit joint distribution over all length-l sequences of a vocabulary.

    All probabilities must be strictly positive and sum to 1 within 1e-9, so
    every masked conditional is well defined.
    """

    SUM_TOL = 1e-9

    def __init__(self, vocabulary: Vocabulary, length: int, joint: np.ndarray):
        if length < 1:
            raise ValueError("length must be positive")
        v = len(vocabulary)
        expected = (v,) * length
        joint = np.asarray(joint, dtype=np.float64)
        if joint.shape != expected:
            raise ValueError(f"joint shape {joint.shape} != {expected}")
        if not (joint > 0).all():
            raise ValueError("joint probabilities must be strictly positive")
        total = float(joint.sum())
        if abs(total - 1.0) > self.SUM_TOL:
            raise ValueError(f"joint sums to {total}, not 1")
        self._vocabulary = vocabulary
        self.length = length
        self.joint = joint
        self._log_joint = np.log(joint)
        self.joint.setflags(write=False)
        self._log_joint.setflags(write=False)

    @property
    def vocabulary(self) -> Vocabulary:
        return self._vocabulary

    @classmethod
    def uniform(cls, vocabulary: Vocabulary, length: int) -> "TabularModel":
        v = len(vocabulary)
        joint = np.full((v,) * length, 1.0 / v**length)
        return cls(vocabulary, length, joint)

    def _check(self, seq: TokenSequence, position: int) -> None:
        if seq.length != self.length:
            raise LengthMismatchError(
                f"sequence length {seq.length} != model length {self.length}"
            )
        if not (0 <= position < self.length):
            raise BadPositionError(f"position {position} out of range 0..{self.length - 1}")

    def joint_probability(self, ids: tuple[int, ...]) -> float:
        if len(ids) != self.length:
            raise LengthMismatchError(f"need {self.length} ids, got {len(ids)}")
        return float(self.joint[ids])

    def masked_logits(self, seq: TokenSequence, position: int) -> np.ndarray:
        """Log-joint slice along ``position``; softmax of it is the exact conditional."""
        self._check(seq, position)
        idx = seq.ids[:position] + (slice(None),) + seq.ids[position + 1:]
        return self._log_joint[idx]


def exact_conditional(tabular: TabularModel, seq: TokenSequence, position: int) -> np.ndarray:
    """Independent oracle for masked conditionals: substitute every token and normalize."""
    tabular._check(seq, position)
    ids = list(seq.ids)
    probs = np.empty(len(tabular.vocabulary))
    for v in range(len(tabular.vocabulary)):
        ids[position] = v
        probs[v] = tabular.joint_probability(tuple(ids))
    return probs / probs.sum()


def pseudo_loglik_energy(provider: MaskedModelProvider, seq: TokenSequence) -> float:
    """Negative sum over positions of the log masked-conditional of the actual token."""
    energy = 0.0
    for i in range(seq.length):
        logits = provider.masked_logits(seq, i)
        m = logits.max()
        if m == -np.inf:
            raise InfiniteEnergyError(f"no admissible token at position {i}")
        lp = logits[seq.ids[i]] - (m + np.log(np.exp(logits - m).sum()))
        if lp == -np.inf:
            raise InfiniteEnergyError(
                f"token {seq.ids[i]} has zero conditional probability at position {i}"
            )
        energy -= float(lp)
    return energy


def parse_tabular_model(text: str, vocabulary: Vocabulary) -> TabularModel:
    """Parse the tabular model file: header ``TABULAR <l>`` then one
    ``<id id ...> <probability>`` line per sequence, covering every sequence."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ProviderFailureError("empty tabular model file")
    header = lines[0].split()
    if len(header) != 2 or header[0] != "TABULAR":
        raise ProviderFailureError(f"bad tabular header: {lines[0]!r}")
    try:
        length = int(header[1])
    except ValueError:
        raise ProviderFailureError(f"bad tabular length: {header[1]!r}") from None
    v = len(vocabulary)
    joint = np.full((v,) * length, -1.0)
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != length + 1:
            raise ProviderFailureError(f"expected {length} ids + probability: {ln!r}")
        try:
            ids = tuple(int(p) for p in parts[:length])
            prob = float(parts[length])
        except ValueError:
            raise ProviderFailureError(f"malformed tabular row: {ln!r}") from None
        if any(not (0 <= i < v) for i in ids):
            raise ProviderFailureError(f"token id out of range in row: {ln!r}")
        if joint[ids] >= 0:
            raise ProviderFailureError(f"duplicate row for sequence {ids}")
        joint[ids] = prob
    if (joint < 0).any():
        missing = int((joint < 0).sum())
        raise ProviderFailureError(f"tabular file misses {missing} sequences")
    try:
        return TabularModel(vocabulary, length, joint)
    except ValueError as exc:
        raise ProviderFailureError(str(exc)) from None


def format_tabular_model(model: TabularModel) -> str:
    """Inverse of :func:`parse_tabular_model`."""
    out = [f"TABULAR {model.length}"]
    for ids in np.ndindex(*model.joint.shape):
        out.append(" ".join(str(i) for i in ids) + f" {float(model.joint[ids])!r}")
    return "\n".join(out) + "\n"


def load_tabular_model(path, vocabulary: Vocabulary) -> TabularModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_tabular_model(fh.read(), vocabulary)
