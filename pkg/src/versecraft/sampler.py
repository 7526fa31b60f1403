"""Metropolis-Hastings chain over constrained fixed-length sequences.

One transition: pick a free (non-pinned) position uniformly, propose a
replacement token from the mask-constrained masked conditional at that
position, accept with the usual MH ratio computed from pseudo-log-likelihood
energies. Because proposal support always lies inside the compiled masks,
every reachable state satisfies the constraints; because the acceptance
ratio uses unconstrained energies, the stationary distribution is the
model's energy distribution restricted to the allowed set and renormalized.

All randomness flows from one seeded generator per chain, so runs are
reproducible byte for byte.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .constraints import PositionMasks, apply_mask
from .errors import (
    InfeasibleError,
    LengthMismatchError,
    NoFreePositionsError,
    TooLargeError,
)
from .providers import MaskedModelProvider, TabularModel, pseudo_loglik_energy
from .vocabulary import TokenSequence


class _AllMask:
    """Sentinel seed: every position starts hidden and gets repaired."""

    def __repr__(self) -> str:
        return "ALL_MASK"


ALL_MASK = _AllMask()

ENUMERATION_LIMIT = 10**6


@dataclass(frozen=True)
class SamplerConfig:
    proposal_temperature: float = 1.0
    target_temperature: float = 1.0
    burn_in: int = 0
    thinning: int = 1
    max_steps: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.proposal_temperature <= 0 or self.target_temperature <= 0:
            raise ValueError("temperatures must be positive")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")


@dataclass(frozen=True)
class ChainState:
    seq: TokenSequence
    energy: float
    step: int
    rng: np.random.Generator = field(repr=False)


@dataclass(frozen=True)
class StepRecord:
    """Audit record of one MH transition."""

    step: int
    position: int
    previous_token: int
    proposed_token: int
    q_forward: float
    q_reverse: float
    acceptance: float
    accepted: bool


@dataclass(frozen=True)
class Emission:
    """One sample surfaced by the burn-in/thinning schedule."""

    step: int
    seq: TokenSequence
    energy: float
    accept_rate: float


def proposal_distribution(
    provider: MaskedModelProvider,
    seq: TokenSequence,
    position: int,
    masks: PositionMasks,
    temperature: float = 1.0,
) -> np.ndarray:
    """softmax(apply_mask(masked_logits) / temperature): the constrained conditional."""
    logits = apply_mask(provider.masked_logits(seq, position), masks.row(position))
    z = logits / temperature
    m = z.max()
    if m == -np.inf:
        raise InfeasibleError(position, f"no allowed token has finite probability at {position}")
    p = np.exp(z - m)
    return p / p.sum()


def _draw(rng: np.random.Generator, probs: np.ndarray) -> int:
    c = np.cumsum(probs)
    i = int(np.searchsorted(c, rng.random() * c[-1], side="right"))
    return min(i, len(probs) - 1)


def init_chain(
    seed: TokenSequence | _AllMask,
    masks: PositionMasks,
    provider: MaskedModelProvider,
    cfg: SamplerConfig,
    rng: np.random.Generator | None = None,
) -> ChainState:
    """Pin the pinned positions, then repair every hidden or violating position
    left to right by sampling from its constrained masked conditional."""
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    seq = repair(seed, masks, provider, rng)
    return ChainState(seq=seq, energy=pseudo_loglik_energy(provider, seq), step=0, rng=rng)


def repair(
    seed: TokenSequence | _AllMask,
    masks: PositionMasks,
    provider: MaskedModelProvider,
    rng: np.random.Generator,
) -> TokenSequence:
    """The repair pass of init_chain, reusable for mid-run constraint edits."""
    vocab = provider.vocabulary
    l = masks.length
    if isinstance(seed, _AllMask):
        if vocab.mask_token_id is not None:
            ids = [vocab.mask_token_id] * l
        else:
            # No mask token to stand in: seed each position with its lowest
            # allowed token; every position is repaired anyway.
            ids = [int(np.flatnonzero(masks.row(p))[0]) for p in range(l)]
        pending = set(range(l))
    else:
        if seed.length != l:
            raise LengthMismatchError(f"seed length {seed.length} != mask length {l}")
        if seed.vocabulary != vocab:
            raise ValueError("seed vocabulary does not match provider vocabulary")
        ids = list(seed.ids)
        pending = {
            p
            for p in range(l)
            if ids[p] == vocab.mask_token_id or not masks.allows(p, ids[p])
        }
    for p in masks.pinned:
        ids[p] = int(np.flatnonzero(masks.row(p))[0])
        pending.discard(p)
    for p in range(l):
        if p not in pending:
            continue
        probe = TokenSequence(vocab, tuple(ids))
        dist = proposal_distribution(provider, probe, p, masks)
        ids[p] = _draw(rng, dist)
    return TokenSequence(vocab, tuple(ids))


def propose(
    state: ChainState,
    masks: PositionMasks,
    provider: MaskedModelProvider,
    cfg: SamplerConfig,
    rng: np.random.Generator,
) -> tuple[int, int, float, float]:
    """Draw (position, proposed_token, q_forward, q_reverse).

    The position is uniform over free positions; the token comes from the
    constrained conditional at that position. Forward and reverse proposal
    distributions coincide (the surrounding context is identical), so both
    q values are read off the same vector.
    """
    free = masks.free_positions()
    if not free:
        raise NoFreePositionsError("all positions pinned: the chain is a fixed point")
    position = free[int(rng.integers(len(free)))]
    dist = proposal_distribution(provider, state.seq, position, masks, cfg.proposal_temperature)
    proposed = _draw(rng, dist)
    return position, proposed, float(dist[proposed]), float(dist[state.seq.ids[position]])


def _acceptance(
    state: ChainState,
    position: int,
    proposed_token: int,
    q_forward: float,
    q_reverse: float,
    provider: MaskedModelProvider,
    cfg: SamplerConfig,
) -> tuple[float, float]:
    """(acceptance probability, energy of the proposed state), in log space."""
    current = state.seq.ids[position]
    if proposed_token == current:
        return 1.0, state.energy
    proposed_seq = state.seq.replace(position, proposed_token)
    proposed_energy = pseudo_loglik_energy(provider, proposed_seq)
    if q_reverse == 0.0:
        return 0.0, proposed_energy
    log_alpha = (state.energy - proposed_energy) / cfg.target_temperature
    log_alpha += math.log(q_reverse) - math.log(q_forward)
    return (1.0 if log_alpha >= 0 else math.exp(log_alpha)), proposed_energy


def acceptance_probability(
    state: ChainState,
    position: int,
    proposed_token: int,
    q_forward: float,
    q_reverse: float,
    provider: MaskedModelProvider,
    cfg: SamplerConfig,
) -> float:
    """min(1, exp((E(X) - E(X'))/T) * q_reverse / q_forward).

    Proposing the current token yields exactly 1. The proposed token must be
    allowed by the mask at ``position``.
    """
    alpha, _ = _acceptance(state, position, proposed_token, q_forward, q_reverse, provider, cfg)
    return alpha


def step(
    state: ChainState,
    masks: PositionMasks,
    provider: MaskedModelProvider,
    cfg: SamplerConfig,
) -> tuple[ChainState, StepRecord]:
    """One MH transition: propose, accept or reject, advance the step counter."""
    rng = state.rng
    position, proposed, q_fwd, q_rev = propose(state, masks, provider, cfg, rng)
    current = state.seq.ids[position]
    alpha, proposed_energy = _acceptance(state, position, proposed, q_fwd, q_rev, provider, cfg)
    accepted = rng.random() < alpha
    if accepted and proposed != current:
        seq, energy = state.seq.replace(position, proposed), proposed_energy
    else:
        seq, energy = state.seq, state.energy
    record = StepRecord(
        step=state.step,
        position=position,
        previous_token=current,
        proposed_token=proposed,
        q_forward=q_fwd,
        q_reverse=q_rev,
        acceptance=alpha,
        accepted=bool(accepted),
    )
    return ChainState(seq=seq, energy=energy, step=state.step + 1, rng=rng), record


def run(
    initial: ChainState,
    masks: PositionMasks,
    provider: MaskedModelProvider,
    cfg: SamplerConfig,
) -> Iterator[Emission]:
    """Step forever (or until max_steps), yielding after burn_in steps and
    every thinning-th step thereafter. max_steps=0 emits nothing."""
    state = initial
    accepted = 0
    k = 0
    while cfg.max_steps is None or k < cfg.max_steps:
        state, record = step(state, masks, provider, cfg)
        k += 1
        accepted += record.accepted
        if k >= cfg.burn_in and (k - cfg.burn_in) % cfg.thinning == 0:
            yield Emission(
                step=state.step,
                seq=state.seq,
                energy=state.energy,
                accept_rate=accepted / k,
            )


def exact_target_distribution(
    tabular: TabularModel,
    masks: PositionMasks,
    cfg: SamplerConfig,
) -> dict[tuple[int, ...], float]:
    """Enumerate every mask-allowed sequence and normalize exp(-E/T) over them.

    This is the chain's intended stationary distribution restricted to the
    constraint-satisfying set; only feasible at desk scale.
    """
    v = len(tabular.vocabulary)
    if v**masks.length > ENUMERATION_LIMIT:
        raise TooLargeError(f"{v}^{masks.length} sequences exceed enumeration limit")
    allowed = [list(np.flatnonzero(masks.row(p))) for p in range(masks.length)]
    seqs: list[tuple[int, ...]] = []
    log_w: list[float] = []
    for ids in itertools.product(*allowed):
        seq = TokenSequence(tabular.vocabulary, tuple(int(i) for i in ids))
        energy = pseudo_loglik_energy(tabular, seq)
        seqs.append(seq.ids)
        log_w.append(-energy / cfg.target_temperature)
    w = np.asarray(log_w)
    w = np.exp(w - w.max())
    w /= w.sum()
    return {ids: float(p) for ids, p in zip(seqs, w)}


def total_variation(
    p: Mapping[tuple[int, ...], float] | Sequence[float],
    q: Mapping[tuple[int, ...], float] | Sequence[float],
) -> float:
    """0.5 * sum(|p - q|) over a shared support."""
    if isinstance(p, Mapping) and isinstance(q, Mapping):
        keys = set(p) | set(q)
        return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
    p_arr = np.asarray(p, dtype=np.float64)
    q_arr = np.asarray(q, dtype=np.float64)
    if p_arr.shape != q_arr.shape:
        raise LengthMismatchError(f"distribution shapes differ: {p_arr.shape} vs {q_arr.shape}")
    return float(0.5 * np.abs(p_arr - q_arr).sum())
