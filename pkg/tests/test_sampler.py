from __future__ import annotations

import itertools

import numpy as np
import pytest

from versecraft import (
    ALL_MASK,
    ChainState,
    ConstraintSet,
    Lipogram,
    Pin,
    SamplerConfig,
    TabularModel,
    TokenSequence,
    acceptance_probability,
    compile_masks,
    exact_target_distribution,
    init_chain,
    propose,
    pseudo_loglik_energy,
    run,
    satisfies,
    step,
    total_variation,
)
from versecraft.errors import LengthMismatchError, NoFreePositionsError, TooLargeError
from versecraft.sampler import proposal_distribution

from conftest import random_constraint_set, tabular_from_dict
from oracles import fixed_random_joint, oracle_target, spike_joint

# Frozen from oracles.oracle_acceptance on fixed_random_joint(3, 2)
RAND_ACCEPT_01_POS1_TO2 = 0.9702083564238141
RAND_ACCEPT_22_POS0_TO1 = 1.0

# Frozen from oracles.oracle_target(spike_joint(4, 3, (0, 1, 2)), 3, 4)
SPIKE_PI_SPIKE = 0.538150444799371
SPIKE_PI_NEIGHBOR = 5.9949319210881196e-05  # (3, 1, 2)
SPIKE_PI_FAR = 0.008542777987550581  # (3, 3, 3)


def chain_state(model, ids, seed=0):
    seq = TokenSequence(model.vocabulary, ids)
    return ChainState(seq, pseudo_loglik_energy(model, seq), 0, np.random.default_rng(seed))


def open_masks(vocab, length):
    return compile_masks(ConstraintSet(length), vocab)


class TestInitChain:
    def test_all_mask_with_pin(self, wordy_vocab):
        model = TabularModel.uniform(wordy_vocab, 3)
        cs = ConstraintSet(3, (Pin(0, wordy_vocab.id_of("moon")),))
        masks = compile_masks(cs, wordy_vocab)
        state = init_chain(ALL_MASK, masks, model, SamplerConfig(rng_seed=5))
        assert state.seq.ids[0] == wordy_vocab.id_of("moon")
        assert satisfies(state.seq, cs)
        assert state.step == 0

    def test_satisfying_seed_unchanged(self, wordy_vocab):
        model = TabularModel.uniform(wordy_vocab, 3)
        cs = ConstraintSet(3, (Lipogram(frozenset("a")),))
        masks = compile_masks(cs, wordy_vocab)
        seed = TokenSequence(wordy_vocab, tuple(wordy_vocab.id_of(s) for s in ["moon", "mist", "glow"]))
        state = init_chain(seed, masks, model, SamplerConfig())
        assert state.seq.ids == seed.ids
        assert state.energy == pytest.approx(pseudo_loglik_energy(model, seed), abs=1e-12)

    def test_violating_position_resampled_others_kept(self, wordy_vocab):
        model = TabularModel.uniform(wordy_vocab, 3)
        cs = ConstraintSet(3, (Lipogram(frozenset("a"), frozenset({2})),))
        masks = compile_masks(cs, wordy_vocab)
        rain = wordy_vocab.id_of("rain")
        seed = TokenSequence(wordy_vocab, (rain, rain, rain))  # violates only at 2
        state = init_chain(seed, masks, model, SamplerConfig(rng_seed=1))
        assert state.seq.ids[0] == rain and state.seq.ids[1] == rain
        assert state.seq.ids[2] != rain
        assert satisfies(state.seq, cs)

    def test_mask_token_seed_positions_repaired(self):
        from versecraft import build_vocabulary

        vocab = build_vocabulary(["sun", "moon", "<mask>"], mask_surface="<mask>")
        model = TabularModel.uniform(vocab, 2)
        masks = open_masks(vocab, 2)
        seed = TokenSequence(vocab, (vocab.mask_token_id, vocab.id_of("sun")))
        state = init_chain(seed, masks, model, SamplerConfig(rng_seed=2))
        assert state.seq.ids[1] == vocab.id_of("sun")
        assert state.seq.ids[0] != vocab.mask_token_id

    def test_repair_property_random_cases(self, wordy_vocab):
        model = TabularModel.uniform(wordy_vocab, 4)
        rng = np.random.default_rng(42)
        for _ in range(100):
            cs = random_constraint_set(rng, wordy_vocab, 4)
            masks = compile_masks(cs, wordy_vocab)
            seed = TokenSequence(wordy_vocab, tuple(int(i) for i in rng.integers(0, 8, size=4)))
            state = init_chain(seed, masks, model, SamplerConfig(rng_seed=int(rng.integers(2**32))))
            assert satisfies(state.seq, cs)
            for p in range(4):
                if p not in masks.pinned and masks.allows(p, seed.ids[p]):
                    assert state.seq.ids[p] == seed.ids[p]

    def test_seed_length_mismatch(self, wordy_vocab):
        model = TabularModel.uniform(wordy_vocab, 3)
        masks = open_masks(wordy_vocab, 3)
        with pytest.raises(LengthMismatchError):
            init_chain(TokenSequence(wordy_vocab, (0, 1)), masks, model, SamplerConfig())


class TestPropose:
    def test_all_pinned_is_reported(self, trio_vocab):
        model = TabularModel.uniform(trio_vocab, 2)
        cs = ConstraintSet(2, (Pin(0, 0), Pin(1, 1)))
        masks = compile_masks(cs, trio_vocab)
        state = chain_state(model, (0, 1))
        with pytest.raises(NoFreePositionsError):
            propose(state, masks, model, SamplerConfig(), state.rng)

    def test_uniform_proposal_probabilities(self, trio_vocab):
        model = TabularModel.uniform(trio_vocab, 2)
        masks = open_masks(trio_vocab, 2)
        state = chain_state(model, (0, 1))
        position, proposed, q_fwd, q_rev = propose(state, masks, model, SamplerConfig(), state.rng)
        assert q_fwd == pytest.approx(1 / 3, abs=1e-15)
        assert q_rev == pytest.approx(1 / 3, abs=1e-15)

    def test_proposal_support_equals_mask(self, wordy_vocab):
        model = TabularModel.uniform(wordy_vocab, 3)
        rng = np.random.default_rng(9)
        for _ in range(40):
            cs = random_constraint_set(rng, wordy_vocab, 3)
            masks = compile_masks(cs, wordy_vocab)
            ids = tuple(int(np.flatnonzero(masks.row(p))[0]) for p in range(3))
            seq = TokenSequence(wordy_vocab, ids)
            for p in range(3):
                dist = proposal_distribution(model, seq, p, masks)
                np.testing.assert_array_equal(dist > 0, masks.row(p))

    def test_proposal_dist_matches_tempered_conditional(self, trio_vocab):
        joint = fixed_random_joint(3, 2)
        model = tabular_from_dict(trio_vocab, 2, joint)
        masks = open_masks(trio_vocab, 2)
        from oracles import oracle_proposal

        for ids in itertools.product(range(3), repeat=2):
            seq = TokenSequence(trio_vocab, ids)
            for pos in range(2):
                for temp in (1.0, 0.7, 2.5):
                    got = proposal_distribution(model, seq, pos, masks, temp)
                    want = oracle_proposal(joint, ids, pos, 3, temperature=temp)
                    np.testing.assert_allclose(got, want, atol=1e-12)


class TestAcceptance:
    def test_self_proposal_is_certain(self, trio_vocab):
        model = TabularModel.uniform(trio_vocab, 2)
        state = chain_state(model, (1, 2))
        assert acceptance_probability(state, 0, 1, 0.5, 0.5, model, SamplerConfig()) == 1.0

    def test_uniform_always_accepts(self, trio_vocab):
        model = TabularModel.uniform(trio_vocab, 2)
        masks = open_masks(trio_vocab, 2)
        state = chain_state(model, (0, 0))
        for _ in range(20):
            pos, tok, q_f, q_r = propose(state, masks, model, SamplerConfig(), state.rng)
            assert acceptance_probability(state, pos, tok, q_f, q_r, model, SamplerConfig()) == 1.0

    def test_frozen_values_on_random_joint(self, trio_vocab):
        joint = fixed_random_joint(3, 2)
        model = tabular_from_dict(trio_vocab, 2, joint)
        masks = open_masks(trio_vocab, 2)
        cfg = SamplerConfig()

        state = chain_state(model, (0, 1))
        dist = proposal_distribution(model, state.seq, 1, masks)
        alpha = acceptance_probability(state, 1, 2, float(dist[2]), float(dist[1]), model, cfg)
        assert alpha == pytest.approx(RAND_ACCEPT_01_POS1_TO2, abs=1e-12)

        state = chain_state(model, (2, 2))
        dist = proposal_distribution(model, state.seq, 0, masks)
        alpha = acceptance_probability(state, 0, 1, float(dist[1]), float(dist[2]), model, cfg)
        assert alpha == pytest.approx(RAND_ACCEPT_22_POS0_TO1, abs=1e-12)


class TestStep:
    def test_accept_changes_exactly_one_position(self, trio_vocab):
        joint = fixed_random_joint(3, 2)
        model = tabular_from_dict(trio_vocab, 2, joint)
        masks = open_masks(trio_vocab, 2)
        state = chain_state(model, (0, 0), seed=3)
        for _ in range(50):
            new_state, record = step(state, masks, model, SamplerConfig())
            if record.accepted:
                assert new_state.seq.ids[record.position] == record.proposed_token
                diffs = [
                    p for p in range(2) if new_state.seq.ids[p] != state.seq.ids[p]
                ]
                assert diffs == [] or diffs == [record.position]
            else:
                assert new_state.seq.ids == state.seq.ids
            assert new_state.step == state.step + 1
            assert 0.0 <= record.acceptance <= 1.0
            state = new_state

    def test_energy_cache_stays_consistent(self, wordy_vocab):
        joint = fixed_random_joint(8, 2)
        model = tabular_from_dict(wordy_vocab, 2, joint)
        masks = open_masks(wordy_vocab, 2)
        state = init_chain(ALL_MASK, masks, model, SamplerConfig(rng_seed=12))
        for _ in range(100):
            state, _ = step(state, masks, model, SamplerConfig())
        assert state.energy == pytest.approx(pseudo_loglik_energy(model, state.seq), abs=1e-9)

    def test_fixed_seed_reproduces_records(self, quad_vocab):
        model = tabular_from_dict(quad_vocab, 3, spike_joint(4, 3, (0, 1, 2)))
        masks = open_masks(quad_vocab, 3)
        cfg = SamplerConfig(rng_seed=77)

        def record_stream():
            state = init_chain(ALL_MASK, masks, model, cfg)
            records = []
            for _ in range(60):
                state, rec = step(state, masks, model, cfg)
                records.append(rec)
            return records

        assert record_stream() == record_stream()


class TestRun:
    def test_emission_schedule(self, trio_vocab):
        model = TabularModel.uniform(trio_vocab, 2)
        masks = open_masks(trio_vocab, 2)
        cfg = SamplerConfig(burn_in=2, thinning=3, max_steps=8, rng_seed=1)
        state = init_chain(ALL_MASK, masks, model, cfg)
        assert [e.step for e in run(state, masks, model, cfg)] == [2, 5, 8]

    def test_zero_steps_no_emissions(self, trio_vocab):
        model = TabularModel.uniform(trio_vocab, 2)
        masks = open_masks(trio_vocab, 2)
        cfg = SamplerConfig(max_steps=0)
        state = init_chain(ALL_MASK, masks, model, cfg)
        assert list(run(state, masks, model, cfg)) == []

    def test_every_emission_satisfies_constraints(self, wordy_vocab):
        model = TabularModel.uniform(wordy_vocab, 3)
        rng = np.random.default_rng(23)
        for _ in range(30):
            cs = random_constraint_set(rng, wordy_vocab, 3)
            masks = compile_masks(cs, wordy_vocab)
            cfg = SamplerConfig(
                burn_in=int(rng.integers(0, 4)),
                thinning=int(rng.integers(1, 4)),
                max_steps=30,
                rng_seed=int(rng.integers(2**32)),
            )
            state = init_chain(ALL_MASK, masks, model, cfg)
            emissions = list(run(state, masks, model, cfg))
            assert emissions, "expected at least one emission"
            for e in emissions:
                assert satisfies(e.seq, cs)

    def test_pinned_positions_never_move(self, wordy_vocab):
        model = TabularModel.uniform(wordy_vocab, 4)
        pin_tok = wordy_vocab.id_of("ember")
        cs = ConstraintSet(4, (Pin(1, pin_tok),))
        masks = compile_masks(cs, wordy_vocab)
        cfg = SamplerConfig(max_steps=200, rng_seed=4)
        state = init_chain(ALL_MASK, masks, model, cfg)
        for e in run(state, masks, model, cfg):
            assert e.seq.ids[1] == pin_tok

    def test_determinism_of_emission_stream(self, quad_vocab):
        model = tabular_from_dict(quad_vocab, 3, spike_joint(4, 3, (0, 1, 2)))
        masks = open_masks(quad_vocab, 3)
        cfg = SamplerConfig(burn_in=5, thinning=2, max_steps=101, rng_seed=99)

        def stream():
            state = init_chain(ALL_MASK, masks, model, cfg)
            return [(e.step, e.seq.ids, e.energy, e.accept_rate) for e in run(state, masks, model, cfg)]

        assert stream() == stream()


class TestExactTarget:
    def test_uniform_no_constraints(self, trio_vocab):
        model = TabularModel.uniform(trio_vocab, 2)
        masks = open_masks(trio_vocab, 2)
        dist = exact_target_distribution(model, masks, SamplerConfig())
        assert len(dist) == 9
        for p in dist.values():
            assert p == pytest.approx(1 / 9, abs=1e-12)

    def test_pin_restricts_support(self, trio_vocab):
        model = TabularModel.uniform(trio_vocab, 2)
        masks = compile_masks(ConstraintSet(2, (Pin(0, 2),)), trio_vocab)
        dist = exact_target_distribution(model, masks, SamplerConfig())
        assert set(dist) == {(2, 0), (2, 1), (2, 2)}

    def test_spike_matches_oracle_and_frozen_values(self, quad_vocab):
        joint = spike_joint(4, 3, (0, 1, 2))
        model = tabular_from_dict(quad_vocab, 3, joint)
        masks = open_masks(quad_vocab, 3)
        dist = exact_target_distribution(model, masks, SamplerConfig())
        assert dist[(0, 1, 2)] == pytest.approx(SPIKE_PI_SPIKE, abs=1e-12)
        assert dist[(3, 1, 2)] == pytest.approx(SPIKE_PI_NEIGHBOR, abs=1e-15)
        assert dist[(3, 3, 3)] == pytest.approx(SPIKE_PI_FAR, abs=1e-12)
        want = oracle_target(joint, 3, 4)
        assert total_variation(dist, want) < 1e-12

    def test_sums_to_one(self, quad_vocab):
        model = tabular_from_dict(quad_vocab, 3, spike_joint(4, 3, (0, 1, 2)))
        masks = compile_masks(ConstraintSet(3, (Pin(0, 0),)), quad_vocab)
        dist = exact_target_distribution(model, masks, SamplerConfig())
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)

    def test_too_large(self, quad_vocab):
        model = TabularModel.uniform(quad_vocab, 3)
        big = compile_masks(ConstraintSet(11), quad_vocab)  # 4^11 > 10^6
        with pytest.raises(TooLargeError):
            exact_target_distribution(model, big, SamplerConfig())


class TestTotalVariation:
    def test_identical(self):
        assert total_variation({(0,): 0.5, (1,): 0.5}, {(0,): 0.5, (1,): 0.5}) == 0.0

    def test_disjoint_point_masses(self):
        assert total_variation({(0,): 1.0}, {(1,): 1.0}) == 1.0

    def test_array_form_and_mismatch(self):
        assert total_variation([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.25)
        with pytest.raises(LengthMismatchError):
            total_variation([0.5, 0.5], [1.0])


def production_kernel(model, masks, cfg, x, x_new):
    """Analytic one-step transition density from production pieces."""
    free = masks.free_positions()
    diff = [p for p in range(len(x)) if x[p] != x_new[p]]
    assert len(diff) == 1
    position = diff[0]
    seq = TokenSequence(model.vocabulary, x)
    dist = proposal_distribution(model, seq, position, masks, cfg.proposal_temperature)
    state = ChainState(seq, pseudo_loglik_energy(model, seq), 0, np.random.default_rng(0))
    alpha = acceptance_probability(
        state, position, x_new[position], float(dist[x_new[position]]),
        float(dist[x[position]]), model, cfg,
    )
    return (1.0 / len(free)) * float(dist[x_new[position]]) * alpha


@pytest.mark.parametrize(
    "cfg",
    [
        SamplerConfig(),
        SamplerConfig(proposal_temperature=0.7, target_temperature=1.5),
    ],
)
def test_detailed_balance_with_constraints(quad_vocab, cfg):
    """pi(x) K(x->x') == pi(x') K(x'->x) for every single-position pair."""
    model = tabular_from_dict(quad_vocab, 3, spike_joint(4, 3, (0, 1, 2)))
    cs = ConstraintSet(3, (Pin(0, 0), Lipogram(frozenset("w"), frozenset({1}))))
    masks = compile_masks(cs, quad_vocab)
    pi = exact_target_distribution(model, masks, cfg)
    states = sorted(pi)
    checked = 0
    for x, x_new in itertools.permutations(states, 2):
        diff = [p for p in range(3) if x[p] != x_new[p]]
        if len(diff) != 1 or diff[0] in masks.pinned:
            continue
        lhs = pi[x] * production_kernel(model, masks, cfg, x, x_new)
        rhs = pi[x_new] * production_kernel(model, masks, cfg, x_new, x)
        assert abs(lhs - rhs) <= 1e-12
        checked += 1
    assert checked > 0
