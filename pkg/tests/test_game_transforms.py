"""
Tests for Game Transforms module
"""

import pytest
import sys
import os

import numpy as np

# Add the parent directory to the path so we can import our modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from automata import StrategyProfile, constant_moore
from game_errors import AlphabetMismatchError, HierarchyViolationError, NonFunctionalError
from game_generators import fork2_game, privbit_echo_game, privbit_game, pubcoin_game, random_game, swap_game
from game_graph import LOSE, SKIP, validate_game
from game_transforms import (SINK, annotate_ranks, cross_free_with_origins, find_crossing, is_positionally_hierarchical,
                             knowledge_signal, lift_condition, make_cross_free, positional_violations, rank_signal,
                             redistribute_strategy, relative_order_signal, restrict_to_hierarchical,
                             restrict_with_origins, shadow_game,
                             shadow_condition, shadow_information_report, to_hierarchical_observation,
                             translator_moore)
from hierarchy_analyzer import OrderWitness, check_dynamic, check_static
from strategy_synthesizer import synthesize, verify_strategy
from winning_conditions import WinningCondition


class TestHierarchicalObservation:
    """Test suite for translators and the hierarchical-observation transform."""

    def setup_method(self):
        """Setup test fixtures."""
        self.game = privbit_game()

    def test_translator_outputs_the_less_informed_view(self):
        machine = translator_moore(self.game, 0, 1)

        assert machine.output_after([]) == '-'
        assert machine.output_after(['0']) == '∘'
        assert machine.output_after(['1', '1']) == '∘'

    def test_translator_needs_a_function(self):
        with pytest.raises(NonFunctionalError) as info:
            translator_moore(self.game, 1, 0)
        assert info.value.counterexample is not None

    def test_positional_violations(self):
        assert positional_violations(self.game, [0, 1]) == []
        assert len(positional_violations(self.game, [1, 0])) == 1

    def test_hierarchical_observation(self):
        """The more informed player sees the other's observation at each position."""
        result = to_hierarchical_observation(self.game, OrderWitness((0, 1)))

        assert result.num_positions == 3
        assert is_positionally_hierarchical(result, [0, 1])
        assert result.obs_name(0, 1) == '(0,(∘))'
        assert result.obs_name(1, 1) == '∘'
        assert check_static(result).ok

    def test_order_without_pairs_is_unchanged(self):
        game = pubcoin_game()

        assert to_hierarchical_observation(game, OrderWitness((0,))) is game


class TestSignals:
    """Test suite for rank, relative-order and knowledge signals."""

    def test_rank_signal_on_public_information(self):
        """Equally informed players are ranked by index."""
        game = pubcoin_game()

        assert rank_signal(game, 0).output_after(['h']) == 1
        assert rank_signal(game, 1).output_after(['h', 'v0']) == 2

    def test_signals_need_dynamic_hierarchy(self):
        with pytest.raises(HierarchyViolationError):
            relative_order_signal(fork2_game(), 0, 1)
        with pytest.raises(HierarchyViolationError):
            annotate_ranks(fork2_game())

    def test_relative_order_on_swap(self):
        game = swap_game()
        signal = relative_order_signal(game, 1, 0)

        assert signal.output_after(['v1']) == 0
        assert signal.output_after(['v1', 'v3']) == 1

    def test_knowledge_signal(self):
        game = privbit_game()

        assert knowledge_signal(game, 1).output_after(['v1']) == frozenset({1, 2})
        assert knowledge_signal(game, 0).output_after(['v1']) == frozenset({1})


class TestRankAnnotation:
    """Test suite for rank annotation and crossings."""

    def setup_method(self):
        """Setup test fixtures."""
        self.game = swap_game()
        self.annotated = annotate_ranks(self.game)

    def ranks_at(self, name):
        target = self.game.position(name)
        return {self.annotated.ranks[p] for p, v in enumerate(self.annotated.origins) if v == target}

    def test_order_flips_between_rounds(self):
        assert self.ranks_at('v1') == {(1, 2)}
        assert self.ranks_at('v3') == {(2, 1)}

    def test_attributes(self):
        p = self.annotated.origins.index(self.game.position('v3'))
        attributes = self.annotated.attributes(p)

        assert attributes['rank'] == [2, 1]
        assert attributes['precedes'] == [[1, 0], [1, 1]]
        assert self.annotated.order_at(p) == (1, 0)

    def test_crossing_is_found(self):
        crossing = find_crossing(self.annotated)

        assert crossing is not None
        assert crossing.players == (0, 1)

    def test_public_game_has_no_crossing(self):
        assert find_crossing(annotate_ranks(pubcoin_game())) is None

    def test_cross_free_intermediaries(self):
        game, origins = cross_free_with_origins(self.annotated)
        intermediaries = [p for p, origin in enumerate(origins) if origin is None]

        assert intermediaries
        assert validate_game(game) == []
        for p in intermediaries:
            assert game.color(p) == SKIP
            assert len(game.post[p]) == 1

    def test_make_cross_free(self):
        game = make_cross_free(self.annotated)

        assert game == cross_free_with_origins(self.annotated)[0]
        assert game.num_positions > self.annotated.game.num_positions

    def test_lifted_condition_ignores_intermediaries(self):
        condition = lift_condition(WinningCondition.safety(['ok', LOSE], [LOSE]))

        assert condition.accepts_play(['ok', SKIP], [SKIP, 'ok'])


class TestShadowGame:
    """Test suite for the shadow game and strategy redistribution."""

    def test_public_game_shadow(self):
        shadow = shadow_game(pubcoin_game())

        assert shadow.sink is None
        assert not shadow.cross_free
        assert shadow.game.num_positions == 3
        assert shadow.ranks(1) == (1, 2)
        assert shadow.game.obs_name(0, 1) == '(1,h)'

    def test_unused_profiles_lead_to_the_sink(self):
        shadow = shadow_game(privbit_echo_game())

        assert shadow.sink is not None
        assert shadow.game.position_names[shadow.sink] == SINK
        assert shadow.game.color(shadow.sink) == LOSE
        assert shadow.origin[shadow.sink] is None
        assert shadow.game.action_names[0] == ('0', '1', 'c', 'd')

    def test_swap_needs_lookahead(self):
        shadow = shadow_game(swap_game())

        assert shadow.cross_free
        assert validate_game(shadow.game) == []
        assert find_crossing(shadow.annotated) is None

    def test_swap_shadow_is_statically_hierarchical(self):
        game = swap_game()
        shadow = shadow_game(game)
        result = check_static(shadow.game)

        assert not check_static(game).ok
        assert result.ok
        assert result.order.order == (0, 1)
        assert shadow_information_report(game, 5, shadow)['equal']

    def test_shadow_of_random_games(self):
        checked = 0
        for seed in range(40):
            game = random_game(np.random.default_rng(seed), players=2, positions=4)
            if not check_dynamic(game).ok:
                continue
            shadow = shadow_game(game)
            checked += 1

            assert check_static(shadow.game).ok, f"seed {seed}"
            assert shadow_information_report(game, 3, shadow)['equal'], f"seed {seed}"
        assert checked > 0

    def test_information_report(self):
        report = shadow_information_report(pubcoin_game(), 3)

        assert report['equal']
        assert report['mismatches'] == [0, 0]
        assert report['first_mismatch'] is None
        assert report['histories'] == 7

    def test_shadow_condition(self):
        condition = shadow_condition(WinningCondition.trivial(['ok']))

        assert not condition.accepts_play(['ok'], [LOSE])
        assert condition.accepts_play(['ok', SKIP], ['ok'])

    def test_redistribution_follows_the_rank(self):
        game = pubcoin_game()
        shadow = shadow_game(game)
        board = shadow.game
        sigma = StrategyProfile((constant_moore(board.observation_names[0], 'b'),
                                 constant_moore(board.observation_names[1], 'a')))
        profile = redistribute_strategy(sigma, game, shadow)

        assert profile.machines[0].output_after(['h']) == 'b'
        assert profile.machines[1].output_after(['t', '-']) == 'a'

    @pytest.mark.parametrize('make_game', [privbit_echo_game, swap_game])
    def test_shadow_profile_wins_the_source_game(self, make_game):
        game = make_game()
        condition = WinningCondition.trivial(game.color_names).excluding(LOSE)
        shadow = shadow_game(game)
        result = synthesize(shadow.game, shadow_condition(condition))

        assert result.realizable
        profile = redistribute_strategy(result.profile, game, shadow)
        assert verify_strategy(game, profile, condition).ok

    def test_redistribution_falls_back_to_legal_actions(self):
        game = privbit_echo_game()
        shadow = shadow_game(game)
        board = shadow.game
        sigma = StrategyProfile((constant_moore(board.observation_names[0], 'c'),
                                 constant_moore(board.observation_names[1], '0')))
        profile = redistribute_strategy(sigma, game, shadow)

        assert profile.machines[0].output_after([]) == '0'
        assert profile.machines[1].output_after([]) == 'c'

    def test_redistribution_checks_the_player_count(self):
        game = pubcoin_game()
        shadow = shadow_game(game)
        sigma = StrategyProfile((constant_moore(shadow.game.observation_names[0], 'a'),))
        with pytest.raises(AlphabetMismatchError):
            redistribute_strategy(sigma, game, shadow)


class TestRestriction:
    """Test suite for the restriction to hierarchical histories."""

    def test_fork_is_cut_off(self):
        """Every move out of v0 realises a non-hierarchical history."""
        game = fork2_game()
        restricted = restrict_with_origins(game, WinningCondition.safety(game.color_names, [LOSE]))

        assert restricted.game.num_positions == 2
        assert restricted.origins == (0, None)
        assert restricted.game.color(restricted.sink) == LOSE
        assert restricted.game.obs_name(0, restricted.sink) == SINK
        assert not restricted.condition.accepts_play(['ok'], [LOSE])

    def test_restricted_game_and_condition(self):
        game = fork2_game()
        restricted, condition = restrict_to_hierarchical(game, WinningCondition.safety(game.color_names, [LOSE]))

        assert restricted.num_positions == 2
        assert restricted.obs_name(0, 1) == SINK
        assert not condition.accepts_play(['ok'], [LOSE])

    def test_restriction_is_dynamically_hierarchical(self):
        game = fork2_game()
        restricted, _ = restrict_to_hierarchical(game, WinningCondition.trivial(game.color_names))

        assert not check_dynamic(game).ok
        assert check_dynamic(restricted).ok

    def test_restriction_of_random_games(self):
        for seed in range(30):
            game = random_game(np.random.default_rng(seed), players=2, positions=4)
            restricted, _ = restrict_to_hierarchical(game, WinningCondition.trivial(game.color_names))

            assert check_dynamic(restricted).ok, f"seed {seed}"

    def test_public_game_needs_no_sink(self):
        game = pubcoin_game()
        restricted = restrict_with_origins(game, WinningCondition.trivial(game.color_names))

        assert restricted.sink is None
        assert set(restricted.origins) == {0, 1, 2}
        assert restricted.condition.accepts_play(['ok'], ['ok'])
