"""
Tests for Strategy Synthesizer module
"""

import pytest
import sys
import os

# Add the parent directory to the path so we can import our modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from documents import load_json, parse_profile
from game_errors import GameError, NotRecurringError, ObservabilityError
from game_generators import fork2_game, fork_choice_game, permanent_fork_game, privbit_echo_game, pubcoin_game
from game_graph import LOSE, GameBuilder
from strategy_synthesizer import (StrategySynthesizer, extract_distributed_strategy, model_color, profile_product,
                                  realizes_non_hierarchical, require_synthesis_preconditions, solve_perfect_info,
                                  synthesize, synthesize_hierarchical, unfold_quotient, verify_strategy)
from epistemic import EpistemicModel
from winning_conditions import WinningCondition


def avoid_lose(game):
    return WinningCondition.safety(game.color_names, [LOSE])


class TestPreconditions:
    """Test suite for the synthesis preconditions."""

    def test_permanent_fork_is_rejected(self):
        game = permanent_fork_game()
        with pytest.raises(NotRecurringError) as info:
            require_synthesis_preconditions(game, WinningCondition.trivial(game.color_names))
        assert info.value.witness is not None

    def test_hidden_loss_is_rejected(self):
        builder = GameBuilder(2, [['-'], ['-']])
        builder.add_position('v0', ['-', '-'], 'ok')
        builder.add_position('v1', ['0', '∘'], 'ok')
        builder.add_position('v2', ['1', '∘'], LOSE)
        for branch in ('v1', 'v2'):
            builder.add_moves('v0', branch)
            builder.add_moves(branch, branch)
        game = builder.build('v0')

        with pytest.raises(ObservabilityError):
            synthesize(game, avoid_lose(game))

    def test_model_color(self):
        game = fork2_game()
        mixed = EpistemicModel((game.position('ok00'), game.position('bad00')), ((0, 1), (0, 1)))

        assert model_color(EpistemicModel((0,), ((0,), (0,))), game) == 'ok'
        with pytest.raises(ObservabilityError):
            model_color(mixed, game)


class TestArena:
    """Test suite for the knowledge arena and its solution."""

    def setup_method(self):
        """Setup test fixtures."""
        self.game = privbit_echo_game()
        self.condition = avoid_lose(self.game)
        self.arena = unfold_quotient(self.game, self.condition)

    def test_arena_statistics(self):
        stats = self.arena.stats()

        assert stats['vertices'] == len(self.arena.vertices)
        assert stats['classes'] == len(self.arena.registry)
        assert stats['edges'] >= stats['choices'] > 0
        assert self.arena.vertices[0][0] == 0

    def test_parallel_unfolding_gives_the_same_arena(self):
        parallel = unfold_quotient(self.game, self.condition, jobs=2)

        assert parallel.vertices == self.arena.vertices
        assert parallel.outcomes == self.arena.outcomes

    def test_synthesizer_wins(self):
        solution = solve_perfect_info(self.arena)

        assert solution.synthesizer_wins
        assert 0 in solution.winning
        assert set(solution.strategy) <= solution.winning

    def test_losing_arena_has_no_strategy(self):
        game = fork2_game()
        arena = unfold_quotient(game, avoid_lose(game))
        solution = solve_perfect_info(arena)

        assert not solution.synthesizer_wins
        with pytest.raises(GameError):
            extract_distributed_strategy(arena, solution, game)


class TestSynthesis:
    """Test suite for end-to-end synthesis."""

    def test_echo_is_realizable(self):
        game = privbit_echo_game()
        condition = avoid_lose(game)
        result = StrategySynthesizer(game, condition).synthesize()

        assert result.realizable
        assert result.verdict == 'realizable'
        assert result.statistics['profile_states'] == result.profile.total_states()
        assert verify_strategy(game, result.profile, condition).ok
        assert realizes_non_hierarchical(game, result.profile) is None

    def test_fork_is_unrealizable(self):
        """Each player must guess the other's private bit."""
        game = fork2_game()
        result = synthesize(game, avoid_lose(game))

        assert not result.realizable
        assert result.verdict == 'unrealizable'
        assert result.profile is None

    def test_buchi_on_public_game(self):
        game = pubcoin_game()

        assert synthesize(game, WinningCondition.buchi(game.color_names, ['ok'])).realizable

    def test_hierarchical_synthesis_cuts_the_fork(self):
        game = fork2_game()
        result = synthesize_hierarchical(game, WinningCondition.trivial(game.color_names))

        assert not result.realizable
        assert result.statistics['sink_reachable']
        assert result.statistics['restricted_positions'] == 2

    def test_hierarchical_synthesis_on_echo(self):
        game = privbit_echo_game()
        result = synthesize_hierarchical(game, avoid_lose(game))

        assert result.realizable
        assert not result.statistics['sink_reachable']
        assert verify_strategy(game, result.profile, avoid_lose(game)).ok

    def test_hierarchical_synthesis_avoids_the_fork(self):
        """Staying calm keeps the information hierarchical."""
        game = fork_choice_game()
        result = synthesize_hierarchical(game, avoid_lose(game))

        assert result.realizable
        assert result.statistics['sink_reachable']
        assert verify_strategy(game, result.profile, avoid_lose(game)).ok
        assert realizes_non_hierarchical(game, result.profile) is None
        assert result.profile.machines[0].output_after([]) == 'calm'

    def test_forced_fork_is_unrealizable_hierarchically(self):
        game = fork_choice_game(forced=True)
        result = synthesize_hierarchical(game, avoid_lose(game))

        assert not result.realizable
        assert result.profile is None


class TestVerification:
    """Test suite for model-checking given profiles."""

    def setup_method(self):
        """Setup test fixtures."""
        self.game = privbit_echo_game()
        self.condition = avoid_lose(self.game)

    def test_echo_profile_wins(self, fixture_path):
        profile = parse_profile(load_json(fixture_path('echo_profile.json')))
        result = verify_strategy(self.game, profile, self.condition)

        assert result.ok
        assert result.witness is None
        assert result.explored > 0

    def test_wrong_profile_loses(self, fixture_path):
        profile = parse_profile(load_json(fixture_path('echo_wrong_profile.json')))
        result = verify_strategy(self.game, profile, self.condition)

        assert not result.ok
        assert self.game.position('lose') in result.witness.prefix + result.witness.cycle

    def test_product_starts_at_the_initial_position(self, fixture_path):
        profile = parse_profile(load_json(fixture_path('echo_profile.json')))
        digraph, start = profile_product(self.game, profile, self.condition)

        assert start[0] == self.game.initial
        assert start in digraph
        assert all(state[0] != self.game.position('lose') for state in digraph)
