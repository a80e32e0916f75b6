"""
Tests for Game Graph module
"""

import pytest
import sys
import os

# Add the parent directory to the path so we can import our modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from automata import constant_moore, identity_moore
from game_errors import PreconditionError, ResourceLimitError, UnknownLetterError
from game_generators import privbit_game, pubcoin_game
from game_graph import (GameBuilder, History, complete_game, enumerate_histories, format_label,
                        information_set, iter_histories, product_with_moore, reachable_positions, require_valid,
                        synchronise, to_dot, validate_game)
from resource_limits import ResourceLimits


class TestFormatLabel:
    """Test suite for position and observation naming."""

    def test_strings_are_kept(self):
        assert format_label('v0') == 'v0'

    def test_structured_labels(self):
        """Tuples, sets, None and booleans get stable names."""
        assert format_label(('c', 0, 0)) == '(c,0,0)'
        assert format_label(frozenset({'b', 'a'})) == '{a,b}'
        assert format_label(None) == '-'
        assert format_label(True) == '1'
        assert format_label(('v', (1, None))) == '(v,(1,-))'


class TestGameBuilder:
    """Test suite for GameBuilder class."""

    def setup_method(self):
        """Setup test fixtures."""
        self.game = pubcoin_game()

    def test_pubcoin_dimensions(self):
        """Test the public coin game sizes."""
        stats = self.game.stats()

        assert stats['players'] == 2
        assert stats['positions'] == 3
        assert stats['profiles'] == 4
        assert stats['moves'] == 16
        assert stats['observations'] == [3, 3]
        assert stats['colors'] == 1

    def test_positions_are_numbered_in_insertion_order(self):
        assert self.game.position_names == ('v0', 'h', 't')
        assert self.game.position('t') == 2
        assert self.game.initial == 0

    def test_unknown_position_name(self):
        with pytest.raises(UnknownLetterError):
            self.game.position('x')

    def test_successors_per_profile(self):
        assert self.game.successors(0, (0, 1)) == (1, 2)
        assert self.game.post[1] == (0,)

    def test_needs_players(self):
        with pytest.raises(PreconditionError):
            GameBuilder(0, [])

    def test_action_alphabet_count(self):
        with pytest.raises(PreconditionError):
            GameBuilder(2, [['a']])

    def test_clashing_names(self):
        """Two labels that render to the same name are rejected."""
        builder = GameBuilder(1, [['a']])
        builder.add_position(1, ['x'])
        with pytest.raises(PreconditionError):
            builder.add_position('1', ['x'])

    def test_readding_a_label_is_a_no_op(self):
        builder = GameBuilder(1, [['a']])
        first = builder.add_position('v', ['x'])
        again = builder.add_position('v', ['y'])

        assert first == again
        assert len(builder) == 1

    def test_fixed_observation_alphabet(self):
        builder = GameBuilder(1, [['a']], observations=[['x']])
        with pytest.raises(UnknownLetterError):
            builder.add_position('v', ['y'])

    def test_color_defaults_to_name(self):
        builder = GameBuilder(1, [['a']])
        builder.add_position('v', ['x'])
        builder.add_moves('v', 'v')
        game = builder.build()

        assert game.color(0) == 'v'

    def test_unknown_action(self):
        builder = GameBuilder(1, [['a']])
        builder.add_position('v', ['x'])
        with pytest.raises(UnknownLetterError):
            builder.add_move('v', (1,), 'v')


class TestValidation:
    """Test suite for structural validation and completion."""

    def setup_method(self):
        """A one-position game whose second action has no move."""
        builder = GameBuilder(1, [['a', 'b']])
        builder.add_position('v0', ['-'], 'ok')
        builder.add_move('v0', (0,), 'v0')
        self.game = builder.build('v0')

    def test_dead_end_is_reported(self):
        diagnostics = validate_game(self.game)

        assert diagnostics == ["dead end at position 'v0' for profile (b)"]

    def test_require_valid_raises(self):
        with pytest.raises(PreconditionError):
            require_valid(self.game)

    def test_completion_adds_self_loops(self):
        completed = require_valid(self.game, complete=True)

        assert len(completed.moves) == 2
        assert completed.successors(0, (1,)) == (0,)
        assert complete_game(completed) is completed

    def test_valid_game_has_no_diagnostics(self):
        assert validate_game(pubcoin_game()) == []


class TestHistories:
    """Test suite for history enumeration and information sets."""

    def test_history_counts(self):
        histories = list(iter_histories(pubcoin_game(), 2))

        assert len(histories) == 5
        assert histories[0] == History((0,))
        assert histories[-1].length == 2

    def test_history_cap(self):
        limits = ResourceLimits(max_histories=3)
        with pytest.raises(ResourceLimitError):
            enumerate_histories(pubcoin_game(), 2, limits)

    def test_history_helpers(self):
        game = pubcoin_game()
        history = History((0, 1, 0))

        assert history.last == 0
        assert history.prefix(1) == History((0, 1))
        assert history.names(game) == ['v0', 'h', 'v0']

    def test_private_bit_information_sets(self):
        """Only player 1 distinguishes the two branches."""
        game = privbit_game()
        history = History((0, 1))

        assert len(information_set(game, 0, history)) == 1
        assert len(information_set(game, 1, history)) == 2

    def test_reachable_positions(self):
        assert reachable_positions(privbit_game()) == [0, 1, 2]


class TestSynchronise:
    """Test suite for products with Moore machines."""

    def test_constant_machine_keeps_the_shape(self):
        game = pubcoin_game()
        machine = constant_moore(game.position_names, 'x')
        product, origins = synchronise(game, machine, expose=0)

        assert product.num_positions == 3
        assert product.position_names[0] == '(v0,0)'
        assert product.obs_name(0, 1) == '(h,x)'
        assert product.obs_name(1, 1) == 'h'
        assert origins == ((0, 0), (1, 0), (2, 0))
        assert len(product.moves) == len(game.moves)

    def test_identity_machine_remembers_the_last_position(self):
        game = privbit_game()
        product, origins = synchronise(game, identity_moore(game.position_names))

        assert product.num_positions == 3
        assert sorted(origins) == [(0, 0), (1, 2), (2, 3)]

    def test_product_without_origins(self):
        game = pubcoin_game()
        machine = constant_moore(game.position_names, 'x')

        assert product_with_moore(game, machine, expose=0) == synchronise(game, machine, expose=0)[0]

    def test_product_cap(self):
        game = pubcoin_game()
        with pytest.raises(ResourceLimitError):
            synchronise(game, identity_moore(game.position_names), limits=ResourceLimits(max_states=2))


class TestDot:
    """Test suite for the graph description output."""

    def test_dot_lists_positions_and_moves(self):
        dot = to_dot(pubcoin_game())

        assert dot.startswith('digraph game {')
        assert '"v0" [shape=doublecircle' in dot
        assert '"v0" -> "h" [label="*"];' in dot
        assert dot.endswith('}\n')
