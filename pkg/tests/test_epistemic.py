"""
Tests for Epistemic module
"""

import pytest
import sys
import os

# Add the parent directory to the path so we can import our modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from epistemic import (EpistemicModel, ModelRegistry, assignments, count_assignments, epistemic_update,
                       find_homomorphism, homomorphic_equiv, initial_model, normalize, profile_at,
                       split_components, update_structure)
from game_errors import PreconditionError
from game_generators import fork2_game, privbit_game, pubcoin_game
from game_graph import GameBuilder


class TestEpistemicModel:
    """Test suite for EpistemicModel class."""

    def setup_method(self):
        """Setup test fixtures."""
        self.model = EpistemicModel((1, 2, 3), ((0, 0, 1), (0, 1, 1)))

    def test_shape(self):
        assert self.model.size == 3
        assert self.model.players == 2
        assert self.model.class_count == (2, 2)
        assert self.model.position_set == frozenset({1, 2, 3})

    def test_relations(self):
        assert self.model.related(0, 0, 1)
        assert not self.model.related(1, 0, 1)
        assert self.model.members(1, 1) == [1, 2]

    def test_crossing_relations_are_not_a_chain(self):
        assert not self.model.is_chain()
        assert EpistemicModel((1, 2), ((0, 1), (0, 0))).is_chain()

    def test_describe(self):
        game = pubcoin_game()
        description = EpistemicModel((1, 2), ((0, 1), (0, 0))).describe(game)

        assert description == {'nodes': ['h', 't'], 'classes': [[0, 1], [0, 0]]}

    def test_initial_model(self):
        model = initial_model(fork2_game())

        assert model.positions == (0,)
        assert model.classes == ((0,), (0,))


class TestNormalize:
    """Test suite for model normalisation."""

    def test_duplicates_collapse(self):
        model, mapping = normalize([2, 1, 2], [[0, 1, 0]])

        assert model.positions == (1, 2)
        assert model.classes == ((0, 1),)
        assert mapping == (1, 0, 1)

    def test_classes_are_renumbered(self):
        model, mapping = normalize([4, 5], [[7, 3], [2, 2]])

        assert model.classes == ((0, 1), (0, 0))
        assert mapping == (0, 1)


class TestUpdate:
    """Test suite for assignments and the epistemic update."""

    def test_assignment_count(self):
        game = fork2_game()
        model = initial_model(game)

        assert count_assignments(model, game) == 4
        assert len(list(assignments(model, game))) == 4

    def test_profile_at(self):
        model = EpistemicModel((1, 2), ((0, 1), (0, 0)))

        assert profile_at(model, ((1, 0), (1,)), 0) == (1, 1)
        assert profile_at(model, ((1, 0), (1,)), 1) == (0, 1)

    def test_private_bit_keeps_one_component(self):
        """Player 2 cannot tell the branches apart, which links them."""
        game = privbit_game()
        structure = update_structure(initial_model(game), ((0,), (0,)), game)

        assert structure.positions == (1, 2)
        assert structure.parents == (0, 0)
        assert structure.classes == ((0, 1), (0, 0))
        assert structure.components == 1

        models = epistemic_update(initial_model(game), ((0,), (0,)), game)
        assert len(models) == 1
        assert models[0].is_chain()

    def test_fork_is_connected_but_not_a_chain(self):
        game = fork2_game()
        models = epistemic_update(initial_model(game), ((0,), (0,)), game)

        assert len(models) == 1
        model = models[0]
        assert [game.position_names[v] for v in model.positions] == ['f00', 'f01', 'f10', 'f11']
        assert model.classes == ((0, 0, 1, 1), (0, 1, 0, 1))
        assert not model.is_chain()

    def test_public_coin_splits(self):
        """Both players see the coin, so each side is its own component."""
        game = pubcoin_game()
        components = split_components(update_structure(initial_model(game), ((0,), (0,)), game))

        assert len(components) == 2
        assert [model.positions for model, _, _ in components] == [(1,), (2,)]
        for model, nodes, to_model in components:
            assert len(nodes) == 1
            assert to_model == (0,)

    def test_dead_end(self):
        builder = GameBuilder(1, [['a', 'b']])
        builder.add_position('v0', ['-'], 'ok')
        builder.add_move('v0', (0,), 'v0')
        game = builder.build('v0')

        with pytest.raises(PreconditionError):
            update_structure(initial_model(game), ((1,),), game)


class TestHomomorphisms:
    """Test suite for homomorphisms and the model registry."""

    def setup_method(self):
        """A single node, and two copies of it told apart by the only player."""
        self.single = EpistemicModel((1,), ((0,),))
        self.copies = EpistemicModel((1, 1), ((0, 1),))

    def test_copies_are_equivalent(self):
        assert find_homomorphism(self.single, self.copies) in ((0,), (1,))
        assert find_homomorphism(self.copies, self.single) == (0, 0)
        assert homomorphic_equiv(self.single, self.copies)

    def test_positions_must_match(self):
        other = EpistemicModel((2,), ((0,),))

        assert find_homomorphism(self.single, other) is None
        assert not homomorphic_equiv(self.single, other)

    def test_classes_must_be_preserved(self):
        """Merged nodes cannot be split across classes."""
        merged = EpistemicModel((1, 2), ((0, 0),))
        split = EpistemicModel((1, 2), ((0, 1),))

        assert find_homomorphism(merged, split) is None
        assert find_homomorphism(split, merged) == (0, 1)

    def test_registry_reuses_representatives(self):
        registry = ModelRegistry()

        first = registry.register(self.single)
        assert first == (0, (0,), True)
        again = registry.register(self.single)
        assert again == (0, (0,), False)
        model_id, homomorphism, created = registry.register(self.copies)
        assert (model_id, homomorphism, created) == (0, (0, 0), False)

        assert len(registry) == 1
        assert registry.model(0) is self.single
        assert registry.stats() == {'classes': 1, 'hits': 2, 'misses': 1}

    def test_registry_separates_classes(self):
        registry = ModelRegistry()
        registry.register(self.single)
        model_id, _, created = registry.register(EpistemicModel((2,), ((0,),)))

        assert model_id == 1
        assert created
        assert len(registry) == 2
