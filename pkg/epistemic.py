"""
Epistemic Models
Finite Kripke structures over same-length histories: each node carries a game
position and, per player, an indistinguishability class. Provides the update
by an action assignment, the split into connected components, homomorphic
equivalence, and a thread-safe registry of canonical representatives.
"""

import itertools
import logging
import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from game_errors import PreconditionError
from game_graph import GameGraph

logger = logging.getLogger('Epistemic')

Assignment = Tuple[Tuple[int, ...], ...]


def _renumber(values: Sequence) -> Tuple[int, ...]:
    mapping: Dict = {}
    return tuple(mapping.setdefault(value, len(mapping)) for value in values)


@dataclass(frozen=True)
class EpistemicModel:
    """
    Nodes 0..k-1 with positions[k] (the predicate Q_v) and classes[i][k], the
    ∼^i-class of node k for player i. Two nodes are i-indistinguishable iff
    their class ids for i coincide.
    """

    positions: Tuple[int, ...]
    classes: Tuple[Tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.positions)

    @property
    def players(self) -> int:
        return len(self.classes)

    @cached_property
    def class_count(self) -> Tuple[int, ...]:
        return tuple(max(row) + 1 if row else 0 for row in self.classes)

    @cached_property
    def position_set(self) -> frozenset:
        return frozenset(self.positions)

    def related(self, player: int, k: int, l: int) -> bool:
        return self.classes[player][k] == self.classes[player][l]

    def members(self, player: int, cls: int) -> List[int]:
        return [k for k, c in enumerate(self.classes[player]) if c == cls]

    def is_chain(self) -> bool:
        """Whether the players' relations are totally ordered by inclusion."""
        def refines(i: int, j: int) -> bool:
            image: Dict[int, int] = {}
            return all(image.setdefault(a, b) == b for a, b in zip(self.classes[i], self.classes[j]))
        return all(refines(i, j) or refines(j, i) for i, j in itertools.combinations(range(self.players), 2))

    def describe(self, game: GameGraph) -> Dict:
        return {'nodes': [game.position_names[v] for v in self.positions],
                'classes': [list(row) for row in self.classes]}


def normalize(positions: Sequence[int], classes: Sequence[Sequence[int]]) -> Tuple[EpistemicModel, Tuple[int, ...]]:
    """
    Collapse nodes that agree on position and on every class, order nodes by
    position (stable) and renumber classes by first appearance.

    Returns:
        The model and, for every input node, its node in the model
    """
    keys = [(positions[k],) + tuple(row[k] for row in classes) for k in range(len(positions))]
    distinct = list(dict.fromkeys(keys))
    distinct.sort(key=lambda key: key[0])
    index = {key: k for k, key in enumerate(distinct)}
    players = len(classes)
    model = EpistemicModel(tuple(key[0] for key in distinct),
                           tuple(_renumber([key[1 + i] for key in distinct]) for i in range(players)))
    return model, tuple(index[key] for key in keys)


def initial_model(game: GameGraph) -> EpistemicModel:
    return EpistemicModel((game.initial,), tuple((0,) for _ in range(game.players)))


def assignments(model: EpistemicModel, game: GameGraph) -> Iterator[Assignment]:
    """Information-consistent assignments: one action per (player, class), in product order."""
    per_player = [itertools.product(range(len(game.action_names[i])), repeat=model.class_count[i])
                  for i in range(game.players)]
    return itertools.product(*[list(choices) for choices in per_player])


def count_assignments(model: EpistemicModel, game: GameGraph) -> int:
    total = 1
    for i in range(game.players):
        total *= len(game.action_names[i]) ** model.class_count[i]
    return total


def profile_at(model: EpistemicModel, assignment: Assignment, k: int) -> Tuple[int, ...]:
    return tuple(assignment[i][model.classes[i][k]] for i in range(model.players))


@dataclass(frozen=True)
class UpdatedStructure:
    """
    Nodes (k, w) of the updated structure before splitting.

    classes[i][x] identifies the ∼^i-class of node x; component[x] its ∼-component.
    """

    parents: Tuple[int, ...]
    positions: Tuple[int, ...]
    classes: Tuple[Tuple[int, ...], ...]
    component: Tuple[int, ...]
    components: int


def update_structure(model: EpistemicModel, assignment: Assignment, game: GameGraph) -> UpdatedStructure:
    """
    Extend every node k by every successor w of its position under a_k.

    (k, w) ∼^i (k′, w′) iff k ∼^i k′ and β^i(w) = β^i(w′). Components of the
    union of the relations are computed on the sparse adjacency of consecutive
    class members.
    """
    parents, positions = [], []
    for k in range(model.size):
        for w in game.successors(model.positions[k], profile_at(model, assignment, k)):
            parents.append(k)
            positions.append(w)
    if not positions:
        raise PreconditionError("assignment leads to a dead end")
    classes = tuple(_renumber([(model.classes[i][k], game.obs(i, w)) for k, w in zip(parents, positions)])
                    for i in range(game.players))

    rows, cols = [], []
    for row in classes:
        last: Dict[int, int] = {}
        for x, cls in enumerate(row):
            if cls in last:
                rows.append(last[cls])
                cols.append(x)
            last[cls] = x
    size = len(positions)
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (np.array(rows, dtype=np.int64),
                                                             np.array(cols, dtype=np.int64))),
                       shape=(size, size))
    count, labels = connected_components(graph, directed=False)
    component = _renumber(int(label) for label in labels)
    return UpdatedStructure(tuple(parents), tuple(positions), classes, component, int(count))


def split_components(structure: UpdatedStructure
                     ) -> List[Tuple[EpistemicModel, Tuple[int, ...], Tuple[int, ...]]]:
    """
    Normalised component models, in order of their first node.

    Returns:
        Per component: the model, the structure nodes it contains (in node
        order) and, for each of those nodes, its node in the model
    """
    result = []
    for c in range(structure.components):
        nodes = tuple(x for x in range(len(structure.positions)) if structure.component[x] == c)
        model, to_model = normalize([structure.positions[x] for x in nodes],
                                    [[row[x] for x in nodes] for row in structure.classes])
        result.append((model, nodes, to_model))
    return result


def epistemic_update(model: EpistemicModel, assignment: Assignment, game: GameGraph) -> List[EpistemicModel]:
    """The ∼-connected components of the model updated by an assignment."""
    return [component for component, _, _ in split_components(update_structure(model, assignment, game))]


def find_homomorphism(source: EpistemicModel, target: EpistemicModel) -> Optional[Tuple[int, ...]]:
    """
    A map of nodes preserving positions and every ∼^i, found by backtracking.

    Preserving ∼^i means each i-class of the source lands inside one i-class of
    the target, so the search assigns nodes one by one while fixing class images.
    """
    if not source.position_set <= target.position_set or source.players != target.players:
        return None
    candidates = [[t for t in range(target.size) if target.positions[t] == source.positions[k]]
                  for k in range(source.size)]
    order = sorted(range(source.size), key=lambda k: len(candidates[k]))
    mapping: List[Optional[int]] = [None] * source.size
    images: List[Dict[int, int]] = [dict() for _ in range(source.players)]

    def assign(depth: int) -> bool:
        if depth == len(order):
            return True
        k = order[depth]
        for t in candidates[k]:
            added = []
            consistent = True
            for i in range(source.players):
                src, dst = source.classes[i][k], target.classes[i][t]
                bound = images[i].get(src)
                if bound is None:
                    images[i][src] = dst
                    added.append(i)
                elif bound != dst:
                    consistent = False
                    break
            if consistent:
                mapping[k] = t
                if assign(depth + 1):
                    return True
            for i in added:
                del images[i][source.classes[i][k]]
        return False

    return tuple(mapping) if assign(0) else None


def homomorphic_equiv(first: EpistemicModel, second: EpistemicModel) -> bool:
    """Homomorphisms exist in both directions."""
    return find_homomorphism(first, second) is not None and find_homomorphism(second, first) is not None


class ModelRegistry:
    """
    Canonical representatives of epistemic models up to homomorphic equivalence.

    The first model registered in a class becomes its representative. Lookups
    are bucketed by position set, which mutual homomorphisms preserve.
    Registration is atomic, so concurrent workers may share one registry.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._models: List[EpistemicModel] = []
        self._buckets: Dict[frozenset, List[int]] = {}
        self._exact: Dict[EpistemicModel, int] = {}
        self.hits = 0
        self.misses = 0
        logger.debug("🗄️ Initialized epistemic model registry")

    def __len__(self) -> int:
        return len(self._models)

    def model(self, model_id: int) -> EpistemicModel:
        return self._models[model_id]

    def register(self, model: EpistemicModel) -> Tuple[int, Tuple[int, ...], bool]:
        """
        Find or create the representative of a model.

        Returns:
            (representative id, homomorphism from model to the representative, created)
        """
        with self._lock:
            if model in self._exact:
                self.hits += 1
                return self._exact[model], tuple(range(model.size)), False
            for model_id in self._buckets.get(model.position_set, []):
                representative = self._models[model_id]
                forward = find_homomorphism(model, representative)
                if forward is not None and find_homomorphism(representative, model) is not None:
                    self.hits += 1
                    return model_id, forward, False
            model_id = len(self._models)
            self._models.append(model)
            self._buckets.setdefault(model.position_set, []).append(model_id)
            self._exact[model] = model_id
            self.misses += 1
            return model_id, tuple(range(model.size)), True

    def stats(self) -> Dict[str, int]:
        with self._lock:
            return {'classes': len(self._models), 'hits': self.hits, 'misses': self.misses}
