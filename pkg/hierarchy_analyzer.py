"""
Hierarchy Analyzer
Decides whether the players of a game are hierarchically ordered by their
information: statically (one order for all histories), dynamically (a total
order at every history) or recurringly (infinitely often along every play),
and produces shortest witnesses when they are not.
"""

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple, Union

import networkx as nx

from automata import (BUCHI, NFA, WordAutomaton, determinize, explore, find_lasso)
from game_errors import PreconditionError
from game_graph import GameGraph, require_valid
from resource_limits import ResourceLimits, resolve

logger = logging.getLogger('HierarchyAnalyzer')

UNBOUNDED = math.inf
INIT = '#init'
REJECT = '#reject'

Cell = FrozenSet[Tuple[int, int, int, int]]


def player_pairs(players: int) -> List[Tuple[int, int]]:
    """Unordered pairs i < j in lexicographic order."""
    return list(itertools.combinations(range(players), 2))


@dataclass(frozen=True)
class OrderWitness:
    """Players from most informed to least informed."""

    order: Tuple[int, ...]

    def rank(self, player: int) -> int:
        return self.order.index(player)

    def precedes(self, i: int, j: int) -> bool:
        return self.rank(i) <= self.rank(j)

    def to_dict(self) -> Dict:
        return {'order': [p + 1 for p in self.order]}


@dataclass(frozen=True)
class IncomparabilityWitness:
    """
    Histories π ∼^i π′ and π ∼^j π″ such that π′ ≁^j π and π″ ≁^i π.

    At π the information sets of i and j are incomparable: π′ lies in P^i(π)
    but not in P^j(π), and π″ lies in P^j(π) but not in P^i(π).
    """

    players: Tuple[int, int]
    histories: Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]

    @property
    def round(self) -> int:
        return len(self.histories[0]) - 1

    def verify(self, game: GameGraph) -> bool:
        i, j = self.players
        pi, pi1, pi2 = self.histories
        if not (len(pi) == len(pi1) == len(pi2)):
            return False
        word = game.observation_word
        return (word(i, pi) == word(i, pi1) and word(j, pi) == word(j, pi2)
                and word(j, pi1) != word(j, pi) and word(i, pi2) != word(i, pi))

    def to_dict(self, game: GameGraph) -> Dict:
        return {
            'type': 'incomparability',
            'players': [p + 1 for p in self.players],
            'round': self.round,
            'histories': [[game.position_names[v] for v in h] for h in self.histories],
        }


@dataclass(frozen=True)
class StaticRefutation:
    """
    Two pairs of histories showing that neither player of a pair can be ordered first.

    forward: histories with equal β^i-words and different β^j-words (i ⋠ j);
    backward: histories with equal β^j-words and different β^i-words (j ⋠ i).
    """

    players: Tuple[int, int]
    forward: Tuple[Tuple[int, ...], Tuple[int, ...]]
    backward: Tuple[Tuple[int, ...], Tuple[int, ...]]

    def to_dict(self, game: GameGraph) -> Dict:
        def names(pair):
            return [[game.position_names[v] for v in h] for h in pair]
        return {
            'type': 'static-refutation',
            'players': [p + 1 for p in self.players],
            'forward': names(self.forward),
            'backward': names(self.backward),
        }


@dataclass(frozen=True)
class LassoWitness:
    """A play τρ^ω whose prefixes from τ on all fail hierarchical information."""

    prefix: Tuple[int, ...]
    cycle: Tuple[int, ...]

    def to_dict(self, game: GameGraph) -> Dict:
        return {
            'type': 'lasso',
            'prefix': [game.position_names[v] for v in self.prefix],
            'cycle': [game.position_names[v] for v in self.cycle],
        }


@dataclass(frozen=True)
class FunctionalityResult:
    """Outcome of is_functional; on failure, two accepted pair-words and their runs."""

    functional: bool
    words: Optional[Tuple[Tuple[Hashable, ...], Tuple[Hashable, ...]]] = None
    runs: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None

    def __bool__(self) -> bool:
        return self.functional


@dataclass(frozen=True)
class StaticResult:
    order: Optional[OrderWitness]
    relation: Tuple[Tuple[bool, ...], ...]
    refutations: Tuple[StaticRefutation, ...] = ()

    @property
    def ok(self) -> bool:
        return self.order is not None


@dataclass(frozen=True)
class DynamicResult:
    witness: Optional[IncomparabilityWitness]
    explored: int = 0

    @property
    def ok(self) -> bool:
        return self.witness is None


@dataclass(frozen=True)
class RecurringResult:
    witness: Optional[LassoWitness]
    explored: int = 0

    @property
    def ok(self) -> bool:
        return self.witness is None


def observation_transducer(game: GameGraph, i: int, j: int) -> WordAutomaton:
    """
    The automaton (V, B^i × B^j, v0, Δ, V) recognising {(β^i(π), β^j(π))}.

    Letters are pairs of observation names; (v, (b, b'), v') ∈ Δ iff v' is a
    successor of v with β^i(v') = b and β^j(v') = b'.
    """
    if i == j:
        raise PreconditionError("observation_transducer needs two distinct players")
    alphabet = tuple(itertools.product(game.observation_names[i], game.observation_names[j]))
    width = len(game.observation_names[j])
    rows = []
    for v in range(game.num_positions):
        row: List[set] = [set() for _ in alphabet]
        for w in game.post[v]:
            row[game.obs(i, w) * width + game.obs(j, w)].add(w)
        rows.append(tuple(frozenset(targets) for targets in row))
    return WordAutomaton(mode=NFA, alphabet=alphabet, delta=tuple(rows), initial=game.initial,
                         accepting=frozenset(range(game.num_positions)), labels=game.position_names)


def is_functional(transducer: WordAutomaton, limits: Optional[ResourceLimits] = None) -> FunctionalityResult:
    """
    Whether an automaton over pairs recognises the graph of a partial function.

    Breadth-first search over pairs of runs reading the same first components,
    flagged once their second components have differed; a flagged pair of
    accepting states yields the shortest counterexample.
    """
    if transducer.initial is None:
        return FunctionalityResult(True)
    limits = resolve(limits)
    by_input: Dict[Hashable, List[int]] = {}
    for k, letter in enumerate(transducer.alphabet):
        by_input.setdefault(letter[0], []).append(k)

    start = (transducer.initial, transducer.initial, False)
    parent: Dict[Tuple, Optional[Tuple]] = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        p, q, diverged = state
        if diverged and p in transducer.accepting and q in transducer.accepting:
            return _functionality_counterexample(transducer, parent, state)
        for letters in by_input.values():
            for k1 in letters:
                for p2 in sorted(transducer.delta[p][k1]):
                    for k2 in letters:
                        for q2 in sorted(transducer.delta[q][k2]):
                            nxt = (p2, q2, diverged or k1 != k2)
                            if nxt not in parent:
                                parent[nxt] = (state, k1, k2)
                                limits.check('max_states', len(parent), 'searching for a functionality counterexample')
                                queue.append(nxt)
    return FunctionalityResult(True)


def _functionality_counterexample(transducer: WordAutomaton, parent, state) -> FunctionalityResult:
    word1, word2 = [], []
    run1, run2 = [state[0]], [state[1]]
    while parent[state] is not None:
        previous, k1, k2 = parent[state]
        word1.append(transducer.alphabet[k1])
        word2.append(transducer.alphabet[k2])
        run1.append(previous[0])
        run2.append(previous[1])
        state = previous
    return FunctionalityResult(False, (tuple(reversed(word1)), tuple(reversed(word2))),
                               (tuple(reversed(run1)), tuple(reversed(run2))))


def check_static(game: GameGraph, limits: Optional[ResourceLimits] = None) -> StaticResult:
    """
    Decide static hierarchical information.

    i ⪯ j holds when the β^i-word of every history determines its β^j-word.
    Players are sorted by how many others they determine (ties by index) and
    consecutive players are verified; otherwise every pair orderable in
    neither direction is refuted with two history pairs.
    """
    limits = resolve(limits)
    n = game.players
    relation = [[i == j for j in range(n)] for i in range(n)]
    counterexamples: Dict[Tuple[int, int], Tuple[Tuple[int, ...], Tuple[int, ...]]] = {}
    for i, j in itertools.permutations(range(n), 2):
        result = is_functional(observation_transducer(game, i, j), limits)
        relation[i][j] = result.functional
        if not result.functional:
            counterexamples[(i, j)] = result.runs
    frozen_relation = tuple(tuple(row) for row in relation)

    order = sorted(range(n), key=lambda i: (-sum(relation[i]), i))
    if all(relation[order[k]][order[k + 1]] for k in range(n - 1)):
        logger.info(f"✅ Static hierarchy with order {[p + 1 for p in order]}")
        return StaticResult(OrderWitness(tuple(order)), frozen_relation)

    refutations = tuple(
        StaticRefutation((i, j), counterexamples[(i, j)], counterexamples[(j, i)])
        for i, j in player_pairs(n) if not relation[i][j] and not relation[j][i])
    logger.info(f"❌ No static hierarchy: {len(refutations)} incomparable pair(s)")
    return StaticResult(None, frozen_relation, refutations)


def _pair_search(game: GameGraph, i: int, j: int,
                 limits: ResourceLimits) -> Tuple[Optional[IncomparabilityWitness], int]:
    """Shortest history at which P^i and P^j are incomparable, by BFS over (v, u, c, w, d)."""
    obs_i, obs_j = game.observation[i], game.observation[j]
    v0 = game.initial
    start = (v0, v0, False, v0, False)
    parent: Dict[Tuple, Optional[Tuple]] = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        v, u, c, w, d = state
        if c and d:
            histories = ([], [], [])
            cursor = state
            while cursor is not None:
                histories[0].append(cursor[0])
                histories[1].append(cursor[1])
                histories[2].append(cursor[3])
                cursor = parent[cursor]
            return IncomparabilityWitness((i, j), tuple(tuple(reversed(h)) for h in histories)), len(parent)
        for v2 in game.post[v]:
            us = [u2 for u2 in game.post[u] if obs_i[u2] == obs_i[v2]]
            ws = [w2 for w2 in game.post[w] if obs_j[w2] == obs_j[v2]]
            for u2 in us:
                for w2 in ws:
                    nxt = (v2, u2, c or obs_j[u2] != obs_j[v2], w2, d or obs_i[w2] != obs_i[v2])
                    if nxt not in parent:
                        parent[nxt] = state
                        limits.check('max_states', len(parent), 'searching for incomparable histories')
                        queue.append(nxt)
    return None, len(parent)


def check_dynamic(game: GameGraph, limits: Optional[ResourceLimits] = None) -> DynamicResult:
    """
    Decide dynamic hierarchical information.

    Returns the shortest IncomparabilityWitness over all player pairs, the
    first pair in index order winning ties.
    """
    limits = resolve(limits)
    best: Optional[IncomparabilityWitness] = None
    explored = 0
    for i, j in player_pairs(game.players):
        witness, count = _pair_search(game, i, j, limits)
        explored += count
        if witness is not None and (best is None or witness.round < best.round):
            best = witness
    if best is None:
        logger.info(f"✅ Dynamic hierarchy holds ({explored} product states explored)")
    else:
        logger.info(f"❌ Incomparable information for players {best.players[0] + 1},{best.players[1] + 1} "
                    f"at round {best.round}")
    return DynamicResult(best, explored)


@dataclass(frozen=True)
class Configuration:
    """One cell of tuples (u, c, w, d) per player pair i < j."""

    pairs: Tuple[Tuple[int, int], ...]
    cells: Tuple[Cell, ...]

    def is_hierarchical(self) -> bool:
        return not any(c and d for cell in self.cells for _, c, _, d in cell)

    def flagged_pairs(self) -> List[Tuple[int, int]]:
        return [pair for pair, cell in zip(self.pairs, self.cells)
                if any(c and d for _, c, _, d in cell)]


def initial_configuration(game: GameGraph) -> Configuration:
    pairs = tuple(player_pairs(game.players))
    v0 = game.initial
    return Configuration(pairs, tuple(frozenset([(v0, 0, v0, 0)]) for _ in pairs))


def update_configuration(v: int, configuration: Configuration, game: GameGraph) -> Configuration:
    """
    Successor configuration after the history is extended by position v.

    Every tuple (u, c, w, d) of cell (i, j) is replaced by the tuples
    (u′, c ∨ [β^j(u′) ≠ β^j(w′)], w′, d ∨ [β^i(u′) ≠ β^i(w′)]) for successors
    u′ of u with β^i(u′) = β^i(v) and w′ of w with β^j(w′) = β^j(v).
    """
    cells = []
    for (i, j), cell in zip(configuration.pairs, configuration.cells):
        obs_i, obs_j = game.observation[i], game.observation[j]
        updated = set()
        for u, c, w, d in cell:
            us = [u2 for u2 in game.post[u] if obs_i[u2] == obs_i[v]]
            ws = [w2 for w2 in game.post[w] if obs_j[w2] == obs_j[v]]
            for u2 in us:
                for w2 in ws:
                    updated.add((u2, int(c or obs_j[u2] != obs_j[w2]), w2, int(d or obs_i[u2] != obs_i[w2])))
        cells.append(frozenset(updated))
    return Configuration(configuration.pairs, tuple(cells))


@dataclass
class ConfigurationGraph:
    """Reachable (position, configuration) nodes and the moves between them."""

    nodes: List[Tuple[int, Configuration]] = field(default_factory=list)
    index: Dict[Tuple[int, Configuration], int] = field(default_factory=dict)
    digraph: nx.DiGraph = field(default_factory=nx.DiGraph)

    def hierarchical(self, node: int) -> bool:
        return self.nodes[node][1].is_hierarchical()


def explore_configurations(game: GameGraph, limits: Optional[ResourceLimits] = None) -> ConfigurationGraph:
    """
    Forward exploration of every reachable (position, configuration) pair.

    Raises:
        ResourceLimitError: When more than max_states nodes are reached
    """
    limits = resolve(limits)
    graph = ConfigurationGraph()
    start = (game.initial, initial_configuration(game))
    graph.index[start] = 0
    graph.nodes.append(start)
    graph.digraph.add_node(0)
    position = 0
    while position < len(graph.nodes):
        v, configuration = graph.nodes[position]
        for w in game.post[v]:
            nxt = (w, update_configuration(w, configuration, game))
            if nxt not in graph.index:
                graph.index[nxt] = len(graph.nodes)
                graph.nodes.append(nxt)
                graph.digraph.add_node(graph.index[nxt])
                limits.check('max_states', len(graph.nodes), 'exploring configurations')
            graph.digraph.add_edge(position, graph.index[nxt])
        position += 1
    logger.debug(f"Explored {len(graph.nodes)} (position, configuration) pairs")
    return graph


def check_recurring(game: GameGraph, limits: Optional[ResourceLimits] = None) -> RecurringResult:
    """
    Decide recurring hierarchical information.

    Fails iff some reachable cycle of (position, configuration) nodes consists
    of non-hierarchical configurations only; the witness is the play that
    reaches this cycle and then loops on it.
    """
    graph = explore_configurations(game, limits)
    lasso = find_lasso(graph.digraph, 0, lambda node: not graph.hierarchical(node))
    if lasso is None:
        logger.info(f"✅ Recurring hierarchy holds ({len(graph.nodes)} configurations)")
        return RecurringResult(None, len(graph.nodes))
    witness = LassoWitness(tuple(graph.nodes[k][0] for k in lasso.prefix),
                           tuple(graph.nodes[k][0] for k in lasso.cycle))
    logger.info(f"❌ Play stuck without hierarchy: cycle of length {len(witness.cycle)}")
    return RecurringResult(witness, len(graph.nodes))


def gap_size(game: GameGraph, limits: Optional[ResourceLimits] = None) -> Union[int, float]:
    """
    Longest run of consecutive non-hierarchical rounds along any play.

    Returns:
        int or UNBOUNDED: UNBOUNDED exactly when check_recurring fails
    """
    graph = explore_configurations(game, limits)
    bad = [k for k in range(len(graph.nodes)) if not graph.hierarchical(k)]
    if not bad:
        return 0
    sub = graph.digraph.subgraph(bad)
    if not nx.is_directed_acyclic_graph(sub):
        return UNBOUNDED
    return nx.dag_longest_path_length(sub) + 1


def replay_configurations(game: GameGraph, positions: Sequence[int]) -> List[Configuration]:
    """Configurations along a history given as positions starting at v0."""
    configuration = initial_configuration(game)
    trail = [configuration]
    for v in positions[1:]:
        configuration = update_configuration(v, configuration, game)
        trail.append(configuration)
    return trail


def _raw_successors(game: GameGraph, pairs: List[Tuple[int, int]]):
    v0 = game.initial

    def successors(label, v: int):
        if label == INIT:
            return [(p, v0, 0, v0, 0) for p in range(len(pairs))] if v == v0 else []
        p, u, c, w, d = label
        i, j = pairs[p]
        obs_i, obs_j = game.observation[i], game.observation[j]
        return [(p, u2, int(c or obs_j[u2] != obs_j[w2]), w2, int(d or obs_i[u2] != obs_i[w2]))
                for u2 in game.post[u] if obs_i[u2] == obs_i[v]
                for w2 in game.post[w] if obs_j[w2] == obs_j[v]]
    return successors


def _flagged(label) -> bool:
    return label != INIT and bool(label[2]) and bool(label[4])


def non_hierarchy_nfa(game: GameGraph, synchronise: bool = True,
                      limits: Optional[ResourceLimits] = None) -> WordAutomaton:
    """
    NFA over positions accepting the histories (as words v0 v1 … vℓ) that fail
    hierarchical information.

    Without synchronisation the automaton only tracks the pair tuples and has
    at most 2n(n−1)|V|² + 1 states; it then accepts every word whose reading
    as a history would fail. The synchronised version also follows the game
    graph, so it accepts histories only.
    """
    pairs = player_pairs(game.players)
    raw = _raw_successors(game, pairs)
    if not synchronise:
        return explore(game.position_names, INIT, raw, accepting=_flagged, limits=limits,
                       what='building the non-hierarchy automaton')

    def successors(label, v: int):
        at, inner = label
        if (at is None and v != game.initial) or (at is not None and v not in game.post[at]):
            return []
        return [(v, target) for target in raw(inner, v)]

    return explore(game.position_names, (None, INIT), successors,
                   accepting=lambda label: _flagged(label[1]), limits=limits,
                   what='building the non-hierarchy automaton')


def recurring_buchi(game: GameGraph, limits: Optional[ResourceLimits] = None) -> WordAutomaton:
    """
    Deterministic Büchi automaton over positions accepting the plays that yield
    hierarchical information infinitely often.

    States pair the current position with a subset state of the determinised
    non-hierarchy automaton; a state is accepting when its subset holds no
    flagged tuple. Words that leave the game graph fall into a rejecting sink.
    """
    subsets = determinize(non_hierarchy_nfa(game, synchronise=False, limits=limits), limits)

    def successors(label, v: int):
        if label == REJECT:
            return [REJECT]
        at, state = label
        if (at is None and v != game.initial) or (at is not None and v not in game.post[at]):
            return [REJECT]
        return [(v, next(iter(subsets.delta[state][v])))]

    def accepting(label) -> bool:
        return label != REJECT and label[0] is not None and label[1] not in subsets.accepting

    automaton = explore(game.position_names, (None, subsets.initial), successors, accepting=accepting,
                        mode=BUCHI, limits=limits, what='building the recurrence automaton')
    logger.info(f"📊 Recurrence automaton: {automaton.num_states} states "
                f"({subsets.num_states} subset states)")
    return automaton


def buchi_rejected_play(automaton: WordAutomaton) -> Optional[LassoWitness]:
    """A play of the game rejected by a recurring_buchi automaton, if any."""
    labels = automaton.labels
    digraph = automaton.graph()
    lasso = find_lasso(digraph, automaton.initial,
                       lambda q: labels[q] != REJECT and labels[q][0] is not None and q not in automaton.accepting)
    if lasso is None:
        return None
    prefix = tuple(labels[q][0] for q in lasso.prefix if labels[q][0] is not None)
    return LassoWitness(prefix, tuple(labels[q][0] for q in lasso.cycle))


class HierarchyAnalyzer:
    """
    Runs the hierarchy deciders on one game and packages the results for reports.
    """

    KINDS = ('static', 'dynamic', 'recurring', 'gap')

    def __init__(self, game: GameGraph, limits: Optional[ResourceLimits] = None, complete: bool = False):
        """
        Initialize the analyzer.

        Args:
            game (GameGraph): Game to analyse; validated on construction
            limits (ResourceLimits): Exploration caps
            complete (bool): Repair dead ends instead of rejecting the game
        """
        self.game = require_valid(game, complete=complete)
        self.limits = resolve(limits)

    def analyze(self, kind: str) -> Dict:
        """
        Run one decider.

        Args:
            kind (str): One of static, dynamic, recurring, gap

        Returns:
            Dict: verdict ('ok' or 'fail'), witness document and statistics
        """
        if kind not in self.KINDS:
            raise PreconditionError(f"unknown check '{kind}', expected one of {self.KINDS}")
        logger.info(f"🔍 Checking {kind} hierarchical information on {self.game.num_positions} positions")
        return getattr(self, f'_analyze_{kind}')()

    def _analyze_static(self) -> Dict:
        result = check_static(self.game, self.limits)
        if result.ok:
            return {'verdict': 'ok', 'order': result.order.to_dict()['order'], 'statistics': self.game.stats()}
        return {'verdict': 'fail',
                'witness': [r.to_dict(self.game) for r in result.refutations],
                'statistics': self.game.stats()}

    def _analyze_dynamic(self) -> Dict:
        result = check_dynamic(self.game, self.limits)
        stats = dict(self.game.stats(), explored=result.explored)
        if result.ok:
            return {'verdict': 'ok', 'statistics': stats}
        return {'verdict': 'fail', 'witness': result.witness.to_dict(self.game), 'statistics': stats}

    def _analyze_recurring(self) -> Dict:
        result = check_recurring(self.game, self.limits)
        stats = dict(self.game.stats(), explored=result.explored)
        if result.ok:
            return {'verdict': 'ok', 'statistics': stats}
        return {'verdict': 'fail', 'witness': result.witness.to_dict(self.game), 'statistics': stats}

    def _analyze_gap(self) -> Dict:
        gap = gap_size(self.game, self.limits)
        bounded = gap != UNBOUNDED
        return {'verdict': 'ok' if bounded else 'fail',
                'gap': int(gap) if bounded else 'unbounded',
                'statistics': self.game.stats()}
