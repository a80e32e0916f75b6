"""
Strategy Synthesizer
Distributed synthesis for observable winning conditions: unfolds epistemic
models into a finite two-player arena (quotiented by homomorphic equivalence),
solves it with attractors or Zielonka's algorithm, extracts one Moore machine
per player and model-checks the resulting profile against the game.
"""

import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Set, Tuple

import networkx as nx

from automata import DFA, StrategyProfile, determinize, explore, moore_from_dfa
from epistemic import (Assignment, EpistemicModel, ModelRegistry, assignments, count_assignments,
                       initial_model, split_components, update_structure)
from game_errors import GameError, NotRecurringError, ObservabilityError
from game_graph import GameGraph, require_valid
from game_transforms import restrict_with_origins
from hierarchy_analyzer import LassoWitness, check_recurring, non_hierarchy_nfa
from resource_limits import ResourceLimits, resolve
from winning_conditions import REACHABILITY, SAFETY, WinningCondition

logger = logging.getLogger('StrategySynthesizer')

SYNTHESIZER = 0
NATURE = 1


@dataclass
class KnowledgeArena:
    """
    Two-player perfect-information arena over canonical epistemic models.

    Synthesizer vertex v is the pair vertices[v] = (model id, condition state);
    its choices are information-consistent assignments, and the Nature vertex
    (v, c) leads to outcomes[(v, c)], one Synthesizer vertex per component of
    the update.
    """

    game: GameGraph
    condition: WinningCondition
    registry: ModelRegistry
    vertices: List[Tuple[int, int]] = field(default_factory=list)
    index: Dict[Tuple[int, int], int] = field(default_factory=dict)
    choices: List[List[Assignment]] = field(default_factory=list)
    outcomes: Dict[Tuple[int, int], Tuple[int, ...]] = field(default_factory=dict)

    def model(self, vertex: int) -> EpistemicModel:
        return self.registry.model(self.vertices[vertex][0])

    def state(self, vertex: int) -> int:
        return self.vertices[vertex][1]

    def priority(self, vertex: int) -> int:
        return self.condition.priority(self.state(vertex))

    def stats(self) -> Dict[str, int]:
        return dict(self.registry.stats(), vertices=len(self.vertices), choices=len(self.outcomes),
                    edges=sum(len(targets) for targets in self.outcomes.values()))


def model_color(model: EpistemicModel, game: GameGraph) -> str:
    colors = {game.color(v) for v in model.positions}
    if len(colors) != 1:
        raise ObservabilityError(f"one epistemic model carries several colors {sorted(colors)}")
    return colors.pop()


def require_synthesis_preconditions(game: GameGraph, condition: WinningCondition,
                                    limits: Optional[ResourceLimits] = None) -> None:
    """
    Raises:
        ObservabilityError: The coloring is not observable (condition not observable)
        NotRecurringError: The game does not yield recurring hierarchical information
    """
    condition.require_compatible(game)
    condition.check_priorities(limits)
    recurring = check_recurring(game, limits)
    if not recurring.ok:
        raise NotRecurringError("the game does not yield recurring hierarchical information",
                                witness=recurring.witness)


def _expand(model: EpistemicModel, game: GameGraph, limits: ResourceLimits):
    limits.check('max_assignments', count_assignments(model, game), 'enumerating action assignments')
    result = []
    for assignment in assignments(model, game):
        structure = update_structure(model, assignment, game)
        result.append((assignment, [component for component, _, _ in split_components(structure)]))
    return result


def unfold_quotient(game: GameGraph, condition: WinningCondition, limits: Optional[ResourceLimits] = None,
                    jobs: Optional[int] = None, check: bool = True) -> KnowledgeArena:
    """
    Explore the arena of canonical epistemic models reachable from the singleton
    model of v0.

    Frontier vertices are expanded concurrently when jobs > 1; registration
    happens in frontier order, so the arena does not depend on scheduling.

    Raises:
        ObservabilityError, NotRecurringError: When the preconditions fail
        ResourceLimitError: When max_arena vertices are exceeded
    """
    limits = resolve(limits)
    jobs = jobs or limits.jobs
    if check:
        require_synthesis_preconditions(game, condition, limits)
    registry = ModelRegistry()
    arena = KnowledgeArena(game, condition, registry)

    def vertex_for(model: EpistemicModel, state: int) -> Tuple[int, bool]:
        model_id, _, _ = registry.register(model)
        key = (model_id, condition.step(state, model_color(model, game)))
        if key not in arena.index:
            arena.index[key] = len(arena.vertices)
            arena.vertices.append(key)
            arena.choices.append([])
            limits.check('max_arena', len(arena.vertices), 'unfolding epistemic models')
            return arena.index[key], True
        return arena.index[key], False

    start = initial_model(game)
    first, _ = vertex_for(start, condition.initial)
    frontier = [first]
    logger.info(f"🔍 Unfolding epistemic models ({jobs} job{'s' if jobs > 1 else ''})")
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        while frontier:
            models = [arena.model(v) for v in frontier]
            if jobs > 1:
                expansions = list(pool.map(lambda m: _expand(m, game, limits), models))
            else:
                expansions = [_expand(m, game, limits) for m in models]
            next_frontier = []
            for vertex, expansion in zip(frontier, expansions):
                for c, (assignment, components) in enumerate(expansion):
                    arena.choices[vertex].append(assignment)
                    targets = []
                    for component in components:
                        target, created = vertex_for(component, arena.state(vertex))
                        targets.append(target)
                        if created:
                            next_frontier.append(target)
                    arena.outcomes[(vertex, c)] = tuple(sorted(set(targets)))
            frontier = next_frontier
    logger.info(f"📊 Arena: {len(arena.vertices)} vertices, {len(registry)} model classes "
                f"(registry hits {registry.hits})")
    return arena


@dataclass(frozen=True)
class ArenaSolution:
    """Winner from the initial vertex and a positional Synthesizer choice per winning vertex."""

    synthesizer_wins: bool
    winning: frozenset
    strategy: Dict[int, int]


class _ExplicitGame:
    """The arena flattened into nodes ('S', v) and ('N', v, c)."""

    def __init__(self, arena: KnowledgeArena):
        self.succ: Dict[Hashable, List[Hashable]] = {}
        self.owner: Dict[Hashable, int] = {}
        self.priority: Dict[Hashable, int] = {}
        for v in range(len(arena.vertices)):
            node = ('S', v)
            self.owner[node] = SYNTHESIZER
            self.priority[node] = arena.priority(v)
            self.succ[node] = [('N', v, c) for c in range(len(arena.choices[v]))]
            for c in range(len(arena.choices[v])):
                choice = ('N', v, c)
                self.owner[choice] = NATURE
                self.priority[choice] = 0
                self.succ[choice] = [('S', t) for t in arena.outcomes[(v, c)]]
        self.pred: Dict[Hashable, List[Hashable]] = {node: [] for node in self.succ}
        for node, targets in self.succ.items():
            for target in targets:
                self.pred[target].append(node)

    def attractor(self, nodes: Set[Hashable], target: Set[Hashable], player: int
                  ) -> Tuple[Set[Hashable], Dict[Hashable, Hashable]]:
        """Nodes from which player forces a visit to target inside nodes, with the forcing moves."""
        attracted = set(target & nodes)
        strategy: Dict[Hashable, Hashable] = {}
        remaining = {node: sum(1 for t in self.succ[node] if t in nodes) for node in nodes}
        queue = deque(sorted(attracted))
        while queue:
            node = queue.popleft()
            for source in self.pred[node]:
                if source not in nodes or source in attracted:
                    continue
                if self.owner[source] == player:
                    attracted.add(source)
                    strategy[source] = node
                    queue.append(source)
                else:
                    remaining[source] -= 1
                    if remaining[source] == 0:
                        attracted.add(source)
                        queue.append(source)
        return attracted, strategy

    def zielonka(self, nodes: Set[Hashable]) -> Tuple[List[Set[Hashable]], Dict[Hashable, Hashable]]:
        """Winning regions of both players for max-parity, and winning moves for their nodes."""
        if not nodes:
            return [set(), set()], {}
        top = max(self.priority[node] for node in nodes)
        alpha = top % 2
        tops = {node for node in nodes if self.priority[node] == top}
        attracted, attract_moves = self.attractor(nodes, tops, alpha)
        sub_regions, sub_strategy = self.zielonka(nodes - attracted)
        if not sub_regions[1 - alpha]:
            strategy = {node: move for node, move in sub_strategy.items() if self.owner[node] == alpha}
            strategy.update(attract_moves)
            for node in tops:
                if self.owner[node] == alpha:
                    strategy[node] = next(t for t in sorted(self.succ[node]) if t in nodes)
            regions = [set(), set()]
            regions[alpha] = set(nodes)
            return regions, strategy
        opponent = 1 - alpha
        escaped, escape_moves = self.attractor(nodes, sub_regions[opponent], opponent)
        rest_regions, rest_strategy = self.zielonka(nodes - escaped)
        strategy = dict(rest_strategy)
        for node in sub_regions[opponent]:
            if self.owner[node] == opponent and node in sub_strategy:
                strategy[node] = sub_strategy[node]
        strategy.update(escape_moves)
        regions = [set(), set()]
        regions[alpha] = rest_regions[alpha]
        regions[opponent] = rest_regions[opponent] | escaped
        return regions, strategy


def solve_perfect_info(arena: KnowledgeArena, condition: Optional[WinningCondition] = None) -> ArenaSolution:
    """
    Solve the arena for Synthesizer.

    Safety and reachability conditions use attractors; general parity
    conditions use Zielonka's recursive algorithm. Strategies are positional
    on the arena, which already tracks the condition state.
    """
    condition = condition or arena.condition
    explicit = _ExplicitGame(arena)
    nodes = set(explicit.succ)
    if condition.kind == SAFETY:
        bad = {('S', v) for v in range(len(arena.vertices)) if condition.is_bad(arena.state(v))}
        losing, _ = explicit.attractor(nodes, bad, NATURE)
        winning_nodes = nodes - losing
        moves = {node: next(t for t in explicit.succ[node] if t in winning_nodes)
                 for node in winning_nodes if explicit.owner[node] == SYNTHESIZER}
    elif condition.kind == REACHABILITY:
        goal = {('S', v) for v in range(len(arena.vertices)) if condition.is_goal(arena.state(v))}
        winning_nodes, moves = explicit.attractor(nodes, goal, SYNTHESIZER)
        for node in goal:
            if explicit.owner[node] == SYNTHESIZER:
                moves[node] = explicit.succ[node][0]
    else:
        regions, moves = explicit.zielonka(nodes)
        winning_nodes = regions[SYNTHESIZER]

    winning = frozenset(node[1] for node in winning_nodes if node[0] == 'S')
    strategy = {node[1]: moves[node][2] for node in winning_nodes
                if node[0] == 'S' and node in moves}
    wins = 0 in winning
    logger.info(f"{'✅' if wins else '❌'} {'Synthesizer' if wins else 'Nature'} wins the arena "
                f"({len(winning)}/{len(arena.vertices)} winning vertices)")
    return ArenaSolution(wins, winning, strategy)


def extract_distributed_strategy(arena: KnowledgeArena, solution: ArenaSolution, game: GameGraph,
                                 limits: Optional[ResourceLimits] = None) -> StrategyProfile:
    """
    One Moore machine per player with states (arena vertex, own class in its model).

    Reading observation b from class c, the player's successor nodes form one
    class of the updated structure; the component holding it determines the
    next arena vertex, and the registry homomorphism the next class.
    """
    if not solution.synthesizer_wins:
        raise GameError("cannot extract a strategy from a losing arena")
    cache: Dict[int, Tuple] = {}

    def expansion(vertex: int):
        if vertex not in cache:
            model = arena.model(vertex)
            assignment = arena.choices[vertex][solution.strategy[vertex]]
            structure = update_structure(model, assignment, game)
            cache[vertex] = (model, assignment, structure, split_components(structure))
        return cache[vertex]

    machines = []
    for i in range(game.players):
        def successors(label, k: int, i=i):
            if label == 'lost':
                return ['lost']
            vertex, cls = label
            model, _, structure, components = expansion(vertex)
            observation = game.observation_names[i][k]
            nodes = [x for x in range(len(structure.positions))
                     if model.classes[i][structure.parents[x]] == cls
                     and game.obs_name(i, structure.positions[x]) == observation]
            if not nodes:
                return ['lost']
            component, members, to_model = components[structure.component[nodes[0]]]
            model_id, homomorphism, _ = arena.registry.register(component)
            representative = arena.registry.model(model_id)
            node = homomorphism[to_model[members.index(nodes[0])]]
            state = arena.condition.step(arena.state(vertex), model_color(component, game))
            target = arena.index[(model_id, state)]
            if target not in solution.strategy:
                return ['lost']
            return [(target, representative.classes[i][node])]

        dfa = explore(game.observation_names[i], (0, 0), successors, mode=DFA, limits=limits,
                      what=f'extracting the strategy of player {i + 1}')

        def output(q: int, i=i, dfa=dfa) -> str:
            label = dfa.label(q)
            if label == 'lost':
                return game.action_names[i][0]
            _, assignment, _, _ = expansion(label[0])
            return game.action_names[i][assignment[i][label[1]]]

        machines.append(moore_from_dfa(dfa, output))
    profile = StrategyProfile(tuple(machines))
    logger.info(f"✅ Extracted profile with machine sizes {[m.num_states for m in machines]}")
    return profile


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    witness: Optional[LassoWitness] = None
    explored: int = 0


def profile_product(game: GameGraph, profile: StrategyProfile, condition: WinningCondition,
                    limits: Optional[ResourceLimits] = None) -> Tuple[nx.DiGraph, Tuple]:
    """Reachable states (v, machine states, condition state) of the game under a profile."""
    limits = resolve(limits)
    profile.validate_against(game.observation_names, game.action_names)
    action_index = [{a: k for k, a in enumerate(alphabet)} for alphabet in game.action_names]
    start = (game.initial, tuple(m.initial for m in profile.machines), condition.start(game.color(game.initial)))
    digraph = nx.DiGraph()
    digraph.add_node(start)
    queue = deque([start])
    while queue:
        state = queue.popleft()
        v, memory, q = state
        actions = tuple(action_index[i][str(machine.outputs[m])]
                        for i, (machine, m) in enumerate(zip(profile.machines, memory)))
        for w in game.successors(v, actions):
            nxt = (w, tuple(machine.step(m, game.obs_name(i, w))
                            for i, (machine, m) in enumerate(zip(profile.machines, memory))),
                   condition.step(q, game.color(w)))
            if nxt not in digraph:
                digraph.add_node(nxt)
                queue.append(nxt)
                limits.check('max_states', digraph.number_of_nodes(), 'model-checking a profile')
            digraph.add_edge(state, nxt)
    return digraph, start


def verify_strategy(game: GameGraph, profile: StrategyProfile, condition: WinningCondition,
                    limits: Optional[ResourceLimits] = None) -> VerificationResult:
    """
    Model-check a profile: every consistent play must satisfy the condition.

    A play is losing iff the product has a reachable cycle whose largest
    priority is odd; for each odd priority p, the cycles are searched inside the
    states of priority at most p, through a state of priority exactly p.
    """
    digraph, start = profile_product(game, profile, condition, limits)
    priority = {state: condition.priority(state[2]) for state in digraph}
    order = {state: k for k, state in enumerate(digraph.nodes)}
    for top in sorted({p for p in priority.values() if p % 2 == 1}, reverse=True):
        sub = digraph.subgraph(s for s in digraph if priority[s] <= top)
        for component in sorted(nx.strongly_connected_components(sub), key=lambda c: min(order[s] for s in c)):
            anchors = sorted((s for s in component if priority[s] == top), key=order.__getitem__)
            if not anchors:
                continue
            anchor = anchors[0]
            inner = sub.subgraph(component)
            if len(component) == 1 and not inner.has_edge(anchor, anchor):
                continue
            prefix = nx.shortest_path(digraph, start, anchor)
            if inner.has_edge(anchor, anchor):
                cycle = [anchor]
            else:
                following = sorted(inner.successors(anchor), key=order.__getitem__)[0]
                cycle = nx.shortest_path(inner, following, anchor)
            witness = LassoWitness(tuple(s[0] for s in prefix), tuple(s[0] for s in cycle))
            logger.info(f"❌ Profile loses: cycle of length {len(cycle)} with priority {top}")
            return VerificationResult(False, witness, digraph.number_of_nodes())
    logger.info(f"✅ Profile verified on {digraph.number_of_nodes()} product states")
    return VerificationResult(True, None, digraph.number_of_nodes())


def realizes_non_hierarchical(game: GameGraph, profile: StrategyProfile,
                              limits: Optional[ResourceLimits] = None) -> Optional[Tuple[int, ...]]:
    """A shortest history consistent with the profile that fails hierarchical information, if any."""
    limits = resolve(limits)
    supervisor = determinize(non_hierarchy_nfa(game, synchronise=False, limits=limits), limits)
    action_index = [{a: k for k, a in enumerate(alphabet)} for alphabet in game.action_names]

    def step(state: int, v: int) -> int:
        return next(iter(supervisor.delta[state][v]))

    start = (game.initial, tuple(m.initial for m in profile.machines), step(supervisor.initial, game.initial))
    parent = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        v, memory, s = state
        if s in supervisor.accepting:
            history = []
            while state is not None:
                history.append(state[0])
                state = parent[state]
            return tuple(reversed(history))
        actions = tuple(action_index[i][str(machine.outputs[m])]
                        for i, (machine, m) in enumerate(zip(profile.machines, memory)))
        for w in game.successors(v, actions):
            nxt = (w, tuple(machine.step(m, game.obs_name(i, w))
                            for i, (machine, m) in enumerate(zip(profile.machines, memory))), step(s, w))
            if nxt not in parent:
                parent[nxt] = state
                queue.append(nxt)
                limits.check('max_states', len(parent), 'replaying a profile')
    return None


@dataclass
class SynthesisResult:
    realizable: bool
    profile: Optional[StrategyProfile] = None
    statistics: Dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return 'realizable' if self.realizable else 'unrealizable'


class StrategySynthesizer:
    """
    Runs the synthesis pipeline on one game and condition.
    """

    def __init__(self, game: GameGraph, condition: WinningCondition, limits: Optional[ResourceLimits] = None,
                 jobs: Optional[int] = None, complete: bool = False):
        self.game = require_valid(game, complete=complete)
        self.condition = condition
        self.limits = resolve(limits)
        self.jobs = jobs or self.limits.jobs

    def synthesize(self) -> SynthesisResult:
        """
        unfold_quotient -> solve_perfect_info -> extract_distributed_strategy,
        then verify_strategy on the returned profile.

        Raises:
            ObservabilityError, NotRecurringError: Precondition failures
            GameError: When an extracted profile fails verification
        """
        logger.info(f"🔍 Synthesizing for {self.game.num_positions} positions, condition {self.condition.kind}")
        arena = unfold_quotient(self.game, self.condition, self.limits, self.jobs)
        solution = solve_perfect_info(arena)
        stats = dict(arena.stats(), winning_vertices=len(solution.winning))
        if not solution.synthesizer_wins:
            return SynthesisResult(False, None, stats)
        profile = extract_distributed_strategy(arena, solution, self.game, self.limits)
        check = verify_strategy(self.game, profile, self.condition, self.limits)
        if not check.ok:
            logger.error("❌ Extracted profile failed verification")
            raise GameError("extracted profile failed verification")
        stats['profile_states'] = profile.total_states()
        return SynthesisResult(True, profile, stats)

    def synthesize_hierarchical(self) -> SynthesisResult:
        """
        Synthesis restricted to profiles that never realise a non-hierarchical history.

        Raises:
            ObservabilityError: When the condition is not observable on the game
            GameError: When the lifted profile fails verification on the game
        """
        self.condition.require_compatible(self.game)
        restricted = restrict_with_origins(self.game, self.condition, self.limits)
        inner = StrategySynthesizer(restricted.game, restricted.condition, self.limits, self.jobs)
        result = inner.synthesize()
        result.statistics['restricted_positions'] = restricted.game.num_positions
        result.statistics['sink_reachable'] = restricted.sink is not None
        if not result.realizable:
            return result
        profile = result.profile.reindex(self.game.observation_names)
        if not verify_strategy(self.game, profile, self.condition, self.limits).ok:
            raise GameError("restricted profile loses on the original game")
        if realizes_non_hierarchical(self.game, profile, self.limits) is not None:
            raise GameError("restricted profile realises a non-hierarchical history")
        return SynthesisResult(True, profile, result.statistics)


def synthesize(game: GameGraph, condition: WinningCondition, limits: Optional[ResourceLimits] = None,
               jobs: Optional[int] = None) -> SynthesisResult:
    return StrategySynthesizer(game, condition, limits, jobs).synthesize()


def synthesize_hierarchical(game: GameGraph, condition: WinningCondition, limits: Optional[ResourceLimits] = None,
                            jobs: Optional[int] = None) -> SynthesisResult:
    return StrategySynthesizer(game, condition, limits, jobs).synthesize_hierarchical()
