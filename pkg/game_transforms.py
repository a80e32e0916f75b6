"""
Game Transforms
Information-preserving transformations of games: observation translators and
hierarchical observation, rank and relative-order signals, cross-free lookahead
insertion, the shadow game with strategy redistribution, and the restriction to
histories that keep hierarchical information.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

from automata import (DFA, MealyMachine, MooreMachine, NFA, StrategyProfile, WordAutomaton,
                      constant_moore, determinize, explore, mealy_to_moore, moore_from_dfa,
                      moore_product, trim)
from game_errors import (AlphabetMismatchError, HierarchyViolationError, NonFunctionalError,
                         PreconditionError)
from game_graph import (LOSE, SKIP, GameBuilder, GameGraph, format_label, iter_histories,
                        synchronise)
from hierarchy_analyzer import (OrderWitness, check_dynamic, is_functional, non_hierarchy_nfa,
                                observation_transducer)
from oracles import information_sets
from resource_limits import ResourceLimits, resolve
from winning_conditions import WinningCondition

logger = logging.getLogger('GameTransforms')

SINK = '⊖'


def _projection_nfa(game: GameGraph, player: int) -> WordAutomaton:
    """Positions as states, reading the observations of one player."""
    width = len(game.observation_names[player])
    rows = []
    for v in range(game.num_positions):
        row: List[set] = [set() for _ in range(width)]
        for w in game.post[v]:
            row[game.obs(player, w)].add(w)
        rows.append(tuple(frozenset(targets) for targets in row))
    return WordAutomaton(mode=NFA, alphabet=game.observation_names[player], delta=tuple(rows),
                         initial=game.initial, accepting=frozenset(range(game.num_positions)),
                         labels=game.position_names)


def translator_moore(game: GameGraph, i: int, j: int, limits: Optional[ResourceLimits] = None) -> MooreMachine:
    """
    Moore machine that outputs β^j(π) on input β^i(π).

    The transducer is checked for functionality, its projection to B^i is
    determinised and trimmed, and each transition is read as a Mealy output
    (the observation of player j shared by the target subset). Words that are
    not observation words of any history lead to a sink.

    Raises:
        NonFunctionalError: When β^i-words do not determine β^j-words
    """
    check = is_functional(observation_transducer(game, i, j), limits)
    if not check.functional:
        raise NonFunctionalError(
            f"observations of player {j + 1} are not determined by those of player {i + 1}",
            counterexample=check.words)

    subsets = trim(determinize(_projection_nfa(game, i), limits))
    sink = subsets.num_states
    fallback = game.observation_names[j][0]
    transitions, outputs = [], []
    for q in range(subsets.num_states):
        row, out = [], []
        for k in range(len(subsets.alphabet)):
            targets = subsets.delta[q][k]
            if targets:
                t = next(iter(targets))
                members = subsets.label(t)
                seen = {game.obs_name(j, v) for v in members}
                if len(seen) != 1:
                    raise PreconditionError(f"subset {members} mixes observations {sorted(seen)}")
                row.append(t)
                out.append(seen.pop())
            else:
                row.append(sink)
                out.append(fallback)
        transitions.append(tuple(row))
        outputs.append(tuple(out))
    transitions.append(tuple(sink for _ in subsets.alphabet))
    outputs.append(tuple(fallback for _ in subsets.alphabet))
    mealy = MealyMachine(alphabet=subsets.alphabet, transitions=tuple(transitions), outputs=tuple(outputs),
                         initial=subsets.initial, labels=tuple(subsets.labels) + ('sink',))
    machine = mealy_to_moore(mealy, game.obs_name(j, game.initial), limits)
    logger.debug(f"Translator {i + 1}->{j + 1}: {machine.num_states} states")
    return machine


def over_positions(game: GameGraph, machine: MooreMachine, reads: int) -> MooreMachine:
    """The same machine fed with positions instead of one player's observations."""
    columns = [machine.letter_index(game.obs_name(reads, v)) for v in range(game.num_positions)]
    return MooreMachine(alphabet=game.position_names,
                        transitions=tuple(tuple(row[c] for c in columns) for row in machine.transitions),
                        outputs=machine.outputs, initial=machine.initial, labels=machine.labels)


def positional_violations(game: GameGraph, order: Sequence[int],
                          positions: Optional[Sequence[int]] = None) -> List[str]:
    """Pairs of positions where an earlier player's observation does not determine a later one's."""
    positions = range(game.num_positions) if positions is None else positions
    problems = []
    for a, b in itertools.combinations(range(len(order)), 2):
        i, j = order[a], order[b]
        seen: Dict[int, int] = {}
        for v in positions:
            key = game.obs(i, v)
            if key in seen and game.obs(j, seen[key]) != game.obs(j, v):
                problems.append(f"player {i + 1} sees '{game.obs_name(i, v)}' at '{game.position_names[seen[key]]}' "
                                f"and '{game.position_names[v]}' but player {j + 1} does not")
            seen.setdefault(key, v)
    return problems


def is_positionally_hierarchical(game: GameGraph, order: Sequence[int],
                                 positions: Optional[Sequence[int]] = None) -> bool:
    return not positional_violations(game, order, positions)


def to_hierarchical_observation(game: GameGraph, order: OrderWitness,
                                limits: Optional[ResourceLimits] = None) -> GameGraph:
    """
    Expose to every player the observations of all players after it in the order.

    The translators i -> j for i before j are combined into one machine over
    positions; player i's observation gains the tuple of its translators' outputs.
    """
    pairs = [(i, j) for a, i in enumerate(order.order) for j in order.order[a + 1:]]
    if not pairs:
        return game
    machines = [over_positions(game, translator_moore(game, i, j, limits), i) for i, j in pairs]
    combined = moore_product(machines, limits=limits)
    expose = {}
    for player in order.order[:-1]:
        slots = [k for k, (i, _) in enumerate(pairs) if i == player]
        expose[player] = (lambda outputs, slots=slots: tuple(outputs[k] for k in slots))
    product, _ = synchronise(game, combined, expose=expose, limits=limits)
    logger.info(f"✅ Hierarchical observation: {game.num_positions} -> {product.num_positions} positions")
    return product


def _require_dynamic(game: GameGraph, limits: Optional[ResourceLimits] = None) -> None:
    result = check_dynamic(game, limits)
    if not result.ok:
        raise HierarchyViolationError("the game does not yield dynamic hierarchical information",
                                      witness=result.witness)


def _relative_order_machine(game: GameGraph, i: int, j: int, limits: Optional[ResourceLimits]) -> MooreMachine:
    if i == j:
        return constant_moore(game.position_names, 1)
    obs_i, obs_j = game.observation[i], game.observation[j]

    def successors(belief: FrozenSet[Tuple[int, int]], v: int):
        return [frozenset((u2, int(c or obs_j[u2] != obs_j[v]))
                          for u, c in belief for u2 in game.post[u] if obs_i[u2] == obs_i[v])]

    dfa = explore(game.position_names, frozenset([(game.initial, 0)]), successors, mode=DFA,
                  limits=limits, what='building a relative-order signal')
    return moore_from_dfa(dfa, lambda q: 0 if any(c for _, c in dfa.label(q)) else 1)


def relative_order_signal(game: GameGraph, i: int, j: int, limits: Optional[ResourceLimits] = None) -> MooreMachine:
    """
    Moore machine over positions outputting 1 iff P^i(π) ⊆ P^j(π).

    States are sets of pairs (u, c): u ends a history π′ ∼^i π and c records
    whether π′ ≁^j π.

    Raises:
        HierarchyViolationError: When the game is not dynamically hierarchical
    """
    _require_dynamic(game, limits)
    return _relative_order_machine(game, i, j, limits)


def _rank(player: int, precedes) -> int:
    count = 0
    for j in range(len(precedes)):
        if j == player:
            continue
        before, after = precedes[j][player], precedes[player][j]
        if (before and not after) or (j < player and before and after):
            count += 1
    return count + 1


def rank_signal(game: GameGraph, i: int, limits: Optional[ResourceLimits] = None) -> MooreMachine:
    """
    Moore machine over positions outputting rank^i(π) in 1..n.

    The rank counts the players strictly more informed than i plus the equally
    informed players of smaller index; the most informed player has rank 1.
    """
    _require_dynamic(game, limits)
    others = [j for j in range(game.players) if j != i]
    if not others:
        return constant_moore(game.position_names, 1)
    machines = []
    for j in others:
        machines.append(_relative_order_machine(game, j, i, limits))
        machines.append(_relative_order_machine(game, i, j, limits))

    def combine(bits):
        matrix = [[True] * game.players for _ in range(game.players)]
        for k, j in enumerate(others):
            matrix[j][i] = bool(bits[2 * k])
            matrix[i][j] = bool(bits[2 * k + 1])
        return _rank(i, matrix)

    return moore_product(machines, combine=combine, limits=limits)


@dataclass(frozen=True)
class RankAnnotatedGame:
    """
    A product of a game with its relative-order signals.

    precedes[p][i][j] is 1 iff i ⪯ j at every history reaching position p, and
    ranks[p][i] is rank^i there. origins[p] is the position of the source game.
    """

    game: GameGraph
    precedes: Tuple[Tuple[Tuple[int, ...], ...], ...]
    ranks: Tuple[Tuple[int, ...], ...]
    origins: Tuple[int, ...]

    def strictly_before(self, p: int, i: int, j: int) -> bool:
        return bool(self.precedes[p][i][j]) and not self.precedes[p][j][i]

    def order_at(self, p: int) -> Tuple[int, ...]:
        return tuple(sorted(range(self.game.players), key=lambda i: self.ranks[p][i]))

    def attributes(self, p: int) -> Dict:
        return {'rank': [r for r in self.ranks[p]],
                'precedes': [list(row) for row in self.precedes[p]]}


def annotate_ranks(game: GameGraph, limits: Optional[ResourceLimits] = None) -> RankAnnotatedGame:
    """
    Synchronise a dynamically hierarchical game with all relative-order signals
    and record ranks and relative orders as position attributes.

    Raises:
        HierarchyViolationError: When the game is not dynamically hierarchical
    """
    _require_dynamic(game, limits)
    n = game.players
    pairs = list(itertools.permutations(range(n), 2))
    if pairs:
        combined = moore_product([_relative_order_machine(game, i, j, limits) for i, j in pairs], limits=limits)
    else:
        combined = constant_moore(game.position_names, ())
    product, origins = synchronise(game, combined, limits=limits)

    precedes, ranks = [], []
    for _, state in origins:
        bits = combined.outputs[state]
        matrix = [[1] * n for _ in range(n)]
        for (i, j), bit in zip(pairs, bits):
            matrix[i][j] = int(bit)
        precedes.append(tuple(tuple(row) for row in matrix))
        ranks.append(tuple(_rank(i, matrix) for i in range(n)))
    for p, row in enumerate(ranks):
        if sorted(row) != list(range(1, n + 1)):
            raise HierarchyViolationError(f"ranks {row} at '{product.position_names[p]}' are not a permutation")
    logger.info(f"📊 Rank annotation: {game.num_positions} -> {product.num_positions} positions")
    return RankAnnotatedGame(product, tuple(precedes), tuple(ranks), tuple(v for v, _ in origins))


@dataclass(frozen=True)
class Crossing:
    """Players i and j swap strict information order along the move source -> target."""

    source: int
    target: int
    players: Tuple[int, int]


def find_crossing(annotated: RankAnnotatedGame) -> Optional[Crossing]:
    n = annotated.game.players
    for source, _, target in annotated.game.moves:
        for i, j in itertools.permutations(range(n), 2):
            if annotated.strictly_before(source, i, j) and annotated.strictly_before(target, j, i):
                return Crossing(source, target, (i, j))
    return None


def knowledge_signal(game: GameGraph, j: int, limits: Optional[ResourceLimits] = None) -> MooreMachine:
    """Moore machine over positions outputting the set of last positions of P^j(π)."""
    obs_j = game.observation[j]

    def successors(belief: FrozenSet[int], v: int):
        return [frozenset(u2 for u in belief for u2 in game.post[u] if obs_j[u2] == obs_j[v])]

    dfa = explore(game.position_names, frozenset([game.initial]), successors, mode=DFA,
                  limits=limits, what='building a knowledge signal')
    return moore_from_dfa(dfa, lambda q: dfa.label(q))


def cross_free_with_origins(annotated: RankAnnotatedGame, limits: Optional[ResourceLimits] = None
                            ) -> Tuple[GameGraph, Tuple[Optional[int], ...]]:
    """
    make_cross_free together with, for every new position, its position in the
    annotated game (None for intermediaries).
    """
    base = annotated.game
    n = base.players
    knowledge = moore_product([knowledge_signal(base, j, limits) for j in range(n)], limits=limits)
    product, origins = synchronise(base, knowledge, limits=limits)

    def lookahead(q: int, i: int):
        x, state = origins[q]
        beliefs = knowledge.outputs[state]
        return ('mid',) + tuple(
            frozenset(base.obs_name(i, u) for u in beliefs[j]) if annotated.precedes[x][i][j] else None
            for j in range(n) if j != i)

    builder = GameBuilder(n, base.action_names)
    for color in base.color_names:
        builder.add_color(color)
    new_origins: List[Optional[int]] = []
    for p, name in enumerate(product.position_names):
        builder.add_position(name, [product.obs_name(i, p) for i in range(n)], product.color(p))
        new_origins.append(origins[p][0])
    for p, profile, q in product.moves:
        mid = ('mid', product.position_names[p], product.position_names[q])
        if mid not in builder:
            builder.add_position(mid, [lookahead(q, i) for i in range(n)], SKIP)
            new_origins.append(None)
            builder.add_moves(mid, product.position_names[q])
        builder.add_move(product.position_names[p], profile, mid)
    result = builder.build(product.position_names[product.initial])
    logger.info(f"✅ Cross-free game: {base.num_positions} -> {result.num_positions} positions")
    return result, tuple(new_origins)


def make_cross_free(annotated: RankAnnotatedGame, limits: Optional[ResourceLimits] = None) -> GameGraph:
    """
    Insert an intermediary position on every move; at the intermediary towards w,
    player i observes λ_j^i(w) for every j ≠ i with i ⪯_w j (None otherwise),
    where λ_j^i(w) is the set of i-observations at the last positions of P^j.

    Intermediaries are colored SKIP and have a single successor.
    """
    return cross_free_with_origins(annotated, limits)[0]


def lift_condition(condition: WinningCondition) -> WinningCondition:
    """Condition for cross-free games: intermediary positions do not count."""
    return condition.with_stutter(SKIP)


@dataclass(frozen=True)
class ShadowGame:
    """
    The shadow game together with the data linking it back to the source game.

    Shadow positions are the annotated positions (same ids) plus an optional
    sink. origin maps each shadow position to a position of the source game,
    or None for intermediaries and the sink; ranks[p][i] is the shadow slot
    (1-based) that actual player i occupies at p.
    """

    game: GameGraph
    annotated: RankAnnotatedGame
    origin: Tuple[Optional[int], ...]
    sink: Optional[int]
    cross_free: bool

    def ranks(self, p: int) -> Tuple[int, ...]:
        return self.annotated.ranks[p]


def shadow_game(game: GameGraph, limits: Optional[ResourceLimits] = None) -> ShadowGame:
    """
    Reassign actions and observations of actual player i at position v to the
    shadow player rank^i(v).

    Shadow players share the union of all action alphabets; action profiles no
    original move uses lead to the sink ⊖ (colored LOSE). A shadow observation is
    the pair (actual player, observation) rather than the bare observation, so a
    slot never merges equal symbols of different actual players.
    shadow_information_report compares the resulting information sets with the
    source game's.

    Raises:
        HierarchyViolationError: When the game (or its cross-free version) is not dynamically hierarchical
    """
    annotated = annotate_ranks(game, limits)
    origin: Tuple[Optional[int], ...] = annotated.origins
    crossing = find_crossing(annotated)
    if crossing is not None:
        logger.info(f"🔧 Players {crossing.players[0] + 1},{crossing.players[1] + 1} cross; inserting lookahead")
        cross_free, cf_origins = cross_free_with_origins(annotated, limits)
        first = annotated
        annotated = annotate_ranks(cross_free, limits)
        remaining = find_crossing(annotated)
        if remaining is not None:
            raise HierarchyViolationError("players still cross after inserting lookahead positions",
                                          witness=remaining)
        origin = tuple(first.origins[cf_origins[x]] if cf_origins[x] is not None else None
                       for x in annotated.origins)

    base = annotated.game
    n = base.players
    union: List[str] = []
    for alphabet in base.action_names:
        union.extend(a for a in alphabet if a not in union)
    union_index = {a: k for k, a in enumerate(union)}

    builder = GameBuilder(n, [union] * n)
    for color in base.color_names:
        builder.add_color(color)
    for p, name in enumerate(base.position_names):
        observations: List[Hashable] = [None] * n
        for i, slot in enumerate(annotated.ranks[p]):
            observations[slot - 1] = (str(i + 1), base.obs_name(i, p))
        builder.add_position(name, observations, base.color(p))

    used: Dict[int, set] = {p: set() for p in range(base.num_positions)}
    for p, profile, q in base.moves:
        shadow_profile = [0] * n
        for i, slot in enumerate(annotated.ranks[p]):
            shadow_profile[slot - 1] = union_index[base.action_names[i][profile[i]]]
        builder.add_move(base.position_names[p], shadow_profile, base.position_names[q])
        used[p].add(tuple(shadow_profile))

    all_profiles = list(itertools.product(range(len(union)), repeat=n))
    sink = None
    for p in range(base.num_positions):
        for profile in all_profiles:
            if profile in used[p]:
                continue
            if sink is None:
                sink = builder.add_position(SINK, [SINK] * n, LOSE)
                builder.add_moves(SINK, SINK)
            builder.add_move(base.position_names[p], profile, SINK)
    shadow = builder.build(base.position_names[base.initial])
    origin = origin + ((None,) if sink is not None else ())
    logger.info(f"✅ Shadow game: {shadow.num_positions} positions, sink {'used' if sink is not None else 'unused'}")
    return ShadowGame(shadow, annotated, origin, sink, crossing is not None)


def shadow_condition(condition: WinningCondition) -> WinningCondition:
    """Condition for the shadow game: intermediaries stutter and the sink loses."""
    return condition.with_stutter(SKIP).excluding(LOSE)


def shadow_information_report(game: GameGraph, depth: int, shadow: Optional[ShadowGame] = None,
                              limits: Optional[ResourceLimits] = None) -> Dict:
    """
    Compare, on every history up to depth, the information set of each actual
    player with that of the shadow player occupying its rank.

    Returns:
        Dict: history count, mismatch counts per shadow slot, and the first mismatch
    """
    shadow = shadow or shadow_game(game, limits)
    base = shadow.annotated.game
    layers: Dict[int, list] = {}
    for history in iter_histories(base, depth):
        layers.setdefault(history.length, []).append(history)
    mismatches = [0] * base.players
    first = None
    total = 0
    for histories in layers.values():
        actual = information_sets(base, histories)
        shadowed = information_sets(shadow.game, histories)
        for history in histories:
            total += 1
            last = history.last
            for i, slot in enumerate(shadow.ranks(last)):
                mine = actual[i][base.observation_word(i, history.positions)]
                theirs = shadowed[slot - 1][shadow.game.observation_word(slot - 1, history.positions)]
                if mine != theirs:
                    mismatches[slot - 1] += 1
                    if first is None:
                        first = {'history': history.names(base), 'player': i + 1, 'slot': slot}
    return {'histories': total, 'mismatches': mismatches, 'equal': not any(mismatches), 'first_mismatch': first}


def redistribute_strategy(sigma: StrategyProfile, game: GameGraph, shadow: Optional[ShadowGame] = None,
                          limits: Optional[ResourceLimits] = None) -> StrategyProfile:
    """
    Turn a profile of the shadow game into a profile of the source game.

    Player i tracks the set of (shadow position, shadow machine states) pairs
    consistent with its observations in the source game and plays what the
    shadow player of its current rank would play. Intermediary positions are
    crossed within a single step.

    Raises:
        AlphabetMismatchError: When sigma does not fit the shadow game
    """
    shadow = shadow or shadow_game(game, limits)
    board = shadow.game
    n = board.players
    if sigma.players != n:
        raise AlphabetMismatchError(f"shadow profile has {sigma.players} machines, expected {n}")
    sigma.validate_against(board.observation_names, board.action_names)
    action_index = {a: k for k, a in enumerate(board.action_names[0])}

    def advance(p: int, states: Tuple[int, ...]) -> List[Tuple[int, Tuple[int, ...]]]:
        profile = tuple(action_index[str(machine.outputs[m])] for machine, m in zip(sigma.machines, states))
        result = []
        for q in board.successors(p, profile):
            moved = tuple(machine.step(m, board.obs_name(j, q))
                          for j, (machine, m) in enumerate(zip(sigma.machines, states)))
            if shadow.origin[q] is None and q != shadow.sink:
                result.extend(advance(q, moved))
            else:
                result.append((q, moved))
        return result

    start = (board.initial, tuple(machine.initial for machine in sigma.machines))
    profile_machines = []
    for i in range(n):
        def successors(belief, k: int, i=i):
            letter = game.observation_names[i][k]
            return [frozenset((q, moved) for p, states in sorted(belief) for q, moved in advance(p, states)
                              if q != shadow.sink and game.obs_name(i, shadow.origin[q]) == letter)]

        dfa = explore(game.observation_names[i], frozenset([start]), successors, mode=DFA, limits=limits,
                      what=f'redistributing the strategy of player {i + 1}')

        def output(q: int, i=i, dfa=dfa) -> str:
            choices = sorted({str(sigma.machines[shadow.ranks(p)[i] - 1].outputs[states[shadow.ranks(p)[i] - 1]])
                              for p, states in dfa.label(q)})
            legal = [a for a in choices if a in game.action_names[i]]
            return legal[0] if legal else game.action_names[i][0]

        profile_machines.append(moore_from_dfa(dfa, output))
    logger.info(f"✅ Redistributed shadow profile: {sum(m.num_states for m in profile_machines)} states")
    return StrategyProfile(tuple(profile_machines))


@dataclass(frozen=True)
class RestrictedGame:
    game: GameGraph
    condition: WinningCondition
    origins: Tuple[Optional[int], ...]
    sink: Optional[int]


def restrict_with_origins(game: GameGraph, condition: WinningCondition,
                          limits: Optional[ResourceLimits] = None) -> RestrictedGame:
    """restrict_to_hierarchical with the source position of every product position."""
    limits = resolve(limits)
    supervisor = determinize(non_hierarchy_nfa(game, synchronise=False, limits=limits), limits)

    def step(state: int, v: int) -> int:
        return next(iter(supervisor.delta[state][v]))

    builder = GameBuilder(game.players, game.action_names)
    for color in game.color_names:
        builder.add_color(color)
    origins: List[Optional[int]] = []

    def label(v: int, state: int):
        return (game.position_names[v], state)

    def visit(v: int, state: int) -> None:
        builder.add_position(label(v, state), [game.obs_name(i, v) for i in range(game.players)], game.color(v))
        origins.append(v)
        limits.check('max_states', len(origins), 'restricting to hierarchical histories')

    start = (game.initial, step(supervisor.initial, game.initial))
    visit(*start)
    queue = [start]
    seen = {start}
    sink = None
    while queue:
        v, state = queue.pop(0)
        for _, profile, w in game.outgoing[v]:
            nxt = (w, step(state, w))
            if nxt[1] in supervisor.accepting:
                if sink is None:
                    sink = builder.add_position(SINK, [SINK] * game.players, LOSE)
                    origins.append(None)
                    builder.add_moves(SINK, SINK)
                builder.add_move(label(v, state), profile, SINK)
                continue
            if nxt not in seen:
                seen.add(nxt)
                visit(*nxt)
                queue.append(nxt)
            builder.add_move(label(v, state), profile, label(*nxt))
    restricted = builder.build(label(*start))
    logger.info(f"✅ Restricted game: {restricted.num_positions} positions, "
                f"{'sink reachable' if sink is not None else 'no sink needed'}")
    return RestrictedGame(restricted, condition.excluding(LOSE), tuple(origins), sink)


def restrict_to_hierarchical(game: GameGraph, condition: WinningCondition,
                             limits: Optional[ResourceLimits] = None) -> Tuple[GameGraph, WinningCondition]:
    """
    Product of the game with the determinised non-hierarchy automaton in which
    every move that would realise a non-hierarchical history is redirected to
    the sink ⊖, observed as ⊖ by all players and colored LOSE. The condition
    is adjusted so that reaching ⊖ loses.
    """
    restricted = restrict_with_origins(game, condition, limits)
    return restricted.game, restricted.condition
