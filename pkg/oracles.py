"""
Oracles
Brute-force reference deciders used to cross-check the symbolic algorithms:
information-set comparison over enumerated histories, prefix recurrence and gap
measurement, NFA emptiness by reachability, bounded game-tree evaluation and
exhaustive search over small-memory strategy profiles.
"""

import itertools
import logging
from collections import defaultdict, deque
from typing import Dict, Hashable, Iterator, List, Optional, Sequence, Tuple

from automata import MooreMachine, StrategyProfile, WordAutomaton
from game_graph import GameGraph, History, iter_histories
from resource_limits import resolve

logger = logging.getLogger('Oracles')


def _layers(game: GameGraph, depth: int) -> Dict[int, List[History]]:
    layers: Dict[int, List[History]] = defaultdict(list)
    for history in iter_histories(game, depth):
        layers[history.length].append(history)
    return layers


def information_sets(game: GameGraph, histories: Sequence[History]) -> List[Dict[Tuple, frozenset]]:
    """Per player, the partition of same-length histories by observation word."""
    result = []
    for player in range(game.players):
        groups: Dict[Tuple, set] = defaultdict(set)
        for history in histories:
            groups[game.observation_word(player, history.positions)].add(history.positions)
        result.append({word: frozenset(members) for word, members in groups.items()})
    return result


def comparable_at(game: GameGraph, history: History, partitions) -> bool:
    sets = [partitions[i][game.observation_word(i, history.positions)] for i in range(game.players)]
    return all(a <= b or b <= a for a, b in itertools.combinations(sets, 2))


def hierarchical_flags(game: GameGraph, depth: int) -> Dict[Tuple[int, ...], bool]:
    """Whether each history up to depth yields hierarchical information."""
    flags = {}
    for length, histories in sorted(_layers(game, depth).items()):
        partitions = information_sets(game, histories)
        for history in histories:
            flags[history.positions] = comparable_at(game, history, partitions)
    return flags


def brute_force_dynamic(game: GameGraph, depth: int) -> Optional[Tuple[int, ...]]:
    """Shortest history up to depth at which two information sets are incomparable."""
    for length, histories in sorted(_layers(game, depth).items()):
        partitions = information_sets(game, histories)
        for history in histories:
            if not comparable_at(game, history, partitions):
                return history.positions
    return None


def brute_force_static(game: GameGraph, depth: int) -> List[List[bool]]:
    """relation[i][j]: over histories up to depth, equal β^i-words imply equal β^j-words."""
    n = game.players
    relation = [[True] * n for _ in range(n)]
    for histories in _layers(game, depth).values():
        for i, j in itertools.permutations(range(n), 2):
            image: Dict[Tuple, Tuple] = {}
            for history in histories:
                key = game.observation_word(i, history.positions)
                value = game.observation_word(j, history.positions)
                if image.setdefault(key, value) != value:
                    relation[i][j] = False
    return relation


def brute_force_gap(game: GameGraph, depth: int) -> int:
    """Longest run of consecutive non-hierarchical rounds seen along histories up to depth."""
    flags = hierarchical_flags(game, depth)
    run: Dict[Tuple[int, ...], int] = {}
    best = 0
    for positions in sorted(flags, key=len):
        previous = run.get(positions[:-1], 0) if len(positions) > 1 else 0
        run[positions] = 0 if flags[positions] else previous + 1
        best = max(best, run[positions])
    return best


def rounds_with_hierarchy(game: GameGraph, play: Sequence[int]) -> List[bool]:
    """Hierarchical status of every prefix of a finite play, by full enumeration."""
    flags = hierarchical_flags(game, len(play) - 1)
    return [flags[tuple(play[:k + 1])] for k in range(len(play))]


def nfa_is_empty(automaton: WordAutomaton) -> bool:
    """Language emptiness by graph reachability from the initial state."""
    if automaton.initial is None:
        return True
    seen = {automaton.initial}
    queue = deque([automaton.initial])
    while queue:
        q = queue.popleft()
        if q in automaton.accepting:
            return False
        for targets in automaton.delta[q]:
            for target in targets:
                if target not in seen:
                    seen.add(target)
                    queue.append(target)
    return True


def bounded_safety_winner(successors: Dict[Hashable, List[Hashable]], owner: Dict[Hashable, int],
                          bad: set, start: Hashable, depth: int) -> bool:
    """
    Minimax evaluation of a two-player safety game tree to a fixed depth.

    Player 0 wins a branch if it avoids bad for depth steps. Owner 0 picks one
    successor, owner 1 picks any.
    """
    cache: Dict[Tuple[Hashable, int], bool] = {}

    def value(node: Hashable, remaining: int) -> bool:
        if node in bad:
            return False
        if remaining == 0:
            return True
        key = (node, remaining)
        if key not in cache:
            children = [value(child, remaining - 1) for child in successors[node]]
            cache[key] = any(children) if owner[node] == 0 else all(children)
        return cache[key]

    return value(start, depth)


def _reaches_every_state(transitions: Tuple[Tuple[int, ...], ...]) -> bool:
    seen, frontier = {0}, deque([0])
    while frontier:
        for target in transitions[frontier.popleft()]:
            if target not in seen:
                seen.add(target)
                frontier.append(target)
    return len(seen) == len(transitions)


def bounded_memory_machines(alphabet: Sequence[Hashable], actions: Sequence[Hashable],
                            memory: int) -> List[MooreMachine]:
    """
    Moore machines over alphabet with at most memory states, initial state 0.

    Machines with unreachable states or a single repeated output are left out
    for sizes above one; each is equivalent to a smaller machine already listed.
    """
    alphabet = tuple(alphabet)
    machines = [MooreMachine(alphabet, (tuple(0 for _ in alphabet),), (action,)) for action in actions]
    for size in range(2, memory + 1):
        rows = list(itertools.product(range(size), repeat=len(alphabet)))
        for transitions in itertools.product(rows, repeat=size):
            if not _reaches_every_state(transitions):
                continue
            for outputs in itertools.product(actions, repeat=size):
                if len(set(outputs)) > 1:
                    machines.append(MooreMachine(alphabet, transitions, outputs))
    return machines


def bounded_memory_profiles(game: GameGraph, memory: int = 2, limits=None) -> Iterator[StrategyProfile]:
    """
    Every profile of Moore machines with at most memory states per player.

    Raises:
        ResourceLimitError: When the number of profiles exceeds max_assignments
    """
    limits = resolve(limits)
    per_player = [bounded_memory_machines(game.observation_names[i], game.action_names[i], memory)
                  for i in range(game.players)]
    total = 1
    for machines in per_player:
        total *= len(machines)
    limits.check('max_assignments', total, f'enumerating profiles of memory {memory}')
    logger.debug(f"Enumerating {total} profiles of memory at most {memory}")
    for machines in itertools.product(*per_player):
        yield StrategyProfile(tuple(machines))


def exhaustive_profile_search(game: GameGraph, condition, memory: int = 2, limits=None) -> Optional[StrategyProfile]:
    """First winning profile of memory at most memory, or None; each player's machines are tried smallest first."""
    from strategy_synthesizer import verify_strategy

    for profile in bounded_memory_profiles(game, memory, limits):
        if verify_strategy(game, profile, condition, limits).ok:
            return profile
    return None
