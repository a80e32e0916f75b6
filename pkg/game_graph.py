"""
Game Graph
Concurrent games on finite graphs with imperfect information: positions,
per-player observations, action profiles, moves, histories, and the
synchronised product of a game with a Moore machine.

Positions, observations, actions and colors are interned to dense integer ids;
the readable names are kept alongside for documents and reports. Players are
0-based in code and 1-based in documents.
"""

import itertools
import logging
from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property
from typing import (Callable, Dict, Hashable, Iterable, Iterator, List, Mapping, Optional,
                    Sequence, Tuple, Union)

from game_errors import PreconditionError, UnknownLetterError
from resource_limits import ResourceLimits, resolve

logger = logging.getLogger('GameGraph')

SKIP = 'SKIP'
LOSE = 'LOSE'

Profile = Tuple[int, ...]
Move = Tuple[int, Profile, int]


def format_label(label) -> str:
    """Render a structured label (tuples, sets, ints) as a stable string name."""
    if isinstance(label, str):
        return label
    if label is None:
        return '-'
    if isinstance(label, bool):
        return '1' if label else '0'
    if isinstance(label, (frozenset, set)):
        return '{' + ','.join(sorted(format_label(item) for item in label)) + '}'
    if isinstance(label, tuple):
        return '(' + ','.join(format_label(item) for item in label) + ')'
    return str(label)


@dataclass(frozen=True)
class GameGraph:
    """
    A game G = (V, E, β) with an initial position and a position coloring.

    observation[i][v] is the observation id of player i at position v, and
    coloring[v] the color id of v. moves holds every (source, profile, target)
    triple, sorted and without duplicates.
    """

    players: int
    position_names: Tuple[str, ...]
    action_names: Tuple[Tuple[str, ...], ...]
    observation_names: Tuple[Tuple[str, ...], ...]
    color_names: Tuple[str, ...]
    observation: Tuple[Tuple[int, ...], ...]
    coloring: Tuple[int, ...]
    moves: Tuple[Move, ...]
    initial: int = 0

    @cached_property
    def num_positions(self) -> int:
        return len(self.position_names)

    @cached_property
    def profiles(self) -> Tuple[Profile, ...]:
        return tuple(itertools.product(*(range(len(names)) for names in self.action_names)))

    @cached_property
    def _successor_map(self) -> Dict[Tuple[int, Profile], Tuple[int, ...]]:
        table: Dict[Tuple[int, Profile], List[int]] = {}
        for source, profile, target in self.moves:
            table.setdefault((source, profile), []).append(target)
        return {key: tuple(sorted(set(targets))) for key, targets in table.items()}

    @cached_property
    def post(self) -> Tuple[Tuple[int, ...], ...]:
        """Sorted successor positions of every position, over all profiles."""
        successors: List[set] = [set() for _ in range(self.num_positions)]
        for source, _, target in self.moves:
            successors[source].add(target)
        return tuple(tuple(sorted(targets)) for targets in successors)

    @cached_property
    def outgoing(self) -> Tuple[Tuple[Move, ...], ...]:
        """Moves leaving each position, in canonical order."""
        grouped: List[List[Move]] = [[] for _ in range(self.num_positions)]
        for move in self.moves:
            grouped[move[0]].append(move)
        return tuple(tuple(moves) for moves in grouped)

    @cached_property
    def position_index(self) -> Dict[str, int]:
        return {name: index for index, name in enumerate(self.position_names)}

    @cached_property
    def dead_ends(self) -> Tuple[Tuple[int, Profile], ...]:
        table = self._successor_map
        return tuple((v, profile) for v in range(self.num_positions)
                     for profile in self.profiles if (v, profile) not in table)

    def successors(self, position: int, profile: Profile) -> Tuple[int, ...]:
        return self._successor_map.get((position, tuple(profile)), ())

    def obs(self, player: int, position: int) -> int:
        return self.observation[player][position]

    def obs_name(self, player: int, position: int) -> str:
        return self.observation_names[player][self.observation[player][position]]

    def color(self, position: int) -> str:
        return self.color_names[self.coloring[position]]

    def position(self, name: str) -> int:
        try:
            return self.position_index[name]
        except KeyError:
            raise UnknownLetterError(name, 'set of positions') from None

    def observation_word(self, player: int, positions: Sequence[int]) -> Tuple[int, ...]:
        """Observation ids of a history, excluding the initial position."""
        row = self.observation[player]
        return tuple(row[v] for v in positions[1:])

    def stats(self) -> Dict:
        return {
            'players': self.players,
            'positions': self.num_positions,
            'moves': len(self.moves),
            'profiles': len(self.profiles),
            'observations': [len(names) for names in self.observation_names],
            'colors': len(self.color_names),
        }


@dataclass(frozen=True)
class History:
    """A finite path v0 v1 ... vℓ from the initial position; its length is ℓ."""

    positions: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.positions) - 1

    @property
    def last(self) -> int:
        return self.positions[-1]

    def extend(self, position: int) -> 'History':
        return History(self.positions + (position,))

    def prefix(self, length: int) -> 'History':
        return History(self.positions[:length + 1])

    def names(self, game: GameGraph) -> List[str]:
        return [game.position_names[v] for v in self.positions]


class GameBuilder:
    """
    Incremental construction of a GameGraph from labelled positions.

    Labels can be any hashable value; their names are produced with
    format_label and must be unique. Observation and color alphabets are either
    declared up front or grown in order of first use.
    """

    def __init__(self, players: int, actions: Sequence[Sequence[str]],
                 observations: Optional[Sequence[Sequence[str]]] = None,
                 colors: Optional[Sequence[str]] = None):
        if players < 1:
            raise PreconditionError("a game needs at least one player")
        if len(actions) != players:
            raise PreconditionError(f"expected {players} action alphabets, got {len(actions)}")
        if any(len(alphabet) == 0 for alphabet in actions):
            raise PreconditionError("action alphabets must be non-empty")
        self.players = players
        self.actions = tuple(tuple(str(a) for a in alphabet) for alphabet in actions)
        self._obs_fixed = observations is not None
        self._obs_names: List[List[str]] = ([list(map(str, alphabet)) for alphabet in observations]
                                            if observations is not None else [[] for _ in range(players)])
        self._obs_index = [{name: k for k, name in enumerate(alphabet)} for alphabet in self._obs_names]
        self._colors_fixed = colors is not None
        self._color_names: List[str] = list(map(str, colors)) if colors is not None else []
        self._color_index = {name: k for k, name in enumerate(self._color_names)}

        self._labels: Dict[Hashable, int] = {}
        self._names: List[str] = []
        self._name_set: Dict[str, int] = {}
        self._observation: List[List[int]] = [[] for _ in range(players)]
        self._coloring: List[int] = []
        self._moves: set = set()

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, label: Hashable) -> bool:
        return label in self._labels

    def index(self, label: Hashable) -> int:
        return self._labels[label]

    def _intern_obs(self, player: int, value: Hashable) -> int:
        name = format_label(value)
        index = self._obs_index[player]
        if name not in index:
            if self._obs_fixed:
                raise UnknownLetterError(name, f"observation alphabet of player {player + 1}")
            index[name] = len(self._obs_names[player])
            self._obs_names[player].append(name)
        return index[name]

    def _intern_color(self, value: Hashable) -> int:
        name = format_label(value)
        if name not in self._color_index:
            if self._colors_fixed:
                raise UnknownLetterError(name, 'color alphabet')
            self._color_index[name] = len(self._color_names)
            self._color_names.append(name)
        return self._color_index[name]

    def add_observation(self, player: int, value: Hashable) -> int:
        """Register an observation symbol even if no position uses it."""
        return self._intern_obs(player, value)

    def add_color(self, value: Hashable) -> int:
        return self._intern_color(value)

    def add_position(self, label: Hashable, observations: Sequence[Hashable],
                     color: Optional[Hashable] = None) -> int:
        """
        Add a position and return its id; re-adding an existing label is a no-op.

        Args:
            label: Hashable position label
            observations: One observation per player
            color: Color symbol; defaults to the position name
        """
        if label in self._labels:
            return self._labels[label]
        if len(observations) != self.players:
            raise PreconditionError(f"position {format_label(label)} needs {self.players} observations")
        name = format_label(label)
        if name in self._name_set:
            raise PreconditionError(f"two different positions share the name '{name}'")
        position = len(self._names)
        self._labels[label] = position
        self._names.append(name)
        self._name_set[name] = position
        for player, value in enumerate(observations):
            self._observation[player].append(self._intern_obs(player, value))
        self._coloring.append(self._intern_color(name if color is None else color))
        return position

    def add_move(self, source: Hashable, profile: Sequence[int], target: Hashable) -> None:
        profile = tuple(profile)
        if len(profile) != self.players:
            raise PreconditionError(f"profile {profile} does not have {self.players} actions")
        for player, action in enumerate(profile):
            if not 0 <= action < len(self.actions[player]):
                raise UnknownLetterError(action, f"action alphabet of player {player + 1}")
        self._moves.add((self._labels[source], profile, self._labels[target]))

    def add_moves(self, source: Hashable, target: Hashable,
                  profiles: Optional[Iterable[Sequence[int]]] = None) -> None:
        """Add a move for every given profile, or for all profiles when none are given."""
        if profiles is None:
            profiles = itertools.product(*(range(len(alphabet)) for alphabet in self.actions))
        for profile in profiles:
            self.add_move(source, profile, target)

    def build(self, initial: Optional[Hashable] = None) -> GameGraph:
        if not self._names:
            raise PreconditionError("a game needs at least one position")
        initial_id = 0 if initial is None else self._labels[initial]
        return GameGraph(
            players=self.players,
            position_names=tuple(self._names),
            action_names=self.actions,
            observation_names=tuple(tuple(alphabet) for alphabet in self._obs_names),
            color_names=tuple(self._color_names),
            observation=tuple(tuple(row) for row in self._observation),
            coloring=tuple(self._coloring),
            moves=tuple(sorted(self._moves)),
            initial=initial_id,
        )


def complete_game(game: GameGraph) -> GameGraph:
    """Add a self-loop (v, a, v) for every dead end (v, a); other moves are kept."""
    dead = game.dead_ends
    if not dead:
        return game
    logger.warning(f"⚠️ Completing {len(dead)} dead-end (position, profile) pairs with self-loops")
    moves = tuple(sorted(set(game.moves) | {(v, profile, v) for v, profile in dead}))
    return replace(game, moves=moves)


def validate_game(game: GameGraph) -> List[str]:
    """
    Check the structural invariants of a game without aborting.

    Args:
        game (GameGraph): Game to check

    Returns:
        List[str]: One diagnostic per violation; empty when the game is well formed
    """
    diagnostics: List[str] = []
    n = game.num_positions
    if not 0 <= game.initial < n:
        diagnostics.append(f"initial position id {game.initial} is out of range")
    for player in range(game.players):
        row = game.observation[player]
        if len(row) != n:
            diagnostics.append(f"observation map of player {player + 1} is not total")
        for v, b in enumerate(row):
            if not 0 <= b < len(game.observation_names[player]):
                diagnostics.append(f"position '{game.position_names[v]}': observation id {b} "
                                   f"unknown to player {player + 1}")
    if len(game.coloring) != n:
        diagnostics.append("coloring is not total")
    for source, profile, target in game.moves:
        if len(profile) != game.players:
            diagnostics.append(f"move from '{game.position_names[source]}' has {len(profile)} actions, "
                               f"expected {game.players}")
            continue
        for player, action in enumerate(profile):
            if not 0 <= action < len(game.action_names[player]):
                diagnostics.append(f"move from '{game.position_names[source]}' uses unknown action id "
                                   f"{action} of player {player + 1}")
        if not 0 <= target < n:
            diagnostics.append(f"move from '{game.position_names[source]}' targets unknown position id {target}")
    if not diagnostics:
        for v, profile in game.dead_ends:
            actions = ','.join(game.action_names[i][a] for i, a in enumerate(profile))
            diagnostics.append(f"dead end at position '{game.position_names[v]}' for profile ({actions})")
    return diagnostics


def require_valid(game: GameGraph, complete: bool = False) -> GameGraph:
    """
    Return the game (completed if asked) or raise on the first diagnostic.

    Raises:
        PreconditionError: When validate_game reports a problem
    """
    if complete:
        game = complete_game(game)
    diagnostics = validate_game(game)
    if diagnostics:
        extra = f" (+{len(diagnostics) - 1} more)" if len(diagnostics) > 1 else ''
        raise PreconditionError(f"{diagnostics[0]}{extra}")
    return game


def iter_histories(game: GameGraph, depth: int) -> Iterator[History]:
    """Yield every history of length at most depth, shortest first, in canonical order."""
    layer = [History((game.initial,))]
    for _ in range(depth + 1):
        yield from layer
        layer = [history.extend(w) for history in layer for w in game.post[history.last]]


def enumerate_histories(game: GameGraph, depth: int,
                        limits: Optional[ResourceLimits] = None) -> List[History]:
    """
    All histories of length at most depth.

    Raises:
        ResourceLimitError: When more than max_histories would be produced
    """
    limits = resolve(limits)
    result: List[History] = []
    for history in iter_histories(game, depth):
        result.append(history)
        if len(result) > limits.max_histories:
            limits.check('max_histories', len(result), f"enumerating histories to depth {depth}")
    return result


def information_set(game: GameGraph, player: int, history: History,
                    histories: Optional[Iterable[History]] = None) -> List[History]:
    """Histories of the same length that player cannot distinguish from history."""
    if histories is None:
        histories = (h for h in iter_histories(game, history.length) if h.length == history.length)
    word = game.observation_word(player, history.positions)
    return [h for h in histories
            if h.length == history.length and game.observation_word(player, h.positions) == word]


Exposure = Union[None, int, Iterable[int], Mapping[int, Callable]]


def _exposure_map(expose: Exposure, players: int) -> Dict[int, Callable]:
    if expose is None:
        return {}
    if isinstance(expose, int):
        return {expose: lambda output: output}
    if isinstance(expose, Mapping):
        return dict(expose)
    return {player: (lambda output: output) for player in expose}


def synchronise(game: GameGraph, machine, expose: Exposure = None, reads: Optional[int] = None,
                limits: Optional[ResourceLimits] = None) -> Tuple[GameGraph, Tuple[Tuple[int, int], ...]]:
    """
    Reachable product of a game with a Moore machine, plus the origin of each position.

    The machine reads the position name of each move target (reads=None) or the
    observation name of player `reads` at the target. Position (v, m) moves to
    (v', μ(m, letter(v'))) for every move (v, a, v') of the game; the initial
    position is (v0, m0).

    Args:
        game (GameGraph): Game to synchronise
        machine (MooreMachine): Machine over position or observation names
        expose: Players (or player -> projection) that observe the machine output
        reads (int): Player whose observations are fed instead of positions
        limits (ResourceLimits): Caps; max_states bounds the product

    Returns:
        Tuple[GameGraph, tuple]: The product and its (v, machine state) origins
    """
    limits = resolve(limits)
    exposure = _exposure_map(expose, game.players)

    def letter(v: int) -> int:
        name = game.position_names[v] if reads is None else game.obs_name(reads, v)
        return machine.letter_index(name)

    def observations(v: int, state: int) -> List[Hashable]:
        result: List[Hashable] = []
        for player in range(game.players):
            base = game.obs_name(player, v)
            if player in exposure:
                result.append((base, format_label(exposure[player](machine.outputs[state]))))
            else:
                result.append(base)
        return result

    builder = GameBuilder(game.players, game.action_names)
    for color in game.color_names:
        builder.add_color(color)
    origins: List[Tuple[int, int]] = []

    def label(v: int, state: int):
        return (game.position_names[v], state)

    def visit(v: int, state: int) -> None:
        builder.add_position(label(v, state), observations(v, state), game.color(v))
        origins.append((v, state))
        limits.check('max_states', len(origins), 'building a game product')

    start = (game.initial, machine.initial)
    visit(*start)
    queue = deque([start])
    seen = {start}
    while queue:
        v, state = queue.popleft()
        for _, profile, target in game.outgoing[v]:
            nxt = (target, machine.transitions[state][letter(target)])
            if nxt not in seen:
                seen.add(nxt)
                visit(*nxt)
                queue.append(nxt)
            builder.add_move(label(v, state), profile, label(*nxt))
    product = builder.build(label(*start))
    logger.debug(f"Product with Moore machine: {game.num_positions} -> {product.num_positions} positions")
    return product, tuple(origins)


def product_with_moore(game: GameGraph, machine, expose: Exposure = None, reads: Optional[int] = None,
                       limits: Optional[ResourceLimits] = None) -> GameGraph:
    """Synchronised product G × M; see synchronise for the semantics."""
    product, _ = synchronise(game, machine, expose=expose, reads=reads, limits=limits)
    return product


def reachable_positions(game: GameGraph) -> List[int]:
    seen = {game.initial}
    queue = deque([game.initial])
    while queue:
        v = queue.popleft()
        for w in game.post[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return sorted(seen)


def to_dot(game: GameGraph) -> str:
    """Plain-text graph description of a game (positions, observations, moves)."""
    lines = ['digraph game {']
    for v, name in enumerate(game.position_names):
        obs = '/'.join(game.obs_name(i, v) for i in range(game.players))
        shape = 'doublecircle' if v == game.initial else 'circle'
        lines.append(f'  "{name}" [shape={shape}, label="{name}\\n{obs}\\n{game.color(v)}"];')
    grouped: Dict[Tuple[int, int], List[str]] = {}
    for source, profile, target in game.moves:
        actions = ','.join(game.action_names[i][a] for i, a in enumerate(profile))
        grouped.setdefault((source, target), []).append(actions)
    for (source, target), labels in sorted(grouped.items()):
        label = ' | '.join(labels) if len(labels) < len(game.profiles) else '*'
        lines.append(f'  "{game.position_names[source]}" -> "{game.position_names[target]}" [label="{label}"];')
    lines.append('}')
    return '\n'.join(lines) + '\n'
