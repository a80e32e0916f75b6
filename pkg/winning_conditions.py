"""
Winning Conditions
Deterministic max-parity automata over colors, with safety and reachability as
recognised special cases, and the adapters the transformations need.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from automata import PARITY, WordAutomaton, accepts
from game_errors import AlphabetMismatchError, ObservabilityError, PreconditionError
from resource_limits import ResourceLimits, resolve

logger = logging.getLogger('WinningConditions')

SAFETY = 'safety'
REACHABILITY = 'reachability'
PARITY_KIND = 'parity'
KINDS = (SAFETY, REACHABILITY, PARITY_KIND)


def _parity_automaton(colors: Sequence[str], rows: Sequence[Sequence[int]], priorities: Sequence[int],
                      labels: Sequence[str]) -> WordAutomaton:
    return WordAutomaton(mode=PARITY, alphabet=tuple(colors),
                         delta=tuple(tuple(frozenset([t]) for t in row) for row in rows),
                         initial=0, priorities=tuple(priorities), labels=tuple(labels))


@dataclass(frozen=True)
class WinningCondition:
    """
    A winning condition W ⊆ C^ω given by a total deterministic parity automaton.

    The automaton reads the colors of a play starting with the color of the
    initial position; a play is winning when the largest priority seen
    infinitely often is even. kind records whether the automaton has the
    safety shape (odd states are absorbing) or the reachability shape (even
    states are absorbing), which lets solvers use attractors.
    """

    kind: str
    automaton: WordAutomaton

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown condition kind '{self.kind}'")
        if self.automaton.mode != PARITY:
            raise PreconditionError("winning conditions are parity automata")
        self.automaton.check_deterministic()

    @classmethod
    def safety(cls, colors: Sequence[str], avoid: Sequence[str]) -> 'WinningCondition':
        """Never see a color from avoid."""
        bad = set(avoid)
        unknown = bad - set(colors)
        if unknown:
            raise AlphabetMismatchError(f"avoided colors {sorted(unknown)} are not in the color set")
        rows = [[1 if c in bad else 0 for c in colors], [1] * len(colors)]
        return cls(SAFETY, _parity_automaton(colors, rows, [0, 1], ['safe', 'violated']))

    @classmethod
    def reachability(cls, colors: Sequence[str], targets: Sequence[str]) -> 'WinningCondition':
        """Eventually see a color from targets."""
        goal = set(targets)
        unknown = goal - set(colors)
        if unknown:
            raise AlphabetMismatchError(f"target colors {sorted(unknown)} are not in the color set")
        rows = [[1 if c in goal else 0 for c in colors], [1] * len(colors)]
        return cls(REACHABILITY, _parity_automaton(colors, rows, [1, 2], ['pending', 'reached']))

    @classmethod
    def buchi(cls, colors: Sequence[str], accepting: Sequence[str]) -> 'WinningCondition':
        """See a color from accepting infinitely often."""
        good = set(accepting)
        row = [1 if c in good else 0 for c in colors]
        return cls(PARITY_KIND, _parity_automaton(colors, [row, row], [1, 2], ['other', 'accepting']))

    @classmethod
    def parity(cls, automaton: WordAutomaton) -> 'WinningCondition':
        return cls(PARITY_KIND, automaton)

    @classmethod
    def trivial(cls, colors: Sequence[str]) -> 'WinningCondition':
        """Every play wins."""
        return cls.safety(colors, [])

    @property
    def colors(self) -> Tuple[str, ...]:
        return self.automaton.alphabet

    @property
    def initial(self) -> int:
        return self.automaton.initial

    @property
    def num_states(self) -> int:
        return self.automaton.num_states

    def step(self, state: int, color: Hashable) -> int:
        return next(iter(self.automaton.successors(state, color)))

    def priority(self, state: int) -> int:
        return self.automaton.priority(state)

    def start(self, color: Hashable) -> int:
        """State after reading the color of the initial position."""
        return self.step(self.initial, color)

    def is_bad(self, state: int) -> bool:
        """For safety conditions: the state is an absorbing violation."""
        return self.priority(state) % 2 == 1

    def is_goal(self, state: int) -> bool:
        """For reachability conditions: the state is an absorbing success."""
        return self.priority(state) % 2 == 0

    def accepts_play(self, prefix: Sequence[str], cycle: Sequence[str]) -> bool:
        """Membership of the ultimately periodic color sequence prefix·cycle^ω."""
        return accepts(self.automaton, prefix, cycle)

    def check_priorities(self, limits: Optional[ResourceLimits] = None) -> None:
        limits = resolve(limits)
        distinct = len(set(self.automaton.priorities or ()))
        limits.check('max_priorities', distinct, 'reading the winning condition')

    def _rebuild(self, kind: str, colors: Sequence[str], rows: List[List[int]],
                 priorities: List[int], labels: List[Hashable]) -> 'WinningCondition':
        return WinningCondition(kind, _parity_automaton(colors, rows, priorities, labels))

    def _rows(self) -> List[List[int]]:
        return [[next(iter(t)) for t in row] for row in self.automaton.delta]

    def with_stutter(self, color: str) -> 'WinningCondition':
        """Extend the alphabet with a color that leaves every state unchanged."""
        if color in self.colors:
            return self
        rows = [row + [q] for q, row in enumerate(self._rows())]
        return self._rebuild(self.kind, list(self.colors) + [color], rows,
                             list(self.automaton.priorities), [self.automaton.label(q) for q in range(self.num_states)])

    def excluding(self, color: str) -> 'WinningCondition':
        """
        Plays that ever see color are losing.

        A fresh absorbing sink with a dominating odd priority is entered on color.
        """
        colors = list(self.colors) + ([] if color in self.colors else [color])
        k = colors.index(color)
        sink = self.num_states
        top = max(self.automaton.priorities)
        sink_priority = top if top % 2 == 1 else top + 1
        rows = []
        for q, row in enumerate(self._rows()):
            row = row + ([q] if len(row) < len(colors) else [])
            row[k] = sink
            rows.append(row)
        rows.append([sink] * len(colors))
        kind = SAFETY if self.kind == SAFETY else PARITY_KIND
        labels = [self.automaton.label(q) for q in range(self.num_states)] + [f'saw-{color}']
        return self._rebuild(kind, colors, rows, list(self.automaton.priorities) + [sink_priority], labels)

    def relabel(self, letters: Sequence[str], color_of: Callable[[str], str]) -> 'WinningCondition':
        """
        The same condition read over a new alphabet, each letter standing for a color.

        Args:
            letters: New alphabet (for instance position or monitor-state names)
            color_of: Maps each new letter to a color of this condition
        """
        columns = [self.automaton.letter_index(color_of(letter)) for letter in letters]
        rows = [[row[c] for c in columns] for row in self._rows()]
        return self._rebuild(self.kind, list(letters), rows, list(self.automaton.priorities),
                             [self.automaton.label(q) for q in range(self.num_states)])

    def observability_violations(self, game) -> List[str]:
        """Pairs of positions one player cannot tell apart that carry different colors."""
        problems = []
        for player in range(game.players):
            seen: Dict[int, int] = {}
            for v in range(game.num_positions):
                b = game.observation[player][v]
                if b in seen and game.coloring[seen[b]] != game.coloring[v]:
                    u = seen[b]
                    problems.append(
                        f"player {player + 1} cannot distinguish '{game.position_names[u]}' "
                        f"({game.color(u)}) from '{game.position_names[v]}' ({game.color(v)})")
                seen.setdefault(b, v)
        return problems

    def require_compatible(self, game) -> None:
        """
        Raise unless every color of the game is a letter and the coloring is observable.

        Raises:
            AlphabetMismatchError, ObservabilityError
        """
        missing = sorted(set(game.color_names) - set(self.colors))
        if missing:
            raise AlphabetMismatchError(f"game colors {missing} are not letters of the condition")
        problems = self.observability_violations(game)
        if problems:
            raise ObservabilityError(f"condition not observable: {problems[0]}")

    def describe(self) -> Dict:
        return {
            'kind': self.kind,
            'states': self.num_states,
            'colors': list(self.colors),
            'priorities': sorted(set(self.automaton.priorities)),
        }
