"""
Automata
Finite-word and ω-word automata (NFA, DFA, deterministic Büchi and parity),
Moore and Mealy machines, and the constructions the analyzers share:
on-the-fly exploration, powerset determinisation, trimming, minimisation,
machine products and lasso search.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import (Callable, Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence,
                    Tuple)

import networkx as nx

from game_errors import AlphabetMismatchError, PreconditionError, UnknownLetterError
from resource_limits import ResourceLimits, resolve

logger = logging.getLogger('Automata')

NFA = 'nfa'
DFA = 'dfa'
BUCHI = 'buchi'
PARITY = 'parity'
MODES = (NFA, DFA, BUCHI, PARITY)


def _letter_map(alphabet: Sequence[Hashable]) -> Dict[Hashable, int]:
    return {letter: index for index, letter in enumerate(alphabet)}


@dataclass(frozen=True)
class WordAutomaton:
    """
    An automaton over a finite alphabet.

    delta[q][k] is the set of successors of state q on the k-th letter. The
    deterministic modes (dfa, buchi, parity) have at most one successor per
    (state, letter); buchi and parity automata are total. An automaton without
    states has initial None and accepts nothing.
    """

    mode: str
    alphabet: Tuple[Hashable, ...]
    delta: Tuple[Tuple[FrozenSet[int], ...], ...]
    initial: Optional[int]
    accepting: FrozenSet[int] = frozenset()
    priorities: Optional[Tuple[int, ...]] = None
    labels: Optional[Tuple[Hashable, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise PreconditionError(f"unknown automaton mode '{self.mode}'")

    @cached_property
    def letters(self) -> Dict[Hashable, int]:
        return _letter_map(self.alphabet)

    @property
    def num_states(self) -> int:
        return len(self.delta)

    @property
    def is_empty_shell(self) -> bool:
        return self.initial is None

    def letter_index(self, letter: Hashable) -> int:
        try:
            return self.letters[letter]
        except KeyError:
            raise UnknownLetterError(letter) from None

    def successors(self, state: int, letter: Hashable) -> FrozenSet[int]:
        return self.delta[state][self.letter_index(letter)]

    def step(self, state: int, letter: Hashable) -> Optional[int]:
        """Deterministic successor, None when undefined."""
        targets = self.successors(state, letter)
        return next(iter(targets)) if targets else None

    def label(self, state: int) -> Hashable:
        return self.labels[state] if self.labels is not None else state

    def priority(self, state: int) -> int:
        if self.priorities is not None:
            return self.priorities[state]
        return 2 if state in self.accepting else 1

    def check_deterministic(self) -> None:
        if self.mode == NFA:
            return
        for q, row in enumerate(self.delta):
            for k, targets in enumerate(row):
                if len(targets) > 1 or (self.mode != DFA and len(targets) != 1):
                    raise PreconditionError(
                        f"{self.mode} automaton has {len(targets)} successors at state {self.label(q)} "
                        f"on letter {self.alphabet[k]!r}")
        if self.mode == PARITY and (self.priorities is None or len(self.priorities) != self.num_states):
            raise PreconditionError("parity automaton needs one priority per state")

    def graph(self) -> nx.DiGraph:
        """Transition graph with one edge per (state, successor)."""
        digraph = nx.DiGraph()
        digraph.add_nodes_from(range(self.num_states))
        for q, row in enumerate(self.delta):
            for targets in row:
                for target in targets:
                    digraph.add_edge(q, target)
        return digraph


def explore(alphabet: Sequence[Hashable], initial: Hashable,
            successors: Callable[[Hashable, int], Iterable[Hashable]],
            accepting: Callable[[Hashable], bool] = lambda label: False,
            mode: str = NFA, priority: Optional[Callable[[Hashable], int]] = None,
            limits: Optional[ResourceLimits] = None, what: str = 'exploring an automaton') -> WordAutomaton:
    """
    Build the reachable part of an automaton whose states are hashable labels.

    Args:
        alphabet: Letters, in the order used for exploration
        initial: Label of the initial state
        successors: (label, letter index) -> successor labels
        accepting: Predicate on labels
        mode: Automaton mode of the result
        priority: Priority of a label, for parity automata
        limits: Caps; max_states bounds the number of labels

    Returns:
        WordAutomaton: States numbered in breadth-first discovery order
    """
    limits = resolve(limits)
    index: Dict[Hashable, int] = {initial: 0}
    labels: List[Hashable] = [initial]
    rows: List[Tuple[FrozenSet[int], ...]] = []
    position = 0
    while position < len(labels):
        label = labels[position]
        row = []
        for k in range(len(alphabet)):
            targets = set()
            for target in successors(label, k):
                if target not in index:
                    index[target] = len(labels)
                    labels.append(target)
                    limits.check('max_states', len(labels), what)
                targets.add(index[target])
            row.append(frozenset(targets))
        rows.append(tuple(row))
        position += 1
    return WordAutomaton(
        mode=mode,
        alphabet=tuple(alphabet),
        delta=tuple(rows),
        initial=0,
        accepting=frozenset(q for q, label in enumerate(labels) if accepting(label)),
        priorities=tuple(priority(label) for label in labels) if priority is not None else None,
        labels=tuple(labels),
    )


def determinize(automaton: WordAutomaton, limits: Optional[ResourceLimits] = None) -> WordAutomaton:
    """
    Powerset construction restricted to subsets reachable from {q0}.

    A subset is accepting iff it meets the accepting set. Subset states are
    labelled with the sorted tuple of their members, and the empty subset is
    kept when reachable so that the result is total.
    """
    if automaton.initial is None:
        start: FrozenSet[int] = frozenset()
    else:
        start = frozenset([automaton.initial])

    def successors(subset: FrozenSet[int], k: int):
        target = set()
        for q in subset:
            target |= automaton.delta[q][k]
        return [frozenset(target)]

    result = explore(automaton.alphabet, start, successors,
                     accepting=lambda subset: bool(subset & automaton.accepting),
                     mode=DFA, limits=limits, what='determinising')
    logger.debug(f"Determinised {automaton.num_states} states into {result.num_states} subsets")
    return WordAutomaton(mode=DFA, alphabet=result.alphabet, delta=result.delta, initial=result.initial,
                         accepting=result.accepting,
                         labels=tuple(tuple(sorted(subset)) for subset in result.labels))


def _empty_like(automaton: WordAutomaton) -> WordAutomaton:
    return WordAutomaton(mode=automaton.mode, alphabet=automaton.alphabet, delta=(), initial=None,
                         accepting=frozenset(), priorities=() if automaton.priorities is not None else None,
                         labels=())


def reachable_states(automaton: WordAutomaton) -> List[int]:
    if automaton.initial is None:
        return []
    seen = {automaton.initial}
    queue = deque([automaton.initial])
    while queue:
        q = queue.popleft()
        for targets in automaton.delta[q]:
            for target in targets:
                if target not in seen:
                    seen.add(target)
                    queue.append(target)
    return sorted(seen)


def _coreachable(automaton: WordAutomaton) -> set:
    reverse: Dict[int, set] = {}
    for q, row in enumerate(automaton.delta):
        for targets in row:
            for target in targets:
                reverse.setdefault(target, set()).add(q)
    seen = set(automaton.accepting)
    queue = deque(seen)
    while queue:
        q = queue.popleft()
        for source in reverse.get(q, ()):
            if source not in seen:
                seen.add(source)
                queue.append(source)
    return seen


def restrict(automaton: WordAutomaton, keep: Iterable[int], mode: Optional[str] = None) -> WordAutomaton:
    """Sub-automaton on the given states, renumbered in increasing order."""
    kept = sorted(set(keep))
    if automaton.initial is None or automaton.initial not in kept:
        return _empty_like(automaton)
    renumber = {q: k for k, q in enumerate(kept)}
    delta = tuple(tuple(frozenset(renumber[t] for t in targets if t in renumber)
                        for targets in automaton.delta[q]) for q in kept)
    return WordAutomaton(
        mode=mode or automaton.mode,
        alphabet=automaton.alphabet,
        delta=delta,
        initial=renumber[automaton.initial],
        accepting=frozenset(renumber[q] for q in automaton.accepting if q in renumber),
        priorities=tuple(automaton.priorities[q] for q in kept) if automaton.priorities is not None else None,
        labels=tuple(automaton.label(q) for q in kept),
    )


def trim(automaton: WordAutomaton) -> WordAutomaton:
    """
    Keep only states on some path from the initial state to an accepting state.

    Returns the stateless automaton when the language is empty. A trimmed DFA
    may be partial.
    """
    useful = set(reachable_states(automaton)) & _coreachable(automaton)
    return restrict(automaton, useful)


def accepts(automaton: WordAutomaton, word: Sequence[Hashable],
            cycle: Optional[Sequence[Hashable]] = None) -> bool:
    """
    Membership of a finite word, or of the lasso word·cycle^ω for Büchi and parity modes.

    Raises:
        UnknownLetterError: On a letter outside the alphabet
    """
    if automaton.initial is None:
        return False
    current = frozenset([automaton.initial])
    for letter in word:
        k = automaton.letter_index(letter)
        current = frozenset(t for q in current for t in automaton.delta[q][k])
    if cycle is None:
        return bool(current & automaton.accepting)
    if automaton.mode not in (BUCHI, PARITY):
        raise PreconditionError("lasso membership needs a deterministic Büchi or parity automaton")
    if not cycle:
        raise PreconditionError("the cycle of a lasso word must be non-empty")
    state = next(iter(current))
    seen: Dict[int, int] = {}
    visited: List[int] = []
    while state not in seen:
        seen[state] = len(visited)
        block = []
        for letter in cycle:
            state = next(iter(automaton.delta[state][automaton.letter_index(letter)]))
            block.append(state)
        visited.append(block)
    repeated = [q for block in visited[seen[state]:] for q in block]
    if automaton.mode == BUCHI:
        return any(q in automaton.accepting for q in repeated)
    return max(automaton.priority(q) for q in repeated) % 2 == 0


def shortest_accepted_word(automaton: WordAutomaton) -> Optional[List[Hashable]]:
    """A shortest accepted finite word, or None when the language is empty."""
    if automaton.initial is None:
        return None
    parent: Dict[int, Tuple[Optional[int], Optional[int]]] = {automaton.initial: (None, None)}
    queue = deque([automaton.initial])
    while queue:
        q = queue.popleft()
        if q in automaton.accepting:
            word = []
            while parent[q][0] is not None:
                q, k = parent[q]
                word.append(automaton.alphabet[k])
            return list(reversed(word))
        for k, targets in enumerate(automaton.delta[q]):
            for target in sorted(targets):
                if target not in parent:
                    parent[target] = (q, k)
                    queue.append(target)
    return None


def minimize(dfa: WordAutomaton) -> WordAutomaton:
    """
    Minimal DFA by partition refinement on the completed automaton.

    Missing transitions go to an explicit dead state, which is removed again
    from the result (so a partial input yields a partial output).
    """
    if dfa.mode != DFA:
        raise PreconditionError("minimize expects a DFA")
    if dfa.initial is None:
        return dfa
    reach = reachable_states(dfa)
    index = {q: k for k, q in enumerate(reach)}
    dead = len(reach)
    width = len(dfa.alphabet)
    table = []
    for q in reach:
        table.append([index[next(iter(t))] if t else dead for t in dfa.delta[q]])
    table.append([dead] * width)
    accepting = [q in dfa.accepting for q in reach] + [False]

    block = [1 if acc else 0 for acc in accepting]
    while True:
        signatures = {}
        refined = []
        for state in range(len(table)):
            signature = (block[state],) + tuple(block[t] for t in table[state])
            refined.append(signatures.setdefault(signature, len(signatures)))
        if len(signatures) == len(set(block)):
            block = refined
            break
        block = refined

    dead_block = block[dead]
    order: List[int] = []
    for state in range(len(reach)):
        if block[state] != dead_block and block[state] not in order:
            order.append(block[state])
    renumber = {b: k for k, b in enumerate(order)}
    representative: Dict[int, int] = {}
    for state in range(len(reach)):
        representative.setdefault(block[state], state)
    delta = []
    labels = []
    for b in order:
        state = representative[b]
        labels.append(dfa.label(reach[state]))
        delta.append(tuple(frozenset([renumber[block[t]]]) if block[t] != dead_block else frozenset()
                           for t in table[state]))
    if block[index[dfa.initial]] == dead_block:
        return _empty_like(dfa)
    return WordAutomaton(
        mode=DFA, alphabet=dfa.alphabet, delta=tuple(delta),
        initial=renumber[block[index[dfa.initial]]],
        accepting=frozenset(renumber[block[s]] for s in range(len(reach)) if accepting[s]),
        labels=tuple(labels))


@dataclass(frozen=True)
class MooreMachine:
    """
    Deterministic machine with outputs on states.

    transitions[m][k] is μ(m, k-th letter) and outputs[m] is ν(m). The word
    function maps x0…xℓ to ν(μ(m0, x0…xℓ)).
    """

    alphabet: Tuple[Hashable, ...]
    transitions: Tuple[Tuple[int, ...], ...]
    outputs: Tuple[Hashable, ...]
    initial: int = 0
    labels: Optional[Tuple[Hashable, ...]] = field(default=None, compare=False)

    @cached_property
    def letters(self) -> Dict[Hashable, int]:
        return _letter_map(self.alphabet)

    @property
    def num_states(self) -> int:
        return len(self.outputs)

    def letter_index(self, letter: Hashable) -> int:
        try:
            return self.letters[letter]
        except KeyError:
            raise UnknownLetterError(letter, 'machine alphabet') from None

    def step(self, state: int, letter: Hashable) -> int:
        return self.transitions[state][self.letter_index(letter)]

    def state_after(self, word: Sequence[Hashable]) -> int:
        state = self.initial
        for letter in word:
            state = self.step(state, letter)
        return state

    def output_after(self, word: Sequence[Hashable]) -> Hashable:
        return self.outputs[self.state_after(word)]

    def validate(self) -> None:
        if not 0 <= self.initial < self.num_states:
            raise PreconditionError("initial state out of range")
        for m, row in enumerate(self.transitions):
            if len(row) != len(self.alphabet):
                raise PreconditionError(f"update of state {m} is not total")
            if any(not 0 <= t < self.num_states for t in row):
                raise PreconditionError(f"update of state {m} leaves the machine")


@dataclass(frozen=True)
class MealyMachine:
    """Deterministic machine with outputs on transitions: outputs[m][k] = ν(m, k-th letter)."""

    alphabet: Tuple[Hashable, ...]
    transitions: Tuple[Tuple[int, ...], ...]
    outputs: Tuple[Tuple[Hashable, ...], ...]
    initial: int = 0
    labels: Optional[Tuple[Hashable, ...]] = field(default=None, compare=False)

    @cached_property
    def letters(self) -> Dict[Hashable, int]:
        return _letter_map(self.alphabet)

    @property
    def num_states(self) -> int:
        return len(self.transitions)

    def letter_index(self, letter: Hashable) -> int:
        try:
            return self.letters[letter]
        except KeyError:
            raise UnknownLetterError(letter, 'machine alphabet') from None

    def step(self, state: int, letter: Hashable) -> Tuple[int, Hashable]:
        k = self.letter_index(letter)
        return self.transitions[state][k], self.outputs[state][k]


def run_moore(machine: MooreMachine, word: Sequence[Hashable]) -> List[Hashable]:
    """Output word of the same length; its i-th letter is ν(μ(x0…xi))."""
    state = machine.initial
    result = []
    for letter in word:
        state = machine.step(state, letter)
        result.append(machine.outputs[state])
    return result


def run_mealy(machine: MealyMachine, word: Sequence[Hashable]) -> List[Hashable]:
    state = machine.initial
    result = []
    for letter in word:
        state, output = machine.step(state, letter)
        result.append(output)
    return result


def identity_moore(alphabet: Sequence[Hashable]) -> MooreMachine:
    """One state per letter plus a start state; every state echoes the last letter read."""
    alphabet = tuple(alphabet)
    n = len(alphabet)
    row = tuple(range(1, n + 1))
    return MooreMachine(alphabet=alphabet, transitions=tuple(row for _ in range(n + 1)),
                        outputs=(None,) + alphabet, initial=0, labels=('start',) + alphabet)


def constant_moore(alphabet: Sequence[Hashable], output: Hashable) -> MooreMachine:
    alphabet = tuple(alphabet)
    return MooreMachine(alphabet=alphabet, transitions=((0,) * len(alphabet),), outputs=(output,))


def moore_from_dfa(dfa: WordAutomaton, output: Callable[[int], Hashable]) -> MooreMachine:
    """Read a total DFA as a Moore machine whose output is computed from each state."""
    if dfa.initial is None:
        raise PreconditionError("cannot build a machine from an automaton without states")
    transitions = []
    for q, row in enumerate(dfa.delta):
        if any(len(targets) != 1 for targets in row):
            raise PreconditionError(f"automaton is not total at state {dfa.label(q)}")
        transitions.append(tuple(next(iter(targets)) for targets in row))
    return MooreMachine(alphabet=dfa.alphabet, transitions=tuple(transitions),
                        outputs=tuple(output(q) for q in range(dfa.num_states)),
                        initial=dfa.initial, labels=dfa.labels)


def mealy_to_moore(machine: MealyMachine, initial_output: Hashable,
                   limits: Optional[ResourceLimits] = None) -> MooreMachine:
    """
    Equivalent Moore machine whose states pair a Mealy state with the last output.

    Returns:
        MooreMachine: run_moore of the result equals run_mealy of the input
    """
    limits = resolve(limits)
    start = (machine.initial, initial_output)
    index = {start: 0}
    states = [start]
    rows = []
    position = 0
    while position < len(states):
        m, _ = states[position]
        row = []
        for k in range(len(machine.alphabet)):
            nxt = (machine.transitions[m][k], machine.outputs[m][k])
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
                limits.check('max_states', len(states), 'converting a Mealy machine')
            row.append(index[nxt])
        rows.append(tuple(row))
        position += 1
    return MooreMachine(alphabet=machine.alphabet, transitions=tuple(rows),
                        outputs=tuple(output for _, output in states), initial=0, labels=tuple(states))


def moore_product(machines: Sequence[MooreMachine], combine: Callable[[Tuple], Hashable] = tuple,
                  limits: Optional[ResourceLimits] = None) -> MooreMachine:
    """
    Synchronous product of machines over the same alphabet, reachable part only.

    The output of a product state is combine(tuple of component outputs).
    """
    if not machines:
        raise PreconditionError("moore_product needs at least one machine")
    alphabet = machines[0].alphabet
    for machine in machines[1:]:
        if machine.alphabet != alphabet:
            raise AlphabetMismatchError("machines in a product must share their alphabet")
    limits = resolve(limits)
    start = tuple(machine.initial for machine in machines)
    index = {start: 0}
    states = [start]
    rows = []
    position = 0
    while position < len(states):
        current = states[position]
        row = []
        for k in range(len(alphabet)):
            nxt = tuple(machine.transitions[m][k] for machine, m in zip(machines, current))
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
                limits.check('max_states', len(states), 'building a machine product')
            row.append(index[nxt])
        rows.append(tuple(row))
        position += 1
    outputs = tuple(combine(tuple(machine.outputs[m] for machine, m in zip(machines, state)))
                    for state in states)
    return MooreMachine(alphabet=alphabet, transitions=tuple(rows), outputs=outputs, initial=0,
                        labels=tuple(states))


@dataclass(frozen=True)
class Lasso:
    """A path prefix followed by a cycle returning to the prefix's last node."""

    prefix: Tuple[Hashable, ...]
    cycle: Tuple[Hashable, ...]


def find_lasso(digraph: nx.DiGraph, initial: Hashable, allowed: Callable[[Hashable], bool],
               order: Optional[Dict[Hashable, int]] = None) -> Optional[Lasso]:
    """
    Find a cycle inside the allowed nodes reachable from initial.

    Among strongly connected components of the allowed subgraph that carry a
    cycle, the one containing the earliest node (by order, or insertion order)
    is chosen; the prefix is a shortest path to its entry node.

    Returns:
        Lasso or None: prefix ends at the entry node, cycle ends back at it
    """
    if order is None:
        order = {node: k for k, node in enumerate(digraph.nodes)}
    reachable = nx.descendants(digraph, initial) | {initial}
    sub = digraph.subgraph(node for node in reachable if allowed(node))
    best = None
    for component in nx.strongly_connected_components(sub):
        node = min(component, key=order.__getitem__)
        if len(component) == 1 and not sub.has_edge(node, node):
            continue
        if best is None or order[node] < order[best[0]]:
            best = (node, component)
    if best is None:
        return None
    entry, component = best
    prefix = nx.shortest_path(digraph, initial, entry)
    inner = sub.subgraph(component)
    if inner.has_edge(entry, entry):
        cycle = [entry]
    else:
        candidates = sorted((w for w in inner.successors(entry)), key=order.__getitem__)
        cycle = nx.shortest_path(inner, candidates[0], entry)
    return Lasso(prefix=tuple(prefix), cycle=tuple(cycle))


@dataclass(frozen=True)
class StrategyProfile:
    """
    One Moore machine per player, reading that player's observation names and
    outputting its action names. The action at a history is the output after
    reading the observations from round 1 on.
    """

    machines: Tuple[MooreMachine, ...]

    @property
    def players(self) -> int:
        return len(self.machines)

    def validate_against(self, observations: Sequence[Sequence[Hashable]],
                         actions: Sequence[Sequence[Hashable]]) -> None:
        """
        Raises:
            AlphabetMismatchError: When a machine reads unknown observations or outputs unknown actions
        """
        if len(observations) != self.players:
            raise AlphabetMismatchError(f"profile has {self.players} machines for {len(observations)} players")
        for player, machine in enumerate(self.machines):
            machine.validate()
            missing = sorted(set(observations[player]) - set(machine.alphabet))
            if missing:
                raise AlphabetMismatchError(f"machine of player {player + 1} cannot read observations {missing}")
            foreign = sorted(set(map(str, machine.outputs)) - set(map(str, actions[player])))
            if foreign:
                raise AlphabetMismatchError(f"machine of player {player + 1} outputs unknown actions {foreign}")

    def reindex(self, alphabets: Sequence[Sequence[Hashable]]) -> 'StrategyProfile':
        """
        Machines over new input alphabets; letters a machine never read lead to
        an absorbing state that repeats the initial output.
        """
        result = []
        for machine, alphabet in zip(self.machines, alphabets):
            alphabet = tuple(alphabet)
            if alphabet == machine.alphabet:
                result.append(machine)
                continue
            sink = machine.num_states
            rows = []
            for m in range(machine.num_states):
                rows.append(tuple(machine.transitions[m][machine.letters[b]] if b in machine.letters else sink
                                  for b in alphabet))
            rows.append(tuple(sink for _ in alphabet))
            labels = None if machine.labels is None else tuple(machine.labels) + ('unexpected',)
            result.append(MooreMachine(alphabet=alphabet, transitions=tuple(rows),
                                       outputs=tuple(machine.outputs) + (machine.outputs[machine.initial],),
                                       initial=machine.initial, labels=labels))
        return StrategyProfile(tuple(result))

    def total_states(self) -> int:
        return sum(machine.num_states for machine in self.machines)
