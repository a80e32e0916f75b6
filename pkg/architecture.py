"""
Monitored Architectures
Processes, view monitors and routers; translations between architectures and
games; pipeline constructions (feedback links, sequentialisation with the
pipe shift) and hierarchy-maintaining routing.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

from automata import DFA, MealyMachine, MooreMachine, determinize, explore, minimize
from game_errors import AggregationError, AlphabetMismatchError, DecompositionError, PreconditionError
from game_graph import LOSE, GameBuilder, GameGraph, format_label, iter_histories, require_valid
from hierarchy_analyzer import non_hierarchy_nfa
from oracles import nfa_is_empty
from resource_limits import ResourceLimits, resolve
from winning_conditions import WinningCondition

logger = logging.getLogger('Architecture')

ENVIRONMENT = 0
SINK_STATE = 'z'
DISABLED = '⊖'
PANIC = 'panic'
SAFE = 'safe'


@dataclass(frozen=True)
class Process:
    """
    A process automaton (Q, A, B, q0, δ).

    transitions[q][a][b] is δ(q, a, b); an action is enabled at q when it has
    an entry there, and enabled actions must be defined for every observation.
    """

    name: str
    actions: Tuple[Hashable, ...]
    observations: Tuple[Hashable, ...]
    transitions: Tuple[Dict[Hashable, Dict[Hashable, int]], ...]
    initial: int = 0
    labels: Optional[Tuple[Hashable, ...]] = field(default=None, compare=False)

    @property
    def num_states(self) -> int:
        return len(self.transitions)

    def state_name(self, q: int) -> str:
        return format_label(self.labels[q]) if self.labels is not None else str(q)

    def enabled(self, q: int) -> Tuple[Hashable, ...]:
        return tuple(a for a in self.actions if a in self.transitions[q])

    def step(self, q: int, action: Hashable, observation: Hashable) -> int:
        try:
            return self.transitions[q][action][observation]
        except KeyError:
            raise PreconditionError(f"process {self.name}: no transition from {self.state_name(q)} "
                                    f"on ({format_label(action)}, {format_label(observation)})") from None

    @property
    def is_black_box(self) -> bool:
        return self.num_states == 1

    @property
    def is_white_box(self) -> bool:
        return all(len(self.enabled(q)) == 1 for q in range(self.num_states))

    def validate(self) -> None:
        """
        Raises:
            PreconditionError: When a state has no enabled action or an enabled action is partial
        """
        if not 0 <= self.initial < self.num_states:
            raise PreconditionError(f"process {self.name}: initial state out of range")
        observations = set(self.observations)
        for q, row in enumerate(self.transitions):
            if not row:
                raise PreconditionError(f"process {self.name}: no action enabled at {self.state_name(q)}")
            for action, targets in row.items():
                if action not in self.actions:
                    raise AlphabetMismatchError(f"process {self.name}: unknown action {format_label(action)}")
                missing = observations - set(targets)
                if missing:
                    raise PreconditionError(
                        f"process {self.name}: action {format_label(action)} at {self.state_name(q)} "
                        f"is undefined on {sorted(map(format_label, missing))}")
                if any(not 0 <= t < self.num_states for t in targets.values()):
                    raise PreconditionError(f"process {self.name}: transition leaves the automaton")


def black_box(actions: Sequence[Hashable], observations: Sequence[Hashable], name: str = 'P') -> Process:
    """Single state, every action enabled."""
    row = {a: {b: 0 for b in observations} for a in actions}
    return Process(name, tuple(actions), tuple(observations), (row,), labels=('*',))


def white_box(machine: MooreMachine, actions: Sequence[Hashable], name: str = 'S') -> Process:
    """The program of a Moore machine: exactly its output is enabled in each state."""
    rows = tuple({machine.outputs[m]: {b: machine.step(m, b) for b in machine.alphabet}}
                 for m in range(machine.num_states))
    return Process(name, tuple(actions), tuple(machine.alphabet), rows, machine.initial, machine.labels)


def _first(observation: Hashable) -> Hashable:
    return observation[0] if isinstance(observation, tuple) else observation


def pass_through_process(observations: Sequence[Hashable], initial: Hashable,
                         relay: Callable[[Hashable], Hashable] = _first, name: str = 'relay') -> Process:
    """
    White box that emits, as its action, relay of the observation received in
    the previous round (initial before the first observation).
    """
    values = list(dict.fromkeys([initial] + [relay(b) for b in observations]))
    index = {value: k for k, value in enumerate(values)}
    rows = tuple({value: {b: index[relay(b)] for b in observations}} for value in values)
    return Process(name, tuple(values), tuple(observations), rows, 0, tuple(values))


def extend_observations(process: Process, alphabet: Sequence[Hashable],
                        project: Callable[[Hashable], Hashable]) -> Process:
    """The same process reading a richer alphabet through a projection onto its own."""
    rows = tuple({a: {b: targets[project(b)] for b in alphabet} for a, targets in row.items()}
                 for row in process.transitions)
    return Process(process.name, process.actions, tuple(alphabet), rows, process.initial, process.labels)


def extend_program(machine: MooreMachine, alphabet: Sequence[Hashable],
                   project: Callable[[Hashable], Hashable]) -> MooreMachine:
    alphabet = tuple(alphabet)
    rows = tuple(tuple(machine.step(m, project(b)) for b in alphabet) for m in range(machine.num_states))
    return MooreMachine(alphabet, rows, machine.outputs, machine.initial, machine.labels)


@dataclass(frozen=True)
class ViewMonitor:
    """
    A Mealy machine over global actions Γ = A^0 × A^1 × … × A^n whose outputs
    are observation tuples (b^1, …, b^n).

    links records the communication graph of hard-wired monitors (pairs
    sender -> receiver, Environment = 0), and signal_of extracts the
    communication component of an action.
    """

    machine: MealyMachine
    actions: Tuple[Tuple[Hashable, ...], ...]
    observations: Tuple[Tuple[Hashable, ...], ...]
    links: Optional[Tuple[Tuple[int, int], ...]] = None
    signal_of: Optional[Callable[[Hashable], Hashable]] = field(default=None, compare=False)

    @property
    def processes(self) -> int:
        return len(self.actions) - 1

    @property
    def num_states(self) -> int:
        return self.machine.num_states

    @property
    def initial(self) -> int:
        return self.machine.initial

    def state_name(self, m: int) -> str:
        return format_label(self.machine.labels[m]) if self.machine.labels is not None else str(m)

    def step(self, m: int, letter: Tuple) -> Tuple[int, Tuple]:
        return self.machine.step(m, tuple(letter))

    def validate(self) -> None:
        expected = set(itertools.product(*self.actions))
        if set(self.machine.alphabet) != expected:
            raise AlphabetMismatchError("monitor is not defined on every global action")
        for row in self.machine.outputs:
            for output in row:
                if len(output) != self.processes or any(
                        b not in alphabet for b, alphabet in zip(output, self.observations)):
                    raise AlphabetMismatchError(f"monitor outputs {format_label(output)} outside B")


def _explore_mealy(alphabet: Sequence[Hashable], initial: Hashable,
                   step: Callable[[Hashable, Hashable], Tuple[Hashable, Hashable]],
                   limits: Optional[ResourceLimits] = None, what: str = 'building a monitor') -> MealyMachine:
    limits = resolve(limits)
    alphabet = tuple(alphabet)
    index = {initial: 0}
    labels = [initial]
    rows, outputs = [], []
    position = 0
    while position < len(labels):
        row, out = [], []
        for letter in alphabet:
            target, output = step(labels[position], letter)
            if target not in index:
                index[target] = len(labels)
                labels.append(target)
                limits.check('max_states', len(labels), what)
            row.append(index[target])
            out.append(output)
        rows.append(tuple(row))
        outputs.append(tuple(out))
        position += 1
    return MealyMachine(alphabet, tuple(rows), tuple(outputs), 0, tuple(labels))


def link_monitor(actions: Sequence[Sequence[Hashable]], links: Sequence[Tuple[int, int]],
                 signal_of: Callable[[Hashable], Hashable] = lambda a: a) -> ViewMonitor:
    """
    The one-state monitor of a communication graph: process i observes the
    tuple of signals y^j of its senders j -> i, in increasing sender order.
    """
    actions = tuple(tuple(alphabet) for alphabet in actions)
    links = tuple(sorted(set(links)))
    senders = [sorted(j for j, target in links if target == i) for i in range(len(actions))]
    observations = tuple(
        tuple(itertools.product(*[list(dict.fromkeys(signal_of(a) for a in actions[j])) for j in senders[i]]))
        for i in range(1, len(actions)))

    def step(label, letter):
        return label, tuple(tuple(signal_of(letter[j]) for j in senders[i]) for i in range(1, len(actions)))

    machine = _explore_mealy(tuple(itertools.product(*actions)), 'link', step, what='building a link monitor')
    return ViewMonitor(machine, actions, observations, links, signal_of)


def _communication(action: Hashable) -> Hashable:
    return action[1]


def pipeline_monitor(n: int, signals: Sequence[Sequence[Hashable]],
                     controls: Optional[Sequence[Sequence[Hashable]]] = None,
                     last_actions: Sequence[Hashable] = ('0',)) -> ViewMonitor:
    """
    One-state monitor for the path 0 -> 1 -> … -> n.

    Args:
        n: Number of processes
        signals: Communication alphabets Y^0 … Y^(n-1)
        controls: Control alphabets X^0 … X^n; when given, actions are pairs (x, y)
                  and the last process emits the dummy signal '0'
        last_actions: Actions of process n when no controls are given
    """
    if n < 1:
        raise PreconditionError("a pipeline needs at least one process")
    if len(signals) != n:
        raise PreconditionError(f"a pipeline of {n} processes needs {n} signal alphabets")
    if controls is None:
        actions = [tuple(signals[i]) for i in range(n)] + [tuple(last_actions)]
        return link_monitor(actions, [(i - 1, i) for i in range(1, n + 1)])
    if len(controls) != n + 1:
        raise PreconditionError(f"a pipeline of {n} processes needs {n + 1} control alphabets")
    actions = [tuple(itertools.product(controls[i], signals[i])) for i in range(n)]
    actions.append(tuple(itertools.product(controls[n], ('0',))))
    return link_monitor(actions, [(i - 1, i) for i in range(1, n + 1)], _communication)


@dataclass(frozen=True)
class MonitoredArchitecture:
    """Processes P^1 … P^n, the Environment's actions A^0 and a view monitor."""

    processes: Tuple[Process, ...]
    monitor: ViewMonitor
    initial_observation: Optional[Tuple[Hashable, ...]] = None

    @property
    def environment_actions(self) -> Tuple[Hashable, ...]:
        return self.monitor.actions[ENVIRONMENT]

    @property
    def size(self) -> int:
        return len(self.processes)

    def start_observation(self) -> Tuple[Hashable, ...]:
        if self.initial_observation is not None:
            return tuple(self.initial_observation)
        return tuple(alphabet[0] for alphabet in self.monitor.observations)

    def validate(self) -> None:
        """
        Raises:
            AlphabetMismatchError: When processes and monitor disagree on alphabets
            PreconditionError: When a process violates its invariants
        """
        if self.monitor.processes != self.size:
            raise AlphabetMismatchError(f"monitor serves {self.monitor.processes} processes, "
                                        f"architecture has {self.size}")
        self.monitor.validate()
        for i, process in enumerate(self.processes, start=1):
            process.validate()
            if set(process.actions) != set(self.monitor.actions[i]):
                raise AlphabetMismatchError(f"process {process.name} and the monitor disagree on A^{i}")
            missing = set(self.monitor.observations[i - 1]) - set(process.observations)
            if missing:
                raise AlphabetMismatchError(f"process {process.name} cannot read observations "
                                            f"{sorted(map(format_label, missing))}")
        start = self.start_observation()
        if any(b not in alphabet for b, alphabet in zip(start, self.monitor.observations)):
            raise AlphabetMismatchError(f"initial observation {format_label(start)} outside B")

    def stats(self) -> Dict:
        return {'processes': self.size,
                'process_states': [p.num_states for p in self.processes],
                'monitor_states': self.monitor.num_states,
                'environment_actions': len(self.environment_actions)}


@dataclass(frozen=True)
class ArchitectureGame:
    """The game of an architecture; states[v] is (b, m, q) or None for the disabled-action sink."""

    game: GameGraph
    condition: WinningCondition
    states: Tuple[Optional[Tuple], ...]
    sink: Optional[int] = None

    def monitor_trace(self, positions: Sequence[int], arch: MonitoredArchitecture) -> Tuple[str, ...]:
        return tuple(arch.monitor.state_name(self.states[v][1]) if self.states[v] is not None else DISABLED
                     for v in positions)


def arch_product(arch: MonitoredArchitecture, spec: Optional[WinningCondition] = None,
                 limits: Optional[ResourceLimits] = None) -> ArchitectureGame:
    """
    Positions B × M × Q^1 × … × Q^n; player i observes b^i and plays A^i.

    A move ((b, m, q), a, (b′, m′, q′)) exists for every Environment action a^0
    when all a^i are enabled, with (m′, b′) the monitor step and
    q′^i = δ^i(q^i, a^i, b′^i). Profiles with a disabled action lead to a
    losing sink. Positions are colored by the monitor state, so the
    specification is a condition over monitor-state names.
    """
    limits = resolve(limits)
    arch.validate()
    processes, monitor = arch.processes, arch.monitor
    space = [tuple(itertools.product(*monitor.observations)), range(monitor.num_states)]
    space += [range(p.num_states) for p in processes]
    total = len(space[0]) * monitor.num_states
    for p in processes:
        total *= p.num_states
    limits.check('max_states', total, 'building the architecture game')

    names = [tuple(format_label(a) for a in p.actions) for p in processes]
    builder = GameBuilder(arch.size, names)

    def label(b, m, qs):
        return (b, monitor.state_name(m), tuple(p.state_name(q) for p, q in zip(processes, qs)))

    states = []
    for b, m, *qs in itertools.product(*space):
        builder.add_position(label(b, m, qs), [format_label(x) for x in b], color=monitor.state_name(m))
        states.append((b, m, tuple(qs)))
    sink = None
    for b, m, qs in states:
        source = label(b, m, qs)
        for profile in builder_profiles(processes):
            actions = tuple(p.actions[k] for p, k in zip(processes, profile))
            if not all(a in p.transitions[q] for p, a, q in zip(processes, actions, qs)):
                if sink is None:
                    sink = builder.add_position(DISABLED, [DISABLED] * arch.size, color=LOSE)
                builder.add_move(source, profile, DISABLED)
                continue
            for a0 in arch.environment_actions:
                m2, b2 = monitor.step(m, (a0,) + actions)
                q2 = tuple(p.step(q, a, o) for p, q, a, o in zip(processes, qs, actions, b2))
                builder.add_move(source, profile, label(b2, m2, q2))
    if sink is not None:
        builder.add_moves(DISABLED, DISABLED)
        states.append(None)
    start = arch.start_observation()
    initial = label(start, monitor.initial, tuple(p.initial for p in processes))
    game = builder.build(initial)

    monitor_names = [monitor.state_name(m) for m in range(monitor.num_states)]
    condition = spec if spec is not None else WinningCondition.trivial(monitor_names)
    if sink is not None:
        condition = condition.excluding(LOSE)
    logger.info(f"✅ Architecture game: {game.num_positions} positions "
                f"({len(space[0])} observations × {monitor.num_states} monitor states)")
    return ArchitectureGame(game, condition, tuple(states), sink)


def builder_profiles(processes: Sequence[Process]):
    return itertools.product(*(range(len(p.actions)) for p in processes))


def arch_to_game(arch: MonitoredArchitecture, spec: Optional[WinningCondition] = None,
                 limits: Optional[ResourceLimits] = None) -> Tuple[GameGraph, WinningCondition]:
    product = arch_product(arch, spec, limits)
    return product.game, product.condition


def _localized_process(game: GameGraph, i: int, limits: ResourceLimits) -> Process:
    actions = game.action_names[i]
    observations = game.observation_names[i]
    letters = tuple(itertools.product(range(len(actions)), range(len(observations))))

    def successors(subset: FrozenSet[int], k: int):
        a, b = letters[k]
        targets = frozenset(target for u in subset for _, profile, target in game.outgoing[u]
                            if profile[i] == a and game.obs(i, target) == b)
        return [targets] if targets else []

    dfa = explore(letters, frozenset([game.initial]), successors, accepting=lambda label: True,
                  mode=DFA, limits=limits, what=f'localising the moves of player {i + 1}')
    dfa = minimize(dfa)
    sink = dfa.num_states
    rows = []
    for q in range(dfa.num_states):
        row = {}
        for k, (a, b) in enumerate(letters):
            target = dfa.step(q, letters[k])
            row.setdefault(actions[a], {})[observations[b]] = sink if target is None else target
        rows.append(row)
    rows.append({a: {b: sink for b in observations} for a in actions})
    labels = tuple(format_label(frozenset(game.position_names[v] for v in dfa.label(q)))
                   for q in range(dfa.num_states)) + (SINK_STATE,)
    return Process(f'P{i + 1}', actions, observations, tuple(rows), dfa.initial, labels)


def game_to_arch(game: GameGraph, condition: WinningCondition, limits: Optional[ResourceLimits] = None
                 ) -> Tuple[MonitoredArchitecture, WinningCondition]:
    """
    Processes from the localised, determinised and minimised game graph of each
    player, completed with the sink z; the monitor is the game itself over
    Γ = directions × profiles.

    Directions number the sorted successors of (position, profile); a direction
    beyond their count wraps around. The specification is the condition read
    over monitor states, that is over positions; the sink z is unreachable in
    runs of the monitor.
    """
    limits = resolve(limits)
    game = require_valid(game)
    processes = tuple(_localized_process(game, i, limits) for i in range(game.players))
    degree = max(len(game.successors(v, profile)) for v in range(game.num_positions) for profile in game.profiles)
    directions = tuple(str(d) for d in range(degree))
    action_index = [{a: k for k, a in enumerate(alphabet)} for alphabet in game.action_names]
    actions = (directions,) + tuple(game.action_names)

    def step(name: str, letter: Tuple):
        v = game.position(name)
        profile = tuple(action_index[i][a] for i, a in enumerate(letter[1:]))
        targets = game.successors(v, profile)
        w = targets[int(letter[0]) % len(targets)]
        return game.position_names[w], tuple(game.obs_name(i, w) for i in range(game.players))

    machine = _explore_mealy(tuple(itertools.product(*actions)), game.position_names[game.initial], step,
                             limits, 'turning the game into a monitor')
    monitor = ViewMonitor(machine, actions, tuple(game.observation_names))
    arch = MonitoredArchitecture(processes, monitor,
                                 tuple(game.obs_name(i, game.initial) for i in range(game.players)))
    names = [monitor.state_name(m) for m in range(monitor.num_states)]
    spec = condition.relabel(names, lambda name: game.color(game.position(name)))
    logger.info(f"✅ Architecture from game: process states {[p.num_states for p in processes]}, "
                f"{len(directions)} directions, {monitor.num_states} monitor states")
    return arch, spec


def runs(arch: MonitoredArchitecture, depth: int, programs: Optional[Sequence[Optional[MooreMachine]]] = None,
         limits: Optional[ResourceLimits] = None) -> List[Tuple[Tuple, ...]]:
    """
    Global runs of the given length, as sequences of global actions.

    Processes with a program play its output (which must be enabled); the
    others range over their enabled actions.
    """
    limits = resolve(limits)
    programs = list(programs) if programs is not None else [None] * arch.size
    processes, monitor = arch.processes, arch.monitor
    result: List[Tuple[Tuple, ...]] = []

    def choices(qs, ps):
        options = []
        for p, q, program, m in zip(processes, qs, programs, ps):
            if program is None:
                options.append(p.enabled(q))
                continue
            action = program.outputs[m]
            if action not in p.transitions[q]:
                raise PreconditionError(f"program of {p.name} plays disabled action {format_label(action)}")
            options.append((action,))
        return itertools.product(*options)

    def extend(prefix, m, qs, ps):
        if len(prefix) == depth:
            result.append(tuple(prefix))
            limits.check('max_histories', len(result), 'enumerating architecture runs')
            return
        for actions in choices(qs, ps):
            for a0 in arch.environment_actions:
                letter = (a0,) + actions
                m2, b = monitor.step(m, letter)
                qs2 = tuple(p.step(q, a, o) for p, q, a, o in zip(processes, qs, actions, b))
                ps2 = tuple(m_ if program is None else program.step(m_, o)
                            for program, m_, o in zip(programs, ps, b))
                extend(prefix + [letter], m2, qs2, ps2)

    extend([], monitor.initial, tuple(p.initial for p in processes),
           tuple(0 if program is None else program.initial for program in programs))
    return sorted(result, key=lambda run: tuple(map(format_label, run)))


def history_correspondence(game: GameGraph, limits: Optional[ResourceLimits] = None, depth: int = 5) -> Dict:
    """
    Compare the histories of a game with those of arch_to_game(game_to_arch(game)).

    Histories of the round-trip game are read through their monitor states,
    which are positions of the original game.
    """
    limits = resolve(limits)
    condition = WinningCondition.trivial(game.color_names)
    arch, spec = game_to_arch(game, condition, limits)
    product = arch_product(arch, spec, limits)
    original = {tuple(game.position_names[v] for v in h.positions): h for h in iter_histories(game, depth)}
    traces: Dict[Tuple[str, ...], int] = {}
    observations_match = True
    for history in iter_histories(product.game, depth):
        trace = product.monitor_trace(history.positions, arch)
        traces[trace] = traces.get(trace, 0) + 1
        source = original.get(trace)
        if source is None or any(
                [game.observation_names[i][b] for b in game.observation_word(i, source.positions)]
                != [product.game.observation_names[i][b] for b in product.game.observation_word(i, history.positions)]
                for i in range(game.players)):
            observations_match = False
    return {
        'depth': depth,
        'histories': len(original),
        'round_trip_histories': sum(traces.values()),
        'traces_match': set(traces) == set(original),
        'bijective': set(traces) == set(original) and all(count == 1 for count in traces.values()),
        'observations_match': observations_match,
    }


def add_feedback_links(arch: MonitoredArchitecture) -> MonitoredArchitecture:
    """
    Deliver to every process j its own signal and the signals of all processes
    i > j as well.

    Process j then observes (y^(j-1), y^j, …, y^n), which determines what
    process j+1 observes. Processes keep their behaviour: they read the
    extended observation through its first component, the signal of their
    pipeline predecessor.

    Raises:
        PreconditionError: When the monitor is not a pipeline
    """
    monitor = arch.monitor
    n = monitor.processes
    pipeline = tuple((i - 1, i) for i in range(1, n + 1))
    if monitor.links != pipeline or monitor.num_states != 1:
        raise PreconditionError("feedback links are only added to pipeline monitors")
    links = pipeline + tuple((i, j) for i in range(1, n + 1) for j in range(1, i + 1))
    extended = link_monitor(monitor.actions, links, monitor.signal_of or (lambda a: a))
    processes = tuple(extend_observations(p, extended.observations[k], _prefix)
                      for k, p in enumerate(arch.processes))
    initial = None
    if arch.initial_observation is not None:
        initial = tuple(next(b for b in alphabet if b[:1] == start[:1])
                        for alphabet, start in zip(extended.observations, arch.initial_observation))
    logger.info(f"🔧 Added {len(links) - len(pipeline)} feedback links")
    return MonitoredArchitecture(processes, extended, initial)


def _prefix(observation: Tuple) -> Tuple:
    return observation[:1]


def feedback_free_programs(arch: MonitoredArchitecture, programs: Sequence[MooreMachine],
                           limits: Optional[ResourceLimits] = None) -> List[MooreMachine]:
    """
    Programs for the pipeline arch generating the same runs as the given
    programs do on add_feedback_links(arch).

    Process i runs the synchronised product of the programs of i, i+1, …, n
    and rebuilds the signals it would have received over the feedback links
    from the outputs of the simulated states.

    Raises:
        PreconditionError: When the monitor is not a pipeline or a program count is wrong
    """
    limits = resolve(limits)
    extended = add_feedback_links(arch).monitor
    signal = arch.monitor.signal_of or (lambda a: a)
    if len(programs) != arch.size:
        raise PreconditionError(f"expected {arch.size} programs, got {len(programs)}")
    for k, program in enumerate(programs):
        if set(program.alphabet) != set(extended.observations[k]):
            raise AlphabetMismatchError(f"program of process {k + 1} does not read the feedback observations")

    result = []
    for i in range(arch.size):
        machines = programs[i:]
        alphabet = tuple(arch.monitor.observations[i])

        def successor(states, b, machines=machines):
            signals = tuple(signal(m.outputs[q]) for m, q in zip(machines, states))
            views = [b[:1] + signals] + [signals[k - 1:] for k in range(1, len(machines))]
            return tuple(m.step(q, view) for m, q, view in zip(machines, states, views))

        start = tuple(m.initial for m in machines)
        index = {start: 0}
        states = [start]
        rows = []
        position = 0
        while position < len(states):
            row = []
            for b in alphabet:
                nxt = successor(states[position], b)
                if nxt not in index:
                    index[nxt] = len(states)
                    states.append(nxt)
                    limits.check('max_states', len(states), f'removing feedback links of process {i + 1}')
                row.append(index[nxt])
            rows.append(tuple(row))
            position += 1
        outputs = tuple(machines[0].outputs[state[0]] for state in states)
        result.append(MooreMachine(alphabet, tuple(rows), outputs, 0, tuple(states)))
    logger.info(f"🔧 Feedback-free programs with {[m.num_states for m in result]} states")
    return result


def chain_decomposition(game: GameGraph, order: Sequence[int]) -> List[Dict[str, str]]:
    """
    Maps f^k with β^(order[k]) = f^k ∘ β^(order[k-1]) for k ≥ 1, as name tables.

    Raises:
        DecompositionError: When some observation is not a function of the previous player's
    """
    maps: List[Dict[str, str]] = []
    for previous, player in zip(order, order[1:]):
        table: Dict[str, str] = {}
        for v in range(game.num_positions):
            b, c = game.obs_name(previous, v), game.obs_name(player, v)
            if table.setdefault(b, c) != c:
                raise DecompositionError(
                    f"observation of player {player + 1} is not a function of player {previous + 1}'s: "
                    f"'{b}' yields both '{table[b]}' and '{c}'")
        maps.append(table)
    return maps


@dataclass(frozen=True)
class PipeShiftSpecification:
    """
    The specification of a sequentialised pipeline over the source architecture.

    A target prefix is admitted when it is the pipe of a source run prefix;
    target letters are compared through their control components, reordered
    from pipeline stages to the source players.
    """

    source: MonitoredArchitecture
    condition: WinningCondition
    stages: int
    order: Tuple[int, ...]

    @staticmethod
    def pipe(run: Sequence[Tuple], n: int) -> List[Tuple]:
        """a′_t = (a_t^0, a_(t+1)^1, …, a_(t+n)^n) for every t with t + n < len(run)."""
        return [tuple(run[t + i][i] for i in range(n + 1)) for t in range(len(run) - n)]

    @staticmethod
    def unpipe(piped: Sequence[Tuple], n: int) -> List[Tuple]:
        """The global actions a_s fully determined by a piped word: n ≤ s < len(piped)."""
        return [tuple(piped[s - i][i] for i in range(n + 1)) for s in range(n, len(piped))]

    def to_source(self, letter: Tuple) -> Tuple:
        """Target letter ((x0, y0), (x1, y1), …) in stage order -> source letter (a^0, a^1, …)."""
        source = [None] * (self.stages + 1)
        source[0] = letter[0][1]
        for k, player in enumerate(self.order, start=1):
            source[1 + player] = letter[k][0]
        return tuple(source)

    def to_stages(self, letter: Tuple) -> Tuple:
        """Source letter (a^0, a^1, …) -> the same actions in stage order."""
        return (letter[0],) + tuple(letter[1 + player] for player in self.order)

    def pipe_source(self, run: Sequence[Tuple]) -> List[Tuple]:
        """The pipe shift of a source run, in stage order."""
        return self.pipe([self.to_stages(letter) for letter in run], self.stages)

    def admits(self, piped: Sequence[Tuple]) -> bool:
        """
        Whether some source run α (in stage order) of length len(piped) + n has pipe(α) = piped.

        Entries of α that the pipe shift drops (a_t^i for t < i and the tail)
        range over all actions enabled in the source.
        """
        n = self.stages
        length = len(piped) + n
        processes, monitor = self.source.processes, self.source.monitor

        def known(t: int, stage: int) -> Optional[Hashable]:
            s = t - stage
            return piped[s][stage] if 0 <= s < len(piped) else None

        frontier = {(monitor.initial, tuple(p.initial for p in processes))}
        for t in range(length):
            successors = set()
            for m, qs in frontier:
                options = []
                for stage, player in enumerate(self.order, start=1):
                    fixed = known(t, stage)
                    enabled = processes[player].enabled(qs[player])
                    options.append([fixed] if fixed is not None and fixed in enabled
                                   else ([] if fixed is not None else list(enabled)))
                fixed0 = known(t, 0)
                for a0 in ([fixed0] if fixed0 is not None else self.source.environment_actions):
                    for staged in itertools.product(*options):
                        actions = [None] * n
                        for stage, player in enumerate(self.order):
                            actions[player] = staged[stage]
                        m2, b = monitor.step(m, (a0,) + tuple(actions))
                        qs2 = tuple(p.step(q, a, o) for p, q, a, o in zip(processes, qs, actions, b))
                        successors.add((m2, qs2))
            frontier = successors
            if not frontier:
                return False
        return True

    def describe(self) -> Dict:
        return {'stages': self.stages, 'order': [p + 1 for p in self.order],
                'condition': self.condition.describe()}


@dataclass(frozen=True)
class SequentialPipeline:
    architecture: MonitoredArchitecture
    specification: PipeShiftSpecification
    decomposition: Tuple[Dict[str, str], ...]
    relays: Tuple[Optional[Process], ...]


def _relay_process(stage: int, player: int, game: GameGraph, decomposition: List[Dict[str, str]],
                   monitor: ViewMonitor) -> Process:
    """
    Stage process emitting f^(stage+1) of the observation received in the
    previous round, with a free control action.
    """
    n = len(decomposition) + 1
    observations = monitor.observations[stage - 1]
    controls = game.action_names[player]
    if stage == n:
        row = {(x, '0'): {b: 0 for b in observations} for x in controls}
        return Process(f'stage{stage}', monitor.actions[stage], observations, (row,), labels=('*',))
    f = decomposition[stage - 1]
    values = list(dict.fromkeys([f[game.obs_name(player, game.initial)]] + sorted(f.values())))
    index = {value: k for k, value in enumerate(values)}
    rows = tuple({(x, value): {b: index[f.get(b[0], values[0])] for b in observations} for x in controls}
                 for value in values)
    return Process(f'stage{stage}', monitor.actions[stage], observations, rows, 0, tuple(values))


def sequentialize_pipeline(game: GameGraph, order: Sequence[int], condition: WinningCondition,
                           limits: Optional[ResourceLimits] = None, relays: bool = False) -> SequentialPipeline:
    """
    A pipeline 0 -> 1 -> … -> n equivalent to a game with hierarchical observation.

    Stage k plays for player order[k-1] with actions A × Y^k, where Y^k is the
    next player's observation alphabet; the Environment emits directions. The
    stage processes are black boxes unless relays is set, in which case stages
    k ≥ 2 are the relay processes emitting f^(k+1) of their last observation.
    The specification is the pipe shift of the game's condition over the
    architecture of game_to_arch.

    Raises:
        DecompositionError: When the observations do not factor along the order
    """
    game = require_valid(game)
    order = tuple(order)
    if sorted(order) != list(range(game.players)):
        raise PreconditionError(f"order {[p + 1 for p in order]} is not a permutation of the players")
    decomposition = chain_decomposition(game, order)
    source, spec = game_to_arch(game, condition, limits)
    n = game.players
    signals = [source.environment_actions] + [game.observation_names[order[k]] for k in range(1, n)]
    controls = [('-',)] + [game.action_names[player] for player in order]
    monitor = pipeline_monitor(n, signals, controls)
    stages = []
    relay_processes: List[Optional[Process]] = [None]
    for k, player in enumerate(order, start=1):
        box = black_box(monitor.actions[k], monitor.observations[k - 1], name=f'stage{k}')
        relay = _relay_process(k, player, game, decomposition, monitor) if k >= 2 else None
        relay_processes.append(relay)
        stages.append(relay if relays and relay is not None else box)
    initial = tuple((source.environment_actions[0],) if k == 0 else (monitor.observations[k][0][0],)
                    for k in range(n))
    architecture = MonitoredArchitecture(tuple(stages), monitor, initial)
    architecture.validate()
    specification = PipeShiftSpecification(source, spec, n, order)
    logger.info(f"✅ Sequentialised {n} players into a pipeline (order {[p + 1 for p in order]})")
    return SequentialPipeline(architecture, specification, tuple(decomposition), tuple(relay_processes))


@dataclass(frozen=True, order=True)
class Signal:
    """A routed signal: body plus header (sender, receiver, priority); the Environment is sender 0."""

    sender: int
    receiver: int
    body: str
    priority: int

    def __str__(self) -> str:
        return f'{self.sender}>{self.receiver}:{self.body}@{self.priority}'


@dataclass(frozen=True)
class RoutedAction:
    control: str
    signals: Tuple[Signal, ...] = ()

    def __str__(self) -> str:
        return self.control + ''.join(f'[{s}]' for s in self.signals)

    def validate(self, sender: int, players: int, top: int) -> None:
        """
        Raises:
            PreconditionError: On a foreign sender, a repeated receiver or an out-of-range priority
        """
        receivers = [s.receiver for s in self.signals]
        if len(set(receivers)) != len(receivers):
            raise PreconditionError(f"action {self} addresses a process twice")
        for s in self.signals:
            if s.sender != sender:
                raise PreconditionError(f"action {self} of participant {sender} carries a signal from {s.sender}")
            if not 1 <= s.receiver <= players or s.receiver == sender:
                raise PreconditionError(f"signal {s} has an invalid receiver")
            if not 0 <= s.priority <= top:
                raise PreconditionError(f"signal {s} has a priority outside 0..{top}")
            if sender == ENVIRONMENT and s.priority != top:
                raise PreconditionError(f"Environment signal {s} must carry the top priority {top}")


@dataclass(frozen=True)
class RoutedObservation:
    """Delivered (sender, body) signals, the panic flag and per-receiver delivery flags."""

    signals: Tuple[Tuple[int, str], ...]
    panic: bool
    delivered: Tuple[Tuple[int, bool], ...]

    def __str__(self) -> str:
        received = ','.join(f'{s}:{b}' for s, b in self.signals)
        flags = ''.join('+' if ok else '-' for _, ok in self.delivered)
        return f"<{received}|{'!' if self.panic else ''}{flags}>"


@dataclass(frozen=True)
class AggregationTable:
    """
    Signal-set values: the sum of weights[priority] over the set. Ties between
    sets of equal value go to the lexicographically larger (sender, receiver) list.
    """

    weights: Tuple[int, ...]

    @property
    def top(self) -> int:
        return len(self.weights) - 1

    def validate(self) -> None:
        """
        Raises:
            AggregationError: When a weight is not a positive integer, so values would not grow with inclusion
        """
        if not self.weights:
            raise AggregationError("aggregation table has no priorities")
        for priority, weight in enumerate(self.weights):
            if not isinstance(weight, int) or weight <= 0:
                raise AggregationError(f"weight of priority {priority} must be a positive integer, got {weight!r}")

    def value(self, signals) -> int:
        return sum(self.weights[s.priority] for s in signals)

    def key(self, signals) -> Tuple:
        return self.value(signals), tuple(sorted((s.sender, s.receiver) for s in signals))


def _observations(letter: Sequence[RoutedAction], delivered: Sequence[Signal], panic: bool,
                  players: int) -> Tuple[RoutedObservation, ...]:
    emitted = [s for action in letter for s in action.signals]
    given = set(delivered)
    result = []
    for i in range(1, players + 1):
        received = tuple(sorted((s.sender, s.body) for s in delivered if s.receiver == i))
        flags = tuple(sorted((s.receiver, s in given) for s in emitted if s.sender == i))
        result.append(RoutedObservation(received, panic, flags))
    return tuple(result)


Letter = Tuple[RoutedAction, ...]
Delivery = Tuple[Signal, ...]


def _position_name(observations: Sequence[RoutedObservation]) -> Tuple[str, ...]:
    return tuple(str(o) for o in observations)


def candidate_deliveries(letter: Letter, table: AggregationTable) -> List[Delivery]:
    """Deliveries containing every top-priority signal of the letter, largest aggregate first."""
    emitted = [s for action in letter for s in action.signals]
    forced = tuple(s for s in emitted if s.priority == table.top)
    optional = sorted(s for s in emitted if s.priority != table.top)
    choices = [forced + chosen for size in range(len(optional) + 1)
               for chosen in itertools.combinations(optional, size)]
    return sorted(choices, key=table.key, reverse=True)


def delivery_game(players: int, policy: Dict[Letter, Delivery]) -> GameGraph:
    """
    The game induced on black-box processes by a router that delivers
    policy[letter] on every letter.

    A position is the global observation of a round. Processes 1..n are the
    players with a single action each, so the Environment resolves every move;
    the initial position is the round where nothing was observed.
    """
    quiet = tuple(RoutedObservation((), False, ()) for _ in range(players))
    targets = list(dict.fromkeys(_observations(letter, delivered, False, players)
                                 for letter, delivered in policy.items()))
    builder = GameBuilder(players, [('*',)] * players)
    for observations in dict.fromkeys([quiet] + targets):
        builder.add_position(_position_name(observations), [str(o) for o in observations], 'ok')
    for observations in dict.fromkeys([quiet] + targets):
        for target in targets:
            builder.add_moves(_position_name(observations), _position_name(target))
    return builder.build(_position_name(quiet))


def delivery_policy(alphabets: Sequence[Sequence[RoutedAction]], table: AggregationTable,
                    limits: Optional[ResourceLimits] = None) -> Tuple[Dict[Letter, Delivery], bool]:
    """
    The stateless delivery choice the router makes outside the panic sink.

    Policies are tried from the best aggregate down, earlier letters first;
    the first one whose delivery game has hierarchical information wins. When
    none has, every signal is delivered and the router relies on panicking.

    Returns:
        (policy, hierarchical)
    """
    limits = resolve(limits)
    players = len(alphabets) - 1
    letters = list(itertools.product(*alphabets))
    options = [candidate_deliveries(letter, table) for letter in letters]
    tried = 0
    for choice in itertools.product(*options):
        tried += 1
        limits.check('max_assignments', tried, 'searching router delivery policies')
        policy = dict(zip(letters, choice))
        game = delivery_game(players, policy)
        if nfa_is_empty(non_hierarchy_nfa(game, synchronise=True, limits=limits)):
            logger.debug(f"Delivery policy found after {tried} candidates")
            return policy, True
    return {letter: candidates[0] for letter, candidates in zip(letters, options)}, False


def build_router(alphabets: Sequence[Sequence[RoutedAction]], table: AggregationTable,
                 limits: Optional[ResourceLimits] = None) -> ViewMonitor:
    """
    The router over participants 0 (Environment) … n.

    Outside the panic sink the router delivers what delivery_policy chose and
    follows the minimal hierarchy supervisor of the induced delivery game: a
    state is a supervisor state, or SAFE once no continuation can break the
    hierarchy. A letter leading the supervisor into acceptance delivers
    everything, raises panic and enters the sink, where all signals are
    delivered.

    Raises:
        AggregationError: When the table is invalid
        PreconditionError: When an action is malformed
    """
    table.validate()
    limits = resolve(limits)
    players = len(alphabets) - 1
    if players < 1:
        raise PreconditionError("a router needs at least one process")
    for sender, alphabet in enumerate(alphabets):
        for action in alphabet:
            action.validate(sender, players, table.top)
    policy, hierarchical = delivery_policy(alphabets, table, limits)
    game = delivery_game(players, policy)
    supervisor = minimize(determinize(non_hierarchy_nfa(game, synchronise=False, limits=limits), limits))

    def supervise(state, name):
        if state == SAFE:
            return SAFE
        target = supervisor.step(state, name)
        return SAFE if target is None else target

    start = game.position_names[game.initial]
    initial = SAFE if supervisor.is_empty_shell else supervise(supervisor.initial, start)

    def step(state, letter):
        emitted = [s for action in letter for s in action.signals]
        if state == PANIC:
            return PANIC, _observations(letter, emitted, True, players)
        delivered = policy[letter]
        target = supervise(state, format_label(_position_name(_observations(letter, delivered, False, players))))
        if target != SAFE and target in supervisor.accepting:
            return PANIC, _observations(letter, emitted, True, players)
        return target, _observations(letter, delivered, False, players)

    machine = _explore_mealy(tuple(itertools.product(*alphabets)), initial, step, limits, 'building a router')
    observations = []
    for i in range(players):
        seen = {row[k][i] for row in machine.outputs for k in range(len(machine.alphabet))}
        observations.append(tuple(sorted(seen, key=str)))
    monitor = ViewMonitor(machine, tuple(tuple(a) for a in alphabets), tuple(observations))
    logger.info(f"✅ Router with {machine.num_states} states for {players} processes"
                f"{'' if hierarchical else ', panic possible'}")
    return monitor


def router_report(monitor: ViewMonitor) -> Dict:
    """Panic reachability with a shortest triggering action sequence, and denial counts."""
    machine = monitor.machine
    labels = [machine.labels[m] for m in range(machine.num_states)]
    panic = labels.index(PANIC) if PANIC in labels else None
    parent = {machine.initial: None}
    queue = [machine.initial]
    for m in queue:
        for k, target in enumerate(machine.transitions[m]):
            if target not in parent:
                parent[target] = (m, k)
                queue.append(target)
    path = None
    if panic is not None and panic in parent:
        path = []
        node = panic
        while parent[node] is not None:
            m, k = parent[node]
            path.append([str(a) for a in machine.alphabet[k]])
            node = m
        path.reverse()
    denials = sum(1 for m in range(machine.num_states) if m != panic
                  for row in [machine.outputs[m]] for output in row
                  if not output[0].panic and any(not ok for obs in output for _, ok in obs.delivered))
    return {
        'states': machine.num_states,
        'panic_reachable': path is not None,
        'panic_path': path,
        'denying_transitions': denials,
        'letters': len(machine.alphabet),
    }
