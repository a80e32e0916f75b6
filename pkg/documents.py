"""
Documents
JSON documents for games, machines, automata, conditions, strategy profiles,
witnesses, processes, monitors, architectures and reports. Every document
carries "kind" and "version"; unknown fields are rejected with their location.
Output is canonical (sorted keys, fixed indentation) and written atomically.
"""

import itertools
import json
import logging
import os
import tempfile
from typing import Any, Dict, List, Optional, Sequence, Tuple

from architecture import (AggregationTable, MonitoredArchitecture, Process, RoutedAction, Signal, ViewMonitor,
                          add_feedback_links, black_box, pass_through_process, pipeline_monitor)
from automata import MODES, PARITY, MealyMachine, MooreMachine, StrategyProfile, WordAutomaton
from game_errors import DocumentError, GameError
from game_graph import LOSE, GameBuilder, GameGraph, format_label
from winning_conditions import REACHABILITY, SAFETY, WinningCondition

logger = logging.getLogger('Documents')

VERSION = 1
KINDS = ('game', 'moore', 'mealy', 'automaton', 'condition', 'spec', 'strategy-profile', 'witness',
         'process', 'monitor', 'architecture', 'report')
WILDCARD = '*'


def freeze(value: Any) -> Any:
    """JSON lists become tuples, recursively, so letters are hashable."""
    if isinstance(value, list):
        return tuple(freeze(item) for item in value)
    return value


def thaw(value: Any) -> Any:
    if isinstance(value, tuple):
        return [thaw(item) for item in value]
    return value


class _Reader:
    """A JSON object with a location path, for precise error messages."""

    def __init__(self, data: Any, location: str = '$'):
        if not isinstance(data, dict):
            raise DocumentError("expected an object", location)
        self.data = data
        self.location = location

    def allow(self, *keys: str) -> '_Reader':
        unknown = sorted(set(self.data) - set(keys))
        if unknown:
            raise DocumentError(f"unknown field '{unknown[0]}'", f"{self.location}.{unknown[0]}")
        return self

    def at(self, key: str) -> str:
        return f"{self.location}.{key}"

    def get(self, key: str, kind: type = object, default: Any = ...) -> Any:
        if key not in self.data:
            if default is ...:
                raise DocumentError(f"missing field '{key}'", self.at(key))
            return default
        value = self.data[key]
        if kind is not object and not isinstance(value, kind):
            raise DocumentError(f"expected {kind.__name__}", self.at(key))
        return value

    def child(self, key: str, default: Any = ...) -> Optional['_Reader']:
        value = self.get(key, dict, default)
        return None if value is None else _Reader(value, self.at(key))

    def items(self, key: str, default: Any = ...) -> List[Tuple[str, Any]]:
        value = self.get(key, list, default)
        if value is None:
            return []
        return [(f"{self.at(key)}[{k}]", item) for k, item in enumerate(value)]

    def strings(self, key: str, default: Any = ...) -> Optional[List[str]]:
        value = self.get(key, list, default)
        if value is None:
            return None
        for k, item in enumerate(value):
            if not isinstance(item, str):
                raise DocumentError("expected a string", f"{self.at(key)}[{k}]")
        return value


def _check_header(data: Any, expected: Optional[Sequence[str]] = None) -> _Reader:
    reader = _Reader(data)
    kind = reader.get('kind', str)
    if kind not in KINDS:
        raise DocumentError(f"unknown document kind '{kind}'", reader.at('kind'))
    if expected is not None and kind not in expected:
        raise DocumentError(f"expected a {' or '.join(expected)} document, got '{kind}'", reader.at('kind'))
    version = reader.get('version', int)
    if version != VERSION:
        raise DocumentError(f"unsupported version {version}", reader.at('version'))
    return reader


def load_json(path: str) -> Dict:
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except json.JSONDecodeError as e:
        raise DocumentError(f"invalid JSON: {e.msg}", f"{path}:{e.lineno}:{e.colno}") from None
    except OSError as e:
        raise DocumentError(f"cannot read document: {e.strerror}", path) from None


def dumps(document: Dict) -> str:
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + '\n'


def write_document(document: Dict, path: str) -> None:
    """Write canonically through a temporary file in the target directory."""
    directory = os.path.dirname(os.path.abspath(path))
    handle, temporary = tempfile.mkstemp(prefix='.tmp-', dir=directory)
    try:
        with os.fdopen(handle, 'w', encoding='utf-8') as out:
            out.write(dumps(document))
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise
    logger.debug(f"Wrote {document.get('kind')} document to {path}")


def _header(kind: str) -> Dict:
    return {'kind': kind, 'version': VERSION}


# games

def parse_game(data: Any) -> GameGraph:
    """
    Game documents list positions with per-player observations and a color,
    and moves whose actions may use the wildcard "*" and whose "to" may list
    several targets.
    """
    reader = _check_header(data, ['game'])
    reader.allow('kind', 'version', 'players', 'actions', 'observations', 'colors', 'initial',
                 'positions', 'moves', 'attributes')
    players = reader.get('players', int)
    actions = [freeze(alphabet) for _, alphabet in reader.items('actions')]
    if len(actions) != players:
        raise DocumentError(f"expected {players} action alphabets", reader.at('actions'))
    observations = reader.get('observations', list, None)
    colors = reader.strings('colors', None)
    try:
        builder = GameBuilder(players, actions, observations, colors)
    except GameError as e:
        raise DocumentError(str(e), reader.location) from None
    for location, item in reader.items('positions'):
        position = _Reader(item, location).allow('name', 'observations', 'color', 'attributes')
        name = position.get('name', str)
        seen = position.get('observations', list)
        if name in builder:
            raise DocumentError(f"duplicate position '{name}'", position.at('name'))
        try:
            builder.add_position(name, [freeze(b) for b in seen], position.get('color', str, None))
        except GameError as e:
            raise DocumentError(str(e), location) from None
    action_index = [{format_label(a): k for k, a in enumerate(alphabet)} for alphabet in builder.actions]
    for location, item in reader.items('moves'):
        move = _Reader(item, location).allow('from', 'actions', 'to')
        source = move.get('from', str)
        targets = move.get('to')
        targets = [targets] if isinstance(targets, str) else targets
        if not isinstance(targets, list) or not targets:
            raise DocumentError("expected a position or a non-empty list of positions", move.at('to'))
        for name in [source] + targets:
            if name not in builder:
                raise DocumentError(f"unknown position '{name}'", location)
        symbols = move.get('actions', list)
        if len(symbols) != players:
            raise DocumentError(f"expected {players} actions", move.at('actions'))
        choices = []
        for player, symbol in enumerate(symbols):
            symbol = format_label(freeze(symbol))
            if symbol == WILDCARD:
                choices.append(range(len(builder.actions[player])))
            elif symbol in action_index[player]:
                choices.append([action_index[player][symbol]])
            else:
                raise DocumentError(f"unknown action '{symbol}' of player {player + 1}",
                                    f"{move.at('actions')}[{player}]")
        for target in targets:
            builder.add_moves(source, target, itertools.product(*choices))
    initial = reader.get('initial', str)
    if initial not in builder:
        raise DocumentError(f"unknown initial position '{initial}'", reader.at('initial'))
    return builder.build(initial)


def game_document(game: GameGraph, attributes: Optional[Dict] = None,
                  position_attributes: Optional[Sequence[Optional[Dict]]] = None) -> Dict:
    """
    Canonical document: moves grouped by (source, profile) with sorted target lists.
    Per-position annotations (ranks, origins) go to an "attributes" field that
    parse_game accepts and ignores.
    """
    grouped: Dict[Tuple[int, Tuple[int, ...]], List[int]] = {}
    for source, profile, target in game.moves:
        grouped.setdefault((source, profile), []).append(target)
    document = _header('game')
    document.update({
        'players': game.players,
        'actions': [list(alphabet) for alphabet in game.action_names],
        'observations': [list(alphabet) for alphabet in game.observation_names],
        'colors': list(game.color_names),
        'initial': game.position_names[game.initial],
        'positions': [{'name': name,
                       'observations': [game.obs_name(i, v) for i in range(game.players)],
                       'color': game.color(v)}
                      for v, name in enumerate(game.position_names)],
        'moves': [{'from': game.position_names[source],
                   'actions': [game.action_names[i][a] for i, a in enumerate(profile)],
                   'to': [game.position_names[t] for t in targets]}
                  for (source, profile), targets in sorted(grouped.items())],
    })
    if position_attributes is not None:
        for entry, extra in zip(document['positions'], position_attributes):
            if extra:
                entry['attributes'] = extra
    if attributes:
        document['attributes'] = attributes
    return document


# machines and automata

def _states(reader: _Reader) -> Tuple[List[str], Dict[str, int]]:
    names = reader.strings('states')
    index = {}
    for k, name in enumerate(names):
        if name in index:
            raise DocumentError(f"duplicate state '{name}'", f"{reader.at('states')}[{k}]")
        index[name] = k
    return names, index


def _state_ref(index: Dict[str, int], name: Any, location: str) -> int:
    if name not in index:
        raise DocumentError(f"unknown state '{name}'", location)
    return index[name]


def _transition_table(reader: _Reader, alphabet: Tuple, index: Dict[str, int], with_output: bool):
    letters = {letter: k for k, letter in enumerate(alphabet)}
    table: Dict[Tuple[int, int], Tuple[int, Any]] = {}
    for location, item in reader.items('transitions'):
        edge = _Reader(item, location).allow('from', 'letter', 'to', *(('output',) if with_output else ()))
        source = _state_ref(index, edge.get('from'), edge.at('from'))
        letter = freeze(edge.get('letter'))
        if letter not in letters:
            raise DocumentError(f"unknown letter {format_label(letter)}", edge.at('letter'))
        target = _state_ref(index, edge.get('to'), edge.at('to'))
        output = freeze(edge.get('output')) if with_output else None
        if (source, letters[letter]) in table:
            raise DocumentError("two transitions for one (state, letter)", location)
        table[(source, letters[letter])] = (target, output)
    for q in range(len(index)):
        for k, letter in enumerate(alphabet):
            if (q, k) not in table:
                raise DocumentError(f"missing transition on {format_label(letter)}", reader.at('transitions'))
    return table


def parse_moore(data: Any, check_header: bool = True) -> MooreMachine:
    reader = _check_header(data, ['moore']) if check_header else _Reader(data)
    reader.allow('kind', 'version', 'alphabet', 'states', 'outputs', 'initial', 'transitions')
    alphabet = freeze(reader.get('alphabet', list))
    names, index = _states(reader)
    outputs = freeze(reader.get('outputs', list))
    if len(outputs) != len(names):
        raise DocumentError("one output per state expected", reader.at('outputs'))
    table = _transition_table(reader, alphabet, index, False)
    machine = MooreMachine(alphabet, tuple(tuple(table[(q, k)][0] for k in range(len(alphabet)))
                                           for q in range(len(names))),
                           outputs, _state_ref(index, reader.get('initial'), reader.at('initial')), tuple(names))
    return machine


def moore_document(machine: MooreMachine, with_header: bool = True) -> Dict:
    names = [format_label(machine.labels[m]) if machine.labels is not None else f'm{m}'
             for m in range(machine.num_states)]
    if len(set(names)) != len(names):
        names = [f'm{m}' for m in range(machine.num_states)]
    document = _header('moore') if with_header else {}
    document.update({
        'alphabet': [thaw(letter) for letter in machine.alphabet],
        'states': names,
        'outputs': [thaw(output) for output in machine.outputs],
        'initial': names[machine.initial],
        'transitions': [{'from': names[m], 'letter': thaw(letter), 'to': names[machine.transitions[m][k]]}
                        for m in range(machine.num_states) for k, letter in enumerate(machine.alphabet)],
    })
    return document


def parse_mealy(data: Any) -> MealyMachine:
    reader = _check_header(data, ['mealy'])
    reader.allow('kind', 'version', 'alphabet', 'states', 'initial', 'transitions')
    alphabet = freeze(reader.get('alphabet', list))
    names, index = _states(reader)
    table = _transition_table(reader, alphabet, index, True)
    rows = tuple(tuple(table[(q, k)][0] for k in range(len(alphabet))) for q in range(len(names)))
    outputs = tuple(tuple(table[(q, k)][1] for k in range(len(alphabet))) for q in range(len(names)))
    return MealyMachine(alphabet, rows, outputs, _state_ref(index, reader.get('initial'), reader.at('initial')),
                        tuple(names))


def mealy_document(machine: MealyMachine, kind: str = 'mealy') -> Dict:
    names = [format_label(machine.labels[m]) if machine.labels is not None else f'm{m}'
             for m in range(machine.num_states)]
    document = _header(kind)
    document.update({
        'alphabet': [thaw(letter) for letter in machine.alphabet],
        'states': names,
        'initial': names[machine.initial],
        'transitions': [{'from': names[m], 'letter': thaw(letter), 'to': names[machine.transitions[m][k]],
                         'output': thaw(machine.outputs[m][k])}
                        for m in range(machine.num_states) for k, letter in enumerate(machine.alphabet)],
    })
    return document


def parse_automaton(data: Any, check_header: bool = True) -> WordAutomaton:
    reader = _check_header(data, ['automaton']) if check_header else _Reader(data)
    reader.allow('kind', 'version', 'mode', 'alphabet', 'states', 'initial', 'accepting', 'priorities',
                 'transitions')
    mode = reader.get('mode', str)
    if mode not in MODES:
        raise DocumentError(f"unknown mode '{mode}'", reader.at('mode'))
    alphabet = freeze(reader.get('alphabet', list))
    letters = {letter: k for k, letter in enumerate(alphabet)}
    names, index = _states(reader)
    delta = [[set() for _ in alphabet] for _ in names]
    for location, item in reader.items('transitions'):
        edge = _Reader(item, location).allow('from', 'letter', 'to')
        letter = freeze(edge.get('letter'))
        if letter not in letters:
            raise DocumentError(f"unknown letter {format_label(letter)}", edge.at('letter'))
        delta[_state_ref(index, edge.get('from'), edge.at('from'))][letters[letter]].add(
            _state_ref(index, edge.get('to'), edge.at('to')))
    accepting = frozenset(_state_ref(index, name, reader.at('accepting'))
                          for name in reader.get('accepting', list, []))
    priorities = reader.get('priorities', list, None)
    if priorities is not None and len(priorities) != len(names):
        raise DocumentError("one priority per state expected", reader.at('priorities'))
    automaton = WordAutomaton(mode, alphabet, tuple(tuple(frozenset(t) for t in row) for row in delta),
                              _state_ref(index, reader.get('initial'), reader.at('initial')), accepting,
                              tuple(priorities) if priorities is not None else None, tuple(names))
    try:
        automaton.check_deterministic()
    except GameError as e:
        raise DocumentError(str(e), reader.at('transitions')) from None
    return automaton


def automaton_document(automaton: WordAutomaton, with_header: bool = True) -> Dict:
    names = [format_label(automaton.label(q)) for q in range(automaton.num_states)]
    if len(set(names)) != len(names):
        names = [f'q{q}' for q in range(automaton.num_states)]
    document = _header('automaton') if with_header else {}
    document.update({
        'mode': automaton.mode,
        'alphabet': [thaw(letter) for letter in automaton.alphabet],
        'states': names,
        'initial': names[automaton.initial] if automaton.initial is not None else None,
        'accepting': [names[q] for q in sorted(automaton.accepting)],
        'transitions': [{'from': names[q], 'letter': thaw(letter), 'to': names[t]}
                        for q, row in enumerate(automaton.delta)
                        for k, letter in enumerate(automaton.alphabet) for t in sorted(row[k])],
    })
    if automaton.priorities is not None:
        document['priorities'] = list(automaton.priorities)
    return document


# conditions

def parse_condition(data: Any, colors: Optional[Sequence[str]] = None) -> WinningCondition:
    """
    Condition documents: {"type": "safety", "avoid": [...]}, {"type":
    "reachability", "targets": [...]}, {"type": "buchi", "accepting": [...]} or
    {"type": "parity", "automaton": {...}}. Colors default to the game's.
    """
    reader = _check_header(data, ['condition', 'spec'])
    reader.allow('kind', 'version', 'type', 'colors', 'avoid', 'targets', 'accepting', 'automaton')
    kind = reader.get('type', str)
    alphabet = reader.strings('colors', None) or (list(colors) if colors is not None else None)
    if kind != 'parity' and alphabet is None:
        raise DocumentError("colors are required without a game", reader.at('colors'))
    try:
        if kind == SAFETY:
            return WinningCondition.safety(alphabet, reader.strings('avoid', []))
        if kind == REACHABILITY:
            return WinningCondition.reachability(alphabet, reader.strings('targets'))
        if kind == 'buchi':
            return WinningCondition.buchi(alphabet, reader.strings('accepting'))
        if kind == 'parity':
            automaton = parse_automaton(reader.get('automaton', dict), check_header=False)
            if automaton.mode != PARITY:
                raise DocumentError("parity conditions need a parity automaton", reader.at('automaton'))
            return WinningCondition.parity(automaton)
    except DocumentError:
        raise
    except GameError as e:
        raise DocumentError(str(e), reader.location) from None
    raise DocumentError(f"unknown condition type '{kind}'", reader.at('type'))


def default_condition(game: GameGraph) -> WinningCondition:
    """Avoid the losing color when the game has one; otherwise every play wins."""
    if LOSE in game.color_names:
        return WinningCondition.safety(game.color_names, [LOSE])
    return WinningCondition.trivial(game.color_names)


def condition_document(condition: WinningCondition, kind: str = 'condition') -> Dict:
    document = _header(kind)
    document.update({'type': 'parity', 'automaton': automaton_document(condition.automaton, with_header=False)})
    return document


# strategy profiles

def parse_profile(data: Any) -> StrategyProfile:
    reader = _check_header(data, ['strategy-profile'])
    reader.allow('kind', 'version', 'machines')
    machines = []
    for location, item in reader.items('machines'):
        try:
            machines.append(parse_moore(item, check_header=False))
        except DocumentError as e:
            raise DocumentError(e.message, location + e.location[1:]) from None
    return StrategyProfile(tuple(machines))


def profile_document(profile: StrategyProfile) -> Dict:
    document = _header('strategy-profile')
    document['machines'] = [moore_document(machine, with_header=False) for machine in profile.machines]
    return document


def witness_document(check: str, witness: Any, game: Optional[GameGraph] = None) -> Dict:
    """
    A witness object (anything with to_dict(game)), a payload dict, or a list
    of payloads (static refutations, one per incomparable pair).
    """
    document = _header('witness')
    document['check'] = check
    if hasattr(witness, 'to_dict'):
        witness = witness.to_dict(game)
    if isinstance(witness, list):
        witness = {'type': 'refutations', 'refutations': witness}
    document.update(witness)
    return document


# architectures

def parse_process(data: Any, check_header: bool = True) -> Process:
    reader = _check_header(data, ['process']) if check_header else _Reader(data)
    reader.allow('kind', 'version', 'name', 'actions', 'observations', 'states', 'initial', 'transitions')
    actions = freeze(reader.get('actions', list))
    observations = freeze(reader.get('observations', list))
    names, index = _states(reader)
    rows: List[Dict] = [dict() for _ in names]
    for location, item in reader.items('transitions'):
        edge = _Reader(item, location).allow('from', 'action', 'observation', 'to')
        action, observation = freeze(edge.get('action')), freeze(edge.get('observation'))
        if action not in actions:
            raise DocumentError(f"unknown action {format_label(action)}", edge.at('action'))
        if observation not in observations:
            raise DocumentError(f"unknown observation {format_label(observation)}", edge.at('observation'))
        source = _state_ref(index, edge.get('from'), edge.at('from'))
        rows[source].setdefault(action, {})[observation] = _state_ref(index, edge.get('to'), edge.at('to'))
    process = Process(reader.get('name', str, 'P'), actions, observations, tuple(rows),
                      _state_ref(index, reader.get('initial'), reader.at('initial')), tuple(names))
    try:
        process.validate()
    except GameError as e:
        raise DocumentError(str(e), reader.location) from None
    return process


def process_document(process: Process, with_header: bool = True) -> Dict:
    names = [process.state_name(q) for q in range(process.num_states)]
    document = _header('process') if with_header else {}
    document.update({
        'name': process.name,
        'actions': [thaw(a) for a in process.actions],
        'observations': [thaw(b) for b in process.observations],
        'states': names,
        'initial': names[process.initial],
        'transitions': [{'from': names[q], 'action': thaw(a), 'observation': thaw(b), 'to': names[t]}
                        for q, row in enumerate(process.transitions)
                        for a in process.actions if a in row for b, t in row[a].items()],
    })
    return document


def parse_monitor(data: Any, check_header: bool = True) -> ViewMonitor:
    reader = _check_header(data, ['monitor']) if check_header else _Reader(data)
    reader.allow('kind', 'version', 'actions', 'observations', 'states', 'initial', 'transitions',
                 'links', 'pipeline')
    pipeline = reader.child('pipeline', None)
    if pipeline is not None:
        pipeline.allow('processes', 'signals', 'controls', 'last_actions')
        controls = pipeline.get('controls', list, None)
        return pipeline_monitor(pipeline.get('processes', int), freeze(pipeline.get('signals', list)),
                                freeze(controls) if controls is not None else None,
                                freeze(pipeline.get('last_actions', list, ['0'])))
    actions = freeze(reader.get('actions', list))
    observations = freeze(reader.get('observations', list))
    names, index = _states(reader)
    alphabet = tuple(itertools.product(*actions))
    table = _transition_table(reader, alphabet, index, True)
    rows = tuple(tuple(table[(q, k)][0] for k in range(len(alphabet))) for q in range(len(names)))
    outputs = tuple(tuple(table[(q, k)][1] for k in range(len(alphabet))) for q in range(len(names)))
    links = reader.get('links', list, None)
    monitor = ViewMonitor(MealyMachine(alphabet, rows, outputs,
                                       _state_ref(index, reader.get('initial'), reader.at('initial')), tuple(names)),
                          actions, observations, freeze(links) if links is not None else None)
    try:
        monitor.validate()
    except GameError as e:
        raise DocumentError(str(e), reader.location) from None
    return monitor


def monitor_document(monitor: ViewMonitor, with_header: bool = True) -> Dict:
    document = mealy_document(monitor.machine, 'monitor')
    del document['alphabet']
    if not with_header:
        del document['kind'], document['version']
    document['actions'] = [thaw(alphabet) for alphabet in monitor.actions]
    document['observations'] = [[thaw(b) for b in alphabet] for alphabet in monitor.observations]
    if monitor.links is not None:
        document['links'] = [list(link) for link in monitor.links]
    return document


def parse_routed_participants(reader: _Reader) -> List[List[RoutedAction]]:
    participants = []
    for sender, (location, alphabet) in enumerate(reader.items('participants')):
        if not isinstance(alphabet, list):
            raise DocumentError("expected a list of actions", location)
        actions = []
        for k, item in enumerate(alphabet):
            action = _Reader(item, f"{location}[{k}]").allow('control', 'signals')
            signals = []
            for signal_location, raw in action.items('signals', []):
                signal = _Reader(raw, signal_location).allow('body', 'receiver', 'priority')
                signals.append(Signal(sender, signal.get('receiver', int), signal.get('body', str),
                                      signal.get('priority', int)))
            actions.append(RoutedAction(action.get('control', str), tuple(signals)))
        participants.append(actions)
    return participants


def parse_architecture(data: Any) -> Tuple[Optional[MonitoredArchitecture], Optional[Tuple]]:
    """
    Returns:
        (architecture or None, (participants, AggregationTable) for a router block or None)

    Process entries may be full process payloads, {"black_box": true} or
    {"pass_through": {"initial": ...}}; the latter two take their alphabets
    from the monitor. {"feedback": true} adds feedback links to a pipeline.
    """
    reader = _check_header(data, ['architecture'])
    reader.allow('kind', 'version', 'processes', 'monitor', 'initial_observation', 'feedback', 'router')
    router = None
    block = reader.child('router', None)
    if block is not None:
        block.allow('participants', 'weights')
        router = (parse_routed_participants(block), AggregationTable(tuple(block.get('weights', list))))
    monitor_data = reader.child('monitor', None)
    if monitor_data is None:
        if router is None:
            raise DocumentError("an architecture needs a monitor or a router", reader.location)
        return None, router
    monitor = parse_monitor(monitor_data.data, check_header=False)
    processes = []
    entries = reader.items('processes')
    if len(entries) != monitor.processes:
        raise DocumentError(f"expected {monitor.processes} processes", reader.at('processes'))
    for k, (location, item) in enumerate(entries, start=1):
        entry = _Reader(item, location)
        if entry.get('black_box', bool, False):
            entry.allow('black_box', 'name')
            processes.append(black_box(monitor.actions[k], monitor.observations[k - 1],
                                       entry.get('name', str, f'P{k}')))
        elif 'pass_through' in entry.data:
            entry.allow('pass_through', 'name')
            options = entry.child('pass_through').allow('initial')
            processes.append(pass_through_process(monitor.observations[k - 1], freeze(options.get('initial')),
                                                  name=entry.get('name', str, f'P{k}')))
        else:
            processes.append(parse_process(item, check_header=False))
    initial = reader.get('initial_observation', list, None)
    arch = MonitoredArchitecture(tuple(processes), monitor, freeze(initial) if initial is not None else None)
    if reader.get('feedback', bool, False):
        arch = add_feedback_links(arch)
    try:
        arch.validate()
    except GameError as e:
        raise DocumentError(str(e), reader.location) from None
    return arch, router


def architecture_document(arch: MonitoredArchitecture) -> Dict:
    document = _header('architecture')
    document.update({
        'processes': [process_document(p, with_header=False) for p in arch.processes],
        'monitor': monitor_document(arch.monitor, with_header=False),
        'initial_observation': [thaw(b) for b in arch.start_observation()],
    })
    return document


def report_document(command: str, verdict: str, **fields: Any) -> Dict:
    document = _header('report')
    document.update({'command': command, 'verdict': verdict})
    document.update({key: value for key, value in fields.items() if value is not None})
    return document


def read(path: str, kinds: Sequence[str]) -> Dict:
    """Load a document and check its kind before any payload parsing."""
    data = load_json(path)
    _check_header(data, kinds)
    return data


def read_game(path: str) -> GameGraph:
    return parse_game(read(path, ['game']))


def read_condition(path: Optional[str], game: GameGraph) -> WinningCondition:
    if path is None:
        return default_condition(game)
    return parse_condition(read(path, ['condition', 'spec']), game.color_names)
