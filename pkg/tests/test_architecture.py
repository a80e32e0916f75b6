"""
Tests for Architecture module
"""

import pytest
import sys
import os

# Add the parent directory to the path so we can import our modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from architecture import (PANIC, SAFE, AggregationTable, MonitoredArchitecture, PipeShiftSpecification,
                          Process, RoutedAction, Signal, add_feedback_links, arch_product, arch_to_game, black_box,
                          build_router, candidate_deliveries, chain_decomposition, delivery_game, delivery_policy,
                          extend_program, feedback_free_programs, game_to_arch, history_correspondence,
                          pass_through_process, pipeline_monitor, router_report, runs, sequentialize_pipeline,
                          white_box)
from automata import MooreMachine, constant_moore
from documents import load_json, parse_architecture
from game_errors import AggregationError, AlphabetMismatchError, DecompositionError, PreconditionError
from game_generators import privbit_game
from game_graph import LOSE, reachable_positions, validate_game
from game_transforms import is_positionally_hierarchical
from hierarchy_analyzer import non_hierarchy_nfa
from oracles import brute_force_dynamic, nfa_is_empty
from winning_conditions import WinningCondition


def pipeline2():
    monitor = pipeline_monitor(2, [('0', '1'), ('0', '1')])
    processes = tuple(black_box(monitor.actions[k], monitor.observations[k - 1], f'P{k}') for k in (1, 2))
    return MonitoredArchitecture(processes, monitor)


def feedback_pipeline():
    monitor = pipeline_monitor(2, [('0', '1'), ('0', '1')], last_actions=('0', '1'))
    processes = tuple(black_box(monitor.actions[k], monitor.observations[k - 1], f'P{k}') for k in (1, 2))
    return MonitoredArchitecture(processes, monitor)


def echo_machine(alphabet):
    """Plays the first component of the last observation."""
    return MooreMachine(tuple(alphabet), tuple(tuple(int(b[0]) for b in alphabet) for _ in range(2)), ('0', '1'))


class TestProcesses:
    """Test suite for process automata."""

    def test_black_box(self):
        process = black_box(['a', 'b'], ['x'])

        assert process.is_black_box
        assert process.enabled(0) == ('a', 'b')
        assert process.step(0, 'b', 'x') == 0

    def test_white_box_plays_the_program(self):
        process = white_box(constant_moore(['x', 'y'], 'a'), ['a', 'b'])

        assert process.is_white_box
        assert process.enabled(0) == ('a',)
        with pytest.raises(PreconditionError):
            process.step(0, 'b', 'x')

    def test_partial_action_is_rejected(self):
        process = Process('P', ('a',), ('x', 'y'), ({'a': {'x': 0}},))
        with pytest.raises(PreconditionError):
            process.validate()

    def test_pass_through_repeats_the_last_observation(self):
        process = pass_through_process(['0', '1'], '0')

        assert process.is_white_box
        assert process.enabled(0) == ('0',)
        q = process.step(0, '0', '1')
        assert process.enabled(q) == ('1',)


class TestPipelines:
    """Test suite for pipeline monitors and their games."""

    def setup_method(self):
        """Setup test fixtures."""
        self.arch = pipeline2()

    def test_pipeline_monitor(self):
        monitor = self.arch.monitor

        assert monitor.processes == 2
        assert monitor.num_states == 1
        assert monitor.links == ((0, 1), (1, 2))
        assert monitor.observations == ((('0',), ('1',)), (('0',), ('1',)))
        assert monitor.step(0, ('1', '0', '0')) == (0, (('1',), ('0',)))

    def test_pipeline_needs_matching_alphabets(self):
        with pytest.raises(PreconditionError):
            pipeline_monitor(2, [('0', '1')])
        with pytest.raises(PreconditionError):
            pipeline_monitor(0, [])

    def test_fixture_matches(self, fixture_path):
        arch, router = parse_architecture(load_json(fixture_path('pipeline2.json')))

        assert router is None
        assert arch == self.arch

    def test_product_game(self):
        product = arch_product(self.arch)

        assert product.sink is None
        assert product.game.num_positions == 4
        assert validate_game(product.game) == []
        assert product.game.color_names == ('link',)

    def test_arch_to_game(self):
        game, condition = arch_to_game(self.arch)

        assert game == arch_product(self.arch).game
        assert condition.accepts_play(['link'], ['link'])

    def test_disabled_actions_lead_to_the_sink(self):
        monitor = self.arch.monitor
        program = white_box(constant_moore(monitor.observations[0], '0'), monitor.actions[1], 'P1')
        arch = MonitoredArchitecture((program, self.arch.processes[1]), monitor)
        product = arch_product(arch)

        assert product.sink is not None
        assert product.game.num_positions == 5
        assert product.game.color(product.sink) == LOSE
        assert not product.condition.accepts_play(['link'], [LOSE])

    def test_runs(self):
        assert len(runs(self.arch, 1)) == 4
        assert len(runs(self.arch, 2)) == 16

    def test_feedback_links(self):
        extended = add_feedback_links(self.arch)

        assert extended.monitor.links == ((0, 1), (1, 1), (1, 2), (2, 1), (2, 2))
        assert extended.monitor.observations[0] == (('0', '0', '0'), ('0', '1', '0'), ('1', '0', '0'), ('1', '1', '0'))
        assert extended.monitor.observations[1] == (('0', '0'), ('1', '0'))
        extended.validate()

    def test_feedback_game_is_positionally_hierarchical(self):
        game, _ = arch_to_game(add_feedback_links(self.arch))
        original, _ = arch_to_game(self.arch)

        assert is_positionally_hierarchical(game, [0, 1], reachable_positions(game))
        assert not is_positionally_hierarchical(original, [0, 1], reachable_positions(original))

    def test_feedback_links_keep_the_runs_of_white_boxes(self):
        relay = pass_through_process(self.arch.monitor.observations[0], '0', name='P1')
        arch = MonitoredArchitecture((relay, self.arch.processes[1]), self.arch.monitor)

        assert len(runs(arch, 6)) == 64
        assert runs(add_feedback_links(arch), 6) == runs(arch, 6)

    def test_pipeline_programs_ignore_feedback_links(self):
        arch = feedback_pipeline()
        extended = add_feedback_links(arch)
        programs = [echo_machine(alphabet) for alphabet in arch.monitor.observations]
        lifted = [extend_program(p, alphabet, lambda b: b[:1])
                  for p, alphabet in zip(programs, extended.monitor.observations)]

        assert runs(extended, 6, lifted) == runs(arch, 6, programs)

    def test_programs_without_feedback_links(self):
        arch = feedback_pipeline()
        extended = add_feedback_links(arch)
        first, second = extended.monitor.observations
        # process 1 plays whether the Environment and process 2 disagreed last round
        mismatch = MooreMachine(first, tuple(tuple(int(b[0] != b[2]) for b in first) for _ in range(2)), ('0', '1'))
        echo = echo_machine(second)
        programs = feedback_free_programs(arch, [mismatch, echo])

        assert [p.alphabet for p in programs] == list(arch.monitor.observations)
        assert programs[1].num_states == 2
        assert len(runs(arch, 6, programs)) == 64
        assert runs(arch, 6, programs) == runs(extended, 6, [mismatch, echo])

    def test_feedback_free_programs_need_feedback_alphabets(self):
        arch = feedback_pipeline()
        programs = [echo_machine(alphabet) for alphabet in arch.monitor.observations]
        with pytest.raises(AlphabetMismatchError):
            feedback_free_programs(arch, programs)
        with pytest.raises(PreconditionError):
            feedback_free_programs(arch, programs[:1])

    def test_pipe_shift(self):
        run = [('a0', 'b0'), ('a1', 'b1'), ('a2', 'b2')]
        piped = PipeShiftSpecification.pipe(run, 1)

        assert piped == [('a0', 'b1'), ('a1', 'b2')]
        assert PipeShiftSpecification.unpipe(piped, 1) == [('a1', 'b1')]


class TestGameTranslation:
    """Test suite for games as architectures and back."""

    def setup_method(self):
        """Setup test fixtures."""
        self.game = privbit_game()

    def test_game_to_arch(self):
        arch, spec = game_to_arch(self.game, WinningCondition.trivial(self.game.color_names))

        assert arch.size == 2
        assert arch.monitor.num_states == 3
        assert arch.environment_actions == ('0', '1')
        assert arch.start_observation() == ('-', '-')
        assert spec.colors == ('v0', 'v1', 'v2')

    def test_round_trip_histories(self):
        report = history_correspondence(self.game, depth=5)

        assert report['traces_match']
        assert report['bijective']
        assert report['round_trip_histories'] == report['histories']
        assert report['observations_match']
        assert report['histories'] > 0

    def test_chain_decomposition(self):
        maps = chain_decomposition(self.game, [0, 1])

        assert maps == [{'-': '-', '0': '∘', '1': '∘'}]
        with pytest.raises(DecompositionError):
            chain_decomposition(self.game, [1, 0])

    def test_sequentialize_pipeline(self):
        pipeline = sequentialize_pipeline(self.game, [0, 1], WinningCondition.trivial(self.game.color_names))

        assert pipeline.architecture.size == 2
        assert pipeline.architecture.monitor.links == ((0, 1), (1, 2))
        assert pipeline.specification.describe()['order'] == [1, 2]
        assert pipeline.relays[1] is None
        assert pipeline.relays[2] is not None

    def test_pipe_shift_admits_the_source_runs(self):
        pipeline = sequentialize_pipeline(self.game, [0, 1], WinningCondition.trivial(self.game.color_names))
        specification = pipeline.specification
        source_runs = runs(specification.source, 5)

        assert len(source_runs) == 32
        assert all(specification.admits(specification.pipe_source(run)) for run in source_runs)

    def test_pipe_shift_rejects_disabled_actions(self):
        pipeline = sequentialize_pipeline(self.game, [0, 1], WinningCondition.trivial(self.game.color_names))
        specification = pipeline.specification
        piped = specification.pipe_source(runs(specification.source, 4)[0])
        forged = [(piped[0][0], 'bogus', piped[0][2])] + piped[1:]

        assert len(piped) == 2
        assert specification.admits(piped)
        assert not specification.admits(forged)

    def test_sequentialize_needs_a_factoring_order(self):
        with pytest.raises(DecompositionError):
            sequentialize_pipeline(self.game, [1, 0], WinningCondition.trivial(self.game.color_names))
        with pytest.raises(PreconditionError):
            sequentialize_pipeline(self.game, [0, 0], WinningCondition.trivial(self.game.color_names))


class TestRouting:
    """Test suite for hierarchy-maintaining routers."""

    def load_router(self, fixture_path, name):
        _, (participants, table) = parse_architecture(load_json(fixture_path(name)))
        return participants, table

    def test_private_bits_to_both_processes_panic(self, fixture_path):
        participants, table = self.load_router(fixture_path, 'router_fork.json')
        monitor = build_router(participants, table)
        report = router_report(monitor)

        assert PANIC in monitor.machine.labels
        assert report['states'] == 2
        assert report['panic_reachable']
        assert report['panic_path'] == [['fork00[0>1:0@1][0>2:0@1]', 'idle', 'idle']]
        assert report['letters'] == 5
        assert report['denying_transitions'] == 0

    def test_quiet_router_never_panics(self):
        alphabets = [[RoutedAction('quiet')], [RoutedAction('idle')], [RoutedAction('idle')]]
        monitor = build_router(alphabets, AggregationTable((1,)))
        report = router_report(monitor)

        assert not report['panic_reachable']
        assert report['panic_path'] is None
        assert report['states'] == 1
        assert monitor.machine.labels == (SAFE,)

    def test_relay_router_denies_the_share(self, fixture_path):
        participants, table = self.load_router(fixture_path, 'router_relay.json')
        monitor = build_router(participants, table)
        report = router_report(monitor)

        assert monitor.processes == 3
        assert report['states'] == 1
        assert not report['panic_reachable']
        assert report['letters'] == 4
        assert report['denying_transitions'] == 2
        _, outputs = monitor.machine.step(monitor.machine.initial, tuple(a[-1] for a in participants))
        assert outputs[0].delivered == ((2, False),)
        assert outputs[1].signals == ()

    def test_relay_policy(self, fixture_path):
        participants, table = self.load_router(fixture_path, 'router_relay.json')
        policy, hierarchical = delivery_policy(participants, table)

        assert hierarchical
        assert all(delivered == tuple(s for s in delivered if s.priority == table.top)
                   for delivered in policy.values())

    def test_private_signal_to_a_less_informed_process_panics(self):
        alphabets = [
            [RoutedAction('tip0', (Signal(0, 1, '0', 1),)), RoutedAction('tip1', (Signal(0, 1, '1', 1),))],
            [RoutedAction('idle')],
            [RoutedAction('idle')],
            [RoutedAction('idle'), RoutedAction('ping', (Signal(3, 2, 'z', 1),))],
        ]
        report = router_report(build_router(alphabets, AggregationTable((1, 2))))

        assert report['panic_reachable']
        assert report['states'] == 2
        assert report['panic_path'] == [['tip0[0>1:0@1]', 'idle', 'idle', 'idle']]

    @pytest.mark.parametrize('name', ['router_fork.json', 'router_relay.json'])
    def test_panic_matches_the_delivery_game(self, fixture_path, name):
        participants, table = self.load_router(fixture_path, name)
        policy, hierarchical = delivery_policy(participants, table)
        game = delivery_game(len(participants) - 1, policy)
        report = router_report(build_router(participants, table))

        assert report['panic_reachable'] == (not hierarchical)
        assert report['panic_reachable'] == (brute_force_dynamic(game, 3) is not None)
        assert report['panic_reachable'] == (not nfa_is_empty(non_hierarchy_nfa(game)))

    def test_candidate_deliveries_keep_top_priority_signals(self):
        letter = (RoutedAction('tip', (Signal(0, 1, 'x', 2),)),
                  RoutedAction('send', (Signal(1, 2, 'y', 0), Signal(1, 3, 'z', 1))),
                  RoutedAction('idle'), RoutedAction('idle'))
        table = AggregationTable((1, 2, 10))
        candidates = candidate_deliveries(letter, table)

        assert len(candidates) == 4
        assert all(Signal(0, 1, 'x', 2) in delivered for delivered in candidates)
        assert [table.value(d) for d in candidates] == [13, 12, 11, 10]

    def test_invalid_weights(self):
        with pytest.raises(AggregationError):
            build_router([[RoutedAction('quiet')], [RoutedAction('idle')]], AggregationTable((1, 0)))

    def test_environment_signals_carry_the_top_priority(self):
        action = RoutedAction('tip', (Signal(0, 1, 'x', 0),))
        with pytest.raises(PreconditionError):
            build_router([[action], [RoutedAction('idle')]], AggregationTable((1, 2)))
