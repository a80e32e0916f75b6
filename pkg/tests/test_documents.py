"""
Tests for Documents module
"""

import json

import pytest
import sys
import os

# Add the parent directory to the path so we can import our modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from documents import (dumps, game_document, load_json, parse_automaton, parse_condition, parse_game,
                       parse_profile, profile_document, read_condition, read_game, report_document,
                       witness_document, write_document)
from game_errors import DocumentError
from game_generators import fork2_game, pubcoin_game
from game_graph import LOSE
from hierarchy_analyzer import check_dynamic
from winning_conditions import PARITY_KIND, SAFETY


def solo(**changes):
    document = {
        'kind': 'game', 'version': 1, 'players': 1, 'actions': [['a']], 'initial': 'v0',
        'positions': [{'name': 'v0', 'observations': ['-'], 'color': 'ok'}],
        'moves': [{'from': 'v0', 'actions': ['*'], 'to': 'v0'}],
    }
    document.update(changes)
    return document


class TestGameDocuments:
    """Test suite for game documents and their error locations."""

    def test_parse_solo(self, fixture_path):
        game = read_game(fixture_path('solo.json'))

        assert game.players == 1
        assert game.num_positions == 1
        assert game.successors(0, (0,)) == [0]

    def test_canonical_document_parses_back(self):
        game = pubcoin_game()

        assert parse_game(game_document(game)) == game

    def test_attributes_are_ignored(self):
        document = game_document(pubcoin_game(), {'source': 'test'}, [{'rank': [1, 2]}, None, None])

        assert document['positions'][0]['attributes'] == {'rank': [1, 2]}
        assert 'attributes' not in document['positions'][1]
        assert parse_game(document) == pubcoin_game()

    def test_unknown_field(self):
        with pytest.raises(DocumentError) as info:
            parse_game(solo(owner='me'))
        assert info.value.location == '$.owner'

    def test_unknown_kind_and_version(self):
        with pytest.raises(DocumentError, match="unknown document kind 'board'"):
            parse_game(solo(kind='board'))
        with pytest.raises(DocumentError, match='unsupported version 2'):
            parse_game(solo(version=2))

    def test_wrong_kind(self):
        with pytest.raises(DocumentError, match="expected a game document, got 'moore'"):
            parse_game(solo(kind='moore'))

    def test_unknown_target(self):
        moves = [{'from': 'v0', 'actions': ['*'], 'to': 'v9'}]
        with pytest.raises(DocumentError) as info:
            parse_game(solo(moves=moves))
        assert info.value.location == '$.moves[0]'
        assert "unknown position 'v9'" in info.value.message

    def test_unknown_action(self):
        moves = [{'from': 'v0', 'actions': ['b'], 'to': 'v0'}]
        with pytest.raises(DocumentError) as info:
            parse_game(solo(moves=moves))
        assert info.value.location == '$.moves[0].actions[0]'

    def test_duplicate_position(self):
        positions = [{'name': 'v0', 'observations': ['-']}] * 2
        with pytest.raises(DocumentError) as info:
            parse_game(solo(positions=positions))
        assert info.value.location == '$.positions[1].name'

    def test_unknown_initial(self):
        with pytest.raises(DocumentError) as info:
            parse_game(solo(initial='w'))
        assert info.value.location == '$.initial'

    def test_error_payload(self):
        with pytest.raises(DocumentError) as info:
            parse_game(solo(owner='me'))
        payload = info.value.to_dict()

        assert payload['error'] == 'DocumentError'
        assert payload['location'] == '$.owner'
        assert info.value.http_status == 400


class TestConditionDocuments:
    """Test suite for condition documents."""

    def test_safety_with_game_colors(self):
        condition = parse_condition({'kind': 'condition', 'version': 1, 'type': 'safety', 'avoid': [LOSE]},
                                    ['ok', LOSE])

        assert condition.kind == SAFETY
        assert not condition.accepts_play(['ok'], [LOSE])

    def test_colors_are_required_without_a_game(self):
        with pytest.raises(DocumentError) as info:
            parse_condition({'kind': 'condition', 'version': 1, 'type': 'safety', 'avoid': []})
        assert info.value.location == '$.colors'

    def test_unknown_type(self):
        with pytest.raises(DocumentError, match="unknown condition type 'rabin'"):
            parse_condition({'kind': 'condition', 'version': 1, 'type': 'rabin'}, ['ok'])

    def test_unknown_color(self):
        with pytest.raises(DocumentError):
            parse_condition({'kind': 'spec', 'version': 1, 'type': 'reachability', 'targets': ['gold']}, ['ok'])

    def test_default_condition(self, fixture_path):
        game = fork2_game()

        assert read_condition(None, game).kind == SAFETY
        assert read_condition(None, pubcoin_game()).accepts_play(['ok'], ['ok'])
        assert read_condition(fixture_path('avoid_lose.json'), game).kind == SAFETY

    def test_parity_condition(self):
        automaton = {
            'mode': 'parity', 'alphabet': ['a', 'b'], 'states': ['even', 'odd'], 'initial': 'even',
            'priorities': [0, 1],
            'transitions': [{'from': s, 'letter': letter, 'to': 'even' if letter == 'a' else 'odd'}
                            for s in ('even', 'odd') for letter in ('a', 'b')],
        }
        condition = parse_condition({'kind': 'condition', 'version': 1, 'type': 'parity',
                                     'automaton': automaton})

        assert condition.kind == PARITY_KIND
        assert condition.accepts_play([], ['a'])
        assert not condition.accepts_play([], ['b'])


class TestAutomatonDocuments:
    """Test suite for automaton documents."""

    def test_nfa_fixture(self, fixture_path):
        automaton = parse_automaton(load_json(fixture_path('nfa_ab.json')))

        assert automaton.mode == 'nfa'
        assert automaton.labels == ('q0', 'q1', 'q2')

    def test_unknown_mode(self):
        with pytest.raises(DocumentError) as info:
            parse_automaton({'kind': 'automaton', 'version': 1, 'mode': 'rabin'})
        assert info.value.location == '$.mode'

    def test_unknown_letter(self):
        data = {'kind': 'automaton', 'version': 1, 'mode': 'nfa', 'alphabet': ['a'], 'states': ['q'],
                'initial': 'q', 'transitions': [{'from': 'q', 'letter': 'z', 'to': 'q'}]}
        with pytest.raises(DocumentError) as info:
            parse_automaton(data)
        assert info.value.location == '$.transitions[0].letter'


class TestProfileDocuments:
    """Test suite for strategy-profile documents."""

    def test_profile_fixture(self, fixture_path):
        profile = parse_profile(load_json(fixture_path('echo_profile.json')))

        assert len(profile.machines) == 2
        assert profile.machines[0].output_after(['0']) == '0'
        assert profile.machines[0].output_after(['1']) == '1'
        assert parse_profile(profile_document(profile)) == profile

    def test_errors_point_into_the_machine(self, fixture_path):
        data = load_json(fixture_path('echo_profile.json'))
        data['machines'][1]['initial'] = 'sleep'
        with pytest.raises(DocumentError) as info:
            parse_profile(data)
        assert info.value.location == '$.machines[1].initial'

    def test_missing_transition(self, fixture_path):
        data = load_json(fixture_path('echo_profile.json'))
        data['machines'][1]['transitions'].pop()
        with pytest.raises(DocumentError, match='missing transition'):
            parse_profile(data)


class TestOutput:
    """Test suite for canonical output and report documents."""

    def test_write_document(self, tmp_path):
        path = tmp_path / 'report.json'
        document = report_document('check', 'ok', order=[1, 2], witness=None)
        write_document(document, str(path))

        assert load_json(str(path)) == {'kind': 'report', 'version': 1, 'command': 'check', 'verdict': 'ok',
                                        'order': [1, 2]}
        assert path.read_text(encoding='utf-8') == dumps(document)
        assert [p.name for p in tmp_path.iterdir()] == ['report.json']

    def test_dumps_is_canonical(self):
        text = dumps({'b': 1, 'a': '∘'})

        assert text == '{\n  "a": "∘",\n  "b": 1\n}\n'
        assert json.loads(text) == {'a': '∘', 'b': 1}

    def test_invalid_json(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"kind": ', encoding='utf-8')
        with pytest.raises(DocumentError, match='invalid JSON'):
            load_json(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DocumentError, match='cannot read document'):
            load_json(str(tmp_path / 'absent.json'))

    def test_witness_document(self):
        game = fork2_game()
        document = witness_document('dynamic', check_dynamic(game).witness, game)

        assert document['kind'] == 'witness'
        assert document['check'] == 'dynamic'
        assert document['type'] == 'incomparability'

    def test_witness_list(self):
        document = witness_document('static', [{'type': 'static-refutation'}])

        assert document['type'] == 'refutations'
        assert document['refutations'] == [{'type': 'static-refutation'}]
