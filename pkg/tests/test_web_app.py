"""
Tests for the Flask JSON service
"""

import pytest
import sys
import os
import json

# Add the parent directory to the path so we can import our modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from documents import game_document, load_json
from game_generators import fork2_game, privbit_echo_game, privbit_game, pubcoin_game
from web_app import app


@pytest.fixture
def client():
    """Create test client."""
    app.config['TESTING'] = True
    with app.test_client() as client:
        yield client


def test_health(client):
    response = client.get('/health')
    assert response.status_code == 200
    assert json.loads(response.data) == {'status': 'ok'}


def test_static_check(client):
    """Public information orders the players by index."""
    response = client.post('/check/static', json={'game': game_document(pubcoin_game())})
    assert response.status_code == 200

    data = json.loads(response.data)
    assert data['verdict'] == 'ok'
    assert data['order'] == [1, 2]


def test_dynamic_check_returns_witness(client):
    response = client.post('/check/dynamic', json={'game': game_document(fork2_game())})
    assert response.status_code == 200

    data = json.loads(response.data)
    assert data['verdict'] == 'fail'
    assert data['witness']['round'] == 1


def test_unknown_check(client):
    response = client.post('/check/weekly', json={'game': game_document(pubcoin_game())})
    assert response.status_code == 404


def test_missing_body(client):
    """Test check with no JSON body."""
    response = client.post('/check/static', data='not json')
    assert response.status_code == 400

    data = json.loads(response.data)
    assert data['verdict'] == 'error'
    assert data['error']['error'] == 'DocumentError'


def test_missing_game(client):
    response = client.post('/check/static', json={})
    assert response.status_code == 400
    assert json.loads(response.data)['error']['location'] == '$.game'


def test_malformed_game(client):
    document = game_document(pubcoin_game())
    document['owner'] = 'me'
    response = client.post('/check/static', json={'game': document})
    assert response.status_code == 400
    assert json.loads(response.data)['error']['location'] == '$.owner'


def test_transform_hierobs(client):
    response = client.post('/transform/hierobs', json={'game': game_document(privbit_game())})
    assert response.status_code == 200

    data = json.loads(response.data)
    assert data['game']['kind'] == 'game'
    assert data['statistics']['positions_after'] == 3


def test_transform_precondition(client):
    """The private bits leave no static order, so the hierarchical-observation transform refuses them."""
    response = client.post('/transform/hierobs', json={'game': game_document(fork2_game())})
    assert response.status_code == 422
    assert json.loads(response.data)['error']['error'] == 'PreconditionError'


def test_transform_restrict(client):
    response = client.post('/transform/restrict', json={'game': game_document(fork2_game())})
    assert response.status_code == 200

    data = json.loads(response.data)
    assert data['condition']['kind'] == 'condition'
    assert data['statistics']['positions_after'] == 2


def test_synthesize(client):
    response = client.post('/synthesize', json={'game': game_document(privbit_echo_game())})
    assert response.status_code == 200

    data = json.loads(response.data)
    assert data['verdict'] == 'realizable'
    assert data['strategy']['kind'] == 'strategy-profile'


def test_synthesize_unrealizable(client):
    response = client.post('/synthesize', json={'game': game_document(fork2_game())})
    assert response.status_code == 200

    data = json.loads(response.data)
    assert data['verdict'] == 'unrealizable'
    assert 'strategy' not in data


def test_verify(client, fixture_path):
    game = game_document(privbit_echo_game())
    good = client.post('/verify', json={'game': game, 'strategy': load_json(fixture_path('echo_profile.json'))})
    bad = client.post('/verify', json={'game': game,
                                       'strategy': load_json(fixture_path('echo_wrong_profile.json'))})

    assert json.loads(good.data)['verdict'] == 'ok'
    assert json.loads(bad.data)['verdict'] == 'fail'
    assert json.loads(bad.data)['witness']['type'] == 'lasso'


def test_verify_missing_strategy(client):
    response = client.post('/verify', json={'game': game_document(privbit_echo_game())})
    assert response.status_code == 400
    assert json.loads(response.data)['error']['location'] == '$.strategy'
