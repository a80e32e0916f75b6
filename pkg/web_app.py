"""
Hierarchical Games Web Application
Flask JSON service exposing the hierarchy checks, game transformations,
synthesis and verification. Requests carry documents in the JSON body and
responses are the same reports the CLI prints.
"""

import logging
import os

from flask import Flask, jsonify, request

from documents import (condition_document, default_condition, game_document, parse_condition, parse_game,
                       parse_profile, profile_document)
from game_errors import DocumentError, GameError, PreconditionError
from game_graph import require_valid
from game_transforms import annotate_ranks, cross_free_with_origins, restrict_with_origins, shadow_game, \
    to_hierarchical_observation
from hierarchy_analyzer import HierarchyAnalyzer, check_static
from report_generator import ReportGenerator
from resource_limits import load_limits
from strategy_synthesizer import StrategySynthesizer, verify_strategy

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger('HierarchicalGamesWeb')

app = Flask(__name__)

TRANSFORMS = ('hierobs', 'shadow', 'crossfree', 'restrict')


def _limits():
    return load_limits(app.config.get('LIMITS_PROFILE') or os.environ.get('HIERSYNTH_PROFILE'))


def _body() -> dict:
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise DocumentError("request body must be a JSON object")
    return data


def _game(data: dict):
    if 'game' not in data:
        raise DocumentError("missing field 'game'", '$.game')
    return require_valid(parse_game(data['game']), complete=bool(data.get('complete', False)))


def _condition(data: dict, game):
    if data.get('condition') is None:
        return default_condition(game)
    return parse_condition(data['condition'], game.color_names)


def _error_response(command: str, error: Exception):
    reporter = ReportGenerator(command)
    if isinstance(error, GameError):
        logger.error(f"❌ {command}: {type(error).__name__}: {error}")
        return jsonify(reporter.error_report(error)), error.http_status
    logger.error(f"🚩 {command} failed: {str(error)}")
    return jsonify({'error': f'{command} failed: {str(error)}'}), 500


@app.route('/health')
def health():
    """Liveness check."""
    return jsonify({'status': 'ok'})


@app.route('/check/<kind>', methods=['POST'])
def check(kind: str):
    """Run one hierarchy decider on the posted game."""
    command = f'check {kind}'
    try:
        if kind not in HierarchyAnalyzer.KINDS:
            return jsonify({'error': f"unknown check '{kind}'"}), 404
        limits = _limits()
        result = HierarchyAnalyzer(_game(_body()), limits).analyze(kind)
        fields = {key: value for key, value in result.items() if key not in ('verdict', 'statistics')}
        return jsonify(ReportGenerator(command, limits).generate_report(result['verdict'], result['statistics'],
                                                                        **fields))
    except Exception as e:
        return _error_response(command, e)


@app.route('/transform/<kind>', methods=['POST'])
def transform(kind: str):
    """Transform the posted game; the response carries the new game document."""
    command = f'transform {kind}'
    try:
        if kind not in TRANSFORMS:
            return jsonify({'error': f"unknown transformation '{kind}'"}), 404
        limits = _limits()
        data = _body()
        game = _game(data)
        fields = {'transformation': kind}
        if kind == 'hierobs':
            static = check_static(game, limits)
            if not static.ok:
                raise PreconditionError("no static order: the game is not statically hierarchical")
            result = to_hierarchical_observation(game, static.order, limits)
        elif kind == 'shadow':
            result = shadow_game(game, limits).game
        elif kind == 'crossfree':
            result, _ = cross_free_with_origins(annotate_ranks(game, limits), limits)
        else:
            restricted = restrict_with_origins(game, _condition(data, game), limits)
            result = restricted.game
            fields['condition'] = condition_document(restricted.condition)
        statistics = {'positions_before': game.num_positions, 'positions_after': result.num_positions}
        return jsonify(ReportGenerator(command, limits).generate_report('ok', statistics,
                                                                        game=game_document(result), **fields))
    except Exception as e:
        return _error_response(command, e)


@app.route('/synthesize', methods=['POST'])
def synthesize():
    """Synthesize a profile for the posted game and condition."""
    command = 'synthesize'
    try:
        limits = _limits()
        data = _body()
        game = _game(data)
        synthesizer = StrategySynthesizer(game, _condition(data, game), limits)
        result = synthesizer.synthesize_hierarchical() if data.get('hierarchical') else synthesizer.synthesize()
        profile = profile_document(result.profile) if result.realizable else None
        return jsonify(ReportGenerator(command, limits).generate_report(result.verdict, result.statistics,
                                                                        strategy=profile))
    except Exception as e:
        return _error_response(command, e)


@app.route('/verify', methods=['POST'])
def verify():
    """Model-check the posted profile."""
    command = 'verify'
    try:
        limits = _limits()
        data = _body()
        game = _game(data)
        if 'strategy' not in data:
            raise DocumentError("missing field 'strategy'", '$.strategy')
        result = verify_strategy(game, parse_profile(data['strategy']), _condition(data, game), limits)
        witness = result.witness.to_dict(game) if result.witness is not None else None
        return jsonify(ReportGenerator(command, limits).generate_report('ok' if result.ok else 'fail',
                                                                        {'explored': result.explored},
                                                                        witness=witness))
    except Exception as e:
        return _error_response(command, e)


if __name__ == '__main__':
    port = int(os.environ.get('PORT', 5500))
    logger.info(f"🚀 Starting hierarchical games service on port {port}")
    app.run(host='0.0.0.0', port=port, debug=False)
