"""
Hierarchical Games CLI
Command-line entry point: hierarchy checks, game transformations, strategy
synthesis and verification, architecture translations, generators and the
property suite. Reports are JSON on stdout, summaries and logs on stderr.

Exit codes: 0 property holds / realizable, 1 property fails / unrealizable,
2 usage, document, precondition or resource error.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from architecture import (arch_product, build_router, game_to_arch, history_correspondence, pipeline_monitor,
                          router_report, sequentialize_pipeline)
from documents import (architecture_document, condition_document, dumps, game_document, monitor_document,
                       parse_architecture, parse_automaton, parse_condition, parse_profile, profile_document,
                       read, read_condition, read_game, witness_document, write_document)
from game_errors import GameError, PreconditionError
from game_generators import (SCENARIOS, gen_from_nfa_emptiness, gen_from_nfa_universality, gen_prime_family,
                             random_game)
from game_graph import GameGraph, require_valid, to_dot
from game_transforms import annotate_ranks, cross_free_with_origins, restrict_with_origins, shadow_game, \
    to_hierarchical_observation
from hierarchy_analyzer import HierarchyAnalyzer, check_static
from report_generator import ReportGenerator
from resource_limits import ResourceLimits, load_limits
from strategy_synthesizer import StrategySynthesizer, verify_strategy
from suite_analyzer import PROPERTIES, SuiteAnalyzer

logger = logging.getLogger('HierarchicalGamesCLI')

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _parse_order(text: str) -> List[int]:
    """'2,1' -> [1, 0]; players are numbered from 1 on the command line."""
    try:
        return [int(part) - 1 for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid player order '{text}'") from None


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--max-states', type=int, help='Largest automaton or product to build (default 10^6)')
    common.add_argument('--max-depth', type=int, help='Longest history for enumerations (default 12)')
    common.add_argument('--max-arena', type=int, help='Largest knowledge arena (default 10^5)')
    common.add_argument('--profile', help='Limits profile from limits_config.json (desk, thorough, ci)')
    common.add_argument('--jobs', type=int, help='Worker threads for the epistemic closure (default 1)')
    common.add_argument('--log-level', default='WARNING',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='Log level on stderr')
    common.add_argument('--complete', action='store_true', help='Repair dead ends with self-loops')
    common.add_argument('--timings', action='store_true', help='Add wall time to reports')
    common.add_argument('--dot', metavar='PATH', help='Also write a graph description of the game')
    common.add_argument('--quiet', action='store_true', help='No human summary on stderr')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog='hiersynth', description='Games with hierarchical information')
    commands = parser.add_subparsers(dest='command', required=True)

    check = commands.add_parser('check', parents=[common], help='Decide a hierarchical-information condition')
    check.add_argument('kind', choices=HierarchyAnalyzer.KINDS)
    check.add_argument('game', help='Game document')
    check.add_argument('--witness', metavar='PATH', help='Write the witness document here on failure')

    transform = commands.add_parser('transform', parents=[common], help='Transform a game')
    transform.add_argument('kind', choices=['hierobs', 'shadow', 'crossfree', 'restrict'])
    transform.add_argument('game', help='Input game document')
    transform.add_argument('out', help='Output game document')
    transform.add_argument('--condition', help='Condition document (restrict)')
    transform.add_argument('--condition-out', metavar='PATH', help='Write the adjusted condition (restrict)')

    synthesize = commands.add_parser('synthesize', parents=[common], help='Synthesize a winning strategy profile')
    synthesize.add_argument('game', help='Game document')
    synthesize.add_argument('out', help='Strategy-profile document to write when realizable')
    synthesize.add_argument('--condition', help='Condition document; defaults to avoiding LOSE')
    synthesize.add_argument('--hierarchical', action='store_true',
                            help='Only profiles that never realise a non-hierarchical history')

    verify = commands.add_parser('verify', parents=[common], help='Model-check a strategy profile')
    verify.add_argument('game', help='Game document')
    verify.add_argument('strategy', help='Strategy-profile document')
    verify.add_argument('--condition', help='Condition document; defaults to avoiding LOSE')
    verify.add_argument('--witness', metavar='PATH', help='Write the losing play here on failure')

    arch = commands.add_parser('arch', help='Architecture translations')
    arch_commands = arch.add_subparsers(dest='arch_command', required=True)
    to_game = arch_commands.add_parser('arch2game', parents=[common], help='Game of an architecture')
    to_game.add_argument('architecture', help='Architecture document')
    to_game.add_argument('out', help='Output game document')
    to_game.add_argument('--spec', help='Specification document over monitor states')
    to_game.add_argument('--condition-out', metavar='PATH', help='Write the game condition')
    to_arch = arch_commands.add_parser('game2arch', parents=[common], help='Architecture of a game')
    to_arch.add_argument('game', help='Game document')
    to_arch.add_argument('out', help='Output architecture document')
    to_arch.add_argument('--condition', help='Condition document; defaults to avoiding LOSE')
    to_arch.add_argument('--spec-out', metavar='PATH', help='Write the specification over monitor states')
    pipeline = arch_commands.add_parser('pipeline', parents=[common], help='Pipeline monitor or sequentialisation')
    pipeline.add_argument('out', help='Output monitor or architecture document')
    source = pipeline.add_mutually_exclusive_group(required=True)
    source.add_argument('--processes', type=int, help='Binary-signal pipeline monitor for N processes')
    source.add_argument('--game', help='Sequentialise this statically hierarchical game')
    pipeline.add_argument('--order', type=_parse_order, help='Player order, most informed first (e.g. 1,2)')
    pipeline.add_argument('--relays', action='store_true', help='Relay processes for stages 2..n')
    pipeline.add_argument('--condition', help='Condition document of the game')
    router = arch_commands.add_parser('router', parents=[common], help='Hierarchy-maintaining router')
    router.add_argument('architecture', help='Architecture document with a router block')
    roundtrip = arch_commands.add_parser('roundtrip', parents=[common], help='Game -> architecture -> game')
    roundtrip.add_argument('game', help='Game document')
    roundtrip.add_argument('--depth', type=int, default=5, help='History depth compared (default 5)')

    generate = commands.add_parser('generate', parents=[common], help='Write a generated game document')
    generate.add_argument('kind', choices=['prime', 'emptiness', 'universality', 'random', 'scenario'])
    generate.add_argument('out', help='Output game document')
    generate.add_argument('--m', type=int, default=2, help='Prime family index')
    generate.add_argument('--nfa', help='Automaton document (emptiness, universality)')
    generate.add_argument('--name', choices=sorted(SCENARIOS), help='Scenario name')
    generate.add_argument('--seed', type=int, default=7)
    generate.add_argument('--players', type=int, default=2)
    generate.add_argument('--positions', type=int, default=4)

    suite = commands.add_parser('suite', parents=[common], help='Run the property suite')
    suite.add_argument('--seed', type=int, default=7)
    suite.add_argument('--count', type=int, default=50, help='Instances per property')
    suite.add_argument('--depth', type=int, default=8, help='Depth of the brute-force oracles')
    suite.add_argument('--properties', nargs='+', choices=PROPERTIES)
    return parser


def limits_from_args(args: argparse.Namespace) -> ResourceLimits:
    try:
        return load_limits(args.profile, max_states=args.max_states, max_depth=args.max_depth,
                           max_arena=args.max_arena, jobs=args.jobs)
    except ValueError as e:
        raise PreconditionError(str(e)) from None


def _load_game(args: argparse.Namespace, path: str) -> GameGraph:
    game = require_valid(read_game(path), complete=args.complete)
    if args.dot:
        with open(args.dot, 'w', encoding='utf-8') as handle:
            handle.write(to_dot(game))
    return game


def _size_delta(before: GameGraph, after: GameGraph) -> Dict:
    return {'positions_before': before.num_positions, 'positions_after': after.num_positions,
            'moves_before': len(before.moves), 'moves_after': len(after.moves)}


def cmd_check(args: argparse.Namespace, limits: ResourceLimits, reporter: ReportGenerator) -> Dict:
    game = _load_game(args, args.game)
    result = HierarchyAnalyzer(game, limits).analyze(args.kind)
    fields = {key: value for key, value in result.items() if key not in ('verdict', 'statistics', 'witness')}
    if 'witness' in result:
        if args.witness:
            write_document(witness_document(args.kind, result['witness']), args.witness)
            reporter.add_artifact('witness', args.witness)
        else:
            fields['witness'] = result['witness']
    return reporter.generate_report(result['verdict'], result['statistics'], **fields)


def cmd_transform(args: argparse.Namespace, limits: ResourceLimits, reporter: ReportGenerator) -> Dict:
    game = _load_game(args, args.game)
    names = game.position_names
    position_attributes: Optional[List[Optional[Dict]]] = None
    fields: Dict = {'transformation': args.kind}
    if args.kind == 'hierobs':
        static = check_static(game, limits)
        if not static.ok:
            raise PreconditionError("no static order: the game is not statically hierarchical")
        result = to_hierarchical_observation(game, static.order, limits)
        fields['order'] = static.order.to_dict()['order']
    elif args.kind == 'shadow':
        shadow = shadow_game(game, limits)
        result = shadow.game
        position_attributes = []
        for p in range(result.num_positions):
            origin = shadow.origin[p]
            entry = {'origin': names[origin] if origin is not None else None}
            if p < len(shadow.annotated.ranks):
                entry['ranks'] = list(shadow.ranks(p))
            position_attributes.append(entry)
        fields['lookahead_inserted'] = shadow.cross_free
        fields['sink'] = shadow.sink is not None
    elif args.kind == 'crossfree':
        annotated = annotate_ranks(game, limits)
        result, origins = cross_free_with_origins(annotated, limits)
        position_attributes = [{'origin': names[annotated.origins[o]] if o is not None else None}
                               for o in origins]
    else:
        condition = read_condition(args.condition, game)
        restricted = restrict_with_origins(game, condition, limits)
        result = restricted.game
        position_attributes = [{'origin': names[o] if o is not None else None} for o in restricted.origins]
        fields['sink'] = restricted.sink is not None
        if args.condition_out:
            write_document(condition_document(restricted.condition), args.condition_out)
            reporter.add_artifact('condition', args.condition_out)
    write_document(game_document(result, position_attributes=position_attributes), args.out)
    reporter.add_artifact('game', args.out)
    return reporter.generate_report('ok', _size_delta(game, result), **fields)


def cmd_synthesize(args: argparse.Namespace, limits: ResourceLimits, reporter: ReportGenerator) -> Dict:
    game = _load_game(args, args.game)
    condition = read_condition(args.condition, game)
    synthesizer = StrategySynthesizer(game, condition, limits, args.jobs)
    result = synthesizer.synthesize_hierarchical() if args.hierarchical else synthesizer.synthesize()
    if result.realizable:
        write_document(profile_document(result.profile), args.out)
        reporter.add_artifact('strategy', args.out)
    return reporter.generate_report(result.verdict, result.statistics, verified=result.realizable or None,
                                    hierarchical=args.hierarchical)


def cmd_verify(args: argparse.Namespace, limits: ResourceLimits, reporter: ReportGenerator) -> Dict:
    game = _load_game(args, args.game)
    condition = read_condition(args.condition, game)
    profile = parse_profile(read(args.strategy, ['strategy-profile']))
    result = verify_strategy(game, profile, condition, limits)
    statistics = {'explored': result.explored, 'profile_states': profile.total_states()}
    if result.ok:
        return reporter.generate_report('ok', statistics)
    witness = witness_document('verify', result.witness, game)
    if args.witness:
        write_document(witness, args.witness)
        reporter.add_artifact('witness', args.witness)
        return reporter.generate_report('fail', statistics)
    return reporter.generate_report('fail', statistics, witness=result.witness.to_dict(game))


def cmd_arch(args: argparse.Namespace, limits: ResourceLimits, reporter: ReportGenerator) -> Dict:
    kind = args.arch_command
    if kind == 'arch2game':
        arch, _ = parse_architecture(read(args.architecture, ['architecture']))
        if arch is None:
            raise PreconditionError("the architecture document has no monitor")
        spec = None
        if args.spec:
            names = [arch.monitor.state_name(m) for m in range(arch.monitor.num_states)]
            spec = parse_condition(read(args.spec, ['spec', 'condition']), names)
        product = arch_product(arch, spec, limits)
        write_document(game_document(product.game), args.out)
        reporter.add_artifact('game', args.out)
        if args.condition_out:
            write_document(condition_document(product.condition), args.condition_out)
            reporter.add_artifact('condition', args.condition_out)
        return reporter.generate_report('ok', dict(arch.stats(), positions=product.game.num_positions),
                                        disabled_sink=product.sink is not None)
    if kind == 'game2arch':
        game = _load_game(args, args.game)
        arch, spec = game_to_arch(game, read_condition(args.condition, game), limits)
        write_document(architecture_document(arch), args.out)
        reporter.add_artifact('architecture', args.out)
        if args.spec_out:
            write_document(condition_document(spec, 'spec'), args.spec_out)
            reporter.add_artifact('spec', args.spec_out)
        return reporter.generate_report('ok', arch.stats())
    if kind == 'pipeline':
        if args.processes is not None:
            monitor = pipeline_monitor(args.processes, [('0', '1')] * args.processes)
            write_document(monitor_document(monitor), args.out)
            reporter.add_artifact('monitor', args.out)
            return reporter.generate_report('ok', {'processes': args.processes, 'states': monitor.num_states})
        game = _load_game(args, args.game)
        order = args.order
        if order is None:
            static = check_static(game, limits)
            if not static.ok:
                raise PreconditionError("no static order: the game is not statically hierarchical")
            order = list(static.order.order)
        pipeline = sequentialize_pipeline(game, order, read_condition(args.condition, game), limits,
                                          relays=args.relays)
        write_document(architecture_document(pipeline.architecture), args.out)
        reporter.add_artifact('architecture', args.out)
        return reporter.generate_report('ok', pipeline.architecture.stats(),
                                        specification=pipeline.specification.describe(),
                                        decomposition=[dict(sorted(f.items())) for f in pipeline.decomposition])
    if kind == 'router':
        _, router = parse_architecture(read(args.architecture, ['architecture']))
        if router is None:
            raise PreconditionError("the architecture document has no router block")
        participants, table = router
        report = router_report(build_router(participants, table, limits))
        statistics = {'states': report.pop('states'), 'letters': report.pop('letters'),
                      'denying_transitions': report.pop('denying_transitions')}
        return reporter.generate_report('fail' if report['panic_reachable'] else 'ok', statistics, **report)
    game = _load_game(args, args.game)
    correspondence = history_correspondence(game, limits, args.depth)
    holds = correspondence['bijective'] and correspondence['observations_match']
    return reporter.generate_report('ok' if holds else 'fail', correspondence)


def cmd_generate(args: argparse.Namespace, limits: ResourceLimits, reporter: ReportGenerator) -> Dict:
    fields: Dict = {'generator': args.kind}
    if args.kind == 'prime':
        game = gen_prime_family(args.m, limits)
        fields['m'] = args.m
    elif args.kind in ('emptiness', 'universality'):
        if not args.nfa:
            raise PreconditionError(f"generate {args.kind} needs --nfa")
        automaton = parse_automaton(read(args.nfa, ['automaton']))
        game = gen_from_nfa_emptiness(automaton) if args.kind == 'emptiness' else gen_from_nfa_universality(automaton)
    elif args.kind == 'random':
        game = random_game(np.random.default_rng(args.seed), players=args.players, positions=args.positions)
        fields['seed'] = args.seed
    else:
        if not args.name:
            raise PreconditionError("generate scenario needs --name")
        game = SCENARIOS[args.name]()
        fields['name'] = args.name
    write_document(game_document(game), args.out)
    reporter.add_artifact('game', args.out)
    return reporter.generate_report('ok', game.stats(), **fields)


def cmd_suite(args: argparse.Namespace, limits: ResourceLimits, reporter: ReportGenerator) -> Dict:
    analyzer = SuiteAnalyzer(args.seed, args.count, args.depth, limits)
    summary = analyzer.summarize(analyzer.run_suite(args.properties))
    if not args.timings:
        summary = summary.drop(columns=['seconds'])
    summary['agreement_rate'] = summary['agreement_rate'].round(4)
    rows = summary.astype(object).where(summary.notna(), None).to_dict(orient='records')
    failed = int(summary['disagreements'].sum()) + int(summary['errors'].sum())
    return reporter.generate_report('fail' if failed else 'ok', {'properties': len(rows)},
                                    seed=args.seed, count=args.count, summary=rows)


COMMANDS = {
    'check': cmd_check,
    'transform': cmd_transform,
    'synthesize': cmd_synthesize,
    'verify': cmd_verify,
    'arch': cmd_arch,
    'generate': cmd_generate,
    'suite': cmd_suite,
}


def _command_name(args: argparse.Namespace) -> str:
    sub = getattr(args, 'kind', None) or getattr(args, 'arch_command', None)
    return f"{args.command} {sub}" if sub else args.command


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT, stream=sys.stderr)
    reporter = ReportGenerator(_command_name(args), timings=args.timings)
    try:
        limits = limits_from_args(args)
        reporter.limits = limits
        logger.info(f"🚀 Running {reporter.command}")
        report = COMMANDS[args.command](args, limits, reporter)
    except GameError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        report = reporter.error_report(e)
    except OSError as e:
        logger.error(f"❌ {e}")
        report = reporter.error_report(PreconditionError(f"{e.strerror}: {e.filename}"))
    except KeyboardInterrupt:
        logger.info("⏹️ Interrupted by user")
        return 2
    except Exception as e:
        logger.exception(f"🚩 Internal failure: {e}")
        report = reporter.error_report(e)
    sys.stdout.write(dumps(report))
    if not args.quiet:
        print(reporter.format_summary(report), file=sys.stderr)
    return reporter.exit_code(report)


if __name__ == '__main__':
    sys.exit(main())
