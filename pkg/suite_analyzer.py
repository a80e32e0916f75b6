"""
Suite Analyzer
Runs the property suite over seeded random instances: symbolic deciders against
brute-force oracles, automaton size bounds, the emptiness reduction, synthesis
against exhaustive search over small-memory profiles, the shadow and restriction
transforms, prime-family gaps and the architecture round trip. Results are
collected per instance in a pandas DataFrame and summarised per property.
"""

import logging
import time
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from architecture import history_correspondence
from game_errors import GameError, NotRecurringError, ObservabilityError
from game_generators import (SCENARIOS, first_primes, gen_from_nfa_emptiness, gen_prime_family, random_game,
                             random_nfa)
from game_transforms import restrict_to_hierarchical, shadow_game, shadow_information_report
from hierarchy_analyzer import (buchi_rejected_play, check_dynamic, check_recurring, check_static, gap_size,
                                non_hierarchy_nfa, recurring_buchi)
from oracles import brute_force_dynamic, brute_force_gap, brute_force_static, exhaustive_profile_search, nfa_is_empty
from resource_limits import ResourceLimits, resolve
from strategy_synthesizer import synthesize
from winning_conditions import WinningCondition

logger = logging.getLogger('SuiteAnalyzer')

PROPERTIES = ('static', 'dynamic', 'recurring', 'nfa_bound', 'emptiness', 'synthesis', 'shadow', 'restriction',
              'prime_gap', 'roundtrip')
SUMMARY_COLUMNS = ['property', 'instances', 'agreements', 'disagreements', 'errors', 'agreement_rate', 'seconds']


def _chain_exists(relation) -> bool:
    n = len(relation)
    order = sorted(range(n), key=lambda i: (-sum(relation[i]), i))
    return all(relation[order[k]][order[k + 1]] for k in range(n - 1))


class SuiteAnalyzer:
    """
    Property suite over seeded random games and automata.
    """

    def __init__(self, seed: int = 7, count: int = 50, depth: int = 8, limits: Optional[ResourceLimits] = None):
        """
        Initialize the suite.

        Args:
            seed (int): Seed of the numpy generator; equal seeds give equal instances
            count (int): Instances per property
            depth (int): History depth of the brute-force oracles
            limits (ResourceLimits): Exploration caps
        """
        self.seed = seed
        self.count = count
        self.depth = depth
        self.limits = resolve(limits)
        self.checks: Dict[str, Callable[[np.random.Generator], Dict]] = {
            'static': self._check_static,
            'dynamic': self._check_dynamic,
            'recurring': self._check_recurring,
            'nfa_bound': self._check_nfa_bound,
            'emptiness': self._check_emptiness,
            'synthesis': self._check_synthesis,
            'shadow': self._check_shadow,
            'restriction': self._check_restriction,
            'prime_gap': self._check_prime_gap,
            'roundtrip': self._check_roundtrip,
        }

    def _small_game(self, rng: np.random.Generator):
        players = int(rng.integers(2, 4))
        return random_game(rng, players=players, positions=int(rng.integers(2, 7)),
                           actions=int(rng.integers(1, 3)), observations=int(rng.integers(1, 4)))

    def _check_static(self, rng: np.random.Generator) -> Dict:
        game = self._small_game(rng)
        symbolic = check_static(game, self.limits).ok
        brute = _chain_exists(brute_force_static(game, self.depth))
        return {'positions': game.num_positions, 'symbolic': symbolic, 'oracle': brute}

    def _check_dynamic(self, rng: np.random.Generator) -> Dict:
        game = self._small_game(rng)
        symbolic = check_dynamic(game, self.limits).ok
        brute = brute_force_dynamic(game, self.depth) is None
        return {'positions': game.num_positions, 'symbolic': symbolic, 'oracle': brute}

    def _check_recurring(self, rng: np.random.Generator) -> Dict:
        game = random_game(rng, players=2, positions=int(rng.integers(2, 5)),
                           actions=int(rng.integers(1, 3)), observations=int(rng.integers(1, 4)))
        symbolic = check_recurring(game, self.limits).ok
        materialised = buchi_rejected_play(recurring_buchi(game, self.limits)) is None
        return {'positions': game.num_positions, 'symbolic': symbolic, 'oracle': materialised}

    def _check_nfa_bound(self, rng: np.random.Generator) -> Dict:
        game = self._small_game(rng)
        states = non_hierarchy_nfa(game, synchronise=False, limits=self.limits).num_states
        bound = 2 * game.players ** 2 * game.num_positions ** 2
        return {'positions': game.num_positions, 'symbolic': states <= bound, 'oracle': True}

    def _check_emptiness(self, rng: np.random.Generator) -> Dict:
        automaton = random_nfa(rng, states=int(rng.integers(1, 6)))
        game = gen_from_nfa_emptiness(automaton)
        return {'positions': game.num_positions, 'symbolic': check_dynamic(game, self.limits).ok,
                'oracle': nfa_is_empty(automaton)}

    def _check_synthesis(self, rng: np.random.Generator) -> Dict:
        """
        Synthesis against exhaustive search over profiles of memory at most two.

        A returned profile must verify; otherwise synthesis raises and the
        instance counts as an error. Games without observable colors or
        recurring hierarchical information are skipped.
        """
        game = random_game(rng, players=2, positions=int(rng.integers(2, 5)), actions=int(rng.integers(1, 3)),
                           observations=int(rng.integers(1, 3)), colors=('ok', 'bad'))
        condition = WinningCondition.safety(game.color_names, ['bad'] if 'bad' in game.color_names else [])
        try:
            result = synthesize(game, condition, self.limits)
        except (ObservabilityError, NotRecurringError) as e:
            return {'positions': game.num_positions, 'symbolic': None, 'oracle': None, 'skipped': type(e).__name__}
        found = exhaustive_profile_search(game, condition, 2, self.limits) is not None
        return {'positions': game.num_positions, 'symbolic': result.realizable, 'oracle': found}

    def _check_shadow(self, rng: np.random.Generator) -> Dict:
        """The shadow of a dynamically hierarchical game is statically hierarchical with the same information."""
        game = random_game(rng, players=2, positions=int(rng.integers(2, 5)),
                           actions=int(rng.integers(1, 3)), observations=int(rng.integers(1, 3)))
        if not check_dynamic(game, self.limits).ok:
            return {'positions': game.num_positions, 'symbolic': None, 'oracle': None, 'skipped': 'not dynamic'}
        shadow = shadow_game(game, self.limits)
        report = shadow_information_report(game, min(self.depth, 4), shadow, self.limits)
        return {'positions': game.num_positions, 'symbolic': check_static(shadow.game, self.limits).ok,
                'oracle': report['equal']}

    def _check_restriction(self, rng: np.random.Generator) -> Dict:
        game = self._small_game(rng)
        restricted, _ = restrict_to_hierarchical(game, WinningCondition.trivial(game.color_names), self.limits)
        return {'positions': restricted.num_positions, 'symbolic': check_dynamic(restricted, self.limits).ok,
                'oracle': brute_force_dynamic(restricted, min(self.depth, 5)) is None}

    def _check_prime_gap(self, rng: np.random.Generator) -> Dict:
        """gap_size on the prime family is the product of the primes minus one."""
        m = int(rng.integers(1, 3))
        game = gen_prime_family(m, self.limits)
        expected = int(np.prod(first_primes(m))) - 1
        return {'positions': game.num_positions, 'symbolic': gap_size(game, self.limits) == expected,
                'oracle': brute_force_gap(game, expected + 3) == expected}

    def _check_roundtrip(self, rng: np.random.Generator) -> Dict:
        """Histories of a scenario game and of its architecture translated back correspond one to one."""
        name = sorted(SCENARIOS)[int(rng.integers(len(SCENARIOS)))]
        game = SCENARIOS[name]()
        report = history_correspondence(game, self.limits, depth=min(self.depth, 5))
        return {'positions': game.num_positions, 'symbolic': report['bijective'],
                'oracle': report['observations_match'], 'scenario': name}

    def run_property(self, name: str) -> pd.DataFrame:
        """
        Run one property on count instances.

        Returns:
            pd.DataFrame: One row per instance with symbolic and oracle verdicts
        """
        rng = np.random.default_rng([self.seed, PROPERTIES.index(name)])
        check = self.checks[name]
        rows: List[Dict] = []
        for instance in range(self.count):
            started = time.perf_counter()
            try:
                row = check(rng)
                row['error'] = None
            except GameError as e:
                logger.warning(f"⚠️ {name} instance {instance}: {e}")
                row = {'positions': None, 'symbolic': None, 'oracle': None, 'error': type(e).__name__}
            row.update({'property': name, 'instance': instance, 'seconds': time.perf_counter() - started})
            rows.append(row)
        frame = pd.DataFrame(rows)
        if 'skipped' not in frame.columns:
            frame['skipped'] = None
        frame['agrees'] = frame['symbolic'].notna() & (frame['symbolic'] == frame['oracle'])
        return frame

    def run_suite(self, properties: Optional[List[str]] = None) -> pd.DataFrame:
        """Run the given properties (all by default) and concatenate the instance rows."""
        properties = list(properties or PROPERTIES)
        unknown = [p for p in properties if p not in self.checks]
        if unknown:
            raise ValueError(f"unknown properties {unknown}; available: {list(PROPERTIES)}")
        logger.info(f"🔍 Running {len(properties)} properties on {self.count} instances each (seed {self.seed})")
        frames = [self.run_property(name) for name in properties]
        results = pd.concat(frames, ignore_index=True)
        failures = int((~results['agrees'] & results['error'].isna() & results['skipped'].isna()).sum())
        if failures:
            logger.error(f"❌ {failures} disagreement(s) across the suite")
        else:
            logger.info("✅ No disagreements across the suite")
        return results

    @staticmethod
    def summarize(results: pd.DataFrame) -> pd.DataFrame:
        """
        Per-property summary: instances, agreements, disagreements, errors,
        agreement rate over decided instances and total time.
        """
        decided = results['error'].isna() & results['skipped'].isna()
        frame = results.assign(decided=decided,
                               disagreement=decided & ~results['agrees'],
                               failed=results['error'].notna())
        summary = frame.groupby('property', sort=False).agg(
            instances=('instance', 'count'),
            agreements=('agrees', 'sum'),
            disagreements=('disagreement', 'sum'),
            errors=('failed', 'sum'),
            decided=('decided', 'sum'),
            seconds=('seconds', 'sum'),
        ).reset_index()
        summary['agreement_rate'] = np.where(summary['decided'] > 0,
                                             summary['agreements'] / summary['decided'].clip(lower=1), np.nan)
        summary['seconds'] = summary['seconds'].round(3)
        return summary[SUMMARY_COLUMNS]


def run_suite(seed: int = 7, count: int = 50, depth: int = 8, properties: Optional[List[str]] = None,
              limits: Optional[ResourceLimits] = None) -> pd.DataFrame:
    """Run the suite and return the per-property summary table."""
    analyzer = SuiteAnalyzer(seed, count, depth, limits)
    return analyzer.summarize(analyzer.run_suite(properties))
