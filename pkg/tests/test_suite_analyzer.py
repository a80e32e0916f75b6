"""
Tests for Suite Analyzer module
"""

import pandas as pd
import pytest
import sys
import os

# Add the parent directory to the path so we can import our modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from game_generators import SCENARIOS
from suite_analyzer import PROPERTIES, SUMMARY_COLUMNS, SuiteAnalyzer, run_suite


class TestSuiteAnalyzer:
    """Test suite for SuiteAnalyzer class."""

    def setup_method(self):
        """Setup test fixtures."""
        self.analyzer = SuiteAnalyzer(seed=5, count=3, depth=4)

    def test_property_rows(self):
        frame = self.analyzer.run_property('nfa_bound')

        assert len(frame) == 3
        assert list(frame['instance']) == [0, 1, 2]
        assert frame['agrees'].all()

    def test_same_seed_same_instances(self):
        first = self.analyzer.run_property('emptiness')
        second = SuiteAnalyzer(seed=5, count=3, depth=4).run_property('emptiness')

        assert list(first['positions']) == list(second['positions'])
        assert list(first['symbolic']) == list(second['symbolic'])

    def test_emptiness_reduction_agrees(self):
        frame = self.analyzer.run_property('emptiness')

        assert frame['error'].isna().all()
        assert frame['agrees'].all()

    def test_synthesis_matches_bounded_memory_search(self):
        frame = SuiteAnalyzer(seed=5, count=6, depth=4).run_property('synthesis')
        decided = frame[frame['skipped'].isna()]

        assert frame['error'].isna().all()
        assert decided['agrees'].all()

    def test_shadow_and_restriction_agree(self):
        analyzer = SuiteAnalyzer(seed=5, count=4, depth=4)
        shadow = analyzer.run_property('shadow')
        restriction = analyzer.run_property('restriction')

        assert shadow['error'].isna().all()
        assert shadow[shadow['skipped'].isna()]['agrees'].all()
        assert restriction['error'].isna().all()
        assert restriction['agrees'].all()

    def test_prime_gap_agrees(self):
        frame = self.analyzer.run_property('prime_gap')

        assert frame['agrees'].all()
        assert set(frame['positions']) <= {6, 9}

    def test_roundtrip_runs_on_scenarios(self):
        frame = self.analyzer.run_property('roundtrip')

        assert frame['error'].isna().all()
        assert frame['agrees'].all()
        assert set(frame['scenario']) <= set(SCENARIOS)

    def test_every_property_is_registered(self):
        assert set(self.analyzer.checks) == set(PROPERTIES)

    def test_unknown_property(self):
        with pytest.raises(ValueError):
            self.analyzer.run_suite(['weekly'])

    def test_summary_columns(self):
        summary = run_suite(seed=5, count=2, depth=4, properties=['nfa_bound', 'emptiness'])

        assert list(summary.columns) == SUMMARY_COLUMNS
        assert list(summary['property']) == ['nfa_bound', 'emptiness']
        assert list(summary['instances']) == [2, 2]

    def test_summarize_counts_skips_and_errors(self):
        results = pd.DataFrame([
            {'property': 'static', 'instance': 0, 'agrees': True, 'error': None, 'skipped': None, 'seconds': 0.5},
            {'property': 'static', 'instance': 1, 'agrees': False, 'error': None, 'skipped': None, 'seconds': 0.5},
            {'property': 'static', 'instance': 2, 'agrees': False, 'error': 'ResourceLimitError', 'skipped': None,
             'seconds': 0.25},
            {'property': 'synthesis', 'instance': 0, 'agrees': False, 'error': None,
             'skipped': 'NotRecurringError', 'seconds': 0.1},
        ])
        summary = SuiteAnalyzer.summarize(results).set_index('property')

        assert summary.loc['static', 'instances'] == 3
        assert summary.loc['static', 'agreements'] == 1
        assert summary.loc['static', 'disagreements'] == 1
        assert summary.loc['static', 'errors'] == 1
        assert summary.loc['static', 'agreement_rate'] == pytest.approx(0.5)
        assert summary.loc['static', 'seconds'] == pytest.approx(1.25)
        assert pd.isna(summary.loc['synthesis', 'agreement_rate'])
