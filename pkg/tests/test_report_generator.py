"""
Tests for Report Generator module
"""

import pytest
import sys
import os

# Add the parent directory to the path so we can import our modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from game_errors import DocumentError, ResourceLimitError
from report_generator import ReportGenerator
from resource_limits import ResourceLimits


class TestReportGenerator:
    """Test suite for ReportGenerator class."""

    def setup_method(self):
        """Setup test fixtures."""
        self.generator = ReportGenerator('check dynamic')

    def test_report_without_timings_is_stable(self):
        first = self.generator.generate_report('ok', {'positions': 3})
        second = ReportGenerator('check dynamic').generate_report('ok', {'positions': 3})

        assert first == second
        assert first == {'kind': 'report', 'version': 1, 'command': 'check dynamic', 'verdict': 'ok',
                         'statistics': {'positions': 3}}

    def test_timings(self):
        report = ReportGenerator('check static', timings=True).generate_report('ok')

        assert report['statistics']['wall_time'] >= 0

    def test_limits_and_artifacts(self):
        generator = ReportGenerator('synth', ResourceLimits(max_states=10))
        generator.add_artifact('witness', 'out/witness.json')
        report = generator.generate_report('unrealizable')

        assert report['limits']['max_states'] == 10
        assert report['artifacts'] == {'witness': 'out/witness.json'}

    def test_unknown_verdict(self):
        with pytest.raises(ValueError):
            self.generator.generate_report('maybe')

    def test_exit_codes(self):
        assert ReportGenerator.exit_code({'verdict': 'ok'}) == 0
        assert ReportGenerator.exit_code({'verdict': 'realizable'}) == 0
        assert ReportGenerator.exit_code({'verdict': 'fail'}) == 1
        assert ReportGenerator.exit_code({'verdict': 'unrealizable'}) == 1
        assert ReportGenerator.exit_code({'verdict': 'error'}) == 2

    def test_resource_cap_report(self):
        report = self.generator.error_report(ResourceLimitError('max_states', 10, 11, 'testing'))

        assert report['verdict'] == 'error'
        assert report['error']['error'] == 'ResourceLimitError'
        assert report['resource_cap'] == {'limit_name': 'max_states', 'limit': 10, 'explored': 11}

    def test_document_error_report(self):
        report = self.generator.error_report(DocumentError("unknown field 'x'", '$.x'))

        assert report['error']['location'] == '$.x'
        assert 'resource_cap' not in report

    def test_internal_error_report(self):
        report = self.generator.error_report(RuntimeError('boom'))

        assert report['error'] == {'error': 'InternalError', 'message': 'boom'}

    def test_summary(self):
        self.generator.add_artifact('witness', 'w.json')
        report = self.generator.generate_report('fail', {'positions': 13, 'explored': 40})
        summary = self.generator.format_summary(report)
        lines = summary.splitlines()

        assert lines[0].startswith('Command')
        assert lines[1].split() == ['Verdict', 'fail']
        assert 'Explored' in lines[2]
        assert lines[-1].split() == ['Witness', 'w.json']
