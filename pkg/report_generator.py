"""
Report Generator
Builds the machine-readable reports printed by the CLI and returned by the
JSON service, plus the short human summary written to stderr.
"""

import logging
import time
from typing import Dict, List, Optional

from documents import report_document
from game_errors import GameError, ResourceLimitError
from resource_limits import ResourceLimits

logger = logging.getLogger('ReportGenerator')

VERDICTS = ('ok', 'fail', 'realizable', 'unrealizable', 'error')
EXIT_CODES = {'ok': 0, 'realizable': 0, 'fail': 1, 'unrealizable': 1, 'error': 2}


class ReportGenerator:
    """
    Collects the statistics of one command and renders its report.
    """

    def __init__(self, command: str, limits: Optional[ResourceLimits] = None, timings: bool = False):
        """
        Initialize report generator.

        Args:
            command (str): Command name as typed, e.g. 'check dynamic'
            limits (ResourceLimits): Caps in force, echoed in the report
            timings (bool): Include wall time; off by default so reports are byte-identical across runs
        """
        self.command = command
        self.limits = limits
        self.timings = timings
        self.artifacts: Dict[str, str] = {}
        self.started = time.perf_counter()

        # Display names for the summary table
        self.field_mappings = {
            'positions': 'Positions',
            'moves': 'Moves',
            'players': 'Players',
            'explored': 'Explored',
            'vertices': 'Arena vertices',
            'classes': 'Model classes',
            'winning_vertices': 'Winning vertices',
            'profile_states': 'Strategy states',
            'states': 'States',
        }

    def add_artifact(self, name: str, path: str) -> None:
        """Record a document written by the command, referenced by path in the report."""
        self.artifacts[name] = path

    def generate_report(self, verdict: str, statistics: Optional[Dict] = None, **fields) -> Dict:
        """
        Generate the report document.

        Args:
            verdict (str): One of ok, fail, realizable, unrealizable, error
            statistics (Dict): Sizes explored by the command
            **fields: Command-specific entries (order, gap, witness, ...)

        Returns:
            Dict: A "report" document
        """
        if verdict not in VERDICTS:
            raise ValueError(f"unknown verdict '{verdict}'")
        statistics = dict(statistics or {})
        if self.timings:
            statistics['wall_time'] = round(time.perf_counter() - self.started, 3)
        report = report_document(self.command, verdict,
                                 statistics=statistics or None,
                                 artifacts=dict(sorted(self.artifacts.items())) or None,
                                 limits=self.limits.to_dict() if self.limits is not None else None,
                                 **fields)
        logger.info(f"📊 {self.command}: {verdict}")
        return report

    def error_report(self, error: Exception) -> Dict:
        """Report for a failed command; resource caps are reported with their status."""
        if isinstance(error, GameError):
            details = error.to_dict()
        else:
            details = {'error': 'InternalError', 'message': str(error)}
        cap = None
        if isinstance(error, ResourceLimitError):
            cap = {'limit_name': error.limit_name, 'limit': error.limit, 'explored': error.explored}
        return self.generate_report('error', error=details, resource_cap=cap)

    @staticmethod
    def exit_code(report: Dict) -> int:
        return EXIT_CODES[report['verdict']]

    def summary_rows(self, report: Dict) -> List[List[str]]:
        """Two-column rows for the human summary: verdict first, then statistics."""
        rows = [['Command', report['command']], ['Verdict', report['verdict']]]
        for key, value in sorted(report.get('statistics', {}).items()):
            rows.append([self.field_mappings.get(key, key.replace('_', ' ').capitalize()), str(value)])
        for name, path in sorted(report.get('artifacts', {}).items()):
            rows.append([name.capitalize(), path])
        if 'error' in report:
            rows.append(['Error', report['error'].get('message', '')])
        return rows

    def format_summary(self, report: Dict) -> str:
        rows = self.summary_rows(report)
        width = max(len(label) for label, _ in rows)
        return '\n'.join(f"{label.ljust(width)}  {value}" for label, value in rows)
