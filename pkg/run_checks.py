#!/usr/bin/env python3
"""
Run verdicts for chronon.
Turns experiment measurements into ok/warning/critical checks, adds resource
checks, and aggregates an overall status for the CLI exit code.
"""

import math
from datetime import datetime
from typing import Dict, Iterable, List, Optional, Tuple

import psutil

from control import dense_footprint_bytes

Check = Tuple[str, str, Dict]

STATUS_EMOJI = {'ok': '✅', 'warning': '🟡', 'critical': '🔴'}


def domination_check(rows: Iterable[Dict], measured_key: str, bound_key: str,
                     floor: float = 0.0, valid_key: Optional[str] = None,
                     slack: float = 1e-12) -> Tuple[str, Dict]:
    """Every measured value must sit below its bound (or below the numeric floor).

    Rows whose valid_key is False are skipped.

    Returns:
        Tuple of (status, details)
    """
    checked = 0
    violations = []
    worst_ratio = 0.0
    for row in rows:
        if valid_key is not None and not row.get(valid_key, True):
            continue
        checked += 1
        measured, bound = row[measured_key], row[bound_key]
        if measured < floor:
            continue
        if bound > 0 and math.isfinite(bound):
            worst_ratio = max(worst_ratio, measured / bound)
        if not measured <= bound * (1 + slack):
            violations.append(row)

    if violations:
        first = violations[0]
        return 'critical', {
            'Issue': f'{measured_key} exceeds {bound_key}',
            'Violations': len(violations),
            'First': {k: first[k] for k in sorted(first) if not isinstance(first[k], (list, dict))},
        }
    return 'ok', {'Checked': checked, 'Worst measured/bound': f'{worst_ratio:.3e}'}


def threshold_check(label: str, value: float, limit: float, below: bool = True,
                    severity: str = 'critical') -> Tuple[str, Dict]:
    """value < limit (or > limit when below is False)."""
    passed = value < limit if below else value > limit
    relation = '<' if below else '>'
    if passed:
        return 'ok', {label: f'{value:.3e} {relation} {limit:.3e}'}
    return severity, {'Issue': f'{label} outside limit',
                      label: f'{value:.3e}', 'Limit': f'{relation} {limit:.3e}'}


class RunChecker:
    """Aggregates experiment checks and machine resources into a run verdict."""

    # Thresholds
    CPU_WARNING_PERCENT = 90
    MEMORY_WARNING_PERCENT = 85
    # Dense joint matrices may use at most this fraction of available memory
    DENSE_MEMORY_FRACTION = 0.25

    def __init__(self, experiment: str):
        """Initialize run checker.

        Args:
            experiment: Experiment name shown in the report
        """
        self.experiment = experiment

    def check_resources(self) -> Tuple[str, Dict]:
        """Check CPU and memory use.

        Returns:
            Tuple of (status, details)
        """
        details = {}
        status = 'ok'

        cpu_percent = psutil.cpu_percent(interval=0.1)
        if cpu_percent > self.CPU_WARNING_PERCENT:
            status = 'warning'
            details['CPU Usage'] = f'{cpu_percent:.1f}% (HIGH)'
        else:
            details['CPU Usage'] = f'{cpu_percent:.1f}%'

        memory = psutil.virtual_memory()
        if memory.percent > self.MEMORY_WARNING_PERCENT:
            status = 'warning'
            details['Memory Usage'] = f'{memory.percent:.1f}% (HIGH)'
        else:
            details['Memory Usage'] = f'{memory.percent:.1f}%'

        details['Physical Cores'] = psutil.cpu_count(logical=False) or 1
        return status, details

    def check_dense_memory(self, d_s: int, d: int) -> Tuple[str, Dict]:
        """Preflight for a dense (d_s d)-dimensional joint matrix."""
        needed = dense_footprint_bytes(d_s, d)
        available = psutil.virtual_memory().available
        mb = needed / (1024 ** 2)
        if needed > self.DENSE_MEMORY_FRACTION * available:
            return 'critical', {
                'Issue': 'Dense joint matrix does not fit in memory',
                'Needed': f'{mb:.1f} MB',
                'Available': f'{available / (1024 ** 2):.1f} MB',
            }
        return 'ok', {'Dense Matrix': f'{mb:.2f} MB'}

    def run(self, checks: List[Check]) -> Dict:
        """Aggregate experiment checks with the resource check.

        Returns:
            Dictionary with all check results and overall_status
        """
        results = {
            'timestamp': datetime.now().isoformat(),
            'experiment': self.experiment,
            'checks': {},
            'overall_status': 'ok'
        }

        all_checks = list(checks) + [('resources',) + self.check_resources()]
        for check_name, status, details in all_checks:
            results['checks'][check_name] = {
                'status': status,
                'details': details
            }

            # critical > warning > ok
            if status == 'critical':
                results['overall_status'] = 'critical'
            elif status == 'warning' and results['overall_status'] != 'critical':
                results['overall_status'] = 'warning'

        return results

    @staticmethod
    def exit_code(results: Dict) -> int:
        return 1 if results['overall_status'] == 'critical' else 0


def default_threads() -> int:
    return psutil.cpu_count(logical=False) or 1
