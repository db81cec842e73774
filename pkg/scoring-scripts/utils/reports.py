"""
Evaluation report files and console summaries.

CSV report: one row per (run, group definition) with columns
run,utility,unfairness,mode,group_def. Undefined unfairness is written as
"undefined". The JSON report adds per-group shares and deviations. Neither
file carries timestamps, so identical inputs give byte-identical reports.
"""

import io
import json
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional

import pandas as pd

from .file_io import atomic_write_text
from .model import EvalParams, EvalResult


logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['run', 'utility', 'unfairness', 'mode', 'group_def']
UNDEFINED = 'undefined'
FLOAT_FORMAT = '{:.10f}'


@dataclass(frozen=True)
class ReportRow:
    run: str
    group_def: str
    result: EvalResult


def format_value(value: Optional[float]) -> str:
    return UNDEFINED if value is None else FLOAT_FORMAT.format(value)


def report_frame(rows: Iterable[ReportRow]) -> pd.DataFrame:
    """Rows in (run, group definition) order, values pre-formatted as text."""
    records = [
        {
            'run': row.run,
            'utility': format_value(row.result.mean_utility),
            'unfairness': format_value(row.result.unfairness),
            'mode': row.result.amortization.value,
            'group_def': row.group_def,
        }
        for row in sorted(rows, key=lambda r: (r.run, r.group_def))
    ]
    return pd.DataFrame(records, columns=REPORT_COLUMNS)


def write_csv_report(path: str, rows: Iterable[ReportRow]):
    buffer = io.StringIO()
    report_frame(rows).to_csv(buffer, index=False, lineterminator='\n')
    atomic_write_text(path, buffer.getvalue())
    logger.info(f"Wrote CSV report to {path}")


def report_document(rows: Iterable[ReportRow], params: EvalParams, extra: Optional[Mapping[str, object]] = None) -> Dict[str, object]:
    document = {
        'parameters': {
            'gamma': params.gamma,
            'stop_coefficient': params.stop_coefficient,
            'amortization': params.amortization.value,
        },
        'results': [
            {'run': row.run, 'group_def': row.group_def, **row.result.to_dict()}
            for row in sorted(rows, key=lambda r: (r.run, r.group_def))
        ],
    }
    if extra:
        document['parameters'].update(extra)
    return document


def write_json_report(path: str, rows: Iterable[ReportRow], params: EvalParams, extra: Optional[Mapping[str, object]] = None):
    text = json.dumps(report_document(rows, params, extra), indent=2, sort_keys=True, allow_nan=False)
    atomic_write_text(path, text + '\n')
    logger.info(f"Wrote JSON report to {path}")


def write_reports(out_prefix: str, rows: List[ReportRow], params: EvalParams, extra: Optional[Mapping[str, object]] = None) -> List[str]:
    """Write <prefix>.csv and <prefix>.json; returns both paths."""
    csv_path = f"{out_prefix}.csv"
    json_path = f"{out_prefix}.json"
    write_csv_report(csv_path, rows)
    write_json_report(json_path, rows, params, extra)
    return [csv_path, json_path]


def print_evaluation_summary(rows: List[ReportRow], params: EvalParams, outputs: List[str], logger: logging.Logger):
    """
    Print a summary of evaluation results to console and log.

    Args:
        rows: Evaluated (run, group definition) pairs
        params: Evaluation parameters used
        outputs: Report files written
        logger: Logger instance
    """
    separator = "=" * 60
    summary = f"\n{separator}\n"
    summary += "EVALUATION SUMMARY\n"
    summary += f"{separator}\n"
    summary += f"gamma={params.gamma} stop_coefficient={params.stop_coefficient} mode={params.amortization.value}\n\n"

    for row in sorted(rows, key=lambda r: (r.run, r.group_def)):
        marker = '✓' if row.result.is_defined else '✗'
        summary += (
            f"{marker} {row.run} [{row.group_def}]: utility {row.result.mean_utility:.4f}, "
            f"unfairness {format_value(row.result.unfairness)} ({row.result.rankings_evaluated} rankings)\n"
        )
        reason = row.result.metadata.get('undefined_reason')
        if reason and not row.result.is_defined:
            summary += f"    undefined: {reason}\n"

    if outputs:
        summary += "\nReports written to:\n"
        for path in outputs:
            summary += f"  {path}\n"
    summary += f"{separator}\n"

    print(summary)
    logger.info(summary)
