import csv
import io
import json
import math

import numpy as np

CSV_NUMBER_FORMAT = '%.12g'


def format_cell(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return CSV_NUMBER_FORMAT % float(value)
    return str(value)


def normalize_json(value):
    """Plain JSON types; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    if isinstance(value, dict):
        return {str(k): normalize_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [normalize_json(v) for v in value]
    if isinstance(value, np.ndarray):
        return [normalize_json(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return 'nan' if math.isnan(value) else ('inf' if value > 0 else '-inf')
    return value


def to_json(value) -> str:
    return json.dumps(normalize_json(value), indent=2) + '\n'


def to_csv(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(row.get(name)) for name in header])
    return buffer.getvalue()


def render(rows, header, fmt: str) -> str:
    """Rows (dicts keyed by header) as CSV or as a JSON list."""
    if fmt == 'csv':
        return to_csv(header, rows)
    return to_json([{name: row.get(name) for name in header} for row in rows])


def report_rows(report: dict):
    """Flatten a report dict into quantity/value rows for CSV output."""
    return [{'quantity': key, 'value': value} for key, value in report.items()
            if not isinstance(value, (dict, list, np.ndarray))]
