"""Serialization helpers shared by report objects and the command line.

CSV output follows RFC 4180 (CRLF line endings, mandatory header row) with
floating-point fields printed to 17 significant digits so that parsed values
round-trip exactly.  JSON documents carry a ``meta`` block (timestamp and
library version), the fully resolved configuration, and the payload;
timestamps are isolated in ``meta`` so determinism checks can mask them.
"""

import csv
import io
import json
from datetime import datetime, timezone

import numpy as np


def format_float(x):
    """Render a float with 17 significant digits (exact round-trip)."""
    return format(float(x), ".17g")


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def csv_document(header, rows):
    """Build an RFC-4180 CSV string from a header and an iterable of rows."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def round17(obj):
    """Recursively snap floats to their 17-significant-digit representation."""
    if isinstance(obj, dict):
        return {k: round17(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round17(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(format_float(obj))
    if isinstance(obj, np.ndarray):
        return round17(obj.tolist())
    return obj


def utc_timestamp():
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def json_document(payload, config=None, timestamp=None):
    """Assemble the standard report document as a JSON string.

    Layout: ``{"meta": {"timestamp", "version"}, "config": ..., "payload": ...}``
    with sorted keys and floats snapped to 17 significant digits.
    """
    from . import __version__

    doc = {
        "meta": {
            "timestamp": timestamp if timestamp is not None else utc_timestamp(),
            "version": __version__,
        },
        "config": round17(config if config is not None else {}),
        "payload": round17(payload),
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
