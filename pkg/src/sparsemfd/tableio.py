"""Helpers for delimiter-separated tables with a header row.

All package inputs and outputs are plain text tables. Field names are exact
and case sensitive; parse errors report the offending line and field.
"""
from __future__ import annotations

import csv
import math
import os

from .errors import SchemaError

DELIMITERS = {"csv": ",", "tsv": "\t"}


def delimiter_for(fmt):
    try:
        return DELIMITERS[fmt]
    except KeyError:
        raise ValueError(f"unknown table format '{fmt}', expected one of {sorted(DELIMITERS)}")


def iter_rows(source, required, delimiter=","):
    """Yield (line_number, row_dict) from a path or an open text stream.

    Checks that every name in ``required`` appears in the header and skips
    blank lines. Line numbers start at 1 for the header row.
    """
    if hasattr(source, "read"):
        yield from _iter_handle(source, required, delimiter)
    else:
        with open(os.fspath(source), newline="") as handle:
            yield from _iter_handle(handle, required, delimiter)


def _iter_handle(handle, required, delimiter):
    reader = csv.DictReader(handle, delimiter=delimiter)
    header = reader.fieldnames
    if header is None:
        raise SchemaError("document is empty, expected a header row")
    for name in required:
        if name not in header:
            raise SchemaError("missing required column", field=name)
    for row in reader:
        if not any(isinstance(v, str) and v.strip() for v in row.values()):
            continue
        yield reader.line_num, row


def cell(row, field):
    value = row.get(field)
    return value.strip() if isinstance(value, str) else None


def parse_str(row, field, lineno):
    value = cell(row, field)
    if not value:
        raise SchemaError("empty value", line=lineno, field=field)
    return value


def parse_float(row, field, lineno):
    raw = parse_str(row, field, lineno)
    try:
        value = float(raw)
    except ValueError:
        raise SchemaError(f"not a number: '{raw}'", line=lineno, field=field)
    if math.isnan(value):
        raise SchemaError("NaN is not a valid value", line=lineno, field=field)
    return value


def parse_int(row, field, lineno):
    raw = parse_str(row, field, lineno)
    try:
        return int(raw)
    except ValueError:
        raise SchemaError(f"not an integer: '{raw}'", line=lineno, field=field)


def parse_optional_float(row, field, lineno, default=None):
    value = cell(row, field)
    if not value:
        return default
    return parse_float(row, field, lineno)


def format_value(value):
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.12g}"
    return str(value)


def write_table(path, header, rows, delimiter=","):
    """Write a table; ``rows`` is an iterable of sequences matching ``header``."""
    with open(os.fspath(path), "w", newline="") as handle:
        writer = csv.writer(handle, delimiter=delimiter, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path
