#!/usr/bin/env python3

import csv
import hashlib
import json
import math
import sys
from typing import Any, Iterable, Sequence

import click
import numpy as np


def format_float(x: float) -> str:
    """Seventeen significant digits; reading the text back gives the same double."""
    return format(float(x), '.17g')


def format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with click.open_file(path, 'w', encoding='utf-8') as fd:
        writer = csv.writer(fd, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f'RowLengthMismatch(row={len(row)},columns={len(columns)})')
            writer.writerow([format_cell(v) for v in row])


def _json_handler(x: Any) -> Any:
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return {'re': x.real, 'im': x.imag}
    raise TypeError(f'UnknownType(type={type(x)})')


def _finite(value: Any) -> Any:
    # JSON has no inf/nan literals
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


def dump_json(value: Any, fp=None):
    fp = fp or sys.stdout
    json.dump(_finite(value), fp=fp, indent=2, default=_json_handler, allow_nan=False)
    print('', file=fp)


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(',', ':'), default=_json_handler)


def config_hash(value: Any) -> str:
    return hashlib.sha256(canonical_json(value).encode('utf-8')).hexdigest()


def parse_values(text: str) -> list:
    """Comma separated numbers, e.g. '0.1,0.2,0.4'."""
    out = []
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        value = json.loads(item)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValueError(f'InvalidNumber(value={item})')
        out.append(value)
    return out
