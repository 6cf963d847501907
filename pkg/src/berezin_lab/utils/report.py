# coding: utf-8


"""CSV and JSON report writers."""


import json
import logging
import os

import numpy as np
import pandas as pd

from .. import config


__all__ = ['split_complex', 'to_plain', 'report_payload', 'write_csv', 'write_meta', 'write_json', 'write_report',
           'write_failure']


logger = logging.getLogger(__name__)


def split_complex(df):
    """
    Replace every complex column c by the real columns c_re and c_im, in place order.

    Parameters
    ----------
    df: pandas.DataFrame

    Returns
    -------
    pandas.DataFrame
    """
    out = pd.DataFrame(index=df.index)
    for col in df.columns:
        values = df[col]
        if np.iscomplexobj(values.to_numpy()) or values.map(lambda v: isinstance(v, complex)).any():
            values = values.astype(complex)
            out[col + '_re'] = values.map(lambda v: v.real)
            out[col + '_im'] = values.map(lambda v: v.imag)
        else:
            out[col] = values
    return out


def to_plain(value):
    """JSON-ready copy of a value: numpy scalars and arrays, tuples and complex numbers converted."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': float(value.real), 'im': float(value.imag)}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # json has no inf or nan
        return value if np.isfinite(value) else repr(value)
    return value


def _dump(payload, path):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(json.dumps(payload, sort_keys=True, indent=2))
        f.write('\n')
    logger.info('wrote %s', path)
    return path


def report_payload(run_config=None, metadata=None):
    """Resolved configuration, tolerance table and run metadata, JSON-ready."""
    payload = {'config': to_plain(run_config or {}), 'tolerances': to_plain(config.tolerance_table())}
    if metadata:
        payload['metadata'] = to_plain(metadata)
    return payload


def write_csv(df, path):
    split_complex(df).to_csv(path, index=False, encoding='utf-8')
    logger.info('wrote %s', path)
    return path


def write_meta(path, run_config=None, metadata=None):
    """Sidecar of a CSV report: the layout of :func:`write_json` without the records."""
    return _dump(report_payload(run_config, metadata), path)


def write_json(df, path, run_config=None, metadata=None):
    """
    Table as records plus the resolved configuration and the tolerance table.

    Keys are sorted and the layout fixed, so equal inputs give byte-identical files.
    """
    payload = report_payload(run_config, metadata)
    payload['records'] = to_plain(split_complex(df).to_dict(orient='records'))
    return _dump(payload, path)


def write_report(df, out_dir, name, fmt='csv', run_config=None, metadata=None):
    """
    Write ``name.csv`` with its ``name.meta.json`` sidecar, or ``name.json``, into ``out_dir``.

    The directory is created if needed.

    Returns
    -------
    path: str
        the table file
    """
    os.makedirs(out_dir, exist_ok=True)
    if fmt == 'csv':
        write_meta(os.path.join(out_dir, name + '.meta.json'), run_config=run_config, metadata=metadata)
        return write_csv(df, os.path.join(out_dir, name + '.csv'))
    if fmt == 'json':
        return write_json(df, os.path.join(out_dir, name + '.json'), run_config=run_config, metadata=metadata)
    raise ValueError('unknown report format {!r}'.format(fmt))


def write_failure(out_dir, record, run_config=None):
    """failure.json with the error record and the resolved configuration."""
    os.makedirs(out_dir, exist_ok=True)
    return _dump({'failure': to_plain(record), 'config': to_plain(run_config or {})},
                 os.path.join(out_dir, 'failure.json'))
