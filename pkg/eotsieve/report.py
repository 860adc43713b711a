"""
Provide saving, loading and presenting campaign statistics.

A campaign produces one record per replication. The records are written to
a versioned CSV file and condensed into a summary of per-estimator
statistics (mean absolute deviation from a target value and box-plot
figures), which can be dumped as JSON, loaded again and printed as a table:

    >>> from eotsieve.report import Stats
    >>> stats = Stats([{'replication_index': 0, 'sieve_value': 0.17},
    ...                {'replication_index': 1, 'sieve_value': 0.19}],
    ...               target_value=0.18)
    >>> round(stats.summary()['estimators']['sieve']['mean_abs_dev'], 6)
    0.01
"""

import csv
import json
import math
import sys

import numpy as np

from eotsieve.util.stringutils import pp_float, pp_timestamp, trunc


__all__ = ['Stats', 'box_stats', 'write_results_csv', 'read_results_csv',
           'RESULT_COLUMNS', 'SCHEMA_VERSION', 'ESTIMATOR_COLUMNS']

SCHEMA_VERSION = 2

RESULT_COLUMNS = ['replication_index', 'seed', 'sieve_value',
                  'sinkhorn_value', 'theta_hat', 'ci_lo', 'ci_hi',
                  'acceptance_rate', 'solver_iterations', 'sieve_error',
                  'sinkhorn_error']

ESTIMATOR_COLUMNS = {'sieve': 'sieve_value', 'sinkhorn': 'sinkhorn_value'}

_INT_COLUMNS = ('replication_index', 'seed', 'solver_iterations')
_TEXT_COLUMNS = ('sieve_error', 'sinkhorn_error')


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results_csv(records, fobj, record_timings=False):
    """
    Write replication records (dictionaries) to the open file `fobj`. The
    first line carries the schema version; ``wall_time_ms`` is only written
    with `record_timings`, keeping the file a deterministic function of the
    configuration.
    """
    columns = RESULT_COLUMNS + (['wall_time_ms'] if record_timings else [])
    fobj.write('# schema_version=%d\n' % SCHEMA_VERSION)
    writer = csv.writer(fobj, lineterminator='\n')
    writer.writerow(columns)
    for rec in sorted(records, key=lambda r: r['replication_index']):
        writer.writerow([_cell(rec.get(col)) for col in columns])


def read_results_csv(fobj):
    """Read records written by :func:`write_results_csv`."""
    first = fobj.readline()
    if not first.startswith('# schema_version='):
        raise ValueError('not a results file: missing schema header')
    version = int(first.split('=', 1)[1])
    if version != SCHEMA_VERSION:
        raise ValueError('unsupported results schema version %d' % version)
    records = []
    for row in csv.DictReader(fobj):
        rec = {}
        for key, val in row.items():
            if val == '':
                rec[key] = None
            elif key in _INT_COLUMNS:
                rec[key] = int(val)
            elif key in _TEXT_COLUMNS:
                rec[key] = val
            else:
                rec[key] = float(val)
        records.append(rec)
    return records


def box_stats(values):
    """
    Box-plot statistics of a sample: quartiles, median and the Tukey
    whiskers (the most extreme observations within 1.5 IQR of the box).
    """
    values = np.sort(np.asarray(values, dtype=float))
    q1, median, q3 = np.quantile(values, [0.25, 0.5, 0.75])
    iqr = q3 - q1
    inside = values[(values >= q1 - 1.5 * iqr) & (values <= q3 + 1.5 * iqr)]
    return {'q1': float(q1), 'median': float(median), 'q3': float(q3),
            'whisker_lo': float(inside.min()),
            'whisker_hi': float(inside.max()),
            'min': float(values[0]), 'max': float(values[-1]),
            'outliers': int(values.size - inside.size)}


class Stats(object):
    """
    Presents the statistics of a replication campaign.
    """

    def __init__(self, records=None, target_value=None, filename=None,
                 stream=None, extra=None):
        """
        Initialize either from replication records (argument `records`) or
        from a previously dumped summary (argument `filename`).

        :param records: list of record dictionaries
        :param target_value: value the estimators are compared against
        :param filename: filename of a previously dumped summary
        :param stream: where to print statistics, defaults to ``sys.stdout``
        :param extra: additional entries copied into the summary
        """
        if stream:
            self.stream = stream
        else:
            self.stream = sys.stdout
        self.records = list(records or [])
        self.target_value = target_value
        self.extra = dict(extra or {})
        self._summary = None
        if filename:
            self.load_stats(filename)

    def load_stats(self, fdump):
        """
        Load a summary from a dump file. The argument `fdump` can be either
        a filename or an open file object that requires read access.
        """
        if isinstance(fdump, str):
            with open(fdump) as fobj:
                self._summary = json.load(fobj)
        else:
            self._summary = json.load(fdump)
        self.target_value = self._summary.get('target_value')

    def dump_stats(self, fdump, close=True):
        """
        Dump the summary to a file as JSON. The argument `fdump` can be
        either a filename or an open file object that requires write access.
        `close` controls if the file is closed before leaving this method
        (the default behaviour).
        """
        if isinstance(fdump, str):
            fdump = open(fdump, 'w')
        json.dump(self.summary(), fdump, indent=2, sort_keys=True)
        fdump.write('\n')
        if close:
            fdump.close()

    def _estimator_stats(self, column):
        values = [r[column] for r in self.records
                  if r.get(column) is not None and math.isfinite(r[column])]
        if not values:
            return None
        arr = np.asarray(values, dtype=float)
        res = {'count': int(arr.size), 'mean': float(arr.mean())}
        if self.target_value is not None:
            dev = np.abs(arr - self.target_value)
            res['mean_abs_dev'] = float(dev.mean())
            res['abs_dev_of_mean'] = float(abs(arr.mean() -
                                               self.target_value))
        res.update(box_stats(arr))
        return res

    def summary(self):
        """
        The campaign summary: per estimator statistics and the failure
        counts. A replication fails if any of its estimators failed; the
        failures of each estimator are counted in ``failures_<estimator>``.
        A loaded summary is returned as is.
        """
        if self._summary is not None and not self.records:
            return self._summary
        failures = [r for r in self.records
                    if any(r.get(col) for col in _TEXT_COLUMNS)]
        res = {
            'schema_version': SCHEMA_VERSION,
            'target_value': self.target_value,
            'replications': len(self.records),
            'failures': len(failures),
            'complete': not failures,
            'estimators': {},
        }
        for name in sorted(ESTIMATOR_COLUMNS):
            res['failures_' + name] = sum(
                1 for r in self.records if r.get(name + '_error'))
        for name, column in sorted(ESTIMATOR_COLUMNS.items()):
            stats = self._estimator_stats(column)
            if stats is not None:
                res['estimators'][name] = stats
        res.update(self.extra)
        self._summary = res
        return res

    def format_summary(self):
        """Format the summary as a table, one row per estimator."""
        summ = self.summary()
        rows = [['estimator', 'n', 'mean', 'mean |dev|', 'q1', 'median',
                 'q3', 'whiskers']]
        for name, st in sorted(summ['estimators'].items()):
            rows.append([trunc(name, 12), st['count'], pp_float(st['mean']),
                         pp_float(st.get('mean_abs_dev')),
                         pp_float(st['q1']), pp_float(st['median']),
                         pp_float(st['q3']),
                         '%s..%s' % (pp_float(st['whisker_lo']),
                                     pp_float(st['whisker_hi']))])
        lines = list(_format_table(rows))
        if summ.get('target_value') is not None:
            lines.append('target value: %s' % pp_float(summ['target_value']))
        if summ['failures']:
            lines.append('failed replications: %d of %d'
                         % (summ['failures'], summ['replications']))
        if summ.get('wall_time_s') is not None:
            lines.append('wall time: %s' % pp_timestamp(summ['wall_time_s']))
        return lines

    def print_summary(self):
        for line in self.format_summary():
            self.stream.write(line + '\n')


def _format_table(rows, header=True):
    """
    Format a list of lists as a pretty table. With `header` the first row is
    underlined.
    """
    border = "="
    vdelim = " | "
    padding = 1
    cols = zip(*rows)
    widths = [max([len(str(item)) + 2 * padding for item in col])
              for col in cols]
    borderline = vdelim.join([w * border for w in widths])
    for row in rows:
        yield vdelim.join([str(item).rjust(width)
                           for (item, width) in zip(row, widths)])
        if header:
            yield borderline
            header = False
