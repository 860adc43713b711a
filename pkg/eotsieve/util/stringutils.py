"""
String utility functions.
"""

import math


def trunc(obj, max, left=0):
    """
    Convert `obj` to string, eliminate newlines and truncate the string to
    `max` characters. If there are more characters in the string add ``...`` to
    the string. With `left=True`, the string can be truncated at the beginning.

    >>> trunc('This is a long text.', 8)
    'This ...'
    >>> trunc('This is a long text.', 8, left=True)
    '...text.'
    """
    s = str(obj)
    s = s.replace('\n', '|')
    if len(s) > max:
        if left:
            return '...' + s[len(s) - max + 3:]
        else:
            return s[:(max - 3)] + '...'
    else:
        return s


def pp_float(x, digits=4):
    """
    Pretty-print a float for tables: fixed point for moderate magnitudes,
    scientific notation otherwise, and ``-`` for missing values.

    >>> pp_float(0.18463)
    '0.1846'
    >>> pp_float(2.5e-07)
    '2.500e-07'
    >>> pp_float(None)
    '-'
    """
    if x is None:
        return '-'
    if math.isnan(x):
        return 'nan'
    if math.isinf(x):
        return 'inf' if x > 0 else '-inf'
    if x != 0 and not 10 ** -digits <= abs(x) < 10 ** 6:
        return '%.*e' % (digits - 1, x)
    return '%.*f' % (digits, x)


def pp_timestamp(t):
    """
    Get a friendly timestamp represented as a string.

    >>> pp_timestamp(3725.5)
    '01:02:05.50'
    """
    if t is None:
        return ''
    h, m, s = int(t / 3600), int(t / 60 % 60), t % 60
    return "%02d:%02d:%05.2f" % (h, m, s)
