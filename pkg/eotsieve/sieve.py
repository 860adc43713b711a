"""
The moment-function sieve.

The coupling constraints of the transport problem are expressed through the
moment functions ::

    g_x'(x, y) = F_X(x') - 1[x <= x']      g_y'(x, y) = F_Y(y') - 1[y <= y']

which have mean zero under every coupling. The sieve keeps one function per
cell of a finite partition of each support, chosen so that the distribution
function varies by at most ``epsilon / 8`` within a cell:

    >>> from eotsieve.measures import UniformMarginal
    >>> from eotsieve.sieve import build_partition, optimal_sample_size
    >>> part = build_partition(UniformMarginal(0, 1), UniformMarginal(0, 2), 0.1)
    >>> part.n_x, part.n_y, part.n_total
    (80, 80, 160)
    >>> optimal_sample_size(0.1, part.n_total)
    1015

Partitions are built for one dimensional marginals.
"""

import logging
import math

from dataclasses import dataclass, field

import numpy as np

from eotsieve.errors import (DegenerateMarginal, InvalidArgument,
                             PartitionBudgetExceeded)
from eotsieve.reference import sample_reference


__all__ = ['SievePartition', 'SieveDictionary', 'build_partition', 'kappa',
           'build_dictionary', 'evaluate_dictionary', 'evaluate_batch',
           'signed_values', 'optimal_sample_size', 'entropy_condition_ok',
           'REDUCED', 'GENERAL']

log = logging.getLogger(__name__)

REDUCED = 'reduced-tau'
GENERAL = 'general-alpha-mu'

MAX_CELLS = 10 ** 6

# Relative slack of the sample size rule below the exact ratio.
SAMPLE_SIZE_RTOL = 1e-4


@dataclass(frozen=True, eq=False)
class SievePartition:
    """
    Partitions of X and Y. Cells are closed intervals ``[lo, hi]`` given as
    ``(n, 2)`` arrays; a cell with ``lo == hi`` isolates an atom. The
    breakpoints are the sorted distinct cell edges.
    """

    epsilon: float
    x_cells: np.ndarray
    y_cells: np.ndarray
    x_representatives: np.ndarray
    y_representatives: np.ndarray
    check_reference_marginals: bool = False
    waived_x_cells: tuple = field(default=())
    waived_y_cells: tuple = field(default=())

    @property
    def x_breakpoints(self):
        return np.unique(self.x_cells)

    @property
    def y_breakpoints(self):
        return np.unique(self.y_cells)

    @property
    def n_x(self):
        return int(self.x_representatives.size)

    @property
    def n_y(self):
        return int(self.y_representatives.size)

    @property
    def n_total(self):
        return self.n_x + self.n_y

    def to_dict(self):
        """Summary for reproducibility manifests."""
        return {
            'epsilon': self.epsilon,
            'n_x': self.n_x,
            'n_y': self.n_y,
            'n_total': self.n_total,
            'check_reference_marginals': self.check_reference_marginals,
            'x_breakpoints': self.x_breakpoints.tolist(),
            'y_breakpoints': self.y_breakpoints.tolist(),
            'x_representatives': self.x_representatives.tolist(),
            'y_representatives': self.y_representatives.tolist(),
            'waived_x_cells': list(self.waived_x_cells),
            'waived_y_cells': list(self.waived_y_cells),
        }


def _quantile_cells(marg, epsilon, axis):
    """
    Cut one support at the quantile levels ``k * epsilon / 8``. Returns the
    cells and the indices of atom cells whose mass exceeds the budget.
    """
    if marg.dimension != 1:
        raise InvalidArgument('partitions are built for one dimensional '
                              'marginals (%s has dimension %d)'
                              % (axis, marg.dimension))
    budget = epsilon / 8.0
    levels = np.minimum(np.arange(int(math.ceil(8.0 / epsilon - 1e-9)) + 1)
                        * budget, 1.0)
    edges = np.unique(marg.quantile(levels))
    if edges.size == 1:
        return [(edges[0], edges[0])], []

    cells, waived = [], []

    def add_atom(point, mass):
        if mass > budget:
            log.warning('%s atom at %g carries mass %.4g > epsilon/8; its '
                        'cell is exempt from the accuracy bound',
                        axis, point, mass)
            waived.append(len(cells))
        cells.append((point, point))

    first_mass = marg.atom_mass(edges[0])
    if first_mass > 0:
        add_atom(edges[0], first_mass)
    for a, b in zip(edges[:-1], edges[1:]):
        mass_b = marg.atom_mass(b)
        if mass_b > budget:
            inner = float(marg.cdf_values(b)) - mass_b - \
                float(marg.cdf_values(a))
            if inner > 0:
                cells.append((a, b))
            add_atom(b, mass_b)
        else:
            cells.append((a, b))
    return cells, waived


def _refine(cells, waived, draws, budget, axis, max_cells):
    """
    Bisect interval cells until the empirical reference-marginal mass of
    each is at most `budget`.
    """
    draws = np.sort(draws)
    n = float(draws.size)

    def mass(a, b):
        return (np.searchsorted(draws, b, side='right') -
                np.searchsorted(draws, a, side='right')) / n

    todo = list(reversed(cells))
    res, res_waived = [], []
    atoms = set(cells[i] for i in waived)
    while todo:
        a, b = todo.pop()
        if a == b or mass(a, b) <= budget:
            if (a, b) in atoms:
                res_waived.append(len(res))
            res.append((a, b))
            continue
        mid = 0.5 * (a + b)
        if not a < mid < b:
            log.warning('%s cell [%g, %g] cannot be split further', axis, a, b)
            res_waived.append(len(res))
            res.append((a, b))
            continue
        todo.append((mid, b))
        todo.append((a, mid))
        if len(res) + len(todo) > max_cells:
            raise PartitionBudgetExceeded(
                'refining the %s partition needs more than %d cells'
                % (axis, max_cells))
    return res, res_waived


def _representatives(cells):
    return np.array([0.5 * (a + b) for a, b in cells])


def build_partition(x_marg, y_marg, epsilon, ref=None, rng=None,
                    reference_sample_count=10 ** 4, max_cells=MAX_CELLS):
    """
    Partition X and Y so that F_X and F_Y change by at most ``epsilon / 8``
    within each cell. Cuts are placed at the quantile levels
    ``k * epsilon / 8``; representatives are the coordinate midpoints.

    If a reference measure `ref` is given, cells are further bisected until
    the Monte Carlo estimate of each reference-marginal increment is at most
    ``epsilon / 8``, using `reference_sample_count` draws from `ref`.
    """
    if not 0 < epsilon < 1:
        raise InvalidArgument('epsilon must lie in (0, 1), got %r'
                              % (epsilon,))
    x_cells, x_waived = _quantile_cells(x_marg, epsilon, 'X')
    y_cells, y_waived = _quantile_cells(y_marg, epsilon, 'Y')

    if ref is None:
        bound = 2 * int(math.ceil(8.0 / epsilon - 1e-9)) + 4
        total = len(x_cells) + len(y_cells)
        if not (x_waived or y_waived) and total > bound:
            raise AssertionError('sieve size %d exceeds the bound %d'
                                 % (total, bound))
    else:
        rng = np.random.default_rng() if rng is None else rng
        draws = sample_reference(ref, reference_sample_count, rng=rng)
        x_cells, x_waived = _refine(x_cells, x_waived, draws.x[:, 0],
                                    epsilon / 8.0, 'X', max_cells)
        y_cells, y_waived = _refine(y_cells, y_waived, draws.y[:, 0],
                                    epsilon / 8.0, 'Y', max_cells)

    part = SievePartition(
        float(epsilon),
        np.array(x_cells, dtype=float).reshape(-1, 2),
        np.array(y_cells, dtype=float).reshape(-1, 2),
        _representatives(x_cells), _representatives(y_cells),
        ref is not None, tuple(x_waived), tuple(y_waived))
    log.info('sieve partition for epsilon=%g: n_x=%d n_y=%d', epsilon,
             part.n_x, part.n_y)
    return part


def kappa(x_marg, y_marg):
    """
    Return ``1 / max(1 - F_X(inf X), 1 - F_Y(inf Y))`` where ``F(inf)`` is
    the mass of the support infimum.
    """
    den = max(1.0 - x_marg.atom_mass(x_marg.support_lo),
              1.0 - y_marg.atom_mass(y_marg.support_lo))
    if den <= 0:
        raise DegenerateMarginal('both marginals are point masses at their '
                                 'support infima')
    return 1.0 / den


@dataclass(frozen=True, eq=False)
class SieveDictionary:
    """
    The moment dictionary of a partition. `x_levels` and `y_levels` hold the
    distribution functions at the representatives. `scale` multiplies the
    dictionary exponent and `shift` stabilizes it.
    """

    partition: SievePartition
    kind: str
    scale: float
    kappa: float
    gamma: float
    sup_norm: float
    x_levels: np.ndarray
    y_levels: np.ndarray

    @property
    def n_total(self):
        return self.partition.n_total

    @property
    def shift(self):
        return self.gamma * self.kappa * self.sup_norm


def build_dictionary(partition, x_marg, y_marg, gamma, sup_norm,
                     kind=REDUCED, kappa_value=None):
    """
    Attach the moment functions to `partition`. The exponent scale is
    ``gamma * |c|`` for the reduced program and ``gamma * kappa * |c|`` for
    the general one.
    """
    if kind not in (REDUCED, GENERAL):
        raise InvalidArgument('unknown dictionary kind %r' % (kind,))
    if not sup_norm >= 0:
        raise InvalidArgument('sup_norm must be nonnegative')
    kap = kappa(x_marg, y_marg) if kappa_value is None else kappa_value
    scale = gamma * sup_norm if kind == REDUCED else gamma * kap * sup_norm
    return SieveDictionary(
        partition, kind, float(scale), float(kap), float(gamma),
        float(sup_norm),
        np.asarray(x_marg.cdf_values(partition.x_representatives), float),
        np.asarray(y_marg.cdf_values(partition.y_representatives), float))


def evaluate_batch(dictionary, x, y):
    """
    Dictionary values at ``N`` points: an ``(N, n_total)`` matrix whose
    first ``n_x`` columns are ``F_X(x'_j) - 1[x <= x'_j]`` and the remaining
    ones ``F_Y(y'_i) - 1[y <= y'_i]``.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    part = dictionary.partition
    vx = dictionary.x_levels[None, :] - \
        (x[:, None] <= part.x_representatives[None, :])
    vy = dictionary.y_levels[None, :] - \
        (y[:, None] <= part.y_representatives[None, :])
    return np.hstack([vx, vy])


def evaluate_dictionary(dictionary, omega):
    """Dictionary vector at a single point ``omega = (x, y)``."""
    x, y = omega
    return evaluate_batch(dictionary, [x], [y])[0]


def signed_values(values):
    """Append the negated columns, giving the two-sided dictionary."""
    return np.hstack([values, -values])


def optimal_sample_size(epsilon, n_total):
    """
    Sample size ``ceil(2 log(n) / epsilon^2)`` equating the stochastic and
    the discretization error terms.

    A ratio exceeding an integer by less than a relative `SAMPLE_SIZE_RTOL`
    is rounded down, so the stochastic term ``sqrt(2 log(n) / N)`` may
    exceed `epsilon` by about a relative ``SAMPLE_SIZE_RTOL / 2`` at most:

        >>> optimal_sample_size(0.2, 80), optimal_sample_size(1.0, 8)
        (220, 5)
    """
    if n_total < 2:
        raise InvalidArgument('the sample size rule needs n_total >= 2')
    if not epsilon > 0:
        raise InvalidArgument('invalid option: epsilon=%r' % (epsilon,))
    ratio = 2.0 * math.log(n_total) / epsilon ** 2
    return max(1, int(math.ceil(ratio * (1.0 - SAMPLE_SIZE_RTOL))))


def entropy_condition_ok(schedule):
    """
    Check ``log(n) / N`` decreases along a schedule of
    ``(epsilon, n_total, N)`` levels. Returns one flag per level; the first
    level is always accepted.
    """
    schedule = list(schedule)
    if not schedule:
        raise InvalidArgument('the schedule is empty')
    ratios = [math.log(n) / N for _, n, N in schedule]
    return [True] + [ratios[k] <= ratios[k - 1]
                     for k in range(1, len(ratios))]
