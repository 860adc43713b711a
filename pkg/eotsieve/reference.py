"""
The Gibbs reference measure of the entropic transport problem.

For a regularization weight ``gamma`` the reference measure ``R`` has
density ``exp(-gamma * c(x, y)) / a`` with respect to the product of the
marginals, where the normalizer ``a`` is the product-measure mean of
``exp(-gamma * c)``. Because costs are nonnegative, ``a <= 1``.

This module estimates ``log a`` by Monte Carlo and draws exact samples from
``R`` by rejection from the product measure. A self-normalized importance
sampling alternative is available for regimes where acceptance collapses.
"""

import logging
import math

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import softmax

from eotsieve.errors import (AcceptanceBudgetExceeded, InvalidArgument,
                             NumericalUnderflow)
from eotsieve.measures import CostFunction, Marginal


__all__ = ['ReferenceMeasure', 'ReferenceSample', 'estimate_log_a_gamma',
           'sample_reference', 'DEFAULT_NORMALIZER_DRAWS']

log = logging.getLogger(__name__)

DEFAULT_NORMALIZER_DRAWS = 10 ** 6

# Product draws are processed in batches of this size to bound memory.
_BATCH = 2 ** 18


def _check_gamma(gamma):
    if not (gamma > 0 and math.isfinite(gamma)):
        raise InvalidArgument('gamma must be positive and finite, got %r'
                              % (gamma,))


def estimate_log_a_gamma(gamma, cost, x_marg, y_marg,
                         mc_count=DEFAULT_NORMALIZER_DRAWS, rng=None):
    """
    Estimate ``log a`` from `mc_count` product-measure draws.

    The mean of ``exp(-gamma * c)`` is accumulated relative to the largest
    exponent seen, so no weight is exponentiated unshifted. Returns
    ``(log_a, stderr)`` where `stderr` is the delta-method standard error of
    ``log_a``.
    """
    _check_gamma(gamma)
    if int(mc_count) != mc_count or mc_count < 100:
        raise InvalidArgument('mc_count must be an integer >= 100')
    rng = np.random.default_rng() if rng is None else rng
    mc_count = int(mc_count)

    shift = -np.inf
    s1 = s2 = 0.0
    done = 0
    while done < mc_count:
        batch = min(_BATCH, mc_count - done)
        x = x_marg.sample(batch, rng)
        y = y_marg.sample(batch, rng)
        expo = -gamma * cost(x, y)
        top = float(np.max(expo))
        if np.isnan(top):
            raise NumericalUnderflow('cost evaluations are not finite')
        if top > shift:
            if np.isfinite(shift):
                s1 *= math.exp(shift - top)
                s2 *= math.exp(2 * (shift - top))
            shift = top
        if np.isfinite(shift):
            w = np.exp(expo - shift)
            s1 += float(w.sum())
            s2 += float(np.dot(w, w))
        done += batch

    if not np.isfinite(shift) or s1 <= 0.0:
        raise NumericalUnderflow(
            'all normalizer weights exp(-gamma*c) underflow to zero; use a '
            'larger stabilizing shift or a smaller gamma (gamma=%g)' % gamma)
    mean = s1 / mc_count
    log_a = min(shift + math.log(mean), 0.0)
    var = max(s2 - s1 * s1 / mc_count, 0.0) / (mc_count - 1)
    stderr = math.sqrt(var / mc_count) / mean
    log.debug('log a_gamma = %.8g +/- %.3g from %d draws', log_a, stderr,
              mc_count)
    return log_a, stderr


@dataclass(frozen=True)
class ReferenceMeasure:
    """
    The reference measure for regularization `gamma`. `a_gamma_stderr` is
    the standard error of `log_a_gamma_estimate`.
    """

    gamma: float
    cost: CostFunction
    x_marg: Marginal
    y_marg: Marginal
    log_a_gamma_estimate: float
    a_gamma_stderr: float
    normalizer_sample_count: int

    def __post_init__(self):
        if self.log_a_gamma_estimate > 0:
            raise InvalidArgument('log a_gamma must be <= 0 for nonnegative '
                                  'costs')

    @classmethod
    def build(cls, gamma, cost, x_marg, y_marg,
              mc_count=DEFAULT_NORMALIZER_DRAWS, rng=None):
        """
        Fill in the cost bounds, estimate the normalizer and return the
        reference measure.
        """
        _check_gamma(gamma)
        cost = cost.with_bounds(x_marg, y_marg)
        log_a, stderr = estimate_log_a_gamma(gamma, cost, x_marg, y_marg,
                                             mc_count, rng)
        return cls(float(gamma), cost, x_marg, y_marg, log_a, stderr,
                   int(mc_count))

    @property
    def relative_stderr(self):
        """Standard error of ``log a`` relative to its magnitude."""
        if self.a_gamma_stderr == 0:
            return 0.0
        if self.log_a_gamma_estimate == 0:
            return math.inf
        return self.a_gamma_stderr / abs(self.log_a_gamma_estimate)

    @property
    def expected_acceptance_rate(self):
        """Acceptance probability of the shifted rejection sampler."""
        inf_value = self.cost.inf_value or 0.0
        return min(1.0, math.exp(self.log_a_gamma_estimate +
                                 self.gamma * inf_value))


@dataclass(frozen=True, eq=False)
class ReferenceSample:
    """
    Draws from the reference measure. `weights` is None for exact draws and
    holds the self-normalized importance weights otherwise. `accepted`
    counts every accepted proposal, including those of the last batch beyond
    the requested count, so ``acceptance_rate == accepted / proposals``.
    """

    x: np.ndarray
    y: np.ndarray
    proposals: int
    acceptance_rate: float
    method: str = 'rejection'
    weights: Optional[np.ndarray] = None
    accepted: Optional[int] = None

    def __len__(self):
        return self.x.shape[0]

    def pairs(self):
        """The draws as a list of ``(x, y)`` pairs."""
        return list(zip(self.x, self.y))


def sample_reference(ref, count, max_proposals=None, rng=None,
                     method='rejection'):
    """
    Draw `count` points from the reference measure.

    With ``method='rejection'`` (the default) product-measure proposals are
    accepted with probability ``exp(-gamma * (c - inf c))``; the draws are
    exact and i.i.d. Proposals are generated in batches whose sizes depend
    only on the reference measure and `count`, so the output is a
    deterministic function of the generator state. `max_proposals` caps the
    number of proposals (default ``1000 * count``).

    With ``method='importance'`` `count` product draws are returned together
    with their self-normalized weights.
    """
    if int(count) != count or count < 1:
        raise InvalidArgument('count must be a positive integer')
    count = int(count)
    if max_proposals is None:
        max_proposals = 1000 * count
    if max_proposals < count:
        raise InvalidArgument('max_proposals must be at least count')
    rng = np.random.default_rng() if rng is None else rng

    if method == 'importance':
        x = ref.x_marg.sample(count, rng)
        y = ref.y_marg.sample(count, rng)
        weights = softmax(-ref.gamma * ref.cost(x, y))
        return ReferenceSample(x, y, count, 1.0, method, weights, count)
    if method != 'rejection':
        raise InvalidArgument('unknown sampling method %r' % (method,))

    inf_value = ref.cost.inf_value
    if inf_value is None:
        raise InvalidArgument('rejection sampling needs the cost infimum')
    rate_guess = max(ref.expected_acceptance_rate, 1e-6)
    xs, ys = [], []
    accepted = proposals = 0
    while accepted < count:
        budget = max_proposals - proposals
        if budget <= 0:
            rate = accepted / float(proposals)
            raise AcceptanceBudgetExceeded(
                '%d proposals gave %d of %d draws (acceptance rate %.3g)'
                % (proposals, accepted, count, rate), acceptance_rate=rate)
        want = int(math.ceil(1.1 * (count - accepted) / rate_guess)) + 64
        batch = min(budget, want, _BATCH)
        x = ref.x_marg.sample(batch, rng)
        y = ref.y_marg.sample(batch, rng)
        u = rng.uniform(size=batch)
        keep = np.log(u) < -ref.gamma * (ref.cost(x, y) - inf_value)
        xs.append(x[keep])
        ys.append(y[keep])
        accepted += int(keep.sum())
        proposals += batch

    rate = accepted / float(proposals)
    log.debug('rejection sampler: %d proposals, acceptance rate %.4g '
              '(expected %.4g)', proposals, rate, ref.expected_acceptance_rate)
    return ReferenceSample(np.concatenate(xs)[:count],
                           np.concatenate(ys)[:count], proposals, rate,
                           accepted=accepted)
