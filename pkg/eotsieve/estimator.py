"""
EOT value estimates, bootstrap confidence intervals and rate diagnostics.

The dual value ``theta`` and the normalizer ``a`` determine the regularized
transport value as ::

    EOT = -(log a + log theta) / gamma

which is strictly decreasing in ``theta``. Intervals are built for
``theta`` and mapped through this transform, swapping their endpoints.

    >>> from eotsieve.estimator import rate_bound, stochastic_term
    >>> round(stochastic_term(160, 1015), 4)
    0.1
    >>> round(rate_bound(0.1, 160, 1015, 100.0, 1.0, 2.0), 1)
    173.3
"""

import json
import logging
import math

from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from eotsieve.errors import InvalidArgument, NotConverged


__all__ = ['EotEstimate', 'ConfidenceInterval', 'value_from_theta',
           'estimate_eot', 'symmetric_ci', 'rate_bound', 'stochastic_term',
           'DEFAULT_CI_LEVEL', 'DEFAULT_BOOTSTRAP_DRAWS',
           'DEFAULT_INDEX_GRID_SIZE']

log = logging.getLogger(__name__)

DEFAULT_CI_LEVEL = 0.95
DEFAULT_BOOTSTRAP_DRAWS = 1000
DEFAULT_INDEX_GRID_SIZE = 256


def value_from_theta(log_theta, log_a_gamma, gamma):
    """Map a dual value (given by its log) to the EOT value scale."""
    if log_theta == -math.inf:
        return math.inf
    return 0.0 - (log_a_gamma + log_theta) / gamma


@dataclass(frozen=True)
class ConfidenceInterval:
    """
    Symmetric interval ``theta_hat -/+ q / sqrt(N)`` for the dual value,
    cut at zero. Logs of the endpoints are kept since the endpoints
    themselves may overflow; ``log_lo`` is ``-inf`` when the interval
    reaches zero.
    """

    lo: float
    hi: float
    log_lo: float
    log_hi: float
    level: float
    log_quantile: float
    bootstrap_draws: int
    index_grid_size: int

    def value_interval(self, log_a_gamma, gamma):
        """The interval on the EOT value scale, ``(lo, hi)``."""
        return (value_from_theta(self.log_hi, log_a_gamma, gamma),
                value_from_theta(self.log_lo, log_a_gamma, gamma))


@dataclass(frozen=True)
class EotEstimate:
    """
    An EOT value estimate. `ci_lo` and `ci_hi` bound the dual value;
    `value_ci_lo` and `value_ci_hi` are the same interval on the value
    scale (an unbounded upper end is ``inf``).
    """

    gamma: float
    eot_value: float
    theta_hat: float
    log_theta_hat: float
    log_a_gamma: float
    a_gamma_stderr: float
    epsilon: Optional[float] = None
    n_total: Optional[int] = None
    N: Optional[int] = None
    rate_bound_log10: Optional[float] = None
    solver_iterations: Optional[int] = None
    solver_status: Optional[str] = None
    ci_lo: Optional[float] = None
    ci_hi: Optional[float] = None
    ci_level: Optional[float] = None
    value_ci_lo: Optional[float] = None
    value_ci_hi: Optional[float] = None
    seed: Optional[int] = None
    wall_time_ms: Optional[float] = None

    def with_ci(self, ci):
        """Return a copy carrying the interval `ci`."""
        v_lo, v_hi = ci.value_interval(self.log_a_gamma, self.gamma)
        return replace(self, ci_lo=ci.lo, ci_hi=ci.hi, ci_level=ci.level,
                       value_ci_lo=v_lo, value_ci_hi=v_hi)

    def to_dict(self):
        """
        JSON compatible record. Infinite values, which JSON cannot carry,
        are written as None.
        """
        res = asdict(self)
        for key, val in res.items():
            if isinstance(val, float) and not math.isfinite(val):
                res[key] = None
        return res

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def stochastic_term(n_total, N):
    """The stochastic error term ``sqrt(2 log(n) / N)``."""
    return math.sqrt(2.0 * math.log(n_total) / N)


def rate_bound(epsilon, n_total, N, gamma, kappa, sup_norm):
    """
    ``log10`` of the sample complexity bound
    ``max(sqrt(2 log(n) / N), epsilon) * 2 kappa |c| * exp(2 gamma kappa |c|)``,
    evaluated in log space.
    """
    for name, val in (('epsilon', epsilon), ('n_total', n_total), ('N', N),
                      ('gamma', gamma), ('kappa', kappa),
                      ('sup_norm', sup_norm)):
        if not val > 0:
            raise InvalidArgument('invalid option: %s=%r' % (name, val))
    lead = max(stochastic_term(n_total, N), epsilon) * 2.0 * kappa * sup_norm
    return math.log10(lead) + 2.0 * gamma * kappa * sup_norm / math.log(10.0)


def estimate_eot(solution, ref, epsilon=None, n_total=None, N=None,
                 kappa=None):
    """
    Turn a converged SAA solution into an :class:`EotEstimate`. The rate
    diagnostic is filled in when `epsilon`, `n_total`, `N` and `kappa` are
    given.
    """
    if not solution.converged:
        raise NotConverged('the SAA solver did not converge (%s after %d '
                           'iterations); refusing to report an estimate'
                           % (solution.status, solution.iterations))
    value = value_from_theta(solution.log_theta_hat,
                             ref.log_a_gamma_estimate, ref.gamma)
    bound = None
    if None not in (epsilon, n_total, N, kappa) and n_total > 1 and \
            ref.cost.sup_norm:
        bound = rate_bound(epsilon, n_total, N, ref.gamma, kappa,
                           ref.cost.sup_norm)
    return EotEstimate(
        gamma=ref.gamma, eot_value=value,
        theta_hat=math.exp(solution.log_theta_hat),
        log_theta_hat=solution.log_theta_hat,
        log_a_gamma=ref.log_a_gamma_estimate,
        a_gamma_stderr=ref.a_gamma_stderr, epsilon=epsilon,
        n_total=n_total, N=N, rate_bound_log10=bound,
        solver_iterations=solution.iterations,
        solver_status=solution.status)


def _index_grid(solution, size, rng):
    optimum = solution.coefficients[None, :]
    if size <= 1:
        return optimum
    others = solution.feasible_set.sample_uniform(size - 1, rng)
    return np.vstack([optimum, others])


def symmetric_ci(solution, dictionary_values, scale, shift,
                 level=DEFAULT_CI_LEVEL, bootstrap_draws=DEFAULT_BOOTSTRAP_DRAWS,
                 index_grid_size=DEFAULT_INDEX_GRID_SIZE, rng=None,
                 weights=None, multipliers=None):
    """
    Symmetric multiplier bootstrap interval for the dual value.

    The supremum of the empirical process is taken over an index grid made
    of the optimizer and ``index_grid_size - 1`` uniform feasible points.
    For every bootstrap draw, standard normal multipliers ``m_j`` give ::

        Z(t) = N^(-1/2) sum_j m_j (G(w_j; t) - mean_j G(w_j; t))

    with ``G`` the exponential integrand. The positive and negative parts
    of ``sup Z`` are pooled and their ``1 - (1 - level) / 2`` quantile ``q``
    gives ``theta_hat -/+ q / sqrt(N)``. The integrand is evaluated relative
    to its largest exponent so nothing overflows.

    `shift` is not used in the computation; the interval is for the
    unshifted dual value. `multipliers` replaces the Gaussian draws by a
    given ``(bootstrap_draws, N)`` matrix.
    """
    if not solution.converged:
        raise NotConverged('confidence intervals need a converged solution')
    if not 0.5 < level < 1:
        raise InvalidArgument('invalid option: level=%r' % (level,))
    if bootstrap_draws < 200 and multipliers is None:
        raise InvalidArgument('invalid option: bootstrap_draws=%r (at least '
                              '200 are needed)' % (bootstrap_draws,))
    if index_grid_size < 1:
        raise InvalidArgument('invalid option: index_grid_size=%r'
                              % (index_grid_size,))
    values = np.asarray(dictionary_values, dtype=float)
    nobs = values.shape[0]
    rng = np.random.default_rng() if rng is None else rng

    grid = _index_grid(solution, index_grid_size, rng)
    expo = scale * (values @ grid.T)
    top = float(expo.max())
    integrand = np.exp(expo - top)
    if weights is None:
        centered = (integrand - integrand.mean(axis=0)) / math.sqrt(nobs)
    else:
        w = np.asarray(weights, dtype=float)
        w = w / w.sum()
        centered = math.sqrt(nobs) * w[:, None] * \
            (integrand - (w @ integrand)[None, :])

    if multipliers is None:
        multipliers = rng.standard_normal((bootstrap_draws, nobs))
    else:
        multipliers = np.asarray(multipliers, dtype=float)
        if multipliers.ndim != 2 or multipliers.shape[1] != nobs:
            raise InvalidArgument('multipliers must have one column per '
                                  'sample')
    process = multipliers @ centered
    sups = np.concatenate([process.max(axis=1), (-process).max(axis=1)])
    quant = float(np.quantile(sups, 1.0 - (1.0 - level) / 2.0))

    log_theta = solution.log_theta_hat
    if quant <= 0:
        log_q = -math.inf
        log_lo = log_hi = log_theta
    else:
        log_q = top + math.log(quant)
        log_half = log_q - 0.5 * math.log(nobs)
        log_hi = float(np.logaddexp(log_theta, log_half))
        if log_half >= log_theta:
            log_lo = -math.inf
        else:
            log_lo = log_theta + math.log1p(-math.exp(log_half - log_theta))
    ci = ConfidenceInterval(
        lo=math.exp(log_lo), hi=math.exp(log_hi) if log_hi < 709.0 else
        math.inf, log_lo=log_lo, log_hi=log_hi, level=level,
        log_quantile=log_q, bootstrap_draws=multipliers.shape[0],
        index_grid_size=grid.shape[0])
    log.debug('bootstrap interval for theta: [%.6g, %.6g] (log q = %.6g)',
              ci.lo, ci.hi, log_q)
    return ci
