"""
Baselines and ground truth: the empirical Sinkhorn divergence, a grid
discretization oracle for the EOT value and the dual value, and the exact
one dimensional transport value.

Sinkhorn runs in the log domain only; with ``gamma = 100`` the kernel
``exp(-gamma * C)`` underflows.

    >>> import numpy as np
    >>> from eotsieve.baseline import DiscreteEotProblem, sinkhorn
    >>> prob = DiscreteEotProblem.uniform([[0.0], [1.0]], [[0.0], [1.0]],
    ...                                   np.array([[0.0, 1.0], [1.0, 0.0]]),
    ...                                   gamma=1.0)
    >>> res = sinkhorn(prob)
    >>> np.round(res.plan(), 4)
    array([[0.3655, 0.1345],
           [0.1345, 0.3655]])
"""

import json
import logging
import math
import os
import threading
import warnings

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import logsumexp, xlogy

from eotsieve.errors import InvalidArgument
from eotsieve.estimator import value_from_theta


__all__ = ['DiscreteEotProblem', 'SinkhornResult', 'DualityCheck',
           'OracleResult', 'OracleCache', 'sinkhorn', 'duality_check',
           'empirical_sinkhorn_value', 'oracle_eot_value', 'solve_oracle',
           'oracle_theta', 'exact_ot_1d', 'RICHARDSON_TOL']

log = logging.getLogger(__name__)

RICHARDSON_TOL = 1e-3

# epsilon scaling hands over to the target regularization within this factor
_LAST_STAGE = 1.1


@dataclass(frozen=True, eq=False)
class DiscreteEotProblem:
    """An entropic transport problem between two weighted atom sets."""

    x_atoms: np.ndarray
    y_atoms: np.ndarray
    x_weights: np.ndarray
    y_weights: np.ndarray
    cost_matrix: np.ndarray
    gamma: float

    def __post_init__(self):
        for name in ('x_weights', 'y_weights'):
            w = getattr(self, name)
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise InvalidArgument('%s must be a probability vector'
                                      % name)
        if self.cost_matrix.shape != (self.x_weights.size,
                                      self.y_weights.size):
            raise InvalidArgument('cost matrix has shape %s, expected %s'
                                  % (self.cost_matrix.shape,
                                     (self.x_weights.size,
                                      self.y_weights.size)))
        if np.any(self.cost_matrix < 0) or \
                not np.all(np.isfinite(self.cost_matrix)):
            raise InvalidArgument('cost matrix entries must be finite and '
                                  'nonnegative')
        if not self.gamma > 0:
            raise InvalidArgument('gamma must be positive')

    @classmethod
    def build(cls, x_atoms, y_atoms, x_weights, y_weights, cost_matrix,
              gamma):
        return cls(np.asarray(x_atoms, dtype=float),
                   np.asarray(y_atoms, dtype=float),
                   np.asarray(x_weights, dtype=float),
                   np.asarray(y_weights, dtype=float),
                   np.asarray(cost_matrix, dtype=float), float(gamma))

    @classmethod
    def uniform(cls, x_atoms, y_atoms, cost_matrix, gamma):
        """Problem with uniform weights on both sides."""
        n, m = np.shape(cost_matrix)
        return cls.build(x_atoms, y_atoms, np.full(n, 1.0 / n),
                         np.full(m, 1.0 / m), cost_matrix, gamma)

    @classmethod
    def from_samples(cls, x_samples, y_samples, cost, gamma):
        """Empirical problem with uniform weights and ``C = cost(x, y)``."""
        x = np.asarray(x_samples, dtype=float)
        y = np.asarray(y_samples, dtype=float)
        return cls.uniform(x, y, cost.pairwise(x, y), gamma)

    @classmethod
    def from_marginals(cls, x_marg, y_marg, cost, gamma, grid_per_axis):
        """Quantile grid discretization of two one dimensional marginals."""
        xa, xw = x_marg.discretize(grid_per_axis)
        ya, yw = y_marg.discretize(grid_per_axis)
        return cls.build(xa, ya, xw, yw, cost.pairwise(xa, ya), gamma)


@dataclass(frozen=True, eq=False)
class SinkhornResult:
    """
    Output of :func:`sinkhorn`. `f` and `g` are the log scalings, so the plan
    is ``exp(-gamma * C + f[:, None] + g[None, :])``; `reg_value` is the
    transport cost plus ``kl / gamma`` where `kl` is the relative entropy of
    the plan against the product of the weights.
    `stages` counts the epsilon scaling stages run before the target
    regularization.
    """

    f: np.ndarray
    g: np.ndarray
    reg_value: float
    transport_cost: float
    kl: float
    marginal_residual: float
    iterations: int
    converged: bool
    problem: DiscreteEotProblem = field(repr=False)
    stages: int = 0

    def log_plan(self):
        return -self.problem.gamma * self.problem.cost_matrix + \
            self.f[:, None] + self.g[None, :]

    def plan(self):
        """The transport plan, materialized on request."""
        return np.exp(self.log_plan())


def _residual(log_plan, x_weights, y_weights):
    rows = np.exp(logsumexp(log_plan, axis=1))
    cols = np.exp(logsumexp(log_plan, axis=0))
    return float(max(np.abs(rows - x_weights).max(),
                     np.abs(cols - y_weights).max()))


def _sinkhorn_loop(kernel, a, b, loga, logb, u, v, max_iters, tol,
                   check_every):
    err = math.inf
    it = 0
    while it < max_iters:
        v = logb - logsumexp(kernel + u[:, None], axis=0)
        u = loga - logsumexp(kernel + v[None, :], axis=1)
        it += 1
        if it % check_every == 0 or it == max_iters:
            err = _residual(kernel + u[:, None] + v[None, :], a, b)
            if err <= tol:
                break
    return u, v, err, it


def sinkhorn(problem, tol=1e-9, max_iters=10 ** 5, check_every=10,
             epsilon_scaling=True, stage_iters=100):
    """
    Log-domain Sinkhorn iterations with regularization ``1 / gamma``.

    The scalings are updated by alternating soft-min steps until the
    largest row or column residual of the plan is at most `tol`, checked
    every `check_every` iterations. Non-convergence is flagged in the result
    and announced by a warning.

    With `epsilon_scaling`, and if ``1 / gamma`` is below the largest cost,
    the iterations start from the regularization ``max(C)`` and decrease it
    geometrically towards ``1 / gamma``, running at most `stage_iters`
    iterations per stage and warm starting each stage from the potentials
    of the previous one. `max_iters` bounds the iterations of all stages
    together.
    """
    if not tol > 0:
        raise InvalidArgument('invalid option: tol=%r' % (tol,))
    a, b = problem.x_weights, problem.y_weights
    with np.errstate(divide='ignore'):
        loga, logb = np.log(a), np.log(b)
    cost = problem.cost_matrix
    u = np.zeros(a.size)
    v = np.zeros(b.size)

    it = stages = 0
    reg = 1.0 / problem.gamma
    reg0 = float(cost.max())
    if epsilon_scaling and reg0 > reg:
        # u and v scale with the stage's gamma; the duals u / gamma do not
        stage_gamma = problem.gamma
        while it < max_iters:
            stage_reg = (reg0 - reg) * math.exp(-stages) + reg
            if stage_reg <= _LAST_STAGE * reg:
                break
            u /= stage_gamma * stage_reg
            v /= stage_gamma * stage_reg
            stage_gamma = 1.0 / stage_reg
            u, v, _, done = _sinkhorn_loop(
                -stage_gamma * cost, a, b, loga, logb, u, v,
                min(stage_iters, max_iters - it), tol, check_every)
            it += done
            stages += 1
        u *= problem.gamma / stage_gamma
        v *= problem.gamma / stage_gamma

    kernel = -problem.gamma * cost
    u, v, err, done = _sinkhorn_loop(kernel, a, b, loga, logb, u, v,
                                     max_iters - it, tol, check_every)
    it += done
    if done == 0:
        err = _residual(kernel + u[:, None] + v[None, :], a, b)
    converged = err <= tol
    if not converged:
        warnings.warn('Sinkhorn did not converge (residual %.3g after %d '
                      'iterations). You might want to increase max_iters or '
                      'decrease gamma.' % (err, it))

    logp = kernel + u[:, None] + v[None, :]
    plan = np.exp(logp)
    transport = float(np.sum(plan * problem.cost_matrix))
    # 0 log 0 = 0; zero weights only meet zero plan entries.
    pos = plan > 0
    with np.errstate(invalid='ignore'):
        ratio = logp - loga[:, None] - logb[None, :]
    kl = float(np.sum(plan[pos] * ratio[pos]))
    log.debug('sinkhorn: %d iterations in %d scaling stages, residual %.3g',
              it, stages, err)
    return SinkhornResult(u, v, transport + kl / problem.gamma, transport,
                          kl, err, it, converged, problem, stages)


@dataclass(frozen=True)
class DualityCheck:
    """
    The I-projection value ``KL(plan | R)`` against the discrete reference
    measure, and the dual value ``-log theta`` from the scalings. They agree
    at convergence.
    """

    primal: float
    dual: float
    log_a_gamma: float

    @property
    def gap(self):
        return abs(self.primal - self.dual)

    @property
    def log_theta(self):
        return -self.dual


def duality_check(result):
    """
    Compare the relative entropy of the plan against the discrete reference
    measure ``R ~ a b exp(-gamma C)`` with the dual value obtained from the
    centered potentials ``phi = f - log a`` and ``psi = g - log b``.
    """
    prob = result.problem
    a, b = prob.x_weights, prob.y_weights
    with np.errstate(divide='ignore'):
        loga, logb = np.log(a), np.log(b)
    kernel = -prob.gamma * prob.cost_matrix
    log_ref = loga[:, None] + logb[None, :] + kernel
    log_a_gamma = float(logsumexp(log_ref))
    logp = result.log_plan()
    plan = np.exp(logp)
    primal = float(np.sum(xlogy(plan, plan)) -
                   np.sum(np.where(plan > 0, plan * (log_ref - log_a_gamma),
                                   0.0)))
    phi = np.where(a > 0, result.f - loga, 0.0)
    psi = np.where(b > 0, result.g - logb, 0.0)
    dual = float(np.dot(a, phi) + np.dot(b, psi)) + log_a_gamma
    return DualityCheck(primal, dual, log_a_gamma)


def empirical_sinkhorn_value(x_samples, y_samples, cost, gamma, tol=1e-9,
                             max_iters=10 ** 5, epsilon_scaling=True):
    """
    Entropic transport value between the empirical measures of two samples
    (uniform weights, sizes may differ).
    """
    prob = DiscreteEotProblem.from_samples(x_samples, y_samples, cost, gamma)
    return sinkhorn(prob, tol, max_iters,
                    epsilon_scaling=epsilon_scaling).reg_value


@dataclass(frozen=True)
class OracleResult:
    """
    Grid oracle output. `eot_value` is the reported value (the finer grid's
    when the Richardson check failed); `log_theta` is the discrete dual
    value ``-KL(plan | R)``; `richardson_change` is the value change when
    doubling the grid, or None if the check was skipped.
    """

    eot_value: float
    log_theta: float
    log_a_gamma: float
    grid_per_axis: int
    richardson_change: object = None
    duality_gap: float = 0.0
    converged: bool = True

    def to_dict(self):
        return asdict(self)


def _oracle_at(x_marg, y_marg, cost, gamma, grid, tol, max_iters):
    prob = DiscreteEotProblem.from_marginals(x_marg, y_marg, cost, gamma,
                                             grid)
    res = sinkhorn(prob, tol, max_iters)
    return res, duality_check(res)


def solve_oracle(x_marg, y_marg, cost, gamma, grid_per_axis=512, tol=1e-10,
                 max_iters=10 ** 5, richardson=True, cache=None):
    """
    Grid discretization oracle. Each marginal is replaced by equal-mass
    atoms at the quantile cell midpoints and the discrete problem is solved
    by :func:`sinkhorn`. With `richardson` the grid is doubled once; a
    change above ``1e-3`` is logged and the finer value reported.
    """
    if int(grid_per_axis) != grid_per_axis or grid_per_axis < 16:
        raise InvalidArgument('grid_per_axis must be an integer >= 16')
    grid = int(grid_per_axis)
    if cache is not None:
        hit = cache.get(x_marg, y_marg, cost, gamma, grid, richardson)
        if hit is not None:
            return hit

    res, dual = _oracle_at(x_marg, y_marg, cost, gamma, grid, tol, max_iters)
    result = OracleResult(res.reg_value, dual.log_theta, dual.log_a_gamma,
                          grid, None, dual.gap, res.converged)
    if richardson:
        fine, fine_dual = _oracle_at(x_marg, y_marg, cost, gamma, 2 * grid,
                                     tol, max_iters)
        change = abs(fine.reg_value - res.reg_value)
        if change > RICHARDSON_TOL:
            log.warning('oracle value moved by %.3g when doubling the grid '
                        'to %d; reporting the finer value', change, 2 * grid)
            result = OracleResult(fine.reg_value, fine_dual.log_theta,
                                  fine_dual.log_a_gamma, 2 * grid, change,
                                  fine_dual.gap, fine.converged)
        else:
            result = OracleResult(res.reg_value, dual.log_theta,
                                  dual.log_a_gamma, grid, change, dual.gap,
                                  res.converged)
    log.info('oracle EOT value %.6g at grid %d', result.eot_value,
             result.grid_per_axis)
    if cache is not None:
        cache.put(x_marg, y_marg, cost, gamma, grid, richardson, result)
    return result


def oracle_eot_value(x_marg, y_marg, cost, gamma, grid_per_axis=512,
                     **kwargs):
    """The oracle EOT value, see :func:`solve_oracle`."""
    return solve_oracle(x_marg, y_marg, cost, gamma, grid_per_axis,
                        **kwargs).eot_value


def oracle_theta(x_marg, y_marg, cost, gamma, grid_per_axis=512, **kwargs):
    """
    The oracle dual value ``theta``. Together with the discrete normalizer
    it reproduces the oracle EOT value.
    """
    res = solve_oracle(x_marg, y_marg, cost, gamma, grid_per_axis, **kwargs)
    check = value_from_theta(res.log_theta, res.log_a_gamma, gamma)
    if abs(check - res.eot_value) > 1e-6 * max(1.0, abs(res.eot_value)):
        log.warning('oracle dual value is inconsistent with the EOT value '
                    '(%.8g vs %.8g)', check, res.eot_value)
    return math.exp(res.log_theta)


class OracleCache(object):
    """
    JSON sidecar holding oracle results keyed by marginals, cost, gamma and
    grid. Entries are written through to `path` on every update.
    """

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()
        self._entries = {}
        if os.path.exists(path):
            with open(path) as fobj:
                try:
                    self._entries = json.load(fobj)
                except ValueError:
                    log.warning('ignoring unreadable oracle cache %s', path)

    @staticmethod
    def key(x_marg, y_marg, cost, gamma, grid, richardson=True):
        return json.dumps({'x': x_marg.to_spec(), 'y': y_marg.to_spec(),
                           'cost': cost.to_spec(), 'gamma': float(gamma),
                           'grid': int(grid), 'richardson': bool(richardson)},
                          sort_keys=True)

    def get(self, *args):
        with self._lock:
            entry = self._entries.get(self.key(*args))
        if entry is None:
            return None
        return OracleResult(**entry)

    def put(self, *args):
        result = args[-1]
        with self._lock:
            self._entries[self.key(*args[:-1])] = result.to_dict()
            tmp = self.path + '.tmp'
            with open(tmp, 'w') as fobj:
                json.dump(self._entries, fobj, indent=1, sort_keys=True)
            os.replace(tmp, self.path)

    def __len__(self):
        return len(self._entries)


def exact_ot_1d(x_marg, y_marg, cost_kind='quadratic',
                quadrature_points=10 ** 5):
    """
    Unregularized transport value between one dimensional marginals by the
    quantile coupling, integrated with the midpoint rule. `cost_kind` is
    ``'quadratic'`` (``0.5 * (x - y)^2``) or ``'absolute'``; a cost function
    of either kind is accepted too. The quantile coupling is optimal for
    both.
    """
    kind = getattr(cost_kind, 'name', cost_kind)
    if kind not in ('quadratic', 'absolute'):
        raise InvalidArgument('exact_ot_1d supports quadratic and absolute '
                              'costs, not %r' % (kind,))
    if x_marg.dimension != 1 or y_marg.dimension != 1:
        raise InvalidArgument('exact_ot_1d needs one dimensional marginals')
    levels = (np.arange(quadrature_points) + 0.5) / quadrature_points
    diff = x_marg.quantile(levels) - y_marg.quantile(levels)
    if kind == 'quadratic':
        return float(np.mean(0.5 * diff ** 2))
    return float(np.mean(np.abs(diff)))
