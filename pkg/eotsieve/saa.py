"""
Sample average approximations of the dual program.

Given ``N`` reference draws and the dictionary matrix ``V`` (one row per
draw), the dual value is approximated by ::

    theta_hat = min  (1/N) sum_j exp(<t, V_j>)

over a compact convex set of exponent coefficients. Two parametrizations are
provided:

* the *reduced* program over ``tau`` with exponent ``scale * <tau, v>``,
  ``tau`` in the box ``[-1, 1]^n`` with ``sum(tau)`` in ``[-1, 1]`` (or, in
  strict mode, ``sum(|tau|) <= kappa``);
* the *general* program over ``alpha * mu`` with the signed dictionary,
  ``0 <= alpha <= alpha_max`` and ``mu`` in the simplex. It is solved in the
  product coordinates ``xi = alpha * mu``, on which it is convex.

Both are solved by accelerated projected gradient descent on the log of the
sample mean, minus a stabilizing shift. Convergence is judged by the
gradient mapping and by the Frank-Wolfe gap, which bounds the distance of
the objective to its minimum.

    >>> import numpy as np
    >>> from eotsieve.saa import project_reduced, ReducedFeasibleSet
    >>> project_reduced(np.ones(4), ReducedFeasibleSet(4))
    array([0.25, 0.25, 0.25, 0.25])
"""

import csv
import logging
import math

from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np
from scipy.special import logsumexp, softmax

from eotsieve.errors import InvalidArgument


__all__ = ['ReducedFeasibleSet', 'GeneralFeasibleSet', 'SolverOptions',
           'SaaSolution', 'reduced_objective_and_gradient', 'project_reduced',
           'project_simplex', 'solve_reduced', 'solve_general', 'STEP_RULES']

log = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-12

STEP_RULES = ('accelerated', 'armijo', 'spectral')

_BISECTION_STEPS = 200
_MAX_BACKTRACKS = 100
_STEP_GROWTH = 1.5
# relative slack of the upper bound test, a few units of roundoff
_ROUNDING = 1e-15


def _clip_threshold(point, target, lo, hi):
    """
    Find ``lam`` with ``sum(clip(point - lam, lo, hi)) == target``.
    Bisection locates the linear piece holding the root; on that piece the
    coordinates strictly between the bounds move with ``lam`` and the root
    is solved for in closed form.
    """
    a = float(np.min(point)) - 2.0
    b = float(np.max(point)) + 2.0
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (a + b)
        if np.clip(point - mid, lo, hi).sum() > target:
            a = mid
        else:
            b = mid
        if b - a <= 1e-16 * max(1.0, abs(mid)):
            break
    lam = 0.5 * (a + b)
    z = point - lam
    free = (z > lo) & (z < hi)
    if free.any():
        fixed = np.clip(z[~free], lo, hi).sum()
        lam = (point[free].sum() + fixed - target) / free.sum()
    return lam


def _box_slab_projection(point, sum_lo, sum_hi):
    x = np.clip(point, -1.0, 1.0)
    total = x.sum()
    if sum_lo <= total <= sum_hi:
        return x
    target = sum_hi if total > sum_hi else sum_lo
    return np.clip(point - _clip_threshold(point, target, -1.0, 1.0),
                   -1.0, 1.0)


def _box_l1_projection(point, radius):
    x = np.clip(point, -1.0, 1.0)
    if np.abs(x).sum() <= radius:
        return x
    mag = np.abs(point)
    lam = max(_clip_threshold(mag, radius, 0.0, 1.0), 0.0)
    return np.sign(point) * np.clip(mag - lam, 0.0, 1.0)


def _greedy_fill(order, room, amount):
    """Spend `amount` over the capacities `room`, visited in `order`."""
    room = room[order]
    take = np.clip(amount - (np.cumsum(room) - room), 0.0, room)
    out = np.empty_like(take)
    out[order] = take
    return out


@dataclass(frozen=True)
class ReducedFeasibleSet:
    """
    Feasible coefficients of the reduced program: ``tau`` in ``[-1, 1]^n``
    with ``sum(tau)`` in ``[-1, 1]``. With `strict` the slab is replaced by
    the l1 ball ``sum(|tau|) <= kappa``.
    """

    n: int
    strict: bool = False
    kappa: float = 1.0

    box_lo = -1.0
    box_hi = 1.0
    sum_lo = -1.0
    sum_hi = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgument('the feasible set needs n >= 1')
        if not self.kappa > 0:
            raise InvalidArgument('kappa must be positive')

    def contains(self, tau, tol=FEASIBILITY_TOL):
        tau = np.asarray(tau, dtype=float)
        if tau.shape != (self.n,) or not np.all(np.isfinite(tau)):
            return False
        if np.any(np.abs(tau) > 1.0 + tol):
            return False
        if self.strict:
            return np.abs(tau).sum() <= self.kappa + tol
        return self.sum_lo - tol <= tau.sum() <= self.sum_hi + tol

    def project(self, point):
        return project_reduced(point, self)

    def linear_minimizer(self, direction):
        """
        A vertex minimizing ``<direction, tau>``. The box optimum
        ``-sign(direction)`` is moved back into the slab (or the l1 ball)
        through the coordinates where that costs least.
        """
        g = np.asarray(direction, dtype=float)
        if self.strict:
            mag = np.abs(g)
            amount = _greedy_fill(np.argsort(-mag, kind='stable'),
                                  (mag > 0).astype(float), self.kappa)
            return -np.sign(g) * amount
        s = -np.sign(g)
        total = s.sum()
        if total > self.sum_hi:
            s -= _greedy_fill(np.argsort(-g, kind='stable'), s + 1.0,
                              total - self.sum_hi)
        elif total < self.sum_lo:
            s += _greedy_fill(np.argsort(g, kind='stable'), 1.0 - s,
                              self.sum_lo - total)
        return s

    def sample_uniform(self, count, rng, batch=4096):
        """
        Draw `count` points uniformly from the set, by rejection from the box
        or, in strict mode, by signed Dirichlet draws on the l1 ball.
        """
        out, have = [], 0
        for _ in range(10 ** 4):
            if self.strict and self.kappa < self.n:
                bary = rng.dirichlet(np.ones(self.n + 1), size=batch)
                signs = rng.choice([-1.0, 1.0], size=(batch, self.n))
                pts = self.kappa * signs * bary[:, :self.n]
                keep = np.all(np.abs(pts) <= 1.0, axis=1)
            else:
                pts = rng.uniform(-1.0, 1.0, size=(batch, self.n))
                sums = pts.sum(axis=1)
                if self.strict:
                    keep = np.ones(batch, dtype=bool)
                else:
                    keep = (sums >= self.sum_lo) & (sums <= self.sum_hi)
            out.append(pts[keep])
            have += int(keep.sum())
            if have >= count:
                return np.vstack(out)[:count]
        raise InvalidArgument('uniform sampling of the feasible set did not '
                              'produce %d points' % count)


@dataclass(frozen=True)
class GeneralFeasibleSet:
    """
    Feasible ``(alpha, mu)``: ``0 <= alpha <= alpha_max`` and ``mu`` in the
    probability simplex of dimension `n`. Internally points are handled as
    ``xi = alpha * mu``, i.e. ``xi >= 0`` with ``sum(xi) <= alpha_max``.
    """

    n: int
    alpha_max: float

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgument('the feasible set needs n >= 1')
        if not self.alpha_max >= 0:
            raise InvalidArgument('alpha_max must be nonnegative')

    def contains(self, alpha, mu, tol=FEASIBILITY_TOL):
        mu = np.asarray(mu, dtype=float)
        return (mu.shape == (self.n,) and -tol <= alpha <= self.alpha_max + tol
                and bool(np.all(mu >= -tol)) and abs(mu.sum() - 1.0) <= tol)

    def project(self, xi):
        xi = np.maximum(np.asarray(xi, dtype=float), 0.0)
        if xi.sum() <= self.alpha_max:
            return xi
        if self.alpha_max == 0:
            return np.zeros_like(xi)
        return project_simplex(xi, self.alpha_max)

    def linear_minimizer(self, direction):
        """A vertex of the capped simplex minimizing ``<direction, xi>``."""
        g = np.asarray(direction, dtype=float)
        s = np.zeros_like(g)
        i = int(np.argmin(g))
        if g[i] < 0:
            s[i] = self.alpha_max
        return s

    def split(self, xi):
        """Return ``(alpha, mu)`` for product coordinates `xi`."""
        alpha = float(xi.sum())
        if alpha <= 0:
            return 0.0, np.full(self.n, 1.0 / self.n)
        return min(alpha, self.alpha_max), xi / alpha

    def sample_uniform(self, count, rng):
        """Uniform draws of `xi` from the capped simplex."""
        bary = rng.dirichlet(np.ones(self.n + 1), size=count)
        return self.alpha_max * bary[:, :self.n]


def project_reduced(point, feasible_set):
    """
    Euclidean projection onto a :class:`ReducedFeasibleSet`.

    The point is clipped to the box; if the slab is then violated, the
    multiplier ``lam`` with ``sum(clip(point - lam))`` at the violated
    boundary is found by bisection.
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (feasible_set.n,):
        raise InvalidArgument('point has shape %s, expected (%d,)'
                              % (point.shape, feasible_set.n))
    if feasible_set.strict:
        return _box_l1_projection(point, feasible_set.kappa)
    return _box_slab_projection(point, feasible_set.sum_lo,
                                feasible_set.sum_hi)


def project_simplex(point, radius=1.0):
    """
    Projection onto ``{x >= 0, sum(x) == radius}`` by the sorted-threshold
    algorithm.

    >>> project_simplex(np.array([0.5, 0.5, 0.5]))
    array([0.33333333, 0.33333333, 0.33333333])
    """
    point = np.asarray(point, dtype=float)
    u = np.sort(point)[::-1]
    thresholds = (np.cumsum(u) - radius) / np.arange(1, point.size + 1)
    k = np.nonzero(thresholds < u)[0][-1]
    return np.maximum(point - thresholds[k], 0.0)


def _check_values(values, weights):
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
        raise InvalidArgument('dictionary values must be a nonempty N x n '
                              'matrix')
    if not np.all(np.isfinite(values)):
        raise InvalidArgument('dictionary values contain non-finite entries')
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (values.shape[0],) or np.any(weights < 0) or \
                not weights.sum() > 0:
            raise InvalidArgument('sample weights must be nonnegative with '
                                  'one entry per row')
        weights = weights / weights.sum()
    return values, weights


def _log_mean_exp(expo, weights):
    if weights is None:
        return logsumexp(expo) - math.log(expo.size), softmax(expo)
    with np.errstate(divide='ignore'):
        logw = np.log(weights)
    return logsumexp(expo, b=weights), softmax(expo + logw)


def _objective(coef, values, scale, shift, weights):
    expo = scale * (values @ coef)
    lme, probs = _log_mean_exp(expo, weights)
    return lme - shift, scale * (values.T @ probs)


def reduced_objective_and_gradient(tau, dictionary_values, scale, shift,
                                   weights=None):
    """
    Stabilized objective ``-shift + log mean_j exp(scale * <tau, v_j>)`` and
    its gradient ``scale * sum_j w_j v_j``, ``w`` being the softmax of the
    exponents. Optional `weights` replace the uniform sample mean by a
    weighted one.
    """
    values, weights = _check_values(dictionary_values, weights)
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (values.shape[1],):
        raise InvalidArgument('tau has shape %s, expected (%d,)'
                              % (tau.shape, values.shape[1]))
    return _objective(tau, values, scale, shift, weights)


@dataclass(frozen=True)
class SolverOptions:
    """
    Projected gradient settings. `step_rule` is ``'accelerated'``
    (extrapolated steps with backtracking on the quadratic upper bound,
    restarted whenever the objective goes up), ``'armijo'`` (plain
    backtracking from twice the last accepted step) or ``'spectral'``
    (Barzilai-Borwein trial steps safeguarded by the same backtracking).

    A run converges once the gradient mapping, divided by the exponent
    scale, is at most `tol`, or once the Frank-Wolfe gap, an upper bound on
    the distance of the objective to its minimum, is at most `gap_tol`. It
    also stops, as converged, once the objective has improved by less than
    `ftol` (relative) over `stall_window` iterations.
    """

    max_iters: int = 20000
    tol: float = 1e-8
    gap_tol: float = 1e-9
    step_rule: str = 'accelerated'
    armijo_c1: float = 1e-4
    ftol: float = 1e-14
    stall_window: int = 200
    trace_csv: Optional[str] = None

    def __post_init__(self):
        if self.step_rule not in STEP_RULES:
            raise InvalidArgument('invalid option: step_rule=%r'
                                  % (self.step_rule,))
        if self.max_iters < 1:
            raise InvalidArgument('invalid option: max_iters=%r'
                                  % (self.max_iters,))
        for name in ('tol', 'gap_tol'):
            if not getattr(self, name) > 0:
                raise InvalidArgument('invalid option: %s=%r'
                                      % (name, getattr(self, name)))

    @classmethod
    def from_dict(cls, options):
        if options is None:
            return cls()
        if isinstance(options, cls):
            return options
        known = set(f.name for f in fields(cls))
        unknown = set(options) - known
        if unknown:
            raise InvalidArgument('unknown solver options: %s'
                                  % ', '.join(sorted(unknown)))
        return cls(**options)


@dataclass(frozen=True, eq=False)
class SaaSolution:
    """
    Result of an SAA solve. In the reduced program `tau` holds the optimizer;
    in the general one `alpha`, `mu` and the product coordinates `xi`.
    `status` is ``'tolerance'``, ``'stalled'`` or ``'max_iters'``; only the
    last is unconverged. `duality_gap` bounds ``log_theta_hat`` minus the
    exact minimum of the program.
    """

    kind: str
    log_value_stabilized: float
    log_theta_hat: float
    shift: float
    scale: float
    iterations: int
    final_gradient_mapping_norm: float
    converged: bool
    status: str
    duality_gap: float = math.inf
    restarts: int = 0
    tau: Optional[np.ndarray] = None
    alpha: Optional[float] = None
    mu: Optional[np.ndarray] = None
    xi: Optional[np.ndarray] = None
    feasible_set: object = None
    trace: list = field(default_factory=list, repr=False)

    @property
    def theta_hat(self):
        return math.exp(self.log_theta_hat)

    @property
    def coefficients(self):
        """The optimizer in the coordinates the solver iterated on."""
        return self.tau if self.tau is not None else self.xi

    def dump_trace(self, path):
        """Write the objective trace as CSV (``iteration,objective,step``)."""
        with open(path, 'w', newline='') as fobj:
            writer = csv.writer(fobj)
            writer.writerow(['iteration', 'objective', 'step'])
            for row in self.trace:
                writer.writerow([int(row[0]), repr(float(row[1])),
                                 repr(float(row[2]))])

    def to_dict(self):
        res = {
            'kind': self.kind,
            'log_value_stabilized': self.log_value_stabilized,
            'log_theta_hat': self.log_theta_hat,
            'iterations': self.iterations,
            'final_gradient_mapping_norm': self.final_gradient_mapping_norm,
            'duality_gap': self.duality_gap,
            'restarts': self.restarts,
            'converged': self.converged,
            'status': self.status,
        }
        if self.alpha is not None:
            res['alpha'] = self.alpha
        return res


class _Progress(object):
    """
    Iterate bookkeeping shared by the step rules: stationarity measures at
    the current iterate, the objective trace and the stall test.
    """

    def __init__(self, feasible_set, options, norm_scale, value):
        self.feasible_set = feasible_set
        self.options = options
        self.norm_scale = norm_scale
        self.trace = [(0, float(value), 0.0)]
        self.gm_norm = math.inf
        self.gap = math.inf

    def stationary(self, x, grad, step):
        """Update the stationarity measures; True once either is small."""
        fset = self.feasible_set
        self.gm_norm = float(np.linalg.norm(x - fset.project(x - step * grad))
                             / step / self.norm_scale)
        self.gap = max(float(np.dot(grad, x - fset.linear_minimizer(grad))),
                       0.0)
        return self.gm_norm <= self.options.tol or \
            self.gap <= self.options.gap_tol

    def accept(self, it, value, step):
        """Record an accepted iterate; True if the objective has stalled."""
        self.trace.append((it, float(value), float(step)))
        w = self.options.stall_window
        return len(self.trace) > w and self.trace[-w - 1][1] - value <= \
            self.options.ftol * (1.0 + abs(value))


def _backtrack(fun, project, point, value, grad, step, accept):
    """
    Halve `step` from its given value until ``accept(candidate, value,
    direction, step)`` holds. Returns ``(candidate, value, gradient, step)``
    or None if no step is accepted.
    """
    for _ in range(_MAX_BACKTRACKS):
        cand = project(point - step * grad)
        diff = cand - point
        if not diff.any():
            return None
        cand_value, cand_grad = fun(cand)
        if accept(cand_value, value, float(np.dot(grad, diff)),
                  float(np.dot(diff, diff)), step):
            return cand, cand_value, cand_grad, step
        step *= 0.5
    return None


def _projected_gradient(fun, feasible_set, x0, initial_step, options,
                        norm_scale=1.0):
    """
    Minimize `fun` over `feasible_set` with the plain step rules. Returns
    ``(x, value, iterations, progress, restarts, status)``.
    """
    project = feasible_set.project
    x = project(x0)
    value, grad = fun(x)
    progress = _Progress(feasible_set, options, norm_scale, value)
    step = initial_step
    status = 'max_iters'
    prev = None
    c1 = options.armijo_c1

    def armijo(cand_value, value, decrease, sq, t):
        return decrease < 0 and cand_value <= value + c1 * decrease

    it = 0
    for it in range(1, options.max_iters + 1):
        if progress.stationary(x, grad, step):
            status = 'tolerance'
            it -= 1
            break
        if options.step_rule == 'spectral' and prev is not None:
            s, y = x - prev[0], grad - prev[1]
            sy = float(np.dot(s, y))
            trial = float(np.dot(s, s)) / sy if sy > 0 else 2.0 * step
            trial = min(max(trial, initial_step * 1e-10), initial_step * 1e10)
        else:
            trial = 2.0 * step if it > 1 else step
        found = _backtrack(fun, project, x, value, grad, trial, armijo)
        if found is None:
            status = 'stalled'
            break
        prev = (x, grad)
        x, value, grad, step = found
        if progress.accept(it, value, step):
            status = 'stalled'
            break
    if status != 'tolerance':
        progress.stationary(x, grad, step)
    return x, value, it, progress, 0, status


def _accelerated_gradient(fun, feasible_set, x0, initial_step, options,
                          norm_scale=1.0):
    """
    Accelerated projected gradient. Each step is a projected gradient step
    from the extrapolated point, with the step length backtracked until the
    quadratic upper bound holds there. A step that raises the objective
    above the current iterate is discarded and the extrapolation restarted,
    so the accepted objective values never increase.
    """
    project = feasible_set.project
    x = project(x0)
    value, grad = fun(x)
    progress = _Progress(feasible_set, options, norm_scale, value)
    y, y_value, y_grad = x, value, grad
    momentum, step = 1.0, initial_step
    status = 'max_iters'
    restarts = 0

    def upper_bound(cand_value, value, decrease, sq, t):
        slack = _ROUNDING * (1.0 + abs(value))
        return cand_value <= value + decrease + sq / (2.0 * t) + slack

    it = 0
    for it in range(1, options.max_iters + 1):
        if progress.stationary(x, grad, step):
            status = 'tolerance'
            it -= 1
            break
        found = _backtrack(fun, project, y, y_value, y_grad,
                           _STEP_GROWTH * step, upper_bound)
        if found is not None:
            cand, cand_value, cand_grad, step = found
        if found is None or cand_value > value:
            if y is x:
                status = 'stalled'
                break
            restarts += 1
            momentum = 1.0
            y, y_value, y_grad = x, value, grad
            continue
        nxt = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * momentum * momentum))
        beta = (momentum - 1.0) / nxt
        momentum = nxt
        prev, x, value, grad = x, cand, cand_value, cand_grad
        if beta > 0:
            y = x + beta * (x - prev)
            y_value, y_grad = fun(y)
        else:
            y, y_value, y_grad = x, value, grad
        if progress.accept(it, value, step):
            status = 'stalled'
            break
    if status != 'tolerance':
        progress.stationary(x, grad, step)
    return x, value, it, progress, restarts, status


def _minimize(fun, feasible_set, initial_step, options, norm_scale):
    x0 = np.zeros(feasible_set.n)
    if options.step_rule == 'accelerated':
        return _accelerated_gradient(fun, feasible_set, x0, initial_step,
                                     options, norm_scale)
    return _projected_gradient(fun, feasible_set, x0, initial_step, options,
                               norm_scale)


def _finish(solution, options):
    if not solution.converged:
        log.warning('%s solver stopped after %d iterations without '
                    'converging (gradient mapping norm %.3g, gap %.3g)',
                    solution.kind, solution.iterations,
                    solution.final_gradient_mapping_norm,
                    solution.duality_gap)
    else:
        log.debug('%s solver: %s after %d iterations (%d restarts), '
                  'log theta = %.10g, gap %.3g', solution.kind,
                  solution.status, solution.iterations, solution.restarts,
                  solution.log_theta_hat, solution.duality_gap)
    if options.trace_csv:
        solution.dump_trace(options.trace_csv)
    return solution


def solve_reduced(dictionary_values, scale, shift, options=None,
                  feasible_set=None, weights=None):
    """
    Solve the reduced program from ``tau = 0``. The initial step is
    ``1 / scale**2``; the gradient mapping is reported divided by `scale`,
    i.e. in the units of the weighted dictionary mean.
    `feasible_set` defaults to the verbatim slab set; pass a strict
    :class:`ReducedFeasibleSet` to cap the exponent.
    """
    options = SolverOptions.from_dict(options)
    values, weights = _check_values(dictionary_values, weights)
    if not scale >= 0:
        raise InvalidArgument('scale must be nonnegative')
    n = values.shape[1]
    if feasible_set is None:
        feasible_set = ReducedFeasibleSet(n)
    elif feasible_set.n != n:
        raise InvalidArgument('feasible set dimension %d does not match the '
                              'dictionary (%d)' % (feasible_set.n, n))

    def fun(tau):
        return _objective(tau, values, scale, shift, weights)

    norm = scale if scale > 0 else 1.0
    tau, value, iters, progress, restarts, status = _minimize(
        fun, feasible_set, 1.0 / norm ** 2, options, norm)
    solution = SaaSolution('reduced', float(value), float(value + shift),
                           float(shift), float(scale), iters,
                           progress.gm_norm, status != 'max_iters', status,
                           duality_gap=progress.gap, restarts=restarts,
                           tau=tau, feasible_set=feasible_set,
                           trace=progress.trace)
    return _finish(solution, options)


def solve_general(dictionary_values_signed, gamma, kappa, sup_norm,
                  options=None, weights=None):
    """
    Solve the general program over ``alpha`` in ``[0, gamma * kappa * |c|]``
    and ``mu`` in the simplex. The signed dictionary must hold every column
    together with its negation (see :func:`eotsieve.sieve.signed_values`).

    The iteration runs on ``xi = alpha * mu``, where the exponent
    ``<xi, v>`` is linear. The projection clips ``xi`` at zero and, if the
    total exceeds the cap, projects onto the simplex of radius
    ``alpha_max``. The shift is ``alpha_max``, which bounds every exponent.
    """
    options = SolverOptions.from_dict(options)
    values, weights = _check_values(dictionary_values_signed, weights)
    if not (gamma > 0 and kappa > 0 and sup_norm >= 0):
        raise InvalidArgument('gamma and kappa must be positive and sup_norm '
                              'nonnegative')
    alpha_max = float(gamma * kappa * sup_norm)
    feasible_set = GeneralFeasibleSet(values.shape[1], alpha_max)

    def fun(xi):
        return _objective(xi, values, 1.0, alpha_max, weights)

    xi, value, iters, progress, restarts, status = _minimize(
        fun, feasible_set, 1.0, options, 1.0)
    alpha, mu = feasible_set.split(xi)
    solution = SaaSolution('general', float(value), float(value + alpha_max),
                           alpha_max, 1.0, iters, progress.gm_norm,
                           status != 'max_iters', status,
                           duality_gap=progress.gap, restarts=restarts,
                           alpha=alpha, mu=mu, xi=xi,
                           feasible_set=feasible_set, trace=progress.trace)
    return _finish(solution, options)
