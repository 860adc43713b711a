"""
Marginal distributions and cost functions.

Every downstream computation (the moment dictionary, the reference measure,
the baselines) evaluates distribution functions and draws samples through
the classes in this module. Marginals live on compact boxes; points are
numpy arrays whose last axis is the ambient dimension. A batch of ``N``
points of a ``d``-dimensional marginal is an ``(N, d)`` array.

    >>> from eotsieve.measures import UniformMarginal, cdf
    >>> cdf(UniformMarginal(0.0, 2.0), 2.0)
    1.0

Costs are vectorized callables over broadcastable ``(..., d)`` arrays. The
built-in costs are the quadratic cost ``0.5 * |x - y|^2``, the absolute cost
``|x - y|`` and constant costs.
"""

import logging

import numpy as np

from eotsieve.errors import InvalidArgument


__all__ = ['Marginal', 'UniformMarginal', 'DiscreteMarginal',
           'EmpiricalMarginal', 'UserMarginal', 'ProductMarginal',
           'CostFunction', 'quadratic_cost', 'absolute_cost', 'constant_cost',
           'cdf', 'sample', 'estimate_sup_and_inf', 'marginal_from_spec',
           'cost_from_spec', 'DEFAULT_BOUNDS_GRID']

log = logging.getLogger(__name__)

# Grid resolution per axis when cost bounds are not given analytically.
DEFAULT_BOUNDS_GRID = 256


def _readonly(values):
    values = np.array(values, dtype=float)
    values.setflags(write=False)
    return values


def _check_count(count):
    if int(count) != count or count < 0:
        raise InvalidArgument('invalid sample count: %r' % (count,))
    return int(count)


class Marginal(object):
    """
    A compactly supported probability distribution on the box
    ``[support_lo, support_hi]``. Subclasses implement `_cdf` and `_sample`;
    one dimensional kinds also implement `cdf_values`, `quantile` and
    `discretize`, which the partition builder and the oracle need.
    """

    kind = None

    def __init__(self, support_lo, support_hi):
        lo = np.atleast_1d(np.asarray(support_lo, dtype=float))
        hi = np.atleast_1d(np.asarray(support_hi, dtype=float))
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise InvalidArgument('support bounds must be vectors of equal '
                                  'length')
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InvalidArgument('support must be compact')
        if np.any(hi < lo):
            raise InvalidArgument('support_hi must dominate support_lo')
        self.support_lo = _readonly(lo)
        self.support_hi = _readonly(hi)
        self.dimension = lo.shape[0]

    def __repr__(self):
        return '<%s [%s, %s]>' % (self.__class__.__name__,
                                  ','.join('%g' % v for v in self.support_lo),
                                  ','.join('%g' % v for v in self.support_hi))

    def _point(self, point):
        p = np.atleast_1d(np.asarray(point, dtype=float))
        if p.ndim != 1 or p.shape[0] != self.dimension:
            raise InvalidArgument('point has %d components, marginal has '
                                  'dimension %d' % (p.size, self.dimension))
        return p

    def cdf(self, point):
        """Return F(point) for a single point."""
        return float(self._cdf(self._point(point)))

    def sample(self, count, rng):
        """
        Draw `count` i.i.d. points as a ``(count, dimension)`` array from the
        numpy Generator `rng`.
        """
        count = _check_count(count)
        res = np.asarray(self._sample(count, rng), dtype=float)
        return res.reshape(count, self.dimension)

    def atom_mass(self, point):
        """Probability of the single point `point`."""
        return 0.0

    def cdf_values(self, values):
        """Vectorized CDF of a one dimensional marginal."""
        self._require_1d('cdf_values')
        values = np.asarray(values, dtype=float)
        return np.vectorize(lambda v: self._cdf(np.array([v])),
                            otypes=[float])(values)

    def quantile(self, levels):
        """
        Generalized inverse ``inf{x : F(x) >= u}`` of a one dimensional
        marginal, found by bisection on the CDF.
        """
        self._require_1d('quantile')
        levels = np.clip(np.asarray(levels, dtype=float), 0.0, 1.0)
        lo = np.full(levels.shape, self.support_lo[0])
        hi = np.full(levels.shape, self.support_hi[0])
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            above = self.cdf_values(mid) >= levels
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        return np.where(levels <= 0.0, self.support_lo[0], hi)

    def discretize(self, grid):
        """
        Return ``(atoms, weights)`` of an equal-mass discretization with
        `grid` cells: atoms at the coordinate midpoints of the quantile cells.
        """
        self._require_1d('discretize')
        edges = self.quantile(np.linspace(0.0, 1.0, grid + 1))
        atoms = 0.5 * (edges[:-1] + edges[1:])
        return atoms, np.full(grid, 1.0 / grid)

    def to_spec(self):
        """JSON compatible description, see `marginal_from_spec`."""
        raise NotImplementedError

    def _require_1d(self, what):
        if self.dimension != 1:
            raise InvalidArgument('%s is only available for one dimensional '
                                  'marginals' % what)

    def _cdf(self, point):
        raise NotImplementedError  # pragma: no cover

    def _sample(self, count, rng):
        raise NotImplementedError  # pragma: no cover


class UniformMarginal(Marginal):
    """Uniform distribution on ``[lo, hi]``; a point mass when ``lo == hi``."""

    kind = 'uniform'

    def __init__(self, lo, hi):
        Marginal.__init__(self, lo, hi)
        self._require_1d('uniform marginal')
        self.lo = float(lo)
        self.hi = float(hi)

    def _cdf(self, point):
        return self.cdf_values(point[0])

    def cdf_values(self, values):
        values = np.asarray(values, dtype=float)
        if self.hi == self.lo:
            return (values >= self.lo).astype(float)
        return np.clip((values - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def quantile(self, levels):
        levels = np.clip(np.asarray(levels, dtype=float), 0.0, 1.0)
        return self.lo + levels * (self.hi - self.lo)

    def atom_mass(self, point):
        if self.hi == self.lo and float(np.ravel(point)[0]) == self.lo:
            return 1.0
        return 0.0

    def _sample(self, count, rng):
        return rng.uniform(self.lo, self.hi, size=(count, 1))

    def to_spec(self):
        return {'kind': self.kind, 'lo': self.lo, 'hi': self.hi}


class DiscreteMarginal(Marginal):
    """
    Finitely supported distribution on `atoms` with probabilities `weights`
    (uniform if omitted). Repeated atoms are merged.
    """

    kind = 'discrete'

    def __init__(self, atoms, weights=None):
        atoms = np.ravel(np.asarray(atoms, dtype=float))
        if atoms.size == 0:
            raise InvalidArgument('a discrete marginal needs atoms')
        if weights is None:
            weights = np.full(atoms.size, 1.0 / atoms.size)
        weights = np.ravel(np.asarray(weights, dtype=float))
        if weights.shape != atoms.shape:
            raise InvalidArgument('atoms and weights differ in length')
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise InvalidArgument('weights must be a probability vector')
        uniq, inverse = np.unique(atoms, return_inverse=True)
        merged = np.bincount(inverse, weights=weights)
        keep = merged > 0
        Marginal.__init__(self, uniq[keep].min(), uniq[keep].max())
        self.atoms = _readonly(uniq[keep])
        self.weights = _readonly(merged[keep] / merged[keep].sum())
        cum = np.cumsum(self.weights)
        cum[-1] = 1.0
        self._cum = _readonly(cum)

    def _cdf(self, point):
        return self.cdf_values(point[0])

    def cdf_values(self, values):
        values = np.asarray(values, dtype=float)
        idx = np.searchsorted(self.atoms, values, side='right')
        return np.where(idx > 0, self._cum[np.maximum(idx - 1, 0)], 0.0)

    def quantile(self, levels):
        levels = np.clip(np.asarray(levels, dtype=float), 0.0, 1.0)
        idx = np.searchsorted(self._cum, levels, side='left')
        return self.atoms[np.minimum(idx, self.atoms.size - 1)]

    def atom_mass(self, point):
        hit = self.atoms == float(np.ravel(point)[0])
        return float(self.weights[hit].sum())

    def discretize(self, grid):
        return np.array(self.atoms), np.array(self.weights)

    def _sample(self, count, rng):
        return rng.choice(self.atoms, size=(count, 1), p=self.weights)

    def to_spec(self):
        return {'kind': self.kind, 'atoms': self.atoms.tolist(),
                'weights': self.weights.tolist()}


class EmpiricalMarginal(DiscreteMarginal):
    """Empirical distribution of stored one dimensional observations."""

    kind = 'empirical'

    def __init__(self, samples):
        samples = np.ravel(np.asarray(samples, dtype=float))
        DiscreteMarginal.__init__(self, samples)
        self.samples = _readonly(samples)

    def to_spec(self):
        return {'kind': self.kind, 'samples': self.samples.tolist()}


class UserMarginal(Marginal):
    """
    A marginal defined by user code.

    :param cdf: callable mapping a point (vector) to F(point)
    :param sampler: callable ``sampler(count, rng)`` returning ``count``
        points
    :param quantile: optional vectorized inverse CDF (one dimensional only);
        bisection on `cdf` is used when omitted
    :param atom_mass: optional callable returning the mass of a single point
    """

    kind = 'user'

    def __init__(self, cdf, sampler, support_lo, support_hi, quantile=None,
                 atom_mass=None, name='user'):
        Marginal.__init__(self, support_lo, support_hi)
        self._user_cdf = cdf
        self._sampler = sampler
        self._user_quantile = quantile
        self._user_atom_mass = atom_mass
        self.name = name

    def _cdf(self, point):
        return float(self._user_cdf(point))

    def _sample(self, count, rng):
        res = np.asarray(self._sampler(count, rng), dtype=float)
        return np.clip(res.reshape(count, self.dimension), self.support_lo,
                       self.support_hi)

    def quantile(self, levels):
        if self._user_quantile is not None:
            return np.asarray(self._user_quantile(levels), dtype=float)
        return Marginal.quantile(self, levels)

    def atom_mass(self, point):
        if self._user_atom_mass is None:
            return 0.0
        return float(self._user_atom_mass(point))

    def to_spec(self):
        return {'kind': self.kind, 'name': self.name,
                'lo': self.support_lo.tolist(), 'hi': self.support_hi.tolist()}


class ProductMarginal(Marginal):
    """Product of independent marginals; the dimensions add up."""

    kind = 'product'

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise InvalidArgument('a product needs at least one component')
        Marginal.__init__(self,
                          np.concatenate([c.support_lo for c in components]),
                          np.concatenate([c.support_hi for c in components]))
        self.components = components

    def _slices(self, point):
        start = 0
        for comp in self.components:
            yield comp, point[..., start:start + comp.dimension]
            start += comp.dimension

    def _cdf(self, point):
        res = 1.0
        for comp, part in self._slices(point):
            res *= comp.cdf(part)
        return res

    def atom_mass(self, point):
        res = 1.0
        for comp, part in self._slices(np.ravel(point)):
            res *= comp.atom_mass(part)
        return res

    def cdf_values(self, values):
        if len(self.components) == 1:
            return self.components[0].cdf_values(values)
        return Marginal.cdf_values(self, values)

    def quantile(self, levels):
        if len(self.components) == 1:
            return self.components[0].quantile(levels)
        return Marginal.quantile(self, levels)

    def discretize(self, grid):
        if len(self.components) == 1:
            return self.components[0].discretize(grid)
        return Marginal.discretize(self, grid)

    def _sample(self, count, rng):
        return np.hstack([c.sample(count, rng) for c in self.components])

    def to_spec(self):
        return {'kind': self.kind,
                'components': [c.to_spec() for c in self.components]}


def cdf(marginal, point):
    """Evaluate the distribution function of `marginal` at `point`."""
    return marginal.cdf(point)


def sample(marginal, count, rng):
    """Draw `count` i.i.d. points from `marginal` using generator `rng`."""
    return marginal.sample(count, rng)


class CostFunction(object):
    """
    A continuous nonnegative cost ``c(x, y)``.

    The evaluator receives broadcastable arrays of shape ``(..., dx)`` and
    ``(..., dy)`` and returns the costs with the broadcast leading shape.
    `sup_norm` and `inf_value` are the supremum and infimum of the cost over
    the support box; they are None until known, see `with_bounds`.
    """

    def __init__(self, evaluator, sup_norm=None, inf_value=None, name='user',
                 bounds_estimated=False, params=None):
        if sup_norm is not None and inf_value is not None and \
                not 0 <= inf_value <= sup_norm:
            raise InvalidArgument('cost bounds must satisfy '
                                  '0 <= inf_value <= sup_norm')
        self.evaluator = evaluator
        self.sup_norm = None if sup_norm is None else float(sup_norm)
        self.inf_value = None if inf_value is None else float(inf_value)
        self.name = name
        self.bounds_estimated = bounds_estimated
        self.params = dict(params or {})

    def __repr__(self):
        return '<CostFunction %s sup=%s inf=%s>' % (self.name, self.sup_norm,
                                                    self.inf_value)

    @property
    def has_bounds(self):
        return self.sup_norm is not None and self.inf_value is not None

    def __call__(self, x, y):
        """
        Evaluate on matched points. One dimensional arrays are read as
        batches of one dimensional points.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim < 2:
            x = x.reshape(-1, 1)
        if y.ndim < 2:
            y = y.reshape(-1, 1)
        return np.asarray(self.evaluator(x, y), dtype=float)

    def pairwise(self, x_atoms, y_atoms):
        """Cost matrix between two batches of points."""
        x = np.asarray(x_atoms, dtype=float)
        y = np.asarray(y_atoms, dtype=float)
        if x.ndim < 2:
            x = x.reshape(-1, 1)
        if y.ndim < 2:
            y = y.reshape(-1, 1)
        return np.asarray(self.evaluator(x[:, None, :], y[None, :, :]),
                          dtype=float)

    def with_bounds(self, x_marg, y_marg, grid_points_per_axis=None):
        """
        Return this cost with `sup_norm` and `inf_value` filled in. Missing
        bounds are estimated on a tensor grid over the support box.
        """
        if self.has_bounds:
            return self
        grid = grid_points_per_axis or DEFAULT_BOUNDS_GRID
        sup_est, inf_est = estimate_sup_and_inf(self, x_marg, y_marg, grid)
        log.info('estimated bounds of cost %s on a %d point grid: '
                 'sup=%.6g inf=%.6g', self.name, grid, sup_est, inf_est)
        return CostFunction(
            self.evaluator,
            sup_norm=self.sup_norm if self.sup_norm is not None else sup_est,
            inf_value=self.inf_value if self.inf_value is not None
            else inf_est,
            name=self.name, bounds_estimated=True, params=self.params)

    def check_bounds(self, x_marg, y_marg, rng, probes=1000, slack=1e-12):
        """
        Probe the cost at random support points. Negative values and
        violations of analytic bounds raise `InvalidArgument`; violations of
        grid-estimated bounds are only logged.
        """
        x = x_marg.sample(probes, rng)
        y = y_marg.sample(probes, rng)
        values = self(x, y)
        if np.any(values < -slack) or not np.all(np.isfinite(values)):
            raise InvalidArgument('cost %s is negative or not finite on the '
                                  'support' % self.name)
        if not self.has_bounds:
            return
        outside = (values > self.sup_norm + slack) | \
            (values < self.inf_value - slack)
        if np.any(outside):
            msg = 'cost %s leaves [%g, %g] at %d of %d probes' % (
                self.name, self.inf_value, self.sup_norm,
                int(outside.sum()), probes)
            if self.bounds_estimated:
                log.warning(msg)
            else:
                raise InvalidArgument(msg)

    def to_spec(self):
        res = {'kind': self.name}
        res.update(self.params)
        return res


def quadratic_cost(sup_norm=None, inf_value=None):
    """The cost ``0.5 * |x - y|^2``."""
    return CostFunction(lambda x, y: 0.5 * np.sum((x - y) ** 2, axis=-1),
                        sup_norm=sup_norm, inf_value=inf_value,
                        name='quadratic')


def absolute_cost(sup_norm=None, inf_value=None):
    """The cost ``|x - y|`` (l1 norm for vectors)."""
    return CostFunction(lambda x, y: np.sum(np.abs(x - y), axis=-1),
                        sup_norm=sup_norm, inf_value=inf_value,
                        name='absolute')


def constant_cost(value=0.0):
    """The cost ``c == value``; its bounds are known exactly."""
    value = float(value)
    if value < 0:
        raise InvalidArgument('costs must be nonnegative')

    def evaluate(x, y):
        shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1])
        return np.full(shape, value)

    return CostFunction(evaluate, sup_norm=value, inf_value=value,
                        name='constant', params={'value': value})


def estimate_sup_and_inf(cost, x_marg, y_marg,
                         grid_points_per_axis=DEFAULT_BOUNDS_GRID):
    """
    Estimate ``(sup c, inf c)`` by the maximum and minimum over a tensor grid
    of the support box ``X x Y``. The results are estimates: a lower bound on
    the supremum and an upper bound on the infimum.
    """
    if grid_points_per_axis < 2:
        raise InvalidArgument('grid_points_per_axis must be at least 2')
    axes = [np.linspace(lo, hi, grid_points_per_axis)
            for lo, hi in zip(np.concatenate([x_marg.support_lo,
                                              y_marg.support_lo]),
                              np.concatenate([x_marg.support_hi,
                                              y_marg.support_hi]))]
    mesh = np.meshgrid(*axes, indexing='ij')
    points = np.stack(mesh, axis=-1).reshape(-1, len(axes))
    values = cost(points[:, :x_marg.dimension], points[:, x_marg.dimension:])
    return float(values.max()), float(values.min())


def marginal_from_spec(spec):
    """
    Build a marginal from a configuration dictionary. Known kinds::

        {"kind": "uniform", "lo": 0, "hi": 1}
        {"kind": "discrete", "atoms": [...], "weights": [...]}
        {"kind": "point", "at": 0.3}
        {"kind": "empirical", "samples": [...]}
        {"kind": "product", "components": [<spec>, ...]}
    """
    try:
        kind = spec['kind']
        if kind == 'uniform':
            return UniformMarginal(spec['lo'], spec['hi'])
        if kind == 'discrete':
            return DiscreteMarginal(spec['atoms'], spec.get('weights'))
        if kind == 'point':
            return DiscreteMarginal([spec['at']])
        if kind == 'empirical':
            return EmpiricalMarginal(spec['samples'])
        if kind == 'product':
            return ProductMarginal([marginal_from_spec(c)
                                    for c in spec['components']])
    except (KeyError, TypeError) as exc:
        raise InvalidArgument('bad marginal specification %r: %s'
                              % (spec, exc))
    raise InvalidArgument('unknown marginal kind %r (user marginals are '
                          'constructed in code)' % (spec.get('kind'),))


def cost_from_spec(spec):
    """
    Build a cost from a configuration dictionary: ``{"kind": "quadratic"}``,
    ``{"kind": "absolute"}`` or ``{"kind": "constant", "value": 0}``.
    Optional ``sup_norm`` and ``inf_value`` entries give analytic bounds.
    """
    kind = spec.get('kind')
    bounds = {'sup_norm': spec.get('sup_norm'),
              'inf_value': spec.get('inf_value')}
    if kind == 'quadratic':
        return quadratic_cost(**bounds)
    if kind == 'absolute':
        return absolute_cost(**bounds)
    if kind == 'constant':
        return constant_cost(spec.get('value', 0.0))
    raise InvalidArgument('unknown cost kind %r (user costs are constructed '
                          'in code)' % (kind,))
