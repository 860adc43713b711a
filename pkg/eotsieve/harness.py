"""
Command line harness: experiment configuration, seeded replication
campaigns and result persistence.

Usage::

    eotsieve estimate --config experiment.json
    eotsieve replicate --config experiment.json --threads 8 --out results
    eotsieve oracle --config experiment.json
    eotsieve partition-info --config experiment.json

The configuration is a single JSON document; every omitted entry takes its
default and the materialized configuration is written to ``manifest.json``
so runs are self-describing. Results are printed as JSON on stdout; logging
goes to stderr. Errors are reported as a JSON object and mapped to the exit
codes of :mod:`eotsieve.errors`.
"""

import argparse
import copy
import hashlib
import json
import logging
import math
import os
import sys
import time

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np
import scipy

from eotsieve import metadata
from eotsieve.baseline import (OracleCache, empirical_sinkhorn_value,
                               exact_ot_1d, solve_oracle)
from eotsieve.errors import (AcceptanceBudgetExceeded, EotError, InvalidConfig,
                             NoisyNormalizer, exit_code_for, EXIT_OK)
from eotsieve.estimator import estimate_eot, symmetric_ci
from eotsieve.measures import cost_from_spec, marginal_from_spec
from eotsieve.reference import ReferenceMeasure, sample_reference
from eotsieve.report import Stats, write_results_csv
from eotsieve.saa import ReducedFeasibleSet, solve_general, solve_reduced
from eotsieve.sieve import (GENERAL, REDUCED, build_dictionary,
                            build_partition, entropy_condition_ok,
                            evaluate_batch, kappa, optimal_sample_size,
                            signed_values)


__all__ = ['ExperimentConfig', 'ReplicationRecord', 'Campaign',
           'derive_seed', 'run_replication', 'run_estimate',
           'run_replicate', 'run_oracle', 'run_partition_info', 'main']

log = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1

_SECTION_DEFAULTS = {
    'normalizer': {'mc_count': 10 ** 6, 'max_rel_stderr': 0.05,
                   'allow_noisy': False},
    'sampler': {'method': 'rejection', 'max_proposals': 10 ** 7},
    'partition': {'check_reference_marginals': False,
                  'reference_sample_count': 10 ** 4, 'max_cells': 10 ** 6},
    'solver': {'max_iters': 20000, 'tol': 1e-8, 'gap_tol': 1e-9,
               'step_rule': 'accelerated', 'trace_csv': None},
    'sinkhorn': {'tol': 1e-9, 'max_iters': 10 ** 5, 'epsilon_scaling': True},
    'oracle': {'grid_per_axis': 512, 'cache': None, 'richardson': True},
    'ci': {'level': 0.95, 'bootstrap_draws': 1000, 'index_grid_size': 256},
}


def _section(name, given):
    defaults = _SECTION_DEFAULTS[name]
    given = dict(given or {})
    unknown = set(given) - set(defaults)
    if unknown:
        raise InvalidConfig('unknown %s settings: %s'
                            % (name, ', '.join(sorted(unknown))))
    res = copy.deepcopy(defaults)
    res.update(given)
    return res


def _default(value):
    return field(default_factory=lambda: copy.deepcopy(value))


@dataclass
class ExperimentConfig:
    """
    An experiment. The defaults reproduce the uniform/quadratic experiment
    with ``gamma = 100`` and ``epsilon = 0.1``. Sub-sections are plain
    dictionaries completed with their defaults; `ci` stays None unless
    intervals are requested.
    """

    x_marginal: dict = _default({'kind': 'uniform', 'lo': 0.0, 'hi': 1.0})
    y_marginal: dict = _default({'kind': 'uniform', 'lo': 0.0, 'hi': 2.0})
    cost: dict = _default({'kind': 'quadratic'})
    gamma: float = 100.0
    epsilon: float = 0.1
    mode: str = 'reduced'
    strict_slab: bool = False
    sample_size: object = 'auto'
    replications: int = 1
    master_seed: int = 0
    estimators: list = _default(['sieve', 'sinkhorn'])
    ci: Optional[dict] = None
    output_dir: str = 'results'
    target_value: Optional[float] = None
    normalizer: dict = _default(_SECTION_DEFAULTS['normalizer'])
    sampler: dict = _default(_SECTION_DEFAULTS['sampler'])
    partition: dict = _default(_SECTION_DEFAULTS['partition'])
    solver: dict = _default(_SECTION_DEFAULTS['solver'])
    sinkhorn: dict = _default(_SECTION_DEFAULTS['sinkhorn'])
    oracle: dict = _default(_SECTION_DEFAULTS['oracle'])
    record_timings: bool = False

    def __post_init__(self):
        for name in ('normalizer', 'sampler', 'partition', 'solver',
                     'sinkhorn', 'oracle'):
            setattr(self, name, _section(name, getattr(self, name)))
        if self.ci is not None:
            self.ci = _section('ci', self.ci)
        self.validate()

    def validate(self):
        if not (isinstance(self.replications, int) and
                self.replications >= 1):
            raise InvalidConfig('invalid option: replications=%r'
                                % (self.replications,))
        if not (isinstance(self.epsilon, (int, float)) and
                0 < self.epsilon < 1):
            raise InvalidConfig('invalid option: epsilon=%r (must lie in '
                                '(0, 1))' % (self.epsilon,))
        if not (isinstance(self.gamma, (int, float)) and self.gamma > 0 and
                math.isfinite(self.gamma)):
            raise InvalidConfig('invalid option: gamma=%r' % (self.gamma,))
        if self.mode not in ('reduced', 'general'):
            raise InvalidConfig('invalid option: mode=%r' % (self.mode,))
        if self.sample_size != 'auto' and not (
                isinstance(self.sample_size, int) and self.sample_size >= 1):
            raise InvalidConfig('invalid option: sample_size=%r'
                                % (self.sample_size,))
        if not (isinstance(self.master_seed, int) and
                0 <= self.master_seed <= MAX_SEED):
            raise InvalidConfig('invalid option: master_seed=%r'
                                % (self.master_seed,))
        if not self.estimators or \
                set(self.estimators) - set(['sieve', 'sinkhorn']):
            raise InvalidConfig('invalid option: estimators=%r'
                                % (self.estimators,))
        if self.sampler['method'] not in ('rejection', 'importance'):
            raise InvalidConfig('invalid option: sampler.method=%r'
                                % (self.sampler['method'],))

    @classmethod
    def from_dict(cls, data):
        known = set(f.name for f in fields(cls))
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig('unknown configuration keys: %s'
                                % ', '.join(sorted(unknown)))
        return cls(**data)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fobj:
                data = json.load(fobj)
        except (OSError, ValueError) as exc:
            raise InvalidConfig('cannot read configuration %s: %s'
                                % (path, exc))
        if not isinstance(data, dict):
            raise InvalidConfig('the configuration must be a JSON object')
        return cls.from_dict(data)

    def to_dict(self):
        return asdict(self)

    def build_marginals(self):
        return (marginal_from_spec(self.x_marginal),
                marginal_from_spec(self.y_marginal))

    def build_cost(self):
        return cost_from_spec(self.cost)


@dataclass
class ReplicationRecord:
    """One replication of a campaign, i.e. one box-plot point per estimator."""

    replication_index: int
    seed: int
    sieve_value: Optional[float] = None
    sinkhorn_value: Optional[float] = None
    theta_hat: Optional[float] = None
    ci_lo: Optional[float] = None
    ci_hi: Optional[float] = None
    acceptance_rate: Optional[float] = None
    solver_iterations: Optional[int] = None
    wall_time_ms: Optional[float] = None
    sieve_error: Optional[str] = None
    sinkhorn_error: Optional[str] = None

    def to_dict(self):
        return asdict(self)


def derive_seed(master_seed, index, purpose='replication'):
    """
    Derive an independent 64 bit seed from the master seed, a stream index
    and a purpose label, by hashing. Replications never share generator
    state.

    >>> derive_seed(0, 1) == derive_seed(0, 1)
    True
    >>> derive_seed(0, 1) != derive_seed(0, 2)
    True
    """
    digest = hashlib.blake2b(('%s:%d:%d' % (purpose, master_seed, index))
                             .encode('ascii'), digest_size=8).digest()
    return int.from_bytes(digest, 'little')


class Campaign(object):
    """
    The parts of an experiment shared by all replications: marginals, cost,
    reference measure (the normalizer is estimated once), partition and
    dictionary.
    """

    def __init__(self, config):
        self.config = config
        self.x_marg, self.y_marg = config.build_marginals()
        self.cost = config.build_cost().with_bounds(self.x_marg, self.y_marg)
        self.kappa = kappa(self.x_marg, self.y_marg)
        self._ref = None
        self._partition = None
        self._dictionary = None

    @property
    def ref(self):
        if self._ref is None:
            cfg = self.config
            rng = np.random.default_rng(
                derive_seed(cfg.master_seed, 0, 'normalizer'))
            self.cost.check_bounds(self.x_marg, self.y_marg, rng)
            ref = ReferenceMeasure.build(cfg.gamma, self.cost, self.x_marg,
                                         self.y_marg,
                                         cfg.normalizer['mc_count'], rng)
            limit = cfg.normalizer['max_rel_stderr']
            if ref.relative_stderr > limit:
                msg = ('normalizer relative standard error %.3g exceeds %.3g'
                       % (ref.relative_stderr, limit))
                if not cfg.normalizer['allow_noisy']:
                    raise NoisyNormalizer(msg + '; increase normalizer.'
                                          'mc_count or set allow_noisy')
                log.warning(msg + ' (allowed by configuration)')
            self._ref = ref
        return self._ref

    @property
    def partition(self):
        if self._partition is None:
            cfg = self.config
            check = cfg.partition['check_reference_marginals']
            rng = np.random.default_rng(
                derive_seed(cfg.master_seed, 0, 'partition'))
            self._partition = build_partition(
                self.x_marg, self.y_marg, cfg.epsilon,
                ref=self.ref if check else None, rng=rng,
                reference_sample_count=cfg.partition['reference_sample_count'],
                max_cells=cfg.partition['max_cells'])
        return self._partition

    @property
    def dictionary(self):
        if self._dictionary is None:
            kind = GENERAL if self.config.mode == 'general' else REDUCED
            self._dictionary = build_dictionary(
                self.partition, self.x_marg, self.y_marg, self.config.gamma,
                self.cost.sup_norm, kind, self.kappa)
        return self._dictionary

    @property
    def sample_size(self):
        if self.config.sample_size == 'auto':
            return optimal_sample_size(self.config.epsilon,
                                       self.partition.n_total)
        return self.config.sample_size

    def entropy_schedule(self, levels=3):
        """
        The configured level and its refinements ``epsilon / 2^k`` with
        their optimal sample sizes, checked for a decreasing
        ``log(n) / N``.
        """
        rows = []
        for k in range(levels):
            eps = self.config.epsilon / 2 ** k
            if k == 0:
                n, big_n = self.partition.n_total, self.sample_size
            else:
                n = build_partition(self.x_marg, self.y_marg, eps).n_total
                big_n = optimal_sample_size(eps, n)
            rows.append((eps, n, big_n))
        flags = entropy_condition_ok(rows)
        return [{'epsilon': eps, 'n_total': n, 'N': big_n,
                 'log_n_over_N': math.log(n) / big_n, 'ok': ok}
                for (eps, n, big_n), ok in zip(rows, flags)]

    def manifest(self):
        return {
            'program': metadata.project_name,
            'version': metadata.version,
            'numpy': np.__version__,
            'scipy': scipy.__version__,
            'config': self.config.to_dict(),
            'derived': {
                'kappa': self.kappa,
                'sup_norm': self.cost.sup_norm,
                'inf_value': self.cost.inf_value,
                'n_x': self.partition.n_x,
                'n_y': self.partition.n_y,
                'n_total': self.partition.n_total,
                'N': self.sample_size,
                'log_a_gamma': self.ref.log_a_gamma_estimate,
                'a_gamma_stderr': self.ref.a_gamma_stderr,
            },
            'partition': self.partition.to_dict(),
        }


def _sieve_estimate(campaign, rng, index=0, with_ci=True):
    """Sample the reference measure, solve the SAA program and estimate."""
    cfg = campaign.config
    ref, dictionary = campaign.ref, campaign.dictionary
    big_n = campaign.sample_size
    draws = sample_reference(ref, big_n, cfg.sampler['max_proposals'], rng,
                             cfg.sampler['method'])
    values = evaluate_batch(dictionary, draws.x[:, 0], draws.y[:, 0])
    options = dict(cfg.solver)
    if options.get('trace_csv'):
        options['trace_csv'] = options['trace_csv'].format(index=index)
    if cfg.mode == 'general':
        values = signed_values(values)
        solution = solve_general(values, cfg.gamma, campaign.kappa,
                                 campaign.cost.sup_norm, options,
                                 draws.weights)
        scale, shift = 1.0, solution.shift
    else:
        fset = ReducedFeasibleSet(values.shape[1], strict=cfg.strict_slab,
                                  kappa=campaign.kappa)
        scale, shift = dictionary.scale, dictionary.shift
        solution = solve_reduced(values, scale, shift, options, fset,
                                 draws.weights)
    estimate = estimate_eot(solution, ref, cfg.epsilon,
                            campaign.partition.n_total, big_n,
                            campaign.kappa)
    if with_ci and cfg.ci is not None:
        ci = symmetric_ci(solution, values, scale, shift, cfg.ci['level'],
                          cfg.ci['bootstrap_draws'],
                          cfg.ci['index_grid_size'], rng, draws.weights)
        estimate = estimate.with_ci(ci)
    return estimate, draws


def _record_failure(rec, name, exc, index):
    setattr(rec, name + '_error', exc.__class__.__name__)
    if isinstance(exc, AcceptanceBudgetExceeded):
        rec.acceptance_rate = exc.acceptance_rate
    log.warning('replication %d: %s estimator failed: %s', index, name, exc)


def run_replication(campaign, index):
    """
    Run replication `index` of a campaign. Errors of a single replication
    are recorded in the returned record instead of being raised; each
    estimator fails on its own, so a sieve failure keeps the Sinkhorn value
    of the same replication and vice versa.
    """
    cfg = campaign.config
    seed = derive_seed(cfg.master_seed, index)
    sieve_seq, sinkhorn_seq = np.random.SeedSequence(seed).spawn(2)
    rec = ReplicationRecord(index, seed)
    start = time.perf_counter()
    if 'sieve' in cfg.estimators:
        try:
            est, draws = _sieve_estimate(campaign,
                                         np.random.default_rng(sieve_seq),
                                         index)
            rec.sieve_value = est.eot_value
            rec.theta_hat = est.theta_hat
            rec.ci_lo, rec.ci_hi = est.ci_lo, est.ci_hi
            rec.acceptance_rate = draws.acceptance_rate
            rec.solver_iterations = est.solver_iterations
        except EotError as exc:
            _record_failure(rec, 'sieve', exc, index)
    if 'sinkhorn' in cfg.estimators:
        try:
            rng = np.random.default_rng(sinkhorn_seq)
            big_n = campaign.sample_size
            xs = campaign.x_marg.sample(big_n, rng)
            ys = campaign.y_marg.sample(big_n, rng)
            rec.sinkhorn_value = empirical_sinkhorn_value(
                xs, ys, campaign.cost, cfg.gamma, cfg.sinkhorn['tol'],
                cfg.sinkhorn['max_iters'], cfg.sinkhorn['epsilon_scaling'])
        except EotError as exc:
            _record_failure(rec, 'sinkhorn', exc, index)
    if cfg.record_timings:
        rec.wall_time_ms = 1000.0 * (time.perf_counter() - start)
    log.info('replication %d done: sieve=%s sinkhorn=%s', index,
             rec.sieve_value, rec.sinkhorn_value)
    return rec


def run_estimate(config):
    """A single end-to-end estimate; returns the JSON record."""
    campaign = Campaign(config)
    seed = derive_seed(config.master_seed, 0)
    start = time.perf_counter()
    est, draws = _sieve_estimate(campaign, np.random.default_rng(seed))
    res = est.to_dict()
    res['seed'] = seed
    res['kappa'] = campaign.kappa
    res['mode'] = config.mode
    res['acceptance_rate'] = draws.acceptance_rate
    res['normalizer_relative_stderr'] = campaign.ref.relative_stderr
    if config.record_timings:
        res['wall_time_ms'] = 1000.0 * (time.perf_counter() - start)
    return res


def run_replicate(config, threads=None, out_dir=None):
    """
    Run all replications on a pool of `threads` workers and write
    ``results.csv``, ``summary.json`` and ``manifest.json`` into `out_dir`
    (default: the configured output directory). Returns the summary.
    """
    campaign = Campaign(config)
    out_dir = out_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    manifest = campaign.manifest()
    # Shared state is built before the workers start.
    campaign.dictionary
    threads = threads or os.cpu_count() or 1
    start = time.perf_counter()
    indices = range(config.replications)
    if threads == 1:
        records = [run_replication(campaign, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda i: run_replication(campaign, i),
                                    indices))
    records = sorted((r.to_dict() for r in records),
                     key=lambda r: r['replication_index'])

    with open(os.path.join(out_dir, 'results.csv'), 'w', newline='') as fobj:
        write_results_csv(records, fobj, config.record_timings)
    extra = {'epsilon': config.epsilon, 'gamma': config.gamma,
             'n_total': campaign.partition.n_total,
             'N': campaign.sample_size,
             'entropy_condition': campaign.entropy_schedule()}
    if config.record_timings:
        extra['wall_time_s'] = time.perf_counter() - start
    stats = Stats(records, config.target_value, extra=extra,
                  stream=sys.stderr)
    stats.dump_stats(os.path.join(out_dir, 'summary.json'))
    with open(os.path.join(out_dir, 'manifest.json'), 'w') as fobj:
        json.dump(manifest, fobj, indent=2, sort_keys=True)
        fobj.write('\n')
    if log.isEnabledFor(logging.INFO):
        stats.print_summary()
    return stats.summary()


def run_oracle(config):
    """Oracle EOT value and, in one dimension, the exact transport value."""
    x_marg, y_marg = config.build_marginals()
    cost = config.build_cost().with_bounds(x_marg, y_marg)
    opts = config.oracle
    cache = OracleCache(opts['cache']) if opts['cache'] else None
    res = solve_oracle(x_marg, y_marg, cost, config.gamma,
                       opts['grid_per_axis'], tol=1e-10,
                       max_iters=config.sinkhorn['max_iters'],
                       richardson=opts['richardson'], cache=cache)
    out = res.to_dict()
    out['theta'] = math.exp(res.log_theta)
    out['ot_value'] = None
    if cost.name in ('quadratic', 'absolute') and x_marg.dimension == 1 \
            and y_marg.dimension == 1:
        out['ot_value'] = exact_ot_1d(x_marg, y_marg, cost.name)
    return out


def run_partition_info(config):
    """Partition summary for the configured level."""
    campaign = Campaign(config)
    part = campaign.partition
    big_n = campaign.sample_size
    return {'epsilon': config.epsilon, 'n_x': part.n_x, 'n_y': part.n_y,
            'n_total': part.n_total, 'N': big_n, 'kappa': campaign.kappa,
            'log_n_over_N': math.log(part.n_total) / big_n
            if part.n_total > 1 else 0.0,
            'x_breakpoints': part.x_breakpoints.tolist(),
            'y_breakpoints': part.y_breakpoints.tolist()}


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return dict((k, _json_safe(v)) for k, v in obj.items())
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _parser():
    parser = argparse.ArgumentParser(
        prog='eotsieve', description=metadata.description)
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + metadata.version)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH',
                        help='experiment configuration (JSON)')
    common.add_argument('--threads', type=int, metavar='K',
                        help='worker threads (default: hardware threads)')
    common.add_argument('--out', metavar='DIR',
                        help='output directory (overrides output_dir)')
    common.add_argument('--seed', type=int, metavar='U64',
                        help='master seed (overrides master_seed)')
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='more log output on stderr (repeatable)')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True
    for name, text in (('estimate', 'single end-to-end estimate'),
                       ('replicate', 'Monte Carlo replication campaign'),
                       ('oracle', 'grid oracle and exact transport value'),
                       ('partition-info', 'sieve partition summary')):
        sub.add_parser(name, parents=[common], help=text)
    return parser


_COMMANDS = {
    'estimate': lambda cfg, args: run_estimate(cfg),
    'replicate': lambda cfg, args: run_replicate(cfg, args.threads,
                                                 args.out),
    'oracle': lambda cfg, args: run_oracle(cfg),
    'partition-info': lambda cfg, args: run_partition_info(cfg),
}


def main(argv=None):
    args = _parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose,
                                                               2)]
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(asctime)s %(name)s %(levelname)s: '
                               '%(message)s')
    try:
        if args.config:
            config = ExperimentConfig.load(args.config)
        else:
            config = ExperimentConfig()
        if args.seed is not None:
            config.master_seed = args.seed
        if args.out:
            config.output_dir = args.out
        if args.threads is not None and args.threads < 1:
            raise InvalidConfig('invalid option: --threads=%r'
                                % (args.threads,))
        config.validate()
        result = _COMMANDS[args.command](config, args)
    except EotError as exc:
        print(json.dumps(exc.to_dict(), sort_keys=True))
        return exit_code_for(exc)
    print(json.dumps(_json_safe(result), indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
