"""Subcommands of the `inlslab` command line."""
import json
import logging
import os
from collections import OrderedDict

from .. import settings
from ..dispatch import argument
from ..errors import InlsError, StepBlowup, ValidationError
from ..grid import set_fft_workers
from ..params import (Params, classify_regime, critical_exponents,
                      scattering_certificate)
from ..scattering import scatter as extract
from ..solver import evolve
from . import lab
from .checks import VerifyContext
from .config import parse_config
from .output import (file_sha1, json_number, load_run, resolve_dir,
                     trusted_window, write_json, write_run, write_table)
from .plots import emit_plots, plot_scattering

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

PARAMS_ARGUMENTS = (
    argument('d', type=int, help='dimension'),
    argument('b', help='weight exponent, e.g. 1/2'),
    argument('alpha', help='nonlinearity power, e.g. 3/2'),
    argument('--mu', type=int, default=-1, choices=(-1, 1),
             help='-1 defocusing (default), +1 focusing'),
)


def format_table(rows):
    """Two aligned columns."""
    rows = [(str(name), '' if value is None else str(value)) for name, value in rows]
    width = max((len(name) for name, _ in rows), default=0)
    return '\n'.join('{}  {}'.format(name.ljust(width), value) for name, value in rows)


def show(rows, data):
    print(format_table(rows))
    print(json.dumps(data, indent=2))


def _overrides(args):
    if getattr(args, 'seed', None) is None:
        return None
    return {('initial', 'seed'): str(args.seed)}


@lab.command(arguments=(
    argument('d', type=int, help='dimension'),
    argument('b', help='weight exponent'),
    argument('alpha', nargs='?', help='nonlinearity power (optional)'),
    argument('--mu', type=int, default=-1, choices=(-1, 1)),
    argument('--certificate', action='store_true',
             help='also search for exponent witnesses'),
))
def regimes(args):
    """Print critical exponents and which hypotheses (d, b, alpha) meets."""
    if args.alpha is None:
        report = critical_exponents(args.d, args.b)
        show(report.rows(), report.to_dict())
        return 0
    params = Params(args.d, args.b, args.alpha, args.mu)
    report = classify_regime(params)
    data = report.to_dict()
    rows = report.rows()
    if args.certificate and report.flags['scattering']:
        certificate = scattering_certificate(params)
        data['certificate'] = certificate.to_dict()
        rows.extend(certificate.rows())
    show(rows, data)
    return 0


@lab.command(arguments=PARAMS_ARGUMENTS + (
    argument('--epsilon', help='use this epsilon instead of searching'),
    argument('--tau', help='use this tau instead of searching (d = 3)'),
))
def certificate(args):
    """Find and verify the exponent witnesses of the scattering argument."""
    params = Params(args.d, args.b, args.alpha, args.mu)
    found = scattering_certificate(params, args.epsilon, args.tau)
    rows = found.rows()
    rows.extend(('{} ({})'.format(record.name, record.relation),
                 'ok' if record.holds() else 'FAILED')
                for record in found.constraint_log)
    show(rows, found.to_dict())
    return 0


def run_config(config_path, run_dir, overrides=None):
    """Evolve one config file into run_dir; partial output is kept on blowup."""
    with open(config_path) as handle:
        config = parse_config(handle.read(), overrides)
    os.makedirs(run_dir, exist_ok=True)
    try:
        output = evolve(config)
    except StepBlowup as e:
        if e.output is not None:
            write_run(e.output, run_dir)
        raise
    write_run(output, run_dir)
    return output


@lab.command(arguments=(
    argument('config', help='run configuration file'),
    argument('output_dir', help='run directory, relative to INLSLAB_OUTPUT_ROOT'),
))
def run(args):
    """Evolve a configuration and write the run directory."""
    run_dir = resolve_dir(args.output_dir)
    output = run_config(args.config, run_dir, _overrides(args))
    last = output.series[-1]
    show([('samples', len(output.series)),
          ('checkpoints', len(output.checkpoints)),
          ('t_wrap', output.t_wrap),
          ('regime', output.report.regime)],
         OrderedDict([('run_dir', run_dir), ('t', last.t), ('mass', last.mass),
                      ('energy', last.energy)]))
    return 0


@lab.command(arguments=(
    argument('run_dir'),
    argument('--check', action='append', dest='checks',
             help='run only this check (repeatable)'),
))
def verify(args):
    """Check conservation laws and identities on a recorded run."""
    run_dir = resolve_dir(args.run_dir)
    context = VerifyContext.from_run(load_run(run_dir))
    results = lab.run_checks(context, args.checks)
    failed = [r.name for r in results if not r.passed]
    write_json(os.path.join(run_dir, 'verify.json'),
               OrderedDict([('passed', not failed),
                            ('checks', [r.to_dict() for r in results])]))
    print(format_table((r.name, '{:4}  {}  (limit {})  {}'.format(
        r.status, r.value, r.limit, r.detail)) for r in results))
    if failed:
        raise ValidationError('{} of {} checks failed: {}'.format(
            len(failed), len(results), ', '.join(failed)))
    return 0


@lab.command(arguments=(argument('run_dir'),))
def scatter(args):
    """Extract the scattering state of a run and its Cauchy differences."""
    run_dir = resolve_dir(args.run_dir)
    run = load_run(run_dir)
    window = trusted_window(run.manifest)
    state, records = extract(run.checkpoints, window)
    name = 'u_minus.field' if run.config.direction == 'backward' else 'u_plus.field'
    state.save(os.path.join(run_dir, name))
    write_table(os.path.join(run_dir, 'cauchy.csv'), ['t', 'h1_delta_prev'],
                [(r.t, r.h1_delta_prev) for r in records[1:]])
    write_table(os.path.join(run_dir, 'residuals.csv'), ['t', 'residual'],
                [(r.t, r.residual) for r in records])
    plot_scattering(records, os.path.join(run_dir, 'scattering.svg'))
    summary = OrderedDict([
        ('state', name),
        ('state_sha1', file_sha1(os.path.join(run_dir, name))),
        ('window', [json_number(t) for t in window]),
        ('records', [OrderedDict((key, json_number(value))
                                 for key, value in r.summary().items())
                     for r in records]),
    ])
    write_json(os.path.join(run_dir, 'scattering.json'), summary)
    deltas = [r.h1_delta_prev for r in records[1:]]
    show([('checkpoints', len(records)),
          ('first delta', deltas[0]),
          ('last delta', deltas[-1]),
          ('first residual', records[0].residual)], summary['records'])
    return 0


def sweep_job(job):
    """Worker target: run one config, reporting blowups as results."""
    config_path, run_dir, overrides = job
    set_fft_workers(1)
    try:
        output = run_config(config_path, run_dir, overrides)
    except StepBlowup as e:
        return {'job': config_path, 'status': 'blowup', 'exit_code': e.exit_code,
                'error': str(e)}
    return {'job': config_path, 'status': 'ok', 'exit_code': 0,
            'run_dir': run_dir, 'samples': len(output.series)}


@lab.command(arguments=(
    argument('configs', nargs='+', help='run configuration files'),
    argument('--output-dir', default='sweep',
             help='root for one run directory per config'),
))
def sweep(args):
    """Run independent configs on a process pool."""
    from ..worker import Worker
    root = resolve_dir(args.output_dir)
    os.makedirs(root, exist_ok=True)
    overrides = _overrides(args)
    jobs = []
    for path in args.configs:
        stem = os.path.splitext(os.path.basename(path))[0]
        jobs.append((path, os.path.join(root, stem), overrides))
    if len({run_dir for _, run_dir, _ in jobs}) != len(jobs):
        raise ValidationError('config file names must be distinct')
    results = Worker(sweep_job, jobs, args.threads or settings.THREADS).run()
    write_json(os.path.join(root, 'sweep.json'), results)
    print(format_table((r['job'], r['status']) for r in results))
    failed = [r for r in results if r['exit_code']]
    if failed:
        error = InlsError('{} of {} runs failed'.format(len(failed), len(results)))
        error.exit_code = max(r['exit_code'] for r in failed)
        raise error
    return 0


@lab.command(arguments=(argument('run_dir'),))
def plot(args):
    """Write SVG figures for a run directory."""
    for path in emit_plots(resolve_dir(args.run_dir)):
        print(path)
    return 0
