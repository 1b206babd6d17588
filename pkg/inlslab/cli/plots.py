"""SVG figures of a run directory."""
import logging
import os
from fractions import Fraction

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..errors import ArtifactError, ValidationError  # noqa: E402
from ..params import as_exponent, exponent_label  # noqa: E402
from .output import MANIFEST, SERIES_CSV, read_json, read_table  # noqa: E402

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

# fixed ids and no timestamp keep repeated plots byte-identical
STYLE = {'svg.hashsalt': 'inlslab', 'svg.fonttype': 'none',
         'figure.figsize': (6.4, 4.0), 'axes.grid': True}
METADATA = {'Date': None}


def _save(figure, path):
    figure.tight_layout()
    figure.savefig(path, format='svg', metadata=METADATA)
    plt.close(figure)
    logger.info("Wrote {}".format(path))
    return path


def _column(columns, rows, name):
    if name not in columns:
        raise ValidationError('series has no column {!r}'.format(name))
    try:
        return np.array([float(row[name]) for row in rows])
    except ValueError:
        raise ValidationError('column {!r} has missing values'.format(name))


def _prefixed(columns, prefix):
    return [name for name in columns if name.startswith(prefix)]


def plot_norms(t, columns, rows, path):
    figure, axes = plt.subplots()
    axes.plot(t, np.sqrt(_column(columns, rows, 'mass')), label='L2')
    axes.plot(t, _column(columns, rows, 'h1'), label='H1')
    for name in _prefixed(columns, 'lq_'):
        axes.plot(t, _column(columns, rows, name), label='L' + name[3:])
    axes.set_xlabel('t')
    axes.set_ylabel('norm')
    axes.legend()
    return _save(figure, path)


def plot_energy_drift(t, columns, rows, path):
    energy = _column(columns, rows, 'energy')
    scale = abs(energy[0]) or 1.0
    figure, axes = plt.subplots()
    axes.plot(t, (energy - energy[0]) / scale)
    axes.set_xlabel('t')
    axes.set_ylabel('(E(t) - E(0)) / |E(0)|')
    return _save(figure, path)


def plot_morawetz(t, columns, rows, path):
    names = [name for name in _prefixed(columns, 'morawetz_')
             if name != 'morawetz_integrand']
    if not names:
        raise ValidationError('series has no morawetz_<weight> column')
    figure, axes = plt.subplots()
    for name in names:
        axes.plot(t, _column(columns, rows, name), label=name[9:])
    axes.set_xlabel('t')
    axes.set_ylabel('Morawetz action')
    axes.legend()
    return _save(figure, path)


def decay_exponent(q, d):
    """-d (1/2 - 1/q)."""
    return -d * (Fraction(1, 2) - 1 / as_exponent(q))


def plot_decay(t, columns, rows, d, path):
    names = _prefixed(columns, 'lq_')
    if not names:
        raise ValidationError('series has no lq_<q> column')
    positive = np.abs(t) > 0
    if not positive.any():
        raise ValidationError('series has no sample with t != 0')
    times = np.abs(t[positive])
    figure, axes = plt.subplots()
    for name in names:
        q = as_exponent(name[3:])
        if float(q) <= 2:
            continue
        norms = _column(columns, rows, name)[positive]
        slope = decay_exponent(q, d)
        line, = axes.loglog(times, norms, label='L{}'.format(exponent_label(q)))
        reference = norms[-1] * (times / times[-1]) ** float(slope)
        axes.loglog(times, reference, linestyle='--', color=line.get_color(),
                    label='slope {}'.format(slope))
    axes.set_xlabel('|t|')
    axes.set_ylabel('||u(t)||_q')
    axes.legend()
    return _save(figure, path)


def emit_plots(run_dir):
    """Write norms, energy drift, Morawetz and decay figures.

    :returns: paths written
    """
    columns, rows = read_table(os.path.join(run_dir, SERIES_CSV))
    if not rows:
        raise ValidationError('series is empty')
    manifest = read_json(os.path.join(run_dir, MANIFEST))
    try:
        d = int(manifest['config']['params']['d'])
    except (KeyError, ValueError):
        raise ArtifactError('manifest does not record the dimension')
    t = _column(columns, rows, 't')
    with plt.rc_context(STYLE):
        return [plot_norms(t, columns, rows, os.path.join(run_dir, 'norms.svg')),
                plot_energy_drift(t, columns, rows,
                                  os.path.join(run_dir, 'energy_drift.svg')),
                plot_morawetz(t, columns, rows, os.path.join(run_dir, 'morawetz.svg')),
                plot_decay(t, columns, rows, d, os.path.join(run_dir, 'decay.svg'))]


def plot_scattering(records, path):
    """Cauchy differences and residuals against |t| on a log scale."""
    with plt.rc_context(STYLE):
        figure, axes = plt.subplots()
        deltas = [(abs(r.t), r.h1_delta_prev) for r in records
                  if r.h1_delta_prev is not None and r.h1_delta_prev > 0]
        residuals = [(abs(r.t), r.residual) for r in records
                     if r.residual is not None and r.residual > 0]
        for points, label in ((deltas, 'Cauchy difference'), (residuals, 'residual')):
            if points:
                times, values = zip(*points)
                axes.semilogy(times, values, marker='o', label=label)
        axes.set_xlabel('|t|')
        axes.set_ylabel('H1 norm')
        axes.legend()
        return _save(figure, path)
