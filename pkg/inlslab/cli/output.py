"""Run directories: series files, checkpoint fields and the manifest.

Everything written here is a pure function of the run output, so two
identical runs produce byte-identical directories.
"""
import csv
import hashlib
import json
import logging
import math
import os
import platform
from collections import OrderedDict, namedtuple

import numpy
import scipy

from .. import __version__, settings
from ..diagnostics import DiagnosticSample, strichartz_norms
from ..errors import ArtifactError
from ..grid import Field
from .config import canonical, dump_config, parse_config

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

SERIES_CSV = 'series.csv'
SERIES_JSON = 'series.json'
MANIFEST = 'manifest.json'
CONFIG = 'config.txt'
FINAL = 'final.field'
CHECKPOINT_DIR = 'checkpoints'

LoadedRun = namedtuple('LoadedRun', 'path manifest config series checkpoints')


def git_blob_sha1(data):
    """Hash of data as `git hash-object` computes it."""
    header = 'blob {}\0'.format(len(data)).encode('ascii')
    return hashlib.sha1(header + data).hexdigest()


def file_sha1(path):
    with open(path, 'rb') as handle:
        return git_blob_sha1(handle.read())


def resolve_dir(path):
    """Relative paths are taken relative to INLSLAB_OUTPUT_ROOT."""
    if os.path.isabs(path):
        return path
    return os.path.join(settings.OUTPUT_ROOT, path)


def json_number(value):
    """Floats as JSON numbers, with non-finite values spelled out."""
    if value is None:
        return None
    value = float(value)
    if math.isfinite(value):
        return value
    return 'nan' if math.isnan(value) else ('inf' if value > 0 else '-inf')


def write_json(path, data):
    with open(path, 'w') as handle:
        json.dump(data, handle, indent=2)
        handle.write('\n')
    logger.debug("Wrote {}".format(path))


def read_json(path):
    try:
        with open(path) as handle:
            return json.load(handle, object_pairs_hook=OrderedDict)
    except FileNotFoundError:
        raise ArtifactError('Missing {}'.format(path))
    except ValueError as e:
        raise ArtifactError('Corrupt JSON in {}: {}'.format(path, e))


def write_table(path, columns, rows):
    """CSV with a header row; None is written as an empty cell."""
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow(['' if value is None else
                             repr(float(value)) if isinstance(value, float) else value
                             for value in row])
    logger.debug("Wrote {}".format(path))


def read_table(path):
    """(columns, rows) of a CSV file, rows as OrderedDicts of strings."""
    try:
        with open(path, newline='') as handle:
            reader = csv.DictReader(handle)
            rows = list(reader)
            return list(reader.fieldnames or []), rows
    except FileNotFoundError:
        raise ArtifactError('Missing {}'.format(path))


def write_series(series, run_dir):
    rows = [sample.to_row() for sample in series]
    columns = list(rows[0]) if rows else []
    write_table(os.path.join(run_dir, SERIES_CSV), columns,
                [list(row.values()) for row in rows])
    write_json(os.path.join(run_dir, SERIES_JSON),
               [OrderedDict((key, json_number(value)) for key, value in row.items())
                for row in rows])


def read_series(run_dir):
    _, rows = read_table(os.path.join(run_dir, SERIES_CSV))
    try:
        return [DiagnosticSample.from_row(row) for row in rows]
    except ValueError as e:
        raise ArtifactError('Corrupt {}: {}'.format(SERIES_CSV, e))


def write_run(output, run_dir):
    """Write every artifact of a RunOutput and return the manifest.

    Also used for partial output of a failed run; `failed_step` is then
    set in the manifest.
    """
    config = output.config
    os.makedirs(os.path.join(run_dir, CHECKPOINT_DIR), exist_ok=True)
    with open(os.path.join(run_dir, CONFIG), 'w') as handle:
        handle.write(dump_config(config))
    write_series(output.series, run_dir)
    output.final.save(os.path.join(run_dir, FINAL))

    checkpoints = []
    for index, (t, field) in enumerate(output.checkpoints):
        name = os.path.join(CHECKPOINT_DIR, '{:05d}.field'.format(index))
        field.save(os.path.join(run_dir, name))
        checkpoints.append(OrderedDict([('t', t), ('path', name),
                                        ('sha1', file_sha1(os.path.join(run_dir, name)))]))

    files = OrderedDict()
    for name in (CONFIG, SERIES_CSV, SERIES_JSON, FINAL):
        files[name] = file_sha1(os.path.join(run_dir, name))
    try:
        strichartz = strichartz_norms(output.series, config.pairs)
    except ValueError:
        strichartz = []
    manifest = OrderedDict([
        ('versions', OrderedDict([('inlslab', __version__),
                                  ('numpy', numpy.__version__),
                                  ('scipy', scipy.__version__),
                                  ('python', platform.python_version())])),
        ('config', canonical(config)),
        ('report', output.report.to_dict()),
        ('steps', config.n_steps),
        ('failed_step', output.failed_step),
        ('t_wrap', json_number(output.t_wrap)),
        ('trusted_window', [config.t_transient, json_number(output.t_wrap)]),
        ('caveats', list(output.caveats)),
        ('files', files),
        ('checkpoints', checkpoints),
        ('strichartz', [OrderedDict((key, json_number(value) if key != 'pair' else value)
                                    for key, value in entry.items())
                        for entry in strichartz]),
    ])
    write_json(os.path.join(run_dir, MANIFEST), manifest)
    logger.info("Wrote run with {} samples and {} checkpoints to {}".format(
        len(output.series), len(checkpoints), run_dir))
    return manifest


def _verify_hash(run_dir, name, expected):
    path = os.path.join(run_dir, name)
    if not os.path.exists(path):
        raise ArtifactError('Missing {}'.format(path))
    if file_sha1(path) != expected:
        raise ArtifactError('{} does not match its manifest hash'.format(path))


def load_run(run_dir):
    """Read a run directory back, checking hashes against the manifest."""
    manifest = read_json(os.path.join(run_dir, MANIFEST))
    try:
        files = manifest['files']
        entries = manifest['checkpoints']
    except KeyError as e:
        raise ArtifactError('Manifest lacks {}'.format(e))
    for name, expected in files.items():
        _verify_hash(run_dir, name, expected)
    with open(os.path.join(run_dir, CONFIG)) as handle:
        config = parse_config(handle.read())
    checkpoints = []
    for entry in entries:
        _verify_hash(run_dir, entry['path'], entry['sha1'])
        checkpoints.append((entry['t'], Field.load(os.path.join(run_dir, entry['path']))))
    return LoadedRun(run_dir, manifest, config, read_series(run_dir), checkpoints)


def trusted_window(manifest):
    t_transient, t_wrap = manifest['trusted_window']
    return float(t_transient), float(t_wrap)
