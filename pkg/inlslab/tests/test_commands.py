import io
import os
from contextlib import redirect_stdout
from fractions import Fraction
from unittest import mock

import numpy as np

from ..cli import lab, main
from ..cli.output import (MANIFEST, SERIES_CSV, file_sha1, git_blob_sha1,
                          load_run, read_json, read_table)
from ..cli.plots import decay_exponent
from ..diagnostics import GN_CAVEAT
from ..errors import ArtifactError
from ..grid import Field
from .base import SMALL_CONFIG, TestInls


class TestCommandLine(TestInls):

    def call(self, *argv):
        """Run the command line, returning (exit code, stdout)."""
        out = io.StringIO()
        with redirect_stdout(out):
            code = main(list(argv))
        return code, out.getvalue()

    def run_small(self, text=SMALL_CONFIG):
        run_dir = os.path.join(self.temporary_directory(), 'run')
        code, _ = self.call('run', self.write_config(text), run_dir)
        self.assertEqual(code, 0)
        return run_dir

    def test_registered(self):
        self.assertEqual(list(lab.commands), ['regimes', 'certificate', 'run', 'verify',
                                              'scatter', 'sweep', 'plot'])
        self.assertIn('mass_conservation', lab.checks)
        self.assertIn('morawetz_identity', lab.checks)

    def test_regimes(self):
        code, out = self.call('regimes', '3', '1/2', '3/2', '--certificate')
        self.assertEqual(code, 0)
        self.assertIn('intercritical', out)
        self.assertIn('constraint_log', out)

    def test_regimes_without_alpha(self):
        code, out = self.call('regimes', '2', '1')
        self.assertEqual(code, 0)
        self.assertIn('alpha_sup', out)
        self.assertIn('inf', out)

    def test_certificate(self):
        code, out = self.call('certificate', '4', '1', '3/4', '--epsilon', '1/10')
        self.assertEqual(code, 0)
        self.assertIn('113/30', out)
        self.assertIn('107/47', out)

    def test_certificate_outside_range(self):
        code, _ = self.call('certificate', '3', '13/10', '1')
        self.assertEqual(code, 2)

    def test_bad_parameters(self):
        code, _ = self.call('regimes', '3', 'half', '1')
        self.assertEqual(code, 2)

    def test_run_writes_directory(self):
        run_dir = self.run_small()
        manifest = read_json(os.path.join(run_dir, MANIFEST))
        self.assertEqual(manifest['steps'], 200)
        self.assertIsNone(manifest['failed_step'])
        self.assertEqual(manifest['config']['params']['alpha'], '2/1')
        self.assertEqual(manifest['files'][SERIES_CSV],
                         file_sha1(os.path.join(run_dir, SERIES_CSV)))
        columns, rows = read_table(os.path.join(run_dir, SERIES_CSV))
        self.assertEqual(len(rows), 11)
        for name in ('t', 'mass', 'energy', 'h1', 'gn_ratio', 'lq_4', 'lq_6',
                     'grad_lq_4', 'morawetz_quadratic', 'morawetz_abs'):
            self.assertIn(name, columns)
        self.assertEqual(manifest['strichartz'][0]['pair'], '8:4')
        self.assertEqual(manifest['caveats'], [GN_CAVEAT])
        run = load_run(run_dir)
        self.assertEqual(len(run.checkpoints), 6)
        self.assertAlmostEqual(run.series[-1].t, 0.2)

    def test_runs_are_reproducible(self):
        first, second = self.run_small(), self.run_small()
        for name in (SERIES_CSV, 'series.json', 'final.field', 'config.txt'):
            self.assertEqual(file_sha1(os.path.join(first, name)),
                             file_sha1(os.path.join(second, name)), name)

    def test_seed_override(self):
        text = SMALL_CONFIG.replace('kind = gaussian', 'kind = spectrally-filtered-random')
        path = self.write_config(text)
        finals = []
        for seed in ('1', '1', '2'):
            run_dir = os.path.join(self.temporary_directory(), 'run')
            code, _ = self.call('--seed', seed, 'run', path, run_dir)
            self.assertEqual(code, 0)
            finals.append(Field.load(os.path.join(run_dir, 'final.field')).values)
        np.testing.assert_array_equal(finals[0], finals[1])
        self.assertFalse(np.array_equal(finals[0], finals[2]))

    def test_verify(self):
        run_dir = self.run_small()
        code, out = self.call('verify', run_dir)
        self.assertEqual(code, 0, out)
        report = read_json(os.path.join(run_dir, 'verify.json'))
        self.assertTrue(report['passed'])
        statuses = {check['name']: check['status'] for check in report['checks']}
        self.assertEqual(statuses['mass_conservation'], 'pass')
        self.assertEqual(statuses['momentum_bracket'], 'pass')
        self.assertEqual(statuses['morawetz_identity'], 'pass')
        self.assertEqual(statuses['decay_half'], 'skip')

    def test_verify_selected_check(self):
        run_dir = self.run_small()
        code, _ = self.call('verify', run_dir, '--check', 'mass_conservation')
        self.assertEqual(code, 0)
        report = read_json(os.path.join(run_dir, 'verify.json'))
        self.assertEqual([c['name'] for c in report['checks']], ['mass_conservation'])

    def test_verify_detects_tampering(self):
        run_dir = self.run_small()
        with open(os.path.join(run_dir, SERIES_CSV), 'a') as handle:
            handle.write('\n')
        code, _ = self.call('verify', run_dir)
        self.assertEqual(code, 4)
        with self.assertRaises(ArtifactError):
            load_run(run_dir)

    def test_missing_run(self):
        code, _ = self.call('verify', os.path.join(self.temporary_directory(), 'nothing'))
        self.assertEqual(code, 4)

    def test_scatter(self):
        run_dir = self.run_small()
        code, _ = self.call('scatter', run_dir)
        self.assertEqual(code, 0)
        for name in ('u_plus.field', 'cauchy.csv', 'residuals.csv', 'scattering.svg',
                     'scattering.json'):
            self.assertTrue(os.path.exists(os.path.join(run_dir, name)), name)
        _, rows = read_table(os.path.join(run_dir, 'residuals.csv'))
        # trusted checkpoints at t = 0.08, 0.12, 0.16, 0.2
        self.assertEqual(len(rows), 4)
        self.assertEqual(float(rows[-1]['residual']), 0.0)

    def test_scatter_needs_trusted_checkpoints(self):
        run_dir = self.run_small(SMALL_CONFIG.replace('t_transient = 0.05',
                                                      't_transient = 0.15'))
        code, _ = self.call('scatter', run_dir)
        self.assertEqual(code, 2)

    def test_plot(self):
        """Figures are written and byte-identical when redrawn"""
        run_dir = self.run_small()
        code, out = self.call('plot', run_dir)
        self.assertEqual(code, 0)
        names = ('norms.svg', 'energy_drift.svg', 'morawetz.svg', 'decay.svg')
        hashes = [file_sha1(os.path.join(run_dir, name)) for name in names]
        for name in names:
            self.assertIn(name, out)
        self.call('plot', run_dir)
        self.assertEqual([file_sha1(os.path.join(run_dir, name)) for name in names], hashes)

    def test_plot_missing_column(self):
        run_dir = self.run_small()
        path = os.path.join(run_dir, SERIES_CSV)
        columns, rows = read_table(path)
        with open(path, 'w') as handle:
            handle.write(','.join(c for c in columns if c != 'h1') + '\n')
            for row in rows:
                handle.write(','.join(row[c] for c in columns if c != 'h1') + '\n')
        with self.assertLogs('inlslab.cli', level='ERROR') as logs:
            code, _ = self.call('plot', run_dir)
        self.assertEqual(code, 2)
        self.assertIn("'h1'", '\n'.join(logs.output))

    def test_plot_empty_series(self):
        run_dir = self.run_small()
        path = os.path.join(run_dir, SERIES_CSV)
        columns, _ = read_table(path)
        with open(path, 'w') as handle:
            handle.write(','.join(columns) + '\n')
        code, _ = self.call('plot', run_dir)
        self.assertEqual(code, 2)

    def test_blowup_exit_code(self):
        path = self.write_config()
        run_dir = os.path.join(self.temporary_directory(), 'run')
        broken = np.full((256,), np.nan)
        with mock.patch('inlslab.solver.singular_weight', return_value=broken):
            code, _ = self.call('run', path, run_dir)
        self.assertEqual(code, 3)
        manifest = read_json(os.path.join(run_dir, MANIFEST))
        self.assertEqual(manifest['failed_step'], 1)

    def test_sweep(self):
        directory = self.temporary_directory()
        first = self.write_config(name='first.cfg', directory=directory)
        second = self.write_config(SMALL_CONFIG.replace('center = 6', 'center = -6'),
                                   name='second.cfg', directory=directory)
        output = os.path.join(directory, 'sweep')
        code, _ = self.call('--threads', '1', 'sweep', first, second,
                            '--output-dir', output)
        self.assertEqual(code, 0)
        results = read_json(os.path.join(output, 'sweep.json'))
        self.assertEqual([r['status'] for r in results], ['ok', 'ok'])
        for stem in ('first', 'second'):
            self.assertTrue(os.path.exists(os.path.join(output, stem, MANIFEST)))

    def test_sweep_reports_failures(self):
        directory = self.temporary_directory()
        good = self.write_config(name='good.cfg', directory=directory)
        bad = self.write_config('[params]\nd = 1\n', name='bad.cfg', directory=directory)
        output = os.path.join(directory, 'sweep')
        code, _ = self.call('sweep', good, bad, '--output-dir', output)
        self.assertEqual(code, 2)
        results = read_json(os.path.join(output, 'sweep.json'))
        self.assertEqual([r['status'] for r in results], ['ok', 'error'])


class TestOutputHelpers(TestInls):

    def test_git_blob_sha1(self):
        """Same digest as `git hash-object` for a known blob"""
        self.assertEqual(git_blob_sha1(b'hello\n'),
                         'ce013625030ba8dba906f756967f9e9ca394464a')
        self.assertEqual(git_blob_sha1(b''), 'e69de29bb2d1d6434b8b29ae775ad8c2e48c5391')

    def test_decay_exponent(self):
        self.assertEqual(decay_exponent(4, 3), Fraction(-3, 4))
