from fractions import Fraction

import numpy as np

from .. import diagnostics
from ..diagnostics import (DiagnosticSample, MorawetzWeight, Sampler, decay_fit,
                           energy, gn_ratio, kinetic_energy, mass,
                           momentum_bracket_residual, morawetz_action,
                           morawetz_ceiling, morawetz_integrand, morawetz_rhs,
                           morawetz_spacetime_integral, morawetz_weight,
                           nakanishi_integrand, potential_energy,
                           strichartz_norms)
from ..errors import WindowTooShort
from ..grid import (Field, gradient_l2_norm, make_grid, singular_weight,
                    weight_gradient)
from ..params import INFINITY, Params, StrichartzPair
from ..solver import InitialData, RunConfig, SplitStepper, evolve
from .base import TestInls

PARAMS = Params(1, '1/2', 2)


def refine(field, n):
    """Trigonometric interpolant of a field on a grid without offset,
    resampled with n points per axis."""
    coarse = field.grid
    fine = make_grid(coarse.d, coarse.L, n, offset=False)
    spectrum = np.fft.fftshift(np.fft.fftn(field.values))
    pad = (n - coarse.n) // 2
    spectrum = np.pad(spectrum, [(pad, pad)] * coarse.d)
    values = np.fft.ifftn(np.fft.ifftshift(spectrum)) * (n / coarse.n) ** coarse.d
    return Field(fine, values)


class TestConservedQuantities(TestInls):

    def test_gaussian_mass(self):
        grid = make_grid(1, 40, 512)
        self.assertLess(abs(mass(self.gaussian(grid)) - np.sqrt(np.pi / 2)), 1e-10)

    def test_zero_field(self):
        grid = make_grid(2, 8, 16)
        field = Field(grid, np.zeros(grid.shape))
        weight = singular_weight(grid, 0.5)
        self.assertEqual(mass(field), 0.0)
        self.assertEqual(energy(field, Params(2, '1/2', 1), weight), 0.0)

    def test_scaling(self):
        grid = make_grid(2, 8, 16)
        field = self.random_field(grid)
        self.assertRelativeClose(mass(field * (2 - 1j)), 5 * mass(field), 1e-13)

    def test_energy_parts(self):
        """Defocusing potential term is non-negative and adds to the kinetic part"""
        grid = make_grid(1, 20, 128)
        field = self.gaussian(grid, amplitude=2.0)
        weight = singular_weight(grid, PARAMS.b)
        potential = potential_energy(field, PARAMS, weight)
        self.assertGreater(potential, 0)
        self.assertEqual(energy(field, PARAMS, weight), kinetic_energy(field) + potential)
        focusing = Params(1, '1/2', 2, mu=1)
        self.assertAlmostEqual(potential_energy(field, focusing, weight), -potential)

    def test_kinetic_of_gaussian(self):
        """(1/2) int |d/dx e^{-x^2}|^2 = (1/2) sqrt(pi/2)"""
        grid = make_grid(1, 40, 512)
        self.assertRelativeClose(kinetic_energy(self.gaussian(grid)),
                                 0.5 * np.sqrt(np.pi / 2), 1e-10)


class TestMorawetzWeights(TestInls):

    def test_names(self):
        grid = make_grid(2, 8, 16)
        self.assertEqual(morawetz_weight('smoothed-abs', grid).delta, 2 * grid.h)
        self.assertEqual(morawetz_weight('smoothed-abs', grid, 0.3).delta, 0.3)
        with self.assertRaises(ValueError):
            MorawetzWeight('cubic')
        with self.assertRaises(ValueError):
            MorawetzWeight('smoothed-abs')

    def test_laplacian_is_trace_of_hessian(self):
        for d in (1, 2, 3):
            grid = make_grid(d, 6, 16)
            for name in ('quadratic', 'smoothed-abs', 'abs'):
                arrays = morawetz_weight(name, grid).on(grid)
                trace = sum(arrays.hessian[j, j] for j in range(d))
                np.testing.assert_allclose(trace, arrays.laplacian, rtol=1e-12,
                                           atol=1e-12, err_msg=name)

    def test_smoothed_bilaplacian_sign(self):
        """Non-positive everywhere in three dimensions"""
        grid = make_grid(3, 6, 16)
        arrays = morawetz_weight('smoothed-abs', grid).on(grid)
        self.assertLessEqual(arrays.bilaplacian.max(), 0.0)

    def test_cached_per_grid(self):
        grid = make_grid(1, 8, 16)
        weight = morawetz_weight('quadratic', grid)
        self.assertIs(weight.on(grid), weight.on(make_grid(1, 8, 16)))


class TestMorawetzAction(TestInls):

    def test_real_field(self):
        grid = make_grid(2, 10, 32)
        field = Field(grid, self.random_field(grid).values.real)
        for name in ('quadratic', 'smoothed-abs', 'abs'):
            weight = morawetz_weight(name, grid)
            self.assertLess(abs(morawetz_action(field, weight)), 1e-12)

    def test_boosted_gaussian(self):
        """M for |x|^2 and u = e^{ivx} e^{-(x-c)^2} is 4 v c sqrt(pi/2)"""
        grid = make_grid(1, 40, 512)
        field = self.gaussian(grid, center=2.0, velocity=1.5)
        action = morawetz_action(field, morawetz_weight('quadratic', grid))
        self.assertRelativeClose(action, 4 * 1.5 * 2.0 * np.sqrt(np.pi / 2), 1e-8)

    def test_abs_weight_has_no_rhs(self):
        grid = make_grid(1, 8, 16)
        with self.assertRaises(ValueError):
            morawetz_rhs(self.gaussian(grid), morawetz_weight('abs', grid), PARAMS,
                         singular_weight(grid, PARAMS.b))

    def test_quadratic_rhs_closed_form(self):
        """8||grad u||^2 + (4d alpha + 8b)/(alpha+2) int W |u|^(alpha+2)"""
        params = Params(2, '1/2', 1)
        grid = make_grid(2, 12, 64)
        field = self.random_field(grid, seed=9, cutoff=2.0)
        weight = singular_weight(grid, params.b)
        rhs = morawetz_rhs(field, morawetz_weight('quadratic', grid), params, weight)
        alpha, b = float(params.alpha), float(params.b)
        power = grid.quadrature(weight * np.abs(field.values) ** (alpha + 2))
        expected = (8 * gradient_l2_norm(field) ** 2 +
                    (4 * 2 * alpha + 8 * b) / (alpha + 2) * power)
        self.assertRelativeClose(rhs, expected, 1e-10)

    def test_identity_along_the_flow(self):
        """Centered difference of M_a matches the identity for smooth weights"""
        grid = make_grid(1, 40, 512)
        field = self.gaussian(grid, amplitude=1.2, center=6.0, velocity=0.5)
        weight = singular_weight(grid, PARAMS.b)
        dt = 1e-3
        after = SplitStepper(grid, dt, PARAMS, weight)(field)
        before = SplitStepper(grid, -dt, PARAMS, weight)(field)
        for name in ('quadratic', 'smoothed-abs'):
            a = morawetz_weight(name, grid)
            rate = (morawetz_action(after, a) - morawetz_action(before, a)) / (2 * dt)
            rhs = morawetz_rhs(field, a, PARAMS, weight)
            self.assertRelativeClose(rate, rhs, 1e-3, name)


class TestMomentumBracket(TestInls):

    def test_zero_field(self):
        grid = make_grid(2, 8, 16)
        field = Field(grid, np.zeros(grid.shape))
        params = Params(2, '1/2', 1)
        self.assertEqual(momentum_bracket_residual(field, params,
                                                   singular_weight(grid, params.b)), 0.0)

    def test_random_fields(self):
        """The bracket identity holds node by node up to rounding"""
        for d, alpha in ((1, '2'), (2, '1/2'), (3, '3/2')):
            params = Params(d, '1/2', alpha)
            grid = make_grid(d, 8, 16)
            weight = singular_weight(grid, params.b)
            gradient = weight_gradient(grid, params.b)
            scale = np.abs(gradient).max() + np.abs(weight).max() * 10
            for seed in range(20):
                field = self.random_field(grid, seed=seed)
                residual = momentum_bracket_residual(field, params, weight, gradient)
                self.assertLess(residual / scale, 1e-12, (d, seed))


class TestScalarIntegrands(TestInls):

    def test_integrand_positive(self):
        grid = make_grid(2, 8, 32)
        params = Params(2, '1/2', 1)
        self.assertGreater(morawetz_integrand(self.random_field(grid), params), 0)

    def test_nakanishi_at_zero(self):
        grid = make_grid(1, 8, 16)
        weight = singular_weight(grid, PARAMS.b)
        self.assertEqual(nakanishi_integrand(self.gaussian(grid), 0.0, PARAMS, weight), 0.0)

    def test_nakanishi_homogeneity(self):
        grid = make_grid(2, 8, 32)
        params = Params(2, '1/2', 1)
        weight = singular_weight(grid, params.b)
        field = self.random_field(grid)
        ratio = (nakanishi_integrand(field * 2, 0.5, params, weight) /
                 nakanishi_integrand(field, 0.5, params, weight))
        self.assertRelativeClose(ratio, 2 ** 3, 1e-12)

    def test_gn_ratio_zero(self):
        grid = make_grid(1, 8, 16)
        self.assertEqual(gn_ratio(Field(grid, np.zeros(grid.shape))), 0.0)

    def test_gn_ratio_scale_invariant(self):
        grid = make_grid(3, 8, 16)
        field = self.random_field(grid, seed=4)
        self.assertRelativeClose(gn_ratio(field * 2), gn_ratio(field), 1e-12)

    def test_gn_ratio_bounded_on_random_fields(self):
        grid = make_grid(3, 8, 16)
        ratios = [gn_ratio(self.random_field(grid, seed=seed, cutoff=2.0))
                  for seed in range(100)]
        self.assertTrue(np.isfinite(ratios).all())
        self.assertLess(max(ratios), 10)

    def test_gn_ratio_grid_independent(self):
        """Refining the grid moves the ratio by less than 20 percent"""
        grid = make_grid(3, 8, 32, offset=False)
        for seed in range(5):
            coarse = self.random_field(grid, seed=seed, cutoff=2.0)
            fine = refine(coarse, 64)
            self.assertRelativeClose(gn_ratio(fine), gn_ratio(coarse), 0.2, seed)


def decaying_series(exponent, times, q=4):
    return [DiagnosticSample(t=t, mass=1.0, energy=1.0, kinetic=1.0, potential_term=0.0,
                             lq_norms={q: 3.0 * abs(t) ** exponent if t else 3.0})
            for t in times]


class TestSeries(TestInls):

    def test_decay_fit_exact_power(self):
        series = decaying_series(-0.75, np.linspace(0, 4, 21))
        fit = decay_fit(series, 4, 3)
        self.assertAlmostEqual(fit.fitted, -0.75, places=10)
        self.assertEqual(fit.theoretical, Fraction(-3, 4))
        self.assertEqual(fit.samples, 20)

    def test_decay_fit_window(self):
        series = decaying_series(-0.25, np.linspace(0, 4, 21))
        fit = decay_fit(series, 4, 1, window=(1.0, 2.0))
        self.assertEqual(fit.samples, 6)
        self.assertEqual(fit.theoretical, Fraction(-1, 4))
        with self.assertRaises(WindowTooShort):
            decay_fit(series, 4, 1, window=(1.0, 1.5))

    def test_decay_fit_range(self):
        series = decaying_series(-0.5, np.linspace(0, 4, 21))
        for q, d in ((2, 3), (6, 3), (INFINITY, 1)):
            with self.assertRaises(ValueError):
                decay_fit(series, q, d)

    def test_free_decay_rate(self):
        """A free Gaussian in d=1 decays like t^(-1/4) in L^4"""
        config = RunConfig(params=PARAMS, grid=make_grid(1, 40, 512), dt=0.01, t_end=4.9,
                           sample_every=10, linear=True, observables=(), weights=())
        fit = decay_fit(evolve(config).series, 4, 1, window=(1.0, 4.9))
        self.assertLess(abs(fit.fitted / float(fit.theoretical) - 1), 0.15)

    def test_spacetime_integral(self):
        grid = make_grid(1, 40, 256)
        config = RunConfig(params=PARAMS, grid=grid, dt=0.01, t_end=1.0, sample_every=5,
                           initial=InitialData(amplitude=1.5))
        series = evolve(config).series
        bound = morawetz_spacetime_integral(series, PARAMS)
        self.assertGreater(bound.integral, 0)
        self.assertEqual(bound.ceiling, morawetz_ceiling(series, PARAMS))
        self.assertEqual(morawetz_spacetime_integral(series[:1], PARAMS).integral, 0.0)
        with self.assertRaises(ValueError):
            morawetz_spacetime_integral([], PARAMS)

    def test_ceiling_formula(self):
        """(|M(0)| + 2 sup ||u|| ||grad u||)(alpha+2)/(2 alpha (d-1) + 4b)"""
        params = Params(3, '1/2', '3/2')
        series = [DiagnosticSample(t=t, mass=4.0, energy=1.0, kinetic=kinetic,
                                   potential_term=0.0,
                                   morawetz_action={'abs': -1.0})
                  for t, kinetic in ((0.0, 2.0), (1.0, 8.0))]
        # sup of 2 * sqrt(4) * sqrt(16) is 16
        self.assertAlmostEqual(morawetz_ceiling(series, params), (1 + 16) * 3.5 / 8)

    def test_ceiling_needs_abs_action(self):
        params = Params(3, '1/2', '3/2')
        series = [DiagnosticSample(t=0.0, mass=1.0, energy=1.0, kinetic=1.0,
                                   potential_term=0.0,
                                   morawetz_action={'quadratic': 2.0})]
        with self.assertRaises(ValueError):
            morawetz_ceiling(series, params)

    def test_strichartz_norms(self):
        times = [0.0, 1.0, 2.0]
        series = [DiagnosticSample(t=t, mass=1.0, energy=1.0, kinetic=1.0,
                                   potential_term=0.0, lq_norms={4: 1.0 + t},
                                   grad_lq_norms={4: 2.0})
                  for t in times]
        pair = StrichartzPair(8, 4)
        sup = StrichartzPair(INFINITY, 4)
        norms = strichartz_norms(series, [pair, sup])
        expected = (0.5 * (1 + 2 ** 8) + 0.5 * (2 ** 8 + 3 ** 8)) ** (1 / 8)
        self.assertAlmostEqual(norms[0]['u'], expected)
        self.assertAlmostEqual(norms[0]['grad_u'], (2 * 2.0 ** 8) ** (1 / 8))
        self.assertEqual(norms[1]['u'], 3.0)
        self.assertEqual(norms[1]['pair'], 'inf:4')


class TestSampler(TestInls):

    def test_row_round_trip_keeps_columns(self):
        grid = make_grid(1, 20, 64)
        params = PARAMS
        weight = singular_weight(grid, params.b)
        sampler = Sampler(params, grid, weight, lq=(4, INFINITY), grad_lq=(4,),
                          weights=[morawetz_weight('quadratic', grid)])
        sample = sampler(self.gaussian(grid, velocity=1.0), 0.5)
        row = sample.to_row()
        self.assertEqual(list(row)[:len(diagnostics.BASE_COLUMNS)],
                         list(diagnostics.BASE_COLUMNS))
        self.assertIn('lq_inf', row)
        self.assertIn('grad_lq_4', row)
        self.assertIn('morawetz_quadratic', row)
        text = {key: '' if value is None else repr(float(value))
                for key, value in row.items()}
        self.assertEqual(DiagnosticSample.from_row(text), sample)

    def test_observables_can_be_switched_off(self):
        grid = make_grid(1, 20, 64)
        sampler = Sampler(PARAMS, grid, singular_weight(grid, PARAMS.b), observables=())
        sample = sampler(self.gaussian(grid), 0.0)
        self.assertIsNone(sample.h1)
        self.assertIsNone(sample.gn_ratio)
        self.assertIsNone(sample.morawetz_integrand)

    def test_gn_caveat_below_three_dimensions(self):
        for d in (1, 2):
            grid = make_grid(d, 8, 16)
            params = Params(d, '1/2', 1)
            sampler = Sampler(params, grid, singular_weight(grid, params.b))
            self.assertEqual(sampler.caveats, [diagnostics.GN_CAVEAT])
            self.assertEqual(diagnostics.gn_caveat(d), diagnostics.GN_CAVEAT)
        grid = make_grid(3, 8, 16)
        params = Params(3, '1/2', 1)
        self.assertEqual(Sampler(params, grid, singular_weight(grid, params.b)).caveats, [])
        self.assertIsNone(diagnostics.gn_caveat(3))
        grid = make_grid(1, 8, 16)
        sampler = Sampler(PARAMS, grid, singular_weight(grid, PARAMS.b), observables=('h1',))
        self.assertEqual(sampler.caveats, [])
