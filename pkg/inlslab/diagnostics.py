"""Observables of the INLS flow and the identities they satisfy.

All spatial integrals use the rectangle rule of :mod:`inlslab.grid`;
derivatives of the solution are spectral, derivatives of |x|^-b are
analytic.
"""
import logging
from collections import OrderedDict, namedtuple
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .errors import WindowTooShort
from .grid import (gradient, gradient_l2_norm, h1_norm, lq_norm,
                   nearest_cube_edge, singular_weight, sup_cube_l2,
                   weight_gradient)
from .params import INFINITY, as_exponent, exponent_label

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

OBSERVABLES = ('h1', 'morawetz_integrand', 'nakanishi', 'gn')
WEIGHT_NAMES = ('abs', 'quadratic', 'smoothed-abs')
BASE_COLUMNS = ('t', 'mass', 'energy', 'kinetic', 'potential_term', 'h1',
                'morawetz_integrand', 'nakanishi_integrand', 'gn_ratio')
MIN_FIT_SAMPLES = 5
GN_CAVEAT = 'gn_ratio is only bounded by the interpolation inequality for d >= 3'

WeightArrays = namedtuple('WeightArrays', 'gradient laplacian hessian bilaplacian')
DecayFit = namedtuple('DecayFit', 'fitted theoretical samples')
SpacetimeBound = namedtuple('SpacetimeBound', 'integral ceiling')


@dataclass
class DiagnosticSample(object):

    """Observables at one sample time. Missing observables are None."""

    t: float
    mass: float
    energy: float
    kinetic: float
    potential_term: float
    h1: object = None
    morawetz_integrand: object = None
    nakanishi_integrand: object = None
    gn_ratio: object = None
    lq_norms: dict = dataclass_field(default_factory=OrderedDict)
    grad_lq_norms: dict = dataclass_field(default_factory=OrderedDict)
    morawetz_action: dict = dataclass_field(default_factory=OrderedDict)

    def columns(self):
        return list(self.to_row())

    def to_row(self):
        row = OrderedDict((name, getattr(self, name)) for name in BASE_COLUMNS)
        for q, value in self.lq_norms.items():
            row['lq_' + exponent_label(q)] = value
        for q, value in self.grad_lq_norms.items():
            row['grad_lq_' + exponent_label(q)] = value
        for name, value in self.morawetz_action.items():
            row['morawetz_' + name] = value
        return row

    @classmethod
    def from_row(cls, row):
        """Inverse of to_row; accepts strings as read back from CSV."""
        def number(value):
            if value is None or value == '':
                return None
            return float(value)

        base = {}
        extra = {'lq_norms': OrderedDict(), 'grad_lq_norms': OrderedDict(),
                 'morawetz_action': OrderedDict()}
        for key, value in row.items():
            if key in BASE_COLUMNS:
                base[key] = number(value)
            elif key.startswith('grad_lq_'):
                extra['grad_lq_norms'][as_exponent(key[8:])] = number(value)
            elif key.startswith('lq_'):
                extra['lq_norms'][as_exponent(key[3:])] = number(value)
            elif key.startswith('morawetz_'):
                extra['morawetz_action'][key[9:]] = number(value)
            else:
                raise ValueError('Unknown series column {!r}'.format(key))
        missing = [name for name in BASE_COLUMNS[:5] if base.get(name) is None]
        if missing:
            raise ValueError('Series row lacks column {}'.format(missing[0]))
        base.update(extra)
        return cls(**base)


class MorawetzWeight(object):

    """Weight a(x) for the Morawetz action with its derivatives on a grid.

    `abs` is |x|, `quadratic` is |x|^2 and `smoothed-abs` is
    sqrt(delta^2 + |x|^2).
    """

    def __init__(self, name, delta=None):
        if name not in WEIGHT_NAMES:
            raise ValueError('Unknown Morawetz weight {!r}'.format(name))
        if name == 'smoothed-abs':
            if delta is None or not delta > 0:
                raise ValueError('smoothed-abs needs delta > 0')
            delta = float(delta)
        self.name = name
        self.delta = delta
        self._cache = {}

    def __repr__(self):
        if self.delta is None:
            return 'MorawetzWeight({!r})'.format(self.name)
        return 'MorawetzWeight({!r}, delta={})'.format(self.name, self.delta)

    def values(self, grid):
        r = grid.radius
        if self.name == 'quadratic':
            return r ** 2
        if self.name == 'abs':
            return r
        return np.sqrt(self.delta ** 2 + r ** 2)

    def on(self, grid):
        """WeightArrays for grid, computed once per grid."""
        if grid not in self._cache:
            self._cache[grid] = getattr(self, '_' + self.name.replace('-', '_'))(grid)
        return self._cache[grid]

    def _quadratic(self, grid):
        d = grid.d
        identity = np.eye(d).reshape((d, d) + (1,) * d)
        return WeightArrays(gradient=2 * grid.coords,
                            laplacian=np.full(grid.shape, 2.0 * d),
                            hessian=2 * identity * np.ones(grid.shape),
                            bilaplacian=np.zeros(grid.shape))

    def _radial(self, grid, rho):
        x = grid.coords
        d = grid.d
        identity = np.eye(d).reshape((d, d) + (1,) * d)
        hessian = identity / rho - x[:, None] * x[None, :] / rho ** 3
        return x / rho, hessian

    def _smoothed_abs(self, grid):
        d, delta = grid.d, self.delta
        rho = np.sqrt(delta ** 2 + grid.radius ** 2)
        grad, hessian = self._radial(grid, rho)
        laplacian = (d - 1) / rho + delta ** 2 / rho ** 3
        bilaplacian = ((d - 1) * (3 - d) / rho ** 3 +
                       delta ** 2 * (18 - 6 * d) / rho ** 5 -
                       15 * delta ** 4 / rho ** 7)
        return WeightArrays(grad, laplacian, hessian, bilaplacian)

    def _abs(self, grid):
        d = grid.d
        r = grid.radius
        # the origin node (grids without offset) gets zero derivatives
        rho = np.where(r > 0, r, np.inf)
        grad, hessian = self._radial(grid, rho)
        return WeightArrays(grad, (d - 1) / rho, hessian, None)


def morawetz_weight(name, grid, smoothing=None):
    """Build a weight; smoothed-abs defaults to delta = 2h."""
    if name == 'smoothed-abs' and smoothing is None:
        smoothing = 2 * grid.h
    return MorawetzWeight(name, smoothing if name == 'smoothed-abs' else None)


def _power(field, params):
    return np.abs(field.values) ** (float(params.alpha) + 2)


def mass(field):
    """M(u) = ||u||_2^2."""
    return field.grid.quadrature(np.abs(field.values) ** 2)


def kinetic_energy(field):
    return 0.5 * gradient_l2_norm(field) ** 2


def potential_energy(field, params, weight):
    """-mu/(alpha+2) * int W |u|^(alpha+2); non-negative when defocusing."""
    alpha = float(params.alpha)
    return -params.mu / (alpha + 2) * field.grid.quadrature(weight * _power(field, params))


def energy(field, params, weight):
    return kinetic_energy(field) + potential_energy(field, params, weight)


def morawetz_action(field, weight, grad=None):
    """M_a = 2 int grad(a) . Im(conj(u) grad(u))."""
    if grad is None:
        grad = gradient(field)
    current = np.imag(np.conj(field.values) * grad)
    arrays = weight.on(field.grid)
    return 2 * field.grid.quadrature(np.sum(arrays.gradient * current, axis=0))


def morawetz_rhs(field, weight, params, b_weight, b_gradient=None):
    """Right-hand side of the Morawetz identity d/dt M_a.

    :b_gradient: gradient of b_weight; defaults to the analytic
        gradient of |x|^-b
    :raises ValueError: for the abs weight, whose bilaplacian is a
        distribution
    """
    arrays = weight.on(field.grid)
    if arrays.bilaplacian is None:
        raise ValueError('Weight {!r} has no pointwise bilaplacian'.format(weight.name))
    grid = field.grid
    if b_gradient is None:
        b_gradient = weight_gradient(grid, params.b)
    alpha = float(params.alpha)
    u = field.values
    grad = gradient(field)
    density = np.abs(u) ** 2
    power = _power(field, params)

    total = -grid.quadrature(arrays.bilaplacian * density)
    flux = np.real(grad[None, :] * np.conj(grad[:, None]))
    total += 4 * grid.quadrature(np.sum(arrays.hessian * flux, axis=(0, 1)))
    nonlinear = (2 * alpha / (alpha + 2) *
                 grid.quadrature(arrays.laplacian * b_weight * power) -
                 4 / (alpha + 2) *
                 grid.quadrature(np.sum(arrays.gradient * b_gradient, axis=0) * power))
    return total - params.mu * nonlinear


def momentum_bracket_residual(field, params, b_weight, b_gradient=None):
    """Largest node-wise mismatch in {N(u), u}_p = -a/(a+2) grad(W|u|^(a+2))
    - 2/(a+2) grad(W) |u|^(a+2), N(u) = W|u|^a u.

    Both sides are assembled by the product rule from spectral grad(u)
    and the analytic grad(W).
    """
    grid = field.grid
    if b_gradient is None:
        b_gradient = weight_gradient(grid, params.b)
    alpha = float(params.alpha)
    u = field.values
    grad = gradient(field)
    modulus = np.abs(u)
    occupied = modulus > 0
    safe = np.where(occupied, modulus, 1.0)
    mod_alpha = modulus ** alpha
    mod_alpha_m2 = np.where(occupied, safe ** (alpha - 2), 0.0)
    radial = np.real(np.conj(u) * grad)

    nonlinearity = b_weight * mod_alpha * u
    grad_nonlinearity = (b_gradient * mod_alpha * u +
                         b_weight * (mod_alpha * grad +
                                     alpha * u * mod_alpha_m2 * radial))
    lhs = np.real(nonlinearity * np.conj(grad) - u * np.conj(grad_nonlinearity))

    power = modulus ** (alpha + 2)
    grad_power = (alpha + 2) * mod_alpha * radial
    grad_weighted = b_gradient * power + b_weight * grad_power
    rhs = -alpha / (alpha + 2) * grad_weighted - 2 / (alpha + 2) * b_gradient * power
    return float(np.sqrt(np.sum((lhs - rhs) ** 2, axis=0)).max())


def morawetz_integrand(field, params, weight=None):
    """int |x|^-(b+1) |u|^(alpha+2)."""
    if weight is None:
        weight = singular_weight(field.grid, params.b + 1)
    return field.grid.quadrature(weight * _power(field, params))


def nakanishi_integrand(field, t, params, b_weight):
    """int t^2 (t^2 + |x|^2)^(-3/2) W |u|^(alpha+2)."""
    if t == 0:
        return 0.0
    grid = field.grid
    kernel = t ** 2 * (t ** 2 + grid.radius ** 2) ** -1.5
    return grid.quadrature(kernel * b_weight * _power(field, params))


def gn_ratio(field, edge=1.0):
    """||u||_{2+4/d}^{2+4/d} / (sup_cube_l2(u)^{4/d} ||u||_{H^1}^2).

    The cube edge is the multiple of h closest to `edge`.
    It is computed in every dimension; see gn_caveat.
    """
    grid = field.grid
    q = 2 + 4.0 / grid.d
    numerator = lq_norm(field, q) ** q
    if numerator == 0:
        return 0.0
    local = sup_cube_l2(field, nearest_cube_edge(grid, edge))
    return numerator / (local ** (4.0 / grid.d) * h1_norm(field) ** 2)


def gn_caveat(d):
    """The caveat attached to gn_ratio in dimension d, or None."""
    return GN_CAVEAT if d < 3 else None


def _modulus_lq(grid, modulus, q):
    if q is INFINITY:
        return float(modulus.max())
    q = float(q)
    return grid.quadrature(modulus ** q) ** (1.0 / q)


class Sampler(object):

    """Evaluates a DiagnosticSample at given (field, t), reusing grid arrays.

    :b_weight: |x|^-b on the grid
    :energy_weight: weight of the potential energy; the weight the solver
        steps with (zero for linear control runs)
    """

    def __init__(self, params, grid, b_weight, energy_weight=None, lq=(),
                 grad_lq=(), weights=(), observables=OBSERVABLES):
        self.params = params
        self.grid = grid
        self.b_weight = b_weight
        self.energy_weight = b_weight if energy_weight is None else energy_weight
        self.lq = tuple(lq)
        self.grad_lq = tuple(grad_lq)
        self.weights = list(weights)
        self.observables = frozenset(observables)
        self.caveats = []
        if 'gn' in self.observables and gn_caveat(grid.d):
            logger.warning("d = {}: {}".format(grid.d, GN_CAVEAT))
            self.caveats.append(gn_caveat(grid.d))
        self._integrand_weight = None
        if 'morawetz_integrand' in self.observables:
            self._integrand_weight = singular_weight(grid, params.b + 1)

    def __call__(self, field, t):
        params = self.params
        needs_grad = bool(self.weights or self.grad_lq)
        grad = gradient(field) if needs_grad else None
        kinetic = kinetic_energy(field)
        potential = potential_energy(field, params, self.energy_weight)
        sample = DiagnosticSample(t=float(t), mass=mass(field),
                                  energy=kinetic + potential,
                                  kinetic=kinetic, potential_term=potential)
        if 'h1' in self.observables:
            sample.h1 = h1_norm(field)
        if self._integrand_weight is not None:
            sample.morawetz_integrand = morawetz_integrand(
                field, params, self._integrand_weight)
        if 'nakanishi' in self.observables:
            sample.nakanishi_integrand = nakanishi_integrand(
                field, t, params, self.b_weight)
        if 'gn' in self.observables:
            sample.gn_ratio = gn_ratio(field)
        modulus = np.abs(field.values)
        for q in self.lq:
            sample.lq_norms[q] = _modulus_lq(self.grid, modulus, q)
        if self.grad_lq:
            grad_modulus = np.sqrt(np.sum(np.abs(grad) ** 2, axis=0))
            for q in self.grad_lq:
                sample.grad_lq_norms[q] = _modulus_lq(self.grid, grad_modulus, q)
        for weight in self.weights:
            sample.morawetz_action[weight.name] = morawetz_action(field, weight, grad)
        return sample


def _times(series):
    return np.abs(np.array([sample.t for sample in series]))


def _column(series, name):
    values = [sample.to_row().get(name) for sample in series]
    if any(value is None for value in values):
        raise ValueError('Series has no {} column'.format(name))
    return np.array(values, dtype=float)


def morawetz_ceiling(series, params):
    """Bound on the spacetime integral from the sup of |M_|x|| along the run.

    (|M_|x|(0)| + 2 sup ||u||_2 ||grad u||_2) (alpha+2) / (2 alpha (d-1) + 4b)
    """
    if series[0].morawetz_action.get('abs') is None:
        raise ValueError('Series has no morawetz_abs column')
    alpha = float(params.alpha)
    spread = max(np.sqrt(s.mass) * np.sqrt(2 * s.kinetic) for s in series)
    initial = abs(series[0].morawetz_action['abs'])
    denominator = 2 * alpha * (params.d - 1) + 4 * float(params.b)
    return (initial + 2 * spread) * (alpha + 2) / denominator


def morawetz_spacetime_integral(series, params):
    """Trapezoid-in-|t| integral of the Morawetz integrand beside its ceiling."""
    if not series:
        raise ValueError('Empty series')
    integrand = _column(series, 'morawetz_integrand')
    integral = float(trapezoid(integrand, _times(series))) if len(series) > 1 else 0.0
    return SpacetimeBound(integral, morawetz_ceiling(series, params))


def morawetz_running_integral(series):
    """Integral up to every sample time."""
    integrand = _column(series, 'morawetz_integrand')
    if len(series) < 2:
        return np.zeros(len(series))
    return cumulative_trapezoid(integrand, _times(series), initial=0)


def trusted(series, window):
    """Samples with t_lo <= |t| <= t_hi and t != 0."""
    t_lo, t_hi = window
    return [s for s in series if s.t != 0 and t_lo <= abs(s.t) <= t_hi]


def decay_fit(series, q, d, window=None):
    """Least-squares slope of log ||u||_q against log |t|.

    :window: (t_lo, t_hi); all non-zero times when omitted
    :returns: DecayFit(fitted, theoretical, samples); theoretical is
        -d (1/2 - 1/q) as a Fraction
    :raises WindowTooShort: with fewer than five samples in the window
    """
    q = as_exponent(q)
    two_star = INFINITY if d <= 2 else Fraction(2 * d, d - 2)
    if q is INFINITY or not (2 < q < two_star):
        raise ValueError('q must lie in (2, {}), got {}'.format(two_star, q))
    if window is None:
        window = (0.0, float('inf'))
    samples = trusted(series, window)
    if len(samples) < MIN_FIT_SAMPLES:
        raise WindowTooShort('{} samples in the window [{}, {}], need {}'.format(
            len(samples), window[0], window[1], MIN_FIT_SAMPLES))
    norms = _column(samples, 'lq_' + exponent_label(q))
    slope = np.polyfit(np.log(_times(samples)), np.log(norms), 1)[0]
    theoretical = -d * (Fraction(1, 2) - 1 / q)
    logger.debug("Decay fit q={} over {} samples: {:.4f} (linear {})".format(
        q, len(samples), slope, theoretical))
    return DecayFit(float(slope), theoretical, len(samples))


def strichartz_norms(series, pairs):
    """||u||_{L^p_t L^q_x} and ||grad u||_{L^p_t L^q_x} over the sampled run."""
    times = _times(series)
    norms = []
    for pair in pairs:
        entry = OrderedDict([('pair', pair.label)])
        for key, prefix in (('u', 'lq_'), ('grad_u', 'grad_lq_')):
            values = _column(series, prefix + exponent_label(pair.q))
            if pair.p is INFINITY:
                entry[key] = float(values.max())
            elif len(series) < 2:
                entry[key] = 0.0
            else:
                p = float(pair.p)
                entry[key] = float(trapezoid(values ** p, times)) ** (1 / p)
        norms.append(entry)
    return norms
