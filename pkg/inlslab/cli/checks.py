"""Identity checks run by `inlslab verify` on a recorded run."""
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import diagnostics, settings
from ..dispatch import CheckResult, SkipCheck, within
from ..errors import WindowTooShort
from ..grid import gradient, singular_weight, weight_gradient
from ..params import INFINITY
from ..solver import SplitStepper
from . import lab
from .output import trusted_window

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

IDENTITY_CHECKPOINTS = 3
NEAR_ORIGIN_RADIUS = 1.0
NEAR_ORIGIN_RATIO = 1e-2


@dataclass
class VerifyContext(object):

    """A loaded run plus the weights it was stepped with."""

    run: object
    b_weight: object
    b_gradient: object

    @classmethod
    def from_run(cls, run):
        config = run.config
        grid, params = config.grid, config.params
        if config.linear:
            zeros = np.zeros(grid.shape)
            return cls(run, zeros, np.zeros((grid.d,) + grid.shape))
        return cls(run, singular_weight(grid, params.b), weight_gradient(grid, params.b))

    @property
    def config(self):
        return self.run.config

    @property
    def params(self):
        return self.run.config.params

    @property
    def series(self):
        return self.run.series

    def window(self):
        return trusted_window(self.run.manifest)

    def before_wrap(self, items):
        """Samples or (t, field) checkpoints with |t| <= t_wrap."""
        t_wrap = self.window()[1]
        return [item for item in items
                if abs(item[0] if isinstance(item, tuple) else item.t) <= t_wrap]

    def require_defocusing(self):
        if not self.params.defocusing:
            raise SkipCheck('focusing run')


def _spread(values):
    values = np.asarray(values, dtype=float)
    return float(np.max(np.abs(values - values[0])))


@lab.check
def mass_conservation(context):
    masses = [s.mass for s in context.series]
    if masses[0] == 0:
        raise SkipCheck('zero mass')
    return within(_spread(masses) / masses[0], settings.TOLERANCES['mass_drift'],
                  'max relative mass drift')


@lab.check
def energy_conservation(context):
    energies = [s.energy for s in context.series]
    scale = abs(energies[0]) or 1.0
    return within(_spread(energies) / scale, settings.TOLERANCES['energy_drift'],
                  'max relative energy drift')


@lab.check
def uniform_h1_bound(context):
    """||grad u(t)||^2 <= 2 E(u_0) when the energy has no negative part."""
    context.require_defocusing()
    bound = 2 * context.series[0].energy
    worst = max(2 * s.kinetic - bound for s in context.series)
    return within(worst, settings.TOLERANCES['uniform_h1'] * max(abs(bound), 1.0),
                  'max of ||grad u||^2 - 2E(0)')


@lab.check
def morawetz_integrand_positive(context):
    values = [s.morawetz_integrand for s in context.series]
    if any(value is None for value in values):
        raise SkipCheck('morawetz_integrand not sampled')
    return CheckResult(None, min(values) >= 0, min(values), 0.0,
                       'smallest sampled integrand')


@lab.check
def morawetz_ceiling(context):
    """Running spacetime integral below the ceiling of every truncated run,
    up to the wrap horizon.

    The bound needs the bilaplacian of |x| to be a non-positive measure,
    which holds for d = 3.
    """
    context.require_defocusing()
    if context.params.d != 3:
        raise SkipCheck('stated for d = 3')
    if context.config.linear:
        raise SkipCheck('linear run')
    series = context.before_wrap(context.series)
    if series[0].morawetz_integrand is None:
        raise SkipCheck('morawetz_integrand not sampled')
    if 'abs' not in series[0].morawetz_action:
        raise SkipCheck('abs weight not sampled')
    running = diagnostics.morawetz_running_integral(series)
    ceilings = [diagnostics.morawetz_ceiling(series[:i + 1], context.params)
                for i in range(len(series))]
    margins = [value / max(ceiling, 1e-300) for value, ceiling in zip(running, ceilings)]
    return within(max(margins), 1.0, 'max running integral / ceiling')


@lab.check
def smoothed_action_monotone(context):
    """M_a for sqrt(delta^2 + |x|^2) does not decrease in t before t_wrap.

    Only for d = 3 is the bilaplacian of this weight non-positive everywhere.
    """
    context.require_defocusing()
    if context.params.d != 3:
        raise SkipCheck('bilaplacian changes sign for d < 3')
    series = sorted(context.before_wrap(context.series), key=lambda s: s.t)
    if 'smoothed-abs' not in series[0].morawetz_action:
        raise SkipCheck('smoothed-abs weight not sampled')
    action = np.array([s.morawetz_action['smoothed-abs'] for s in series])
    scale = max(1.0, float(np.abs(action).max()))
    drop = float(max(0.0, -np.diff(action).min())) if len(action) > 1 else 0.0
    return within(drop / scale, settings.TOLERANCES['monotone_action'],
                  'largest decrease of M_a / run scale')


def _near_origin_ratio(field, radius=NEAR_ORIGIN_RADIUS):
    """max |u| on |x| <= radius over max |u|."""
    modulus = np.abs(field.values)
    peak = modulus.max()
    if peak == 0:
        return 0.0
    return float(modulus[field.grid.radius <= radius].max() / peak)


def _identity_fields(context, checkpoints=None):
    if checkpoints is None:
        checkpoints = context.run.checkpoints
    if len(checkpoints) <= IDENTITY_CHECKPOINTS:
        return checkpoints
    picks = np.linspace(0, len(checkpoints) - 1, IDENTITY_CHECKPOINTS)
    picks = picks.round().astype(int)
    return [checkpoints[i] for i in picks]


@lab.check
def momentum_bracket(context):
    """Pointwise momentum bracket identity at selected checkpoints."""
    params = context.params
    alpha = float(params.alpha)
    worst = 0.0
    for _, field in _identity_fields(context):
        residual = diagnostics.momentum_bracket_residual(
            field, params, context.b_weight, context.b_gradient)
        modulus = float(np.abs(field.values).max())
        grad = float(np.abs(gradient(field)).max())
        scale = modulus ** (alpha + 1) * (
            modulus * float(np.abs(context.b_gradient).max()) +
            float(np.abs(context.b_weight).max()) * grad)
        if scale > 0:
            worst = max(worst, residual / scale)
    return within(worst, settings.TOLERANCES['momentum_bracket'],
                  'max residual / amplitude scale')


@lab.check
def morawetz_identity(context):
    """Centered difference of M_a against its identity for smooth weights.

    Spectral derivatives of |x|^-b u are only accurate where u vanishes
    near the origin, so nonlinear runs use the checkpoints before t_wrap
    whose field is negligible there.
    """
    config, params = context.config, context.params
    weights = [diagnostics.morawetz_weight(name, config.grid, config.smoothing)
               for name in config.weights if name != 'abs']
    if not weights:
        raise SkipCheck('no weight with a pointwise bilaplacian')
    checkpoints = context.before_wrap(context.run.checkpoints)
    if not config.linear:
        checkpoints = [(t, field) for t, field in checkpoints
                       if _near_origin_ratio(field) <= NEAR_ORIGIN_RATIO]
    if not checkpoints:
        raise SkipCheck('field not negligible near the singular point')
    dt = config.dt
    forward = SplitStepper(config.grid, dt, params, context.b_weight)
    backward = SplitStepper(config.grid, -dt, params, context.b_weight)
    worst = 0.0
    for _, field in _identity_fields(context, checkpoints):
        after, before = forward(field), backward(field)
        for weight in weights:
            rate = (diagnostics.morawetz_action(after, weight) -
                    diagnostics.morawetz_action(before, weight)) / (2 * dt)
            rhs = diagnostics.morawetz_rhs(field, weight, params,
                                           context.b_weight, context.b_gradient)
            error = abs(rate - rhs) / max(abs(rhs), 1e-300)
            logger.debug("{}: dM/dt={:.10g} rhs={:.10g}".format(weight.name, rate, rhs))
            worst = max(worst, error)
    return within(worst, settings.TOLERANCES['morawetz_identity'],
                  'max relative error of dM_a/dt')


@lab.check
def decay_half(context):
    """L^4 norm halves within the trusted window and then does not grow."""
    context.require_defocusing()
    if context.params.d != 3:
        raise SkipCheck('stated for d = 3')
    series = context.series
    label = 4
    if not all(label in s.lq_norms for s in series):
        raise SkipCheck('L4 norm not sampled')
    samples = diagnostics.trusted(series, context.window())
    if not samples:
        raise SkipCheck('no trusted samples')
    norms = np.array([s.lq_norms[label] for s in samples])
    upticks = norms[1:] / norms[:-1] - 1
    if len(upticks) and upticks.max() > 0.01:
        return CheckResult(None, False, float(upticks.max()), 0.01,
                           'L4 norm grows after the transient')
    return within(norms[-1] / series[0].lq_norms[label], 0.5,
                  'last trusted L4 norm / initial')


@lab.check
def linear_decay_rate(context):
    """Free control runs decay at the linear rate, within 15 percent."""
    if not context.config.linear:
        raise SkipCheck('nonlinear run')
    series = context.series
    d = context.params.d
    exponents = [q for q in series[0].lq_norms
                 if q is not INFINITY and q > 2 and (d <= 2 or q < Fraction(2 * d, d - 2))]
    if not exponents:
        raise SkipCheck('no L^q column with q in (2, 2*)')
    worst = 0.0
    for q in exponents:
        try:
            fit = diagnostics.decay_fit(series, q, d, context.window())
        except WindowTooShort as e:
            raise SkipCheck(str(e))
        worst = max(worst, abs(fit.fitted / float(fit.theoretical) - 1))
    return within(worst, 0.15, 'relative error of the fitted decay exponent')
