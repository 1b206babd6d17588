"""Strang splitting for i u_t + Δu + μ|x|^-b |u|^α u = 0 on a periodic box.

Both sub-flows are solved exactly: the free flow is a Fourier multiplier
and the nonlinear flow only rotates the phase at each node.
"""
import logging
import time
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.optimize import brentq

from . import diagnostics, settings
from .errors import NonFiniteField, StepBlowup, ValidationError
from .grid import Field, fft, ifft, singular_weight
from .params import StrichartzPair, as_exponent, classify_regime

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

INITIAL_KINDS = ('gaussian', 'modulated-gaussian', 'spectrally-filtered-random')
DIRECTIONS = ('forward', 'backward')


@dataclass(frozen=True)
class InitialData(object):

    """Recipe for u_0."""

    kind: str = 'gaussian'
    amplitude: float = 1.0
    width: float = 1.0
    velocity: tuple = ()
    center: tuple = ()
    seed: int = 0
    cutoff: float = 4.0

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ValidationError('initial kind must be one of {}, got {!r}'.format(
                ', '.join(INITIAL_KINDS), self.kind))
        if self.amplitude < 0:
            raise ValidationError('amplitude must be non-negative')
        if not self.width > 0:
            raise ValidationError('width must be positive')
        if not self.cutoff > 0:
            raise ValidationError('cutoff must be positive')
        object.__setattr__(self, 'velocity', tuple(float(v) for v in self.velocity))
        object.__setattr__(self, 'center', tuple(float(c) for c in self.center))

    def _vector(self, values, d, name):
        if not values:
            return np.zeros(d)
        if len(values) != d:
            raise ValidationError('{} needs {} components, got {}'.format(
                name, d, len(values)))
        return np.array(values)

    def make_field(self, grid):
        """Sample the initial data on grid."""
        d = grid.d
        center = self._vector(self.center, d, 'center')
        shifted = grid.coords - center.reshape((d,) + (1,) * d)
        if self.kind == 'spectrally-filtered-random':
            rng = np.random.default_rng(self.seed)
            spectrum = (rng.standard_normal(grid.shape) +
                        1j * rng.standard_normal(grid.shape))
            spectrum[np.sqrt(grid.k2) > self.cutoff] = 0
            values = ifft(spectrum)
            peak = np.abs(values).max()
            if peak > 0:
                values = values * (self.amplitude / peak)
            return Field(grid, values)
        values = self.amplitude * np.exp(-np.sum(shifted ** 2, axis=0) /
                                         self.width ** 2)
        if self.kind == 'modulated-gaussian':
            velocity = self._vector(self.velocity, d, 'velocity')
            phase = np.tensordot(velocity, grid.coords, axes=1)
            values = values * np.exp(1j * phase)
        return Field(grid, values)


@dataclass(frozen=True)
class RunConfig(object):

    """A complete simulation request."""

    params: object
    grid: object
    dt: float
    t_end: float
    sample_every: int = 1
    initial: InitialData = InitialData()
    observables: tuple = diagnostics.OBSERVABLES
    pairs: tuple = ()
    lq: tuple = (4,)
    weights: tuple = ('quadratic', 'smoothed-abs', 'abs')
    smoothing: object = None
    checkpoint_every: int = 1
    direction: str = 'forward'
    linear: bool = False
    t_transient: float = 1.0
    t_wrap: object = None

    def __post_init__(self):
        self.params.check_simulation()
        if self.grid.d != self.params.d:
            raise ValidationError('grid dimension {} does not match d = {}'.format(
                self.grid.d, self.params.d))
        if not self.dt > 0:
            raise ValidationError('dt must be positive')
        if self.t_end < 0:
            raise ValidationError('t_end must be non-negative')
        if self.sample_every < 1 or self.checkpoint_every < 1:
            raise ValidationError('sample_every and checkpoint_every must be >= 1')
        if self.t_end > 0:
            if self.dt > self.t_end:
                raise ValidationError('dt must not exceed t_end')
            if self.sample_every * self.dt > self.t_end * (1 + 1e-12):
                raise ValidationError('sample_every * dt must not exceed t_end')
            steps = self.t_end / self.dt
            if abs(steps - round(steps)) > 1e-9 * steps:
                raise ValidationError('t_end must be a whole number of steps')
        if self.direction not in DIRECTIONS:
            raise ValidationError('direction must be forward or backward')
        unknown = set(self.observables) - set(diagnostics.OBSERVABLES)
        if unknown:
            raise ValidationError('unknown observables: {}'.format(
                ', '.join(sorted(unknown))))
        for name in self.weights:
            if name not in diagnostics.WEIGHT_NAMES:
                raise ValidationError('unknown Morawetz weight {!r}'.format(name))
        pairs = tuple(p if isinstance(p, StrichartzPair) else
                      StrichartzPair.from_text(p) for p in self.pairs)
        for pair in pairs:
            if not pair.admissible(self.params.d):
                raise ValidationError('pair {} is not admissible in d = {}'.format(
                    pair.label, self.params.d))
        object.__setattr__(self, 'pairs', pairs)
        object.__setattr__(self, 'lq', tuple(as_exponent(q) for q in self.lq))

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    @property
    def sign(self):
        return 1 if self.direction == 'forward' else -1

    @property
    def lq_exponents(self):
        """Requested L^q exponents plus those of the tracked pairs."""
        exponents = []
        for q in tuple(self.lq) + tuple(pair.q for pair in self.pairs):
            if q not in exponents:
                exponents.append(q)
        return tuple(exponents)

    @property
    def grad_exponents(self):
        exponents = []
        for pair in self.pairs:
            if pair.q not in exponents:
                exponents.append(pair.q)
        return tuple(exponents)


@dataclass
class RunOutput(object):

    """Everything evolve records for one run."""

    config: RunConfig
    series: list
    final: Field
    checkpoints: list
    t_wrap: float
    report: object
    step_seconds: list = dataclass_field(default_factory=list)
    failed_step: object = None
    caveats: list = dataclass_field(default_factory=list)


def free_propagate(field, t):
    """Apply e^{itΔ}: multiply the spectrum by exp(-i|k|^2 t)."""
    grid = field.grid
    return Field.from_spectrum(grid, field.spectrum() * np.exp(-1j * grid.k2 * t))


def nonlinear_phase_step(field, dt, params, weight):
    """Exact flow of i u_t = -μ W |u|^α u over time dt."""
    values = field.values
    phase = params.mu * dt * weight * np.abs(values) ** float(params.alpha)
    return field.with_values(values * np.exp(1j * phase))


class SplitStepper(object):

    """Strang step with the free-flow multiplier cached for a fixed dt."""

    def __init__(self, grid, dt, params, weight):
        self.grid = grid
        self.dt = dt
        self.params = params
        self.weight = np.asarray(weight, dtype=float)
        self._kinetic = np.exp(-1j * grid.k2 * dt)

    def __call__(self, field, step=None):
        half = 0.5 * self.dt
        try:
            field = nonlinear_phase_step(field, half, self.params, self.weight)
            field = field.with_values(ifft(fft(field.values) * self._kinetic))
            return nonlinear_phase_step(field, half, self.params, self.weight)
        except NonFiniteField:
            logger.error("Step {} produced non-finite values".format(step))
            raise StepBlowup(step)


def strang_step(field, dt, params, weight, step=None):
    """Half nonlinear, full free, half nonlinear."""
    return SplitStepper(field.grid, dt, params, weight)(field, step)


def _axis_reach(x_mean, x_var, k_mean, k_var, half, safety):
    """Distance from the box edge of one axis after free flow for t."""
    def reach(t):
        return (abs(x_mean) + 2 * abs(k_mean) * t +
                safety * np.sqrt(x_var + 4 * k_var * t ** 2) - half)
    return reach


def wrap_horizon(field, safety=None):
    """Time after which free dispersion of this field reaches the box edge.

    Along every axis the free flow moves the mean of |u|^2 at twice the
    mean wavenumber and grows its variance as var_x + 4 var_k t^2. t_wrap
    is the first time the mean offset plus `safety` standard deviations
    reaches L/2 on some axis.
    """
    if safety is None:
        safety = settings.WRAP_SAFETY
    grid = field.grid
    density = np.abs(field.values) ** 2
    mass = density.sum()
    if mass == 0:
        return float('inf')
    d = grid.d
    x = grid.coords.reshape(d, -1)
    weights = density.ravel() / mass
    x_mean = x @ weights
    x_var = ((x - x_mean[:, None]) ** 2) @ weights
    spectral = np.abs(field.spectrum()) ** 2
    k = grid.k.reshape(d, -1)
    k_weights = spectral.ravel() / spectral.sum()
    k_mean = k @ k_weights
    k_var = ((k - k_mean[:, None]) ** 2) @ k_weights
    half = grid.L / 2

    horizon = float('inf')
    for axis in range(d):
        reach = _axis_reach(x_mean[axis], x_var[axis], k_mean[axis], k_var[axis],
                            half, safety)
        if reach(0.0) >= 0:
            logger.warning("Initial data already fills the box; t_wrap = 0")
            return 0.0
        if k_mean[axis] == 0 and k_var[axis] == 0:
            continue
        upper = 1.0
        while reach(upper) < 0:
            upper *= 2
        horizon = min(horizon, float(brentq(reach, 0.0, upper)))
    return horizon


def evolve(config):
    """Run the solver and record samples and checkpoints.

    :config: RunConfig
    :returns: RunOutput
    :raises StepBlowup: with `output` holding everything recorded so far
    """
    params, grid = config.params, config.grid
    report = classify_regime(params)
    if not report.flags['scattering'] or not params.defocusing:
        logger.info("Parameters are outside the scattering hypotheses "
                    "({}); the run is labelled accordingly".format(report.regime))

    field = config.initial.make_field(grid)
    b_weight = singular_weight(grid, params.b)
    if config.linear:
        step_weight = np.zeros(grid.shape)
    else:
        step_weight = b_weight
    weights = [diagnostics.morawetz_weight(name, grid, config.smoothing)
               for name in config.weights]
    sampler = diagnostics.Sampler(params, grid, b_weight,
                                  energy_weight=step_weight,
                                  lq=config.lq_exponents,
                                  grad_lq=config.grad_exponents,
                                  weights=weights,
                                  observables=config.observables)
    dt = config.sign * config.dt
    stepper = SplitStepper(grid, dt, params, step_weight)
    t_wrap = config.t_wrap if config.t_wrap is not None else wrap_horizon(field)
    n_steps = config.n_steps
    logger.info("Evolving {} steps of dt={} on d={} n={} L={} "
                "(t_wrap={:.4g})".format(n_steps, dt, grid.d, grid.n, grid.L, t_wrap))

    series = [sampler(field, 0.0)]
    checkpoints = [(0.0, field)]
    output = RunOutput(config=config, series=series, final=field,
                       checkpoints=checkpoints, t_wrap=t_wrap, report=report,
                       caveats=list(sampler.caveats))
    samples = 0
    for step in range(1, n_steps + 1):
        started = time.perf_counter()
        try:
            field = stepper(output.final, step)
        except StepBlowup as e:
            output.failed_step = step
            e.output = output
            raise
        output.step_seconds.append(time.perf_counter() - started)
        output.final = field
        if step % config.sample_every == 0 or step == n_steps:
            t = config.sign * step * config.dt
            series.append(sampler(field, t))
            samples += 1
            if samples % config.checkpoint_every == 0 or step == n_steps:
                checkpoints.append((t, field))
            logger.debug("t={:.6g} mass={:.15g} energy={:.15g}".format(
                t, series[-1].mass, series[-1].energy))
    if output.step_seconds:
        logger.info("Finished {} steps, mean {:.3g}s per step".format(
            n_steps, float(np.mean(output.step_seconds))))
    return output
