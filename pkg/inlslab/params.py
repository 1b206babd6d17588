"""Exact exponent bookkeeping for the inhomogeneous NLS.

Everything here works on :class:`fractions.Fraction` values and the
:data:`INFINITY` marker; nothing is ever converted to floating point.
"""
import logging
import operator
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering

from . import settings
from .errors import RegimeError, SearchExhausted, ValidationError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

BALL = 'ball'
EXTERIOR = 'exterior'


@total_ordering
class _Infinity(object):

    """Positive infinity for exponents such as the energy-critical power
    in dimensions one and two."""

    def __eq__(self, other):
        return isinstance(other, _Infinity)

    def __lt__(self, other):
        return False

    def __hash__(self):
        return hash('inlslab.INFINITY')

    def __float__(self):
        return float('inf')

    def __repr__(self):
        return 'INFINITY'

    def __str__(self):
        return 'inf'

    def __reduce__(self):
        return 'INFINITY'


INFINITY = _Infinity()


def as_rational(value):
    """Coerce an int, Fraction or decimal/ratio string to a Fraction.

    Floats are read through their shortest repr, so 0.1 becomes 1/10.
    """
    if isinstance(value, bool):
        raise ValueError('Not a rational: {!r}'.format(value))
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError('Not a rational: {!r}'.format(value))
    raise ValueError('Not a rational: {!r}'.format(value))


def as_exponent(value):
    """Like :func:`as_rational` but also accepts infinity."""
    if value is INFINITY:
        return INFINITY
    if isinstance(value, float) and value == float('inf'):
        return INFINITY
    if isinstance(value, str) and value.strip().lower() in ('inf', '∞', 'infinity'):
        return INFINITY
    return as_rational(value)


def reciprocal(value):
    """1/value, with 1/inf = 0."""
    if value is INFINITY:
        return Fraction(0)
    return 1 / Fraction(value)


def format_rational(value):
    """Serialise a rational as "numerator/denominator" (or "inf")."""
    if value is None:
        return None
    if value is INFINITY:
        return 'inf'
    value = as_rational(value)
    return '{}/{}'.format(value.numerator, value.denominator)


def exponent_label(value):
    """Compact label for column names: "4", "10/3", "inf"."""
    return str(as_exponent(value))


@dataclass(frozen=True)
class Params(object):

    """Problem parameters (d, b, alpha, mu)."""

    d: int
    b: Fraction
    alpha: Fraction
    mu: int = -1

    def __post_init__(self):
        object.__setattr__(self, 'b', as_rational(self.b))
        object.__setattr__(self, 'alpha', as_rational(self.alpha))
        if isinstance(self.d, bool) or not isinstance(self.d, int) or self.d < 1:
            raise ValidationError('d must be a positive integer, '
                                  'got {!r}'.format(self.d))
        if self.b <= 0:
            raise ValidationError('b must be positive, got {}'.format(self.b))
        if self.alpha <= 0:
            raise ValidationError('alpha must be positive, '
                                  'got {}'.format(self.alpha))
        if self.mu not in (1, -1):
            raise ValidationError('mu must be +1 or -1, got {!r}'.format(self.mu))

    @property
    def defocusing(self):
        return self.mu == -1

    def check_simulation(self):
        """Raise unless the solver can handle these parameters."""
        if self.d not in (1, 2, 3):
            raise ValidationError('simulation needs d in {{1, 2, 3}}, '
                                  'got {}'.format(self.d))
        if not self.b < min(2, self.d):
            raise ValidationError('simulation needs 0 < b < min(2, d), '
                                  'got b = {}'.format(self.b))
        return self

    def to_dict(self):
        return OrderedDict([('d', self.d),
                            ('b', format_rational(self.b)),
                            ('alpha', format_rational(self.alpha)),
                            ('mu', self.mu)])


@dataclass
class ExponentReport(object):

    """Critical exponents and theorem hypotheses for (d, b[, alpha])."""

    d: int
    b: Fraction
    alpha_star: Fraction
    alpha_sup: object
    two_star: object
    tilde_alpha: object
    tilde_b: Fraction
    alpha: object = None
    gamma_c: object = None
    regime: object = None
    flags: dict = field(default_factory=OrderedDict)

    def rows(self):
        """(name, value) pairs in display order."""
        rows = [('d', str(self.d)),
                ('b', format_rational(self.b))]
        if self.alpha is not None:
            rows.append(('alpha', format_rational(self.alpha)))
        rows.extend([('alpha_star', format_rational(self.alpha_star)),
                     ('alpha_sup', format_rational(self.alpha_sup)),
                     ('two_star', format_rational(self.two_star)),
                     ('tilde_alpha', format_rational(self.tilde_alpha)),
                     ('tilde_b', format_rational(self.tilde_b))])
        if self.gamma_c is not None:
            rows.append(('gamma_c', format_rational(self.gamma_c)))
        if self.regime is not None:
            rows.append(('regime', self.regime))
        for name, value in self.flags.items():
            rows.append((name, 'yes' if value else 'no'))
        return rows

    def to_dict(self):
        data = OrderedDict()
        for name, value in self.rows():
            if name in self.flags:
                data.setdefault('flags', OrderedDict())[name] = self.flags[name]
            elif name == 'd':
                data[name] = self.d
            else:
                data[name] = value
        return data


@dataclass(frozen=True)
class StrichartzPair(object):

    """A time/space exponent pair (p, q)."""

    p: object
    q: object

    def __post_init__(self):
        object.__setattr__(self, 'p', as_exponent(self.p))
        object.__setattr__(self, 'q', as_exponent(self.q))

    @classmethod
    def from_text(cls, text):
        """Parse "p:q", e.g. "inf:2" or "8/3:4"."""
        try:
            p, q = text.split(':')
        except ValueError:
            raise ValueError('Pair must look like "p:q", got {!r}'.format(text))
        return cls(p, q)

    def admissible(self, d):
        return is_admissible(self.p, self.q, d)

    @property
    def label(self):
        return '{}:{}'.format(exponent_label(self.p), exponent_label(self.q))


_RELATIONS = {
    '<': operator.lt,
    '<=': operator.le,
    '>': operator.gt,
    '>=': operator.ge,
    '==': operator.eq,
}


@dataclass(frozen=True)
class ConstraintRecord(object):

    """One checked relation `left relation right`."""

    name: str
    left: object
    relation: str
    right: object

    def holds(self):
        return _RELATIONS[self.relation](self.left, self.right)

    def to_dict(self):
        return OrderedDict([('constraint', self.name),
                            ('left', format_rational(self.left)),
                            ('relation', self.relation),
                            ('right', format_rational(self.right)),
                            ('holds', self.holds())])


class ConstraintLog(object):

    """Collect constraint records while building a certificate."""

    def __init__(self):
        self.records = []

    def check(self, name, left, relation, right):
        record = ConstraintRecord(name, left, relation, right)
        self.records.append(record)
        if not record.holds():
            logger.debug("Constraint {!r} fails: {} {} {}".format(
                name, left, relation, right))
        return record.holds()

    def failures(self):
        return [r for r in self.records if not r.holds()]


@dataclass(frozen=True)
class ExponentCertificate(object):

    """Witnesses for the two Hölder/Strichartz exponent systems used to
    bound the nonlinearity on the unit ball and on its exterior."""

    epsilon: Fraction
    tau: Fraction
    q1: Fraction
    p1: Fraction
    theta1: Fraction
    q2: Fraction
    p2: Fraction
    theta2: Fraction
    constraint_log: tuple = ()

    def verify(self):
        """Re-evaluate every logged relation."""
        return all(record.holds() for record in self.constraint_log)

    def rows(self):
        return [(name, format_rational(getattr(self, name)))
                for name in ('epsilon', 'tau', 'q1', 'p1', 'theta1',
                             'q2', 'p2', 'theta2')]

    def to_dict(self):
        data = OrderedDict(self.rows())
        data['constraint_log'] = [r.to_dict() for r in self.constraint_log]
        return data


def critical_exponents(d, b):
    """Return the exponents that depend on (d, b) only.

    :d: dimension (any integer >= 1)
    :b: weight exponent, b > 0
    :returns: ExponentReport without alpha, gamma_c or flags
    """
    b = as_rational(b)
    if b <= 0:
        raise ValueError('b must be positive, got {}'.format(b))
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ValueError('d must be a positive integer, got {!r}'.format(d))
    alpha_star = (4 - 2 * b) / d
    if d >= 3:
        alpha_sup = (4 - 2 * b) / (d - 2)
        two_star = Fraction(2 * d, d - 2)
    else:
        alpha_sup = INFINITY
        two_star = INFINITY
    return ExponentReport(d=d,
                          b=b,
                          alpha_star=alpha_star,
                          alpha_sup=alpha_sup,
                          two_star=two_star,
                          tilde_alpha=tilde_alpha(d, b, min(Fraction(d, 2), 1)),
                          tilde_b=Fraction(d, 3) if d <= 3 else Fraction(2))


def tilde_alpha(d, b, gamma):
    """Upper power of the H^gamma well-posedness range."""
    gamma = as_rational(gamma)
    if gamma == Fraction(d, 2):
        return INFINITY
    return (4 - 2 * as_rational(b)) / (d - 2 * gamma)


def critical_sobolev(params):
    """Scaling-critical regularity d/2 - (2-b)/alpha."""
    return Fraction(params.d, 2) - (2 - params.b) / params.alpha


def is_admissible(p, q, d):
    """True iff (p, q) is Schrödinger admissible in dimension d."""
    try:
        p = as_exponent(p)
        q = as_exponent(q)
    except ValueError:
        return False
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        return False
    if p < 2 or q < 2:
        return False
    if d == 2 and p == 2 and q is INFINITY:
        return False
    return 2 * reciprocal(p) + d * reciprocal(q) == Fraction(d, 2)


def admissible_p(q, d):
    """Time exponent p = 2/(d/2 - d/q) paired with q, or None when the
    denominator is negative."""
    denominator = Fraction(d, 2) - d * reciprocal(as_exponent(q))
    if denominator < 0:
        return None
    if denominator == 0:
        return INFINITY
    return 2 / denominator


def extended_lwp(d, b, alpha):
    """Hypotheses of the improved H^1 local theory (four branches)."""
    sup = critical_exponents(d, b).alpha_sup
    if d >= 4:
        return b < 2 and alpha < sup
    if d == 3:
        if b < 1:
            return alpha < sup
        if b < Fraction(3, 2):
            return alpha < (6 - 4 * b) / (2 * b - 1)
        return False
    if d == 2:
        return b < 1 and alpha < sup
    return False


def _regime_label(alpha, alpha_star, alpha_sup):
    if alpha < alpha_star:
        return 'mass-subcritical'
    if alpha == alpha_star:
        return 'mass-critical'
    if alpha < alpha_sup:
        return 'intercritical'
    if alpha == alpha_sup:
        return 'energy-critical'
    return 'energy-supercritical'


def classify_regime(params):
    """Check (d, b, alpha) against every theorem's hypotheses.

    :params: Params
    :returns: ExponentReport with gamma_c, regime label and flags
    """
    d, b, alpha = params.d, params.b, params.alpha
    report = critical_exponents(d, b)
    report.alpha = alpha
    report.gamma_c = critical_sobolev(params)
    low, high = report.alpha_star, report.alpha_sup
    report.regime = _regime_label(alpha, low, high)

    flags = OrderedDict()
    flags['energy_lwp'] = b < min(2, d) and alpha < high
    flags['energy_global'] = b < min(2, d) and alpha < low
    flags['strichartz_lwp'] = d >= 2 and b < report.tilde_b and alpha < high
    flags['extended_lwp'] = extended_lwp(d, b, alpha)
    flags['decay'] = d >= 3 and b < 2 and alpha < high
    flags['scattering'] = (
        (d >= 4 and b < 2 and low < alpha < high) or
        (d == 3 and b < Fraction(5, 4) and low < alpha < 3 - 2 * b))
    flags['defocusing'] = params.defocusing
    report.flags = flags
    logger.debug("Classified {!r} as {}".format(params, report.regime))
    return report


def weight_integrability(d, s, gamma, region):
    """Whether |x|^-s lies in L^gamma of the unit ball or its exterior.

    :region: BALL or EXTERIOR
    """
    gamma = as_exponent(gamma)
    if gamma < 1:
        raise ValueError('gamma must be >= 1, got {}'.format(gamma))
    ratio = d * reciprocal(gamma)
    s = as_rational(s)
    if region == BALL:
        return ratio > s
    if region == EXTERIOR:
        return ratio < s
    raise ValueError('region must be {!r} or {!r}, got {!r}'.format(
        BALL, EXTERIOR, region))


def _check_weight(log, name, d, s, d_over_gamma, region):
    """Log the integrability of |x|^-s given d/gamma, and that the logged
    relation agrees with weight_integrability (1 for integrable, 0 not)."""
    if not log.check('{}: gamma >= 1'.format(name), d_over_gamma, '<=', d):
        return
    if not log.check('{}: gamma finite'.format(name), d_over_gamma, '>', 0):
        return
    gamma = d / d_over_gamma
    relation = '>' if region == BALL else '<'
    logged = log.check(name, d * reciprocal(gamma), relation, s)
    log.check('{}: integrability agrees'.format(name),
              int(weight_integrability(d, s, gamma, region)), '==', int(logged))


def _exponent_side(log, index, d, alpha, q, low, high):
    """Log the shared checks for one (p_i, q_i, theta_i) system."""
    ok = log.check('q{} > {}'.format(index, low), q, '>', low)
    log.check('q{} < {}'.format(index, high), q, '<', high)
    if not ok:
        return None, None
    p = admissible_p(q, d)
    log.check('(p{0}, q{0}) admissible'.format(index),
              2 * reciprocal(p) + d * reciprocal(q), '==', Fraction(d, 2))
    theta = p - 2
    log.check('theta{} > 0'.format(index), theta, '>', 0)
    log.check('theta{} < alpha'.format(index), theta, '<', alpha)
    return p, theta


def _build_certificate(params, epsilon, tau):
    d, b, alpha = params.d, params.b, params.alpha
    log = ConstraintLog()
    values = {}
    if d >= 4:
        two_star = Fraction(2 * d, d - 2)
        centre = d * (alpha + 2) / (d - b)
        log.check('alpha < d-b-2', alpha, '<', d - b - 2)
        for index, sign, region in ((1, 1, BALL), (2, -1, EXTERIOR)):
            q = centre + sign * epsilon
            p, theta = _exponent_side(log, index, d, alpha, q, 2, two_star)
            log.check('p{} < alpha+2 (epsilon form)'.format(index),
                      d * (alpha + 2) * (d * alpha - 4 + 2 * b) +
                      sign * epsilon * (d - b) * (d * (alpha + 2) - 4),
                      '>', 0)
            log.check('q{} < d'.format(index), q, '<', d)
            _check_weight(log, '|x|^-b in L^gamma{} ({})'.format(index, region),
                          d, b, d - d * (alpha + 2) / q, region)
            values[index] = (q, p, theta)
    elif d == 3:
        quadratic = (3 * alpha ** 2 + (1 + 2 * b) * alpha + 4 * b - 6 +
                     tau * (3 * alpha + 2))
        log.check('tau > 0', tau, '>', 0)
        log.check('tau < 1', tau, '<', 1)
        log.check('1-b-tau < alpha', 1 - b - tau, '<', alpha)
        log.check('alpha < 3-2b-tau', alpha, '<', 3 - 2 * b - tau)
        log.check('quadratic (tau form)', quadratic, '>', 0)
        centre = 3 * (alpha + 1 + tau) / (2 - b)
        for index, sign, region in ((1, 1, BALL), (2, -1, EXTERIOR)):
            q = centre + sign * epsilon
            p, theta = _exponent_side(log, index, d, alpha, q, 3, 6)
            log.check('p{} < alpha+2 (epsilon form)'.format(index),
                      3 * quadratic + sign * epsilon * (2 - b) * (3 * alpha + 2),
                      '>', 0)
            _check_weight(log,
                          '|x|^-(b+1) in L^gamma{} ({})'.format(index, region),
                          d, b + 1, 3 - 3 * (alpha + 1 + tau) / q, region)
            values[index] = (q, p, theta)
    else:
        raise RegimeError('No exponent system for d = {}'.format(d))

    failures = log.failures()
    if failures:
        return None, failures
    (q1, p1, theta1), (q2, p2, theta2) = values[1], values[2]
    certificate = ExponentCertificate(epsilon=epsilon, tau=tau,
                                      q1=q1, p1=p1, theta1=theta1,
                                      q2=q2, p2=p2, theta2=theta2,
                                      constraint_log=tuple(log.records))
    return certificate, []


def _tau_for(params, tau):
    if params.d >= 4:
        if tau is not None and as_rational(tau) != 0:
            raise ValueError('tau must be 0 when d >= 4, got {}'.format(tau))
        return Fraction(0)
    if tau is None:
        raise ValueError('tau is required when d = 3')
    return as_rational(tau)


def certificate_for(params, epsilon, tau=None):
    """Build and verify a certificate for explicit witnesses.

    :raises SearchExhausted: naming the first failing constraint
    """
    epsilon = as_rational(epsilon)
    if epsilon <= 0:
        raise ValueError('epsilon must be positive, got {}'.format(epsilon))
    certificate, failures = _build_certificate(params, epsilon,
                                               _tau_for(params, tau))
    if failures:
        raise SearchExhausted(
            'epsilon={} tau={} fails {!r}'.format(
                format_rational(epsilon), format_rational(tau),
                failures[0].name),
            constraint=failures[0].name)
    return certificate


def halving(start, depth=None):
    """start * 2^-k for k = 0..depth."""
    if depth is None:
        depth = settings.SEARCH_DEPTH
    return [start / 2 ** k for k in range(depth + 1)]


def scattering_certificate(params, epsilon_hint=None, tau_hint=None):
    """Find exponent witnesses for the scattering argument.

    Without hints, epsilon runs through 1/10 * 2^-k and (for d = 3) tau
    through 1/100 * 2^-k; the first verified pair wins.

    :raises RegimeError: when the scattering hypotheses fail
    :raises SearchExhausted: when no witness verifies
    """
    report = classify_regime(params)
    if not report.flags['scattering']:
        raise RegimeError(
            'd={} b={} alpha={} is outside the scattering range'.format(
                params.d, format_rational(params.b),
                format_rational(params.alpha)))
    if epsilon_hint is not None:
        epsilons = [as_rational(epsilon_hint)]
    else:
        epsilons = halving(Fraction(1, 10))
    if params.d >= 4:
        taus = [_tau_for(params, tau_hint)]
    elif tau_hint is not None:
        taus = [as_rational(tau_hint)]
    else:
        taus = halving(Fraction(1, 100))

    last = None
    for tau in taus:
        for epsilon in epsilons:
            if epsilon <= 0:
                raise ValueError('epsilon must be positive')
            certificate, failures = _build_certificate(params, epsilon, tau)
            if certificate is not None:
                logger.info("Certificate found with epsilon={} tau={}".format(
                    format_rational(epsilon), format_rational(tau)))
                return certificate
            last = failures[0]
    raise SearchExhausted(
        'No witness within the search budget; last failure {!r}'.format(
            last.name),
        constraint=last.name)
