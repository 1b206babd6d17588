"""Scattering states from recorded checkpoints.

A solution scatters when w(t) = e^{-itΔ}u(t) converges in H^1. The limit is
approximated by the pullback at the last checkpoint inside the trusted
window; the Cauchy differences of consecutive pullbacks measure how
settled that approximation is.
"""
import logging
from dataclasses import dataclass

from .errors import ScatteringError
from .grid import h1_norm
from .solver import free_propagate

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

MIN_TRUSTED_CHECKPOINTS = 3


@dataclass
class ScatteringRecord(object):

    t: float
    pullback: object
    h1_delta_prev: object = None
    residual: object = None

    def summary(self):
        return {'t': self.t, 'h1_delta_prev': self.h1_delta_prev,
                'residual': self.residual}


def pullback(field, t):
    """e^{-itΔ} applied to the snapshot u(t)."""
    return free_propagate(field, -t)


def _ordered(checkpoints):
    times = [abs(t) for t, _ in checkpoints]
    if any(later <= earlier for earlier, later in zip(times, times[1:])):
        raise ScatteringError('Checkpoints are not ordered in time')
    return list(checkpoints)


def trusted_window(checkpoints, t_transient, t_wrap):
    """Checkpoints with t_transient <= |t| <= t_wrap."""
    return [(t, field) for t, field in checkpoints
            if t_transient <= abs(t) <= t_wrap]


def scattering_records(checkpoints):
    """Pull back every checkpoint and fill in the Cauchy differences.

    :raises ScatteringError: fewer than two checkpoints, or unordered times
    """
    if len(checkpoints) < 2:
        raise ScatteringError('Need at least 2 checkpoints, got {}'.format(
            len(checkpoints)))
    records = []
    for t, field in _ordered(checkpoints):
        record = ScatteringRecord(t=t, pullback=pullback(field, t))
        if records:
            record.h1_delta_prev = h1_norm(record.pullback - records[-1].pullback)
        records.append(record)
    return records


def cauchy_deltas(checkpoints):
    """[(t, ||w(t) - w(t_prev)||_{H^1})] for consecutive checkpoints."""
    return [(record.t, record.h1_delta_prev)
            for record in scattering_records(checkpoints)[1:]]


def scatter(checkpoints, window=None):
    """Scattering state at the last trusted checkpoint and the records of
    every trusted checkpoint, residuals included.

    :window: (t_transient, t_wrap); every checkpoint is trusted when omitted
    :returns: (u_plus, records)
    """
    if window is not None:
        checkpoints = trusted_window(checkpoints, *window)
    if len(checkpoints) < MIN_TRUSTED_CHECKPOINTS:
        raise ScatteringError('Need {} trusted checkpoints, got {}'.format(
            MIN_TRUSTED_CHECKPOINTS, len(checkpoints)))
    records = scattering_records(checkpoints)
    u_plus = records[-1].pullback
    for record in records:
        # e^{-itΔ} is an H^1 isometry, so this equals the residual at t
        record.residual = h1_norm(record.pullback - u_plus)
    logger.info("Scattering state extracted at t={} from {} checkpoints".format(
        records[-1].t, len(records)))
    return u_plus, records


def residual_series(records):
    return [(record.t, record.residual) for record in records]


def extract_scattering_state(checkpoints, window=None):
    """(u_plus, [(t, ||u(t) - e^{itΔ}u_plus||_{H^1})])."""
    u_plus, records = scatter(checkpoints, window)
    return u_plus, residual_series(records)
