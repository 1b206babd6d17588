"""Command line: ``inlslab [--seed N] [--threads N] <command> ...``."""
import logging

from .. import settings
from ..dispatch import Dispatcher
from ..errors import InlsError
from ..grid import set_fft_workers

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

LOG_FORMAT = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'

lab = Dispatcher(prog='inlslab',
                 description='Simulator and verification lab for the '
                             'inhomogeneous nonlinear Schrödinger equation.')
lab.global_argument('-v', '--verbose', action='store_true',
                    help='log at DEBUG level')
lab.global_argument('--seed', type=int, default=None,
                    help='override [initial] seed')
lab.global_argument('--threads', type=int, default=None,
                    help='FFT threads and sweep pool size')

from . import checks, commands  # noqa: E402,F401


def main(argv=None):
    """Entry point; returns the process exit code.

    0 success, 2 validation failure, 3 solver blowup, 4 I/O problem.
    """
    args = lab.parse(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else settings.LOG_LEVEL,
                        format=LOG_FORMAT)
    try:
        if args.threads is not None:
            set_fft_workers(args.threads)
        return lab.dispatch(args) or 0
    except InlsError as e:
        logger.error("{}: {}".format(type(e).__name__, e))
        return e.exit_code
    except OSError as e:
        logger.error("I/O error: {}".format(e))
        return 4
    except ValueError as e:
        logger.error("Invalid input: {}".format(e))
        return 2
