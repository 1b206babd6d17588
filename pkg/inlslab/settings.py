import os

INLSLAB_OUTPUT_ROOT = os.environ.get('INLSLAB_OUTPUT_ROOT', '.')
INLSLAB_LOG_LEVEL = os.environ.get('INLSLAB_LOG_LEVEL', 'INFO').upper()
INLSLAB_THREADS = os.environ.get('INLSLAB_THREADS', 1)
INLSLAB_SEARCH_DEPTH = os.environ.get('INLSLAB_SEARCH_DEPTH', 40)
INLSLAB_WRAP_SAFETY = os.environ.get('INLSLAB_WRAP_SAFETY', 5.0)
INLSLAB_SLOW_TESTS = os.environ.get('INLSLAB_SLOW_TESTS', '')

try:
    THREADS = int(INLSLAB_THREADS)
    SEARCH_DEPTH = int(INLSLAB_SEARCH_DEPTH)
    WRAP_SAFETY = float(INLSLAB_WRAP_SAFETY)
except ValueError:
    raise Exception('INLSLAB_THREADS and INLSLAB_SEARCH_DEPTH must be '
                    'integers and INLSLAB_WRAP_SAFETY a number.')

if THREADS < 1:
    raise Exception('INLSLAB_THREADS must be at least 1.')
if SEARCH_DEPTH < 0:
    raise Exception('INLSLAB_SEARCH_DEPTH must be non-negative.')
if WRAP_SAFETY <= 0:
    raise Exception('INLSLAB_WRAP_SAFETY must be positive.')

OUTPUT_ROOT = INLSLAB_OUTPUT_ROOT
LOG_LEVEL = INLSLAB_LOG_LEVEL
RUN_SLOW_TESTS = INLSLAB_SLOW_TESTS.lower() not in ('', '0', 'false', 'no')

# Tolerances used by `verify`.
TOLERANCES = {
    'mass_drift': 1e-10,
    'energy_drift': 1e-5,
    'morawetz_identity': 1e-3,
    'momentum_bracket': 1e-8,
    'monotone_action': 1e-6,
    'uniform_h1': 1e-8,
}
