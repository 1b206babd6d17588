import logging
from concurrent.futures import ProcessPoolExecutor

from . import settings

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


class Worker(object):

    """Run independent jobs on a pool of processes.

    Each job gets its own output, so nothing is shared between them.
    """

    def __init__(self, target, jobs, processes=None):
        """Worker(target, jobs)

        :target: picklable top-level callable taking one job
        :jobs: iterable of job descriptions
        :processes: pool size, defaults to INLSLAB_THREADS
        """
        if processes is None:
            processes = settings.THREADS
        if processes < 1:
            raise ValueError('processes must be >= 1, got {!r}'.format(processes))
        logger.debug("Called constructor. "
                     "Target: {!r} processes {!r}"
                     .format(target, processes))
        self.target = target
        self.jobs = list(jobs)
        self.processes = processes

    def get_jobs(self):
        """Jobs in submission order."""
        logger.info("Worker has {} jobs".format(len(self.jobs)))
        return list(self.jobs)

    def _failure(self, job, error):
        logger.error("Job {!r} failed".format(job), exc_info=error)
        return {'job': job, 'status': 'error',
                'exit_code': getattr(error, 'exit_code', 1),
                'error': '{}: {}'.format(type(error).__name__, error)}

    def run(self):
        """Run every job and return the results in job order.

        A job that raises is reported as a failure dict instead of
        stopping the others.
        """
        jobs = self.get_jobs()
        results = []
        if self.processes == 1 or len(jobs) < 2:
            for job in jobs:
                try:
                    results.append(self.target(job))
                except Exception as e:
                    results.append(self._failure(job, e))
            return results

        with ProcessPoolExecutor(max_workers=self.processes) as pool:
            futures = [pool.submit(self.target, job) for job in jobs]
            for job, future in zip(jobs, futures):
                try:
                    results.append(future.result())
                except Exception as e:
                    results.append(self._failure(job, e))
                else:
                    logger.info("Finished job {!r}".format(job))
        return results
