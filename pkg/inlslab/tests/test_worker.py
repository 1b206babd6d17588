from ..errors import StepBlowup
from ..worker import Worker
from .base import TestInls


def square(job):
    return {'job': job, 'status': 'ok', 'exit_code': 0, 'value': job * job}


def fragile(job):
    if job == 2:
        raise StepBlowup(5)
    return square(job)


class TestWorker(TestInls):

    def test_inline(self):
        results = Worker(square, [3, 1, 2], processes=1).run()
        self.assertEqual([r['value'] for r in results], [9, 1, 4])

    def test_failure_does_not_stop_others(self):
        results = Worker(fragile, [1, 2, 3], processes=1).run()
        self.assertEqual([r['status'] for r in results], ['ok', 'error', 'ok'])
        self.assertEqual(results[1]['exit_code'], 3)
        self.assertIn('StepBlowup', results[1]['error'])

    def test_pool_keeps_job_order(self):
        results = Worker(fragile, [4, 2, 1, 3], processes=2).run()
        self.assertEqual([r['job'] for r in results], [4, 2, 1, 3])
        self.assertEqual(results[0]['value'], 16)
        self.assertEqual(results[1]['status'], 'error')

    def test_pool_size(self):
        with self.assertRaises(ValueError):
            Worker(square, [], processes=0)
        self.assertEqual(Worker(square, []).run(), [])
