import threading
from typing import Callable, Sequence

from .logger import Logger
from .utils import start_all_threads, stop_all_threads

logger = Logger().get_logger(__name__)


class SnrPointWorker(threading.Thread):
    """Evaluates its share of SNR points; results land in a dict keyed by point index."""

    def __init__(self, task: Callable[[int], object], indices: Sequence[int], results: dict):
        self.task = task
        self.indices = list(indices)
        self.results = results
        self.error = None

        self.event = threading.Event()
        threading.Thread.__init__(self)

    def run(self):
        for idx in self.indices:
            if self.event.is_set():
                break
            try:
                self.results[idx] = self.task(idx)
            except Exception as e:
                logger.error(f"SNR point {idx} failed: {e}")
                self.error = e
                break

    def stop(self):
        self.event.set()


def run_points(task: Callable[[int], object], count: int, workers: int = 1) -> list:
    """task(i) for i in range(count); identical results for any worker count."""
    if workers <= 1 or count <= 1:
        return [task(i) for i in range(count)]

    results = {}
    threads = [
        SnrPointWorker(task, range(w, count, workers), results)
        for w in range(min(workers, count))
    ]
    try:
        start_all_threads(threads)
        for thread in threads:
            thread.join()
    finally:
        stop_all_threads(threads)

    for thread in threads:
        if thread.error is not None:
            raise thread.error
    return [results[i] for i in range(count)]
