import logging
from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)


class WorkerPool:
    """Order-preserving map over a thread pool sized by RESETQ_THREADS."""

    def __init__(self, app=None):
        self.threads = 1
        if app is not None:
            self.init_app(app)

    def init_app(self, app):
        self.threads = max(1, int(app.config.get('RESETQ_THREADS', 1)))
        app.extensions['worker_pool'] = self
        logger.debug(f'Worker pool configured with {self.threads} threads')

    def map(self, fn, items):
        items = list(items)
        if self.threads == 1 or len(items) < 2:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            return list(executor.map(fn, items))


pool = WorkerPool()
