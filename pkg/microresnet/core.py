# -*- encoding: utf-8 -*-
"""Worker threads feeding a bounded queue (batch prefetching)."""

from __future__ import print_function

import queue
import logging
import threading

logger = logging.getLogger("microresnet")

_done = object()


class _Failure(object):

    def __init__(self, exc):
        self.exc = exc


def threaded(func):
    """
    Decorator to execute each :param func: call in a separate daemon thread.
    """

    def dec(*args, **kwargs):
        thread = threading.Thread(target=func, args=args, kwargs=kwargs)
        thread.daemon = True
        thread.start()
        return thread

    return dec


class Prefetcher(object):
    """Apply ``func`` to ``items`` on ``workers`` threads.

    Results are yielded in completion order, at most ``depth`` ahead of the
    consumer. Exceptions raised by ``func`` are re-raised in the consumer.
    """

    def __init__(self, func, items, workers=2, depth=None):
        if workers < 1:
            raise ValueError("need at least one worker, got %i" % workers)

        self.func = func
        self.items = iter(items)
        self.workers = workers
        self.lock = threading.Lock()
        self.queue = queue.Queue(maxsize=depth or 2 * workers)
        self.closed = threading.Event()

    def _put(self, value):
        while not self.closed.is_set():
            try:
                self.queue.put(value, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    @threaded
    def work(self):
        while True:
            with self.lock:
                item = next(self.items, _done)
            if item is _done:
                self._put(_done)
                return
            try:
                result = self.func(item)
            except Exception as e:
                self._put(_Failure(e))
                return
            if not self._put(result):
                return

    def __iter__(self):
        for _ in range(self.workers):
            self.work()

        running = self.workers
        try:
            while running:
                value = self.queue.get()
                if value is _done:
                    running -= 1
                elif isinstance(value, _Failure):
                    raise value.exc
                else:
                    yield value
        finally:
            self.closed.set()
