"""Operation counters for group exponentiations and square roots.

Endpoints tag their work with :func:`endpoint`; callers collect counts with
:func:`counting`::

    with counting() as ops:
        token.handle(frame)
    ops["token", "exp"]
"""

from collections import Counter
from contextlib import contextmanager
from contextvars import ContextVar

_label: ContextVar[str] = ContextVar("true2f_endpoint", default="local")
_sinks: ContextVar[tuple] = ContextVar("true2f_sinks", default=())


def record(op, n=1):
    sinks = _sinks.get()
    if sinks:
        key = (_label.get(), op)
        for sink in sinks:
            sink[key] += n


@contextmanager
def endpoint(label):
    token = _label.set(label)
    try:
        yield
    finally:
        _label.reset(token)


@contextmanager
def counting():
    sink = Counter()
    token = _sinks.set(_sinks.get() + (sink,))
    try:
        yield sink
    finally:
        _sinks.reset(token)
