"""Records which named operations ran, for the scenario coverage self-test."""
import functools
import threading
from contextlib import contextmanager

_lock = threading.Lock()
_sinks = []
REGISTRY = set()  # every traced operation name


def traced(fn):
    name = fn.__name__
    REGISTRY.add(name)

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        if _sinks:
            with _lock:
                for sink in _sinks:
                    sink.add(name)
        return fn(*args, **kwargs)

    wrapper.op_name = name
    return wrapper


@contextmanager
def recording():
    """Collect the names of traced operations called inside the block."""
    sink = set()
    with _lock:
        _sinks.append(sink)
    try:
        yield sink
    finally:
        with _lock:
            _sinks.remove(sink)
