"""Kernel selection: compiled extension when available, pure Python otherwise.

Set EXPANDER_CS_PURE=1 to force the pure backend.  Both backends expose
the same functions with bit-identical results; ``use_backend`` swaps the
active one at runtime (used by the equivalence tests and the kernel
benchmark).
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from . import _pure

_compiled = None
if not os.environ.get("EXPANDER_CS_PURE"):
    try:
        from . import _speedups as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

_active = _compiled if _compiled is not None else _pure


def backend_name() -> str:
    return "compiled" if _active is _compiled and _compiled is not None else "pure"


def available_backends() -> list[str]:
    return ["pure"] + (["compiled"] if _compiled is not None else [])


def get_backend(name: str):
    if name == "pure":
        return _pure
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


@contextmanager
def use_backend(name: str):
    global _active
    previous = _active
    _active = get_backend(name)
    try:
        yield
    finally:
        _active = previous


def expansion_scan(adj_flat, n, m, d, s_max, epsilon, cap):
    return _active.expansion_scan(adj_flat, n, m, d, s_max, epsilon, cap)


def evaluate_subsets(adj_flat, n, m, d, subsets):
    return _active.evaluate_subsets(adj_flat, n, m, d, subsets)


def decode_run(adj, rev, y, threshold, max_iters, quantum):
    return _active.decode_run(adj, rev, y, threshold, max_iters, quantum)
