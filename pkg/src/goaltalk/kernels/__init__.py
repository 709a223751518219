"""Kernel backend selection.

The compiled extension is preferred; the numpy reference implementation is
the drop-in fallback when the extension was not built. `BACKEND` records
which one is active so benchmarks and logs can report it. Set
GOALTALK_KERNELS=py to force the fallback (testing, debugging).
"""

import os

_forced = os.environ.get("GOALTALK_KERNELS")
if _forced not in (None, "", "c", "py"):
    raise ImportError(f"GOALTALK_KERNELS must be 'c' or 'py', got {_forced!r}")

if _forced == "py":
    from goaltalk.kernels import pyref as _impl

    BACKEND = "py"
else:
    try:
        from goaltalk.kernels import _ckern as _impl

        BACKEND = "c"
    except ImportError:
        if _forced == "c":
            raise
        from goaltalk.kernels import pyref as _impl

        BACKEND = "py"

bfs_ball = _impl.bfs_ball
pair_ball_distance = _impl.pair_ball_distance
sgns_train_epoch = _impl.sgns_train_epoch


def available_backends():
    """Names of importable backends, compiled one first."""
    names = []
    try:
        from goaltalk.kernels import _ckern  # noqa: F401

        names.append("c")
    except ImportError:
        pass
    names.append("py")
    return names


def get_backend(name):
    """Kernel module for an explicit backend name ('c' or 'py')."""
    if name == "c":
        from goaltalk.kernels import _ckern

        return _ckern
    if name == "py":
        from goaltalk.kernels import pyref

        return pyref
    raise ValueError(f"unknown kernel backend {name!r}")
