"""Integration-kernel backends.

Two implementations with identical plan APIs:

- ``compiled`` — Cython extension (:mod:`kgphase.backends._core`) with its own
  radix-2 FFT; the default when the extension is importable.
- ``pure`` — numpy reference implementation (:mod:`kgphase.backends.pure`).

Selection happens once at import; override with the environment variable
``KGPHASE_BACKEND=pure|compiled`` or at runtime via :func:`set_backend`.
Plans are constructed through :func:`get_backend`, so a switch affects all
subsequently built plans (existing plan objects keep their backend).
"""
from __future__ import annotations

import os

from . import pure
from .pure import BLEW_UP, COMPLETED, CROSSED, STAGE_DIVERGED

__all__ = [
    "get_backend",
    "set_backend",
    "available",
    "COMPLETED",
    "CROSSED",
    "STAGE_DIVERGED",
    "BLEW_UP",
]

_BACKENDS = {"pure": pure}
try:  # the extension is optional; the pure backend is always present
    from . import _core

    _BACKENDS["compiled"] = _core
except ImportError:  # pragma: no cover - depends on the build environment
    _core = None

_active = None


def available() -> list[str]:
    """Names of importable backends, preferred first."""
    names = list(_BACKENDS)
    return sorted(names, key=lambda n: n != "compiled")


def set_backend(name: str):
    """Select the active backend by name; returns the backend module."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown backend {name!r}; available: {', '.join(available())}"
        )
    _active = _BACKENDS[name]
    return _active


def get_backend():
    """The active backend module (resolving the default on first use)."""
    global _active
    if _active is None:
        forced = os.environ.get("KGPHASE_BACKEND")
        if forced:
            set_backend(forced)
        else:
            set_backend("compiled" if "compiled" in _BACKENDS else "pure")
    return _active
