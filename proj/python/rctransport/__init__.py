"""Transport toolkit for driven dynamical systems.

Finite-support measures, exact and entropic Wasserstein-1 solvers, transfer
operators of input-driven systems, contraction certificates, invariant-measure
solves, and window-law diagnostics. Everything is seeded and deterministic:
equal seeds give byte-identical results.
"""

from rctransport._core import *  # noqa: F401,F403
from rctransport._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__doc__ = __doc__ if __doc__ else _core_doc
