"""Schema-aware denoising text-to-SQL pipeline.

Thin re-export of the compiled extension. Installed wheels carry the module
inside this package; development builds put it on sys.path next to the
CMake build tree.
"""

try:
    from ._sead import *  # noqa: F401,F403
    from . import _sead as _impl
except ImportError:  # build-tree layout
    from _sead import *  # noqa: F401,F403
    import _sead as _impl

__version__ = "0.1.0"
__all__ = [name for name in dir(_impl) if not name.startswith("_")]
