"""POCS reconstruction of bandlimited periodic signals.

Thin wrapper around the compiled extension. The extension lives inside
this package in an installed tree; during in-build testing it sits on
PYTHONPATH as a top-level module instead.
"""

try:
    from pocs_recon._recon import *  # noqa: F401,F403
    from pocs_recon import _recon as _impl
except ImportError:
    from _recon import *  # noqa: F401,F403
    import _recon as _impl

__all__ = [name for name in dir(_impl) if not name.startswith("_")]
__version__ = "0.1.0"
