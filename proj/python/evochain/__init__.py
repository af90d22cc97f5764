"""Permissioned ledger with controlled mutability.

The compiled extension carries the whole API; this package just re-exports
it. When the extension is built in place (editable install) it lives inside
the package; test runs against a bare build tree find it on sys.path.
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __version__  # noqa: F401
except ImportError:  # pragma: no cover - build-tree layout
    from _core import *  # type: ignore[import-not-found]  # noqa: F401,F403
    from _core import __version__  # type: ignore[import-not-found]  # noqa: F401
