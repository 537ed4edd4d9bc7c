"""Hot kernels: compiled extension if available, pure Python otherwise.

Both implementations follow the same arithmetic step for step (including
the shared splitmix64 RNG), so a fixed seed produces bit-identical results
either way.  Set QTABU_PURE_PYTHON=1 to force the fallback.
"""

import logging
import os

log = logging.getLogger(__name__)

if os.environ.get("QTABU_PURE_PYTHON"):
    from . import fallback as impl

    HAVE_COMPILED = False
else:
    try:
        from . import _core as impl  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        from . import fallback as impl

        HAVE_COMPILED = False
        log.info("compiled kernels unavailable; using pure-Python fallback")

anneal = impl.anneal
scan_neighborhood = impl.scan_neighborhood
