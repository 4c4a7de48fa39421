"""Kernel backend selection.

The compiled core is preferred when it imported cleanly; the numpy/scipy
fallback is used otherwise, or always when SOFTTEXT_PURE is set. Both
backends are kept bit-identical, so the choice never changes results.
"""

import os

if os.environ.get("SOFTTEXT_PURE"):
    from . import pyfallback as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import pyfallback as _impl

        BACKEND = "python"

render_quads = _impl.render_quads
label_components = _impl.label_components
partition_nearest_seed = _impl.partition_nearest_seed

__all__ = ["BACKEND", "render_quads", "label_components", "partition_nearest_seed"]
