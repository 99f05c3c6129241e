"""Select the compiled kernels when available, the pure-Python ones otherwise.

Set ``WRRBOUND_PURE=1`` to force the fallback (used by the benchmark and
by the parity tests).
"""
import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

BETA_RATE_LATENCY = _pykernels.BETA_RATE_LATENCY
BETA_WRR = _pykernels.BETA_WRR
SIM_OK = _pykernels.SIM_OK
SIM_SATURATED = _pykernels.SIM_SATURATED

_compiled = None
if os.environ.get("WRRBOUND_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _compiled
    except ImportError:  # extension not built
        log.debug("compiled kernels unavailable, using pure-Python fallback")

if _compiled is not None:
    BACKEND = "compiled"
    hdev_affine = _compiled.hdev_affine
    simulate_port = _compiled.simulate_port
else:
    BACKEND = "python"
    hdev_affine = _pykernels.hdev_affine
    simulate_port = _pykernels.simulate_port


def backends():
    """Map backend name to its kernel module, compiled first when built."""
    found = {}
    try:
        from . import _ckernels
        found["compiled"] = _ckernels
    except ImportError:
        pass
    found["python"] = _pykernels
    return found
