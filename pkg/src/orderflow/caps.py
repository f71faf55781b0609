"""Global size caps.

Everything downstream of S_n enumeration blows up factorially, so the caps
here are deliberate and the operations that honor them raise
:class:`~orderflow.errors.CapExceeded` rather than grind.  The pattern-length
cap can be overridden with the ``ORDERFLOW_CAP`` environment variable.
"""

from __future__ import annotations

import os

DEFAULT_PERM_CAP = 12

# Brute-force enumeration of S_m stops here (9! = 362880).
LIFT_ENUM_MAX = 9
EXTENSION_ENUM_MAX = 9
# Counting linear extensions by downset DP is feasible a bit further.
EXTENSION_COUNT_MAX = 14

# Embedded-loop DFS refuses subgraphs with more vertices than this.
LOOP_ENUM_VERTEX_MAX = 24

# Distinct drift profiles tolerated per ordered vertex pair during saturation.
SATURATION_PROFILE_MAX = 20_000

# Cyclic ranking construction is polynomial, so this cap is generous; it
# mostly bounds the closure matrix memory.
CYCLIC_LIFT_MAX = 4096

# Maximal-interval count during exact subdivision.
SUBDIVISION_MAX = 500_000

SEPARATOR_DEPTH_MAX = 6
SCALE_DEPTH_MAX = 24
POLYTOPE_DIM_MAX = 6

SYNTHESIS_LENGTH_MAX = 100_000


def perm_cap() -> int:
    """Current pattern-length cap (ORDERFLOW_CAP wins over the default)."""
    raw = os.environ.get("ORDERFLOW_CAP")
    if raw is None:
        return DEFAULT_PERM_CAP
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"ORDERFLOW_CAP must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError("ORDERFLOW_CAP must be positive")
    return value
