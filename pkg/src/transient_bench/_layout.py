"""Flat array layout shared by the solver front end and both kernels.

Matrix index of node ``k`` is ``k - 1``; ground maps to ``-1``. Extra rows
(ideal sources, ideal-ratio constraints) follow the node rows.
"""

from .circuit import G_CLOSED, G_OPEN

K_R, K_L, K_C, K_SW, K_SAT = 0, 1, 2, 3, 4

PK_NODE, PK_BR_I, PK_BR_V, PK_BR_FLUX, PK_EXT, PK_LINE_K, PK_LINE_M = range(7)

ST_OK, ST_SINGULAR, ST_NONFINITE = 0, 1, 2

__all__ = ["G_CLOSED", "G_OPEN", "K_R", "K_L", "K_C", "K_SW", "K_SAT", "PK_NODE", "PK_BR_I",
           "PK_BR_V", "PK_BR_FLUX", "PK_EXT", "PK_LINE_K", "PK_LINE_M", "ST_OK",
           "ST_SINGULAR", "ST_NONFINITE"]
