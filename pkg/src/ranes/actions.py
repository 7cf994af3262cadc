"""Control-action encoding: integer index <-> per-cell activation mask.

Bit j of the index is the target status of cell j (1 = active), so with
7 cells the action space is the 128 indices 0..127 and index 127 keeps
every cell on.
"""

from __future__ import annotations

import numpy as np


def n_actions(n_cells: int) -> int:
    return 1 << n_cells


def index_to_mask(index: int, n_cells: int) -> np.ndarray:
    """Decode an action index into a boolean activation mask of length n_cells."""
    if not 0 <= index < (1 << n_cells):
        raise ValueError(f"action index {index} out of range for {n_cells} cells")
    return np.array([(index >> j) & 1 for j in range(n_cells)], dtype=bool)


def mask_to_index(mask: np.ndarray) -> int:
    """Encode a boolean activation mask into its action index."""
    index = 0
    for j, bit in enumerate(np.asarray(mask, dtype=bool)):
        if bit:
            index |= 1 << j
    return index
