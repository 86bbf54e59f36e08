"""Pure-numpy region-growing kernel (fallback for the compiled core).

Semantics shared with the compiled kernel: multi-source breadth-first growth
with a single FIFO frontier. Seeds enter in input order (a seed on an already
labeled pixel is dropped); each admitted pixel remembers its originating seed
and expands to 4-neighbours in (up, down, left, right) order. A pixel joins
when it is still unlabeled, lies within the seed's Chebyshev radius (if any),
and the cosine similarity between its trajectory and the seed's is strictly
above tau. Conflicts resolve by first claim, so the output is a deterministic
function of the inputs.
"""

from __future__ import annotations

from collections import deque

import numpy as np

UNLABELED = 255
_DR = (-1, 1, 0, 0)
_DC = (0, 0, -1, 1)


def grow_kernel(labels: np.ndarray, profiles: np.ndarray, pixel_norms: np.ndarray,
                seed_rows: np.ndarray, seed_cols: np.ndarray,
                seed_classes: np.ndarray, seed_profiles: np.ndarray,
                seed_norms: np.ndarray, seed_radius: np.ndarray,
                tau: float) -> None:
    """Grow ``labels`` in place. ``seed_radius[s] < 0`` means unlimited."""
    h, w = labels.shape
    origin = np.full(h * w, -1, dtype=np.int64)
    queue = deque()

    for s in range(len(seed_rows)):
        r, c = int(seed_rows[s]), int(seed_cols[s])
        if labels[r, c] == UNLABELED:
            labels[r, c] = seed_classes[s]
            origin[r * w + c] = s
            queue.append(r * w + c)

    while queue:
        u = queue.popleft()
        ur, uc = divmod(u, w)
        s = origin[u]
        sp = seed_profiles[s]
        sn = seed_norms[s]
        rad = seed_radius[s]
        for k in range(4):
            vr = ur + _DR[k]
            vc = uc + _DC[k]
            if not (0 <= vr < h and 0 <= vc < w):
                continue
            if labels[vr, vc] != UNLABELED:
                continue
            if rad >= 0 and max(abs(vr - seed_rows[s]), abs(vc - seed_cols[s])) > rad:
                continue
            v = vr * w + vc
            denom = pixel_norms[v] * sn
            rho = float(np.dot(profiles[v], sp)) / denom if denom > 0 else 0.0
            if rho > tau:
                labels[vr, vc] = labels[ur, uc]
                origin[v] = s
                queue.append(v)
