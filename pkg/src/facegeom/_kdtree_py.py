"""Pure-Python KD-tree backend.

Mirrors the compiled extension exactly: median-split construction over
alternating axes with a (coordinate, payload, position) ordering, and nearest
queries that break distance ties by smallest payload. Both backends therefore
return identical matches, not merely identical distances.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


class _Tree:
    __slots__ = ("xs", "ys", "payloads", "pt", "left", "right", "n")

    def __init__(self, n: int) -> None:
        self.n = n
        self.pt = [0] * n
        self.left = [-1] * n
        self.right = [-1] * n


def build(xs: np.ndarray, ys: np.ndarray, payloads: np.ndarray) -> _Tree:
    n = len(xs)
    tree = _Tree(n)
    tree.xs = xs
    tree.ys = ys
    tree.payloads = payloads
    counter = [0]

    def rec(idx: list[int], depth: int) -> int:
        if not idx:
            return -1
        coords = xs if depth % 2 == 0 else ys
        idx.sort(key=lambda i: (coords[i], payloads[i], i))
        mid = len(idx) // 2
        node = counter[0]
        counter[0] += 1
        tree.pt[node] = idx[mid]
        tree.left[node] = rec(idx[:mid], depth + 1)
        tree.right[node] = rec(idx[mid + 1 :], depth + 1)
        return node

    rec(list(range(n)), 0)
    return tree


def nearest(tree: _Tree, qx: float, qy: float) -> tuple[int, float]:
    """Return (position in input arrays, squared distance) of the nearest point."""
    xs, ys, payloads = tree.xs, tree.ys, tree.payloads
    pt, left, right = tree.pt, tree.left, tree.right
    best_pos = -1
    best_d2 = np.inf
    best_payload = 0

    def visit(node: int, depth: int) -> None:
        nonlocal best_pos, best_d2, best_payload
        if node == -1:
            return
        pos = pt[node]
        px = xs[pos]
        py = ys[pos]
        dx = qx - px
        dy = qy - py
        d2 = dx * dx + dy * dy
        if d2 < best_d2 or (
            d2 == best_d2
            and (payloads[pos] < best_payload or (payloads[pos] == best_payload and pos < best_pos))
        ):
            best_pos = pos
            best_d2 = d2
            best_payload = payloads[pos]
        axis_delta = qx - px if depth % 2 == 0 else qy - py
        near, far = (left[node], right[node]) if axis_delta < 0 else (right[node], left[node])
        visit(near, depth + 1)
        if axis_delta * axis_delta <= best_d2:
            visit(far, depth + 1)

    visit(0 if tree.n else -1, 0)
    return best_pos, best_d2


def nearest_batch(tree: _Tree, qxs: np.ndarray, qys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = len(qxs)
    positions = np.empty(m, dtype=np.int64)
    d2s = np.empty(m, dtype=np.float64)
    for i in range(m):
        positions[i], d2s[i] = nearest(tree, float(qxs[i]), float(qys[i]))
    return positions, d2s
