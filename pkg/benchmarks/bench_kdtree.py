#!/usr/bin/env python3
"""Benchmark the compiled KD-tree kernel against the pure-Python fallback.

The workload mirrors the symmetry score's hot loop: per face, build a tree on
the right-side landmarks and query every reflected left-side landmark.

    python benchmarks/bench_kdtree.py --faces 300 --repeats 3
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from facegeom import _kdtree_py
from facegeom.synth import template_face

try:
    from facegeom import _kdtree_c
except ImportError:
    _kdtree_c = None


def make_workload(n_faces: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    base = template_face()
    workload = []
    for _ in range(n_faces):
        pts = base + rng.normal(0.0, 2.0, size=base.shape)
        mid = 256.0
        left = pts[pts[:, 0] < mid]
        right = pts[pts[:, 0] > mid]
        queries = np.column_stack([2.0 * mid - left[:, 0], left[:, 1]])
        workload.append(
            (
                np.ascontiguousarray(right[:, 0]),
                np.ascontiguousarray(right[:, 1]),
                np.arange(len(right), dtype=np.int64),
                np.ascontiguousarray(queries[:, 0]),
                np.ascontiguousarray(queries[:, 1]),
            )
        )
    return workload


def run(module, workload) -> tuple[float, float]:
    start = time.perf_counter()
    checksum = 0.0
    for xs, ys, payloads, qx, qy in workload:
        tree = module.build(xs, ys, payloads)
        _, d2s = module.nearest_batch(tree, qx, qy)
        checksum += float(d2s.sum())
    return time.perf_counter() - start, checksum


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--faces", type=int, default=300)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    workload = make_workload(args.faces)
    backends = [("python", _kdtree_py)]
    if _kdtree_c is not None:
        backends.append(("compiled", _kdtree_c))
    else:
        print("compiled backend not built (pip install -e . --no-build-isolation)")

    results = {}
    checksums = set()
    for name, module in backends:
        best = min(run(module, workload) for _ in range(args.repeats))
        results[name] = best[0]
        checksums.add(round(best[1], 6))
        queries = args.faces * len(workload[0][3])
        print(f"{name:>9}: {best[0]:7.3f}s  ({queries / best[0]:,.0f} queries/s)")

    assert len(checksums) == 1, "backends disagree on distances"
    if len(results) == 2:
        print(f" speedup : {results['python'] / results['compiled']:.1f}x")


if __name__ == "__main__":
    main()
