"""Valid-bin learning by iterative least-percentage merging.

Starting from one group per raw label bin, the two groups with the smallest
share of the training histogram are merged until the requested number of
groups remains.  Ties are broken toward the groups holding the smallest
source-bin index, so the result depends only on the histogram.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import cached_property
from os import PathLike
from pathlib import Path

import numpy as np

from .imaging import ParseError

__all__ = ["MergeMap", "learn_merge_map", "apply_merge", "save_merge_map", "load_merge_map"]


@dataclass(frozen=True, eq=False)
class MergeMap:
    """Assignment of each of ``source_bins`` raw bins to one of ``valid_bins`` groups."""

    assignment: np.ndarray

    def __post_init__(self):
        a = np.array(self.assignment, dtype=np.int64, copy=True)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("assignment must be a non-empty 1-D array")
        if a.min() < 0:
            raise ValueError("group ids must be non-negative")
        n_groups = int(a.max()) + 1
        if np.bincount(a, minlength=n_groups).min() == 0:
            raise ValueError("every group id below the maximum must be used")
        a.flags.writeable = False
        object.__setattr__(self, "assignment", a)

    @property
    def source_bins(self) -> int:
        return self.assignment.size

    @property
    def valid_bins(self) -> int:
        return int(self.assignment.max()) + 1

    @cached_property
    def indicator(self) -> np.ndarray:
        """(source_bins, valid_bins) 0/1 membership matrix."""
        m = np.zeros((self.source_bins, self.valid_bins))
        m[np.arange(self.source_bins), self.assignment] = 1
        return m

    def apply(self, histograms) -> np.ndarray:
        return apply_merge(histograms, self)

    def __eq__(self, other):
        if not isinstance(other, MergeMap):
            return NotImplemented
        return np.array_equal(self.assignment, other.assignment)

    def groups(self) -> list[list[int]]:
        return [np.flatnonzero(self.assignment == g).tolist() for g in range(self.valid_bins)]

    def __repr__(self):
        return f"MergeMap({self.source_bins} -> {self.valid_bins})"


def learn_merge_map(global_histogram, valid_bins: int) -> MergeMap:
    """Greedy merge of the two smallest-count groups until ``valid_bins`` remain.

    Counts are kept as exact integers.  Each heap entry is
    (count, smallest source bin); the smallest source bin is unique per
    group, which makes the ordering total.
    """
    counts = np.asarray(global_histogram)
    if counts.ndim != 1 or counts.size == 0:
        raise ValueError("global histogram must be a non-empty 1-D array")
    if np.any(counts < 0):
        raise ValueError("histogram counts must be non-negative")
    B = counts.size
    if valid_bins < 1 or valid_bins > B:
        raise ValueError(f"valid_bins must be in [1, {B}], got {valid_bins}")
    if counts.sum() <= 0:
        raise ValueError("global histogram is empty")

    # union-find keyed by smallest member
    parent = list(range(B))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    heap = [(int(c), i) for i, c in enumerate(counts)]
    heapq.heapify(heap)
    for _ in range(B - valid_bins):
        c1, a = heapq.heappop(heap)
        c2, b = heapq.heappop(heap)
        root = min(a, b)
        parent[max(a, b)] = root
        heapq.heappush(heap, (c1 + c2, root))

    roots = np.array([find(i) for i in range(B)])
    # group ids ascend with each group's smallest source bin
    _, assignment = np.unique(roots, return_inverse=True)
    return MergeMap(assignment)


def apply_merge(histogram, merge_map: MergeMap) -> np.ndarray:
    """Sum raw bins into valid bins along the last axis; totals are preserved exactly."""
    h = np.asarray(histogram)
    if h.shape[-1] != merge_map.source_bins:
        raise ValueError(f"histogram has {h.shape[-1]} bins, merge map expects {merge_map.source_bins}")
    out = h.astype(np.float64) @ merge_map.indicator
    if np.issubdtype(h.dtype, np.integer):
        # integer counts below 2**53 are summed exactly in float64
        return np.rint(out).astype(np.int64)
    return out


def save_merge_map(merge_map: MergeMap, path: str | PathLike) -> None:
    lines = [f"{merge_map.source_bins} {merge_map.valid_bins}"]
    lines += [str(int(g)) for g in merge_map.assignment]
    Path(path).write_text("\n".join(lines) + "\n")


def load_merge_map(path: str | PathLike) -> MergeMap:
    lines = Path(path).read_text().split("\n")
    try:
        B, V = (int(v) for v in lines[0].split())
        groups = [int(v) for v in lines[1:1 + B]]
    except ValueError:
        raise ParseError(f"{path}: malformed merge map") from None
    if len(groups) != B:
        raise ParseError(f"{path}: expected {B} group ids, got {len(groups)}")
    mmap = MergeMap(np.array(groups))
    if mmap.valid_bins != V:
        raise ParseError(f"{path}: header says {V} valid bins, assignment has {mmap.valid_bins}")
    return mmap
