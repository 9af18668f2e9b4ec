"""Pairwise arrival-probability matrix shared by the exact and sampled paths."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class PuvMatrix:
    """``values[u, v]`` = probability that ``u`` arrived before ``v``.

    Seed rows/columns follow a fixed convention: seed before non-seed is 1,
    seed-seed pairs are 0.5 (no information). The diagonal is unused (0).
    """

    values: np.ndarray
    n0: int = 0
    provenance: str = "exact"
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, idx):
        return self.values[idx]

    def sup_gap(self, other: PuvMatrix, nodes=None) -> float:
        a, b = self.values, other.values
        if nodes is not None:
            idx = np.asarray(list(nodes))
            a, b = a[np.ix_(idx, idx)], b[np.ix_(idx, idx)]
        return float(np.max(np.abs(a - b))) if a.size else 0.0

    def to_csv(self, path: str | Path, node_ids=None) -> None:
        ids = list(range(self.n)) if node_ids is None else list(node_ids)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node", *ids])
            for i, row in zip(ids, self.values):
                w.writerow([i, *(f"{x:.10g}" for x in row)])

    @classmethod
    def from_csv(cls, path: str | Path, n0: int = 0, provenance: str = "file") -> PuvMatrix:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header = [int(x) for x in rows[0][1:]]
        if header != list(range(len(header))):
            raise ValueError("PuvMatrix CSV must list node ids 0..n-1 in order")
        vals = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=float)
        if vals.shape != (len(header), len(header)):
            raise ValueError(f"PuvMatrix CSV is not square: {vals.shape}")
        return cls(vals, n0=n0, provenance=provenance)


def apply_seed_convention(values: np.ndarray, n0: int) -> np.ndarray:
    if n0:
        values[:n0, :] = 1.0
        values[:, :n0] = 0.0
        values[:n0, :n0] = 0.5
    np.fill_diagonal(values, 0.0)
    return values
