"""Reconstruction quality in the raw reflectance domain.

The headline number is the relative absolute error over valid entries,
computed as a ratio of sums (robust to near-zero entries); a pointwise-mean
variant is provided for comparison.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

POINTWISE_DELTA = 1e-3


class ZeroReferenceError(ValueError):
    """Relative error is undefined when the reference is all zero."""


@dataclass
class MetricReport:
    name: str
    rel_ae_ratio: float
    rel_ae_pointwise: float
    entries_compared: int


def rel_ae(reconstructed, reference, mask, variant: str = "ratio",
           delta: float = POINTWISE_DELTA) -> float:
    """Relative absolute error between two reflectance tables over valid entries.

    variant "ratio":      sum |rec - ref| / sum |ref|
    variant "pointwise":  mean(|rec - ref| / (|ref| + delta))

    mask must broadcast against the tables; masked-out values never enter the
    sums, so the result is bitwise invariant to them.
    """
    rec = np.asarray(reconstructed, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    m = np.broadcast_to(np.asarray(mask, dtype=bool), ref.shape)
    if not m.any():
        raise ValueError("mask selects no entries")
    r = rec[m]
    t = ref[m]
    if variant == "ratio":
        denom = np.abs(t).sum()
        if denom == 0.0:
            raise ZeroReferenceError("reference is zero over all valid entries")
        return float(np.abs(r - t).sum() / denom)
    if variant == "pointwise":
        return float(np.mean(np.abs(r - t) / (np.abs(t) + delta)))
    raise ValueError(f"unknown variant {variant!r}")


def report(name: str, reconstructed, reference, mask) -> MetricReport:
    m = np.broadcast_to(np.asarray(mask, dtype=bool), np.asarray(reference).shape)
    return MetricReport(
        name=name,
        rel_ae_ratio=rel_ae(reconstructed, reference, mask, "ratio"),
        rel_ae_pointwise=rel_ae(reconstructed, reference, mask, "pointwise"),
        entries_compared=int(m.sum()),
    )


def write_report_csv(reports: list[MetricReport], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["material", "RelAE_ratio", "RelAE_pointwise", "entries"])
        for r in reports:
            w.writerow([r.name, f"{r.rel_ae_ratio:.6g}", f"{r.rel_ae_pointwise:.6g}",
                        r.entries_compared])
