"""Total variation, ERGAS and masked region statistics."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .imgcore import as_float


@dataclass
class MetricReport:
    name: str
    value: float
    per_channel: list[float] | None = None
    region: str | None = None
    extra: dict[str, float] = field(default_factory=dict)

    def to_kv(self) -> str:
        parts = [f"metric={self.name}", f"value={self.value:.10g}"]
        if self.region is not None:
            parts.append(f"region={self.region}")
        for i, v in enumerate(self.per_channel or []):
            parts.append(f"ch{i}={v:.10g}")
        for k, v in self.extra.items():
            parts.append(f"{k}={v:.10g}")
        return " ".join(parts)

    def csv_row(self, source: str = "") -> list[str]:
        chans = ";".join(f"{v:.10g}" for v in (self.per_channel or []))
        return [source, self.name, f"{self.value:.10g}", self.region or "", chans]


CSV_HEADER = ["source", "metric", "value", "region", "per_channel"]


def csv_text(rows: list[list[str]], header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    return buf.getvalue()


def _planes(img: np.ndarray) -> list[np.ndarray]:
    return [img] if img.ndim == 2 else [img[..., c] for c in range(img.shape[2])]


def _binary_mask(mask, shape) -> np.ndarray:
    m = as_float(mask)
    if m.shape != tuple(shape):
        raise ValueError(f"mask {m.shape} does not match image {tuple(shape)}")
    if not np.all((m == 0) | (m == 1)):
        raise ValueError("region mask must contain only 0 and 1")
    return m.astype(bool)


def _tv_plane(p: np.ndarray) -> np.ndarray:
    # forward differences; the last row/column contributes zero
    dh = np.zeros_like(p)
    dv = np.zeros_like(p)
    dh[:, :-1] = np.abs(p[:, 1:] - p[:, :-1])
    dv[:-1, :] = np.abs(p[1:, :] - p[:-1, :])
    return dh + dv


def total_variation(img, region=None, region_name: str | None = None) -> MetricReport:
    """Sum over channels and pixels of |horizontal| + |vertical| forward differences."""
    arr = as_float(img)
    if arr.ndim != 2 and arr.ndim != 3:
        raise ValueError("total_variation expects an image")
    sel = None if region is None else _binary_mask(region, arr.shape[:2])
    per = []
    for p in _planes(arr):
        tv = _tv_plane(p)
        per.append(float(tv[sel].sum() if sel is not None else tv.sum()))
    if region is not None and region_name is None:
        region_name = "mask"
    return MetricReport("tv", float(sum(per)), per, region_name)


def ergas(fused, reference, resolution_ratio: float) -> MetricReport:
    """Relative dimensionless global error in synthesis.

    ``100 * ratio * sqrt(mean_b (RMSE_b / mean_b)^2)``, with ``ratio`` taken
    as given (4 for the IKONOS-like protocol). The prefactor only scales the
    score, so rankings between methods do not depend on it.
    """
    f = as_float(fused)
    r = as_float(reference)
    if f.shape != r.shape:
        raise ValueError(f"fused {f.shape} and reference {r.shape} differ")
    if resolution_ratio <= 0:
        raise ValueError("resolution ratio must be positive")
    terms = []
    for fb, rb in zip(_planes(f), _planes(r)):
        mean = float(rb.mean())
        if mean == 0.0:
            raise ValueError("reference band has zero mean; ERGAS undefined")
        rmse = float(np.sqrt(np.mean((fb - rb) ** 2)))
        terms.append((rmse / mean) ** 2)
    value = 100.0 * resolution_ratio * float(np.sqrt(np.mean(terms)))
    return MetricReport("ergas", value, [float(np.sqrt(t)) for t in terms])


def region_stats(img, mask, region_name: str = "mask") -> list[MetricReport]:
    """Mean, variance and TV of the pixels where ``mask == 1``."""
    arr = as_float(img)
    sel = _binary_mask(mask, arr.shape[:2])
    if not sel.any():
        raise ValueError("region is empty")
    means, variances = [], []
    for p in _planes(arr):
        vals = p[sel]
        means.append(float(vals.mean()))
        variances.append(float(vals.var()))
    tv = total_variation(arr, sel.astype(np.float64), region_name)
    return [
        MetricReport("mean", float(np.mean(means)), means, region_name),
        MetricReport("variance", float(np.mean(variances)), variances, region_name),
        tv,
    ]
