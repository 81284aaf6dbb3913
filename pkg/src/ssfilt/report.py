"""Characteristic curves and sweeps rendered as PNG figures plus CSV tables."""

from __future__ import annotations

import csv
import io
import logging
from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .io import atomic_write_bytes
from .kappamap import NltParams, gompertz_kappa
from .metrics import total_variation
from .pipelines import PipelineConfig, flash_noflash
from .ssfilter import FilterParams, alpha_self

log = logging.getLogger(__name__)


def _write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in row])
    atomic_write_bytes(path, buf.getvalue().encode())


def _save(fig: Figure, path: Path) -> None:
    FigureCanvasAgg(fig)
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=120, bbox_inches="tight")
    atomic_write_bytes(path, buf.getvalue())


def frequency_response(alpha: float, omega) -> np.ndarray:
    """Response of the fixed-alpha 3-tap filter: 1 - 4(1 - alpha)/3 sin^2(w/2)."""
    return 1.0 - 4.0 * (1.0 - alpha) / 3.0 * np.sin(np.asarray(omega) / 2.0) ** 2


def write_frequency_response(outdir: Path, alphas=(0.25, 1.0, 1.5), n: int = 256) -> list[Path]:
    omega = np.linspace(0.0, np.pi, n)
    curves = {a: frequency_response(a, omega) for a in alphas}
    csv_path = outdir / "frequency_response.csv"
    _write_csv(csv_path, ["omega"] + [f"alpha={a:g}" for a in alphas],
               ([float(w)] + [float(curves[a][i]) for a in alphas] for i, w in enumerate(omega)))
    fig = Figure(figsize=(5, 3.5))
    ax = fig.add_subplot()
    for a in alphas:
        ax.plot(omega, np.abs(curves[a]), label=f"alpha = {a:g}")
    ax.set_xlabel("digital frequency (rad/sample)")
    ax.set_ylabel("|H|")
    ax.set_xlim(0, np.pi)
    ax.legend()
    png = outdir / "frequency_response.png"
    _save(fig, png)
    return [csv_path, png]


def write_alpha_curves(outdir: Path, epsilons=(0.001, 0.01), kappas=(0.0, 0.1, 0.5, 0.9, 2.0, 5.0, 10.0)) -> list[Path]:
    sigma2 = np.logspace(-5, 0, 200)
    rows = []
    fig = Figure(figsize=(9, 3.5))
    axes = fig.subplots(1, len(epsilons), sharey=True)
    for ax, eps in zip(np.atleast_1d(axes), epsilons):
        for k in kappas:
            alpha = alpha_self(sigma2, FilterParams(1, eps, kappa=k)).alpha
            rows.extend((eps, k, float(s), float(a)) for s, a in zip(sigma2, alpha))
            ax.semilogx(sigma2, alpha, label=f"kappa = {k:g}")
        ax.axhline(1.0, color="0.5", lw=0.8, ls="--")
        ax.set_title(f"epsilon = {eps:g}")
        ax.set_xlabel("patch variance")
    np.atleast_1d(axes)[0].set_ylabel("alpha")
    np.atleast_1d(axes)[-1].legend(fontsize=7)
    csv_path = outdir / "interpolation_weight.csv"
    _write_csv(csv_path, ["epsilon", "kappa", "sigma2", "alpha"], rows)
    png = outdir / "interpolation_weight.png"
    _save(fig, png)
    return [csv_path, png]


def write_gompertz(outdir: Path, nlt: NltParams) -> list[Path]:
    t = np.linspace(0.0, 1.0, 201)
    kappa = gompertz_kappa(t, nlt)
    csv_path = outdir / "gompertz.csv"
    _write_csv(csv_path, ["t", "kappa"], zip(map(float, t), map(float, kappa)))
    fig = Figure(figsize=(5, 3.5))
    ax = fig.add_subplot()
    ax.plot(t, kappa)
    ax.axhline(1.0, color="0.5", lw=0.8, ls="--")
    ax.set_xlabel("feature t")
    ax.set_ylabel("kappa")
    ax.set_title(
        f"kmin={nlt.kappa_min:g} kmax={nlt.kappa_max:g} c={nlt.growth:g} t0={nlt.midpoint:g}"
    )
    png = outdir / "gompertz.png"
    _save(fig, png)
    return [csv_path, png]


def tv_sweep(noflash, flash, cfg: PipelineConfig, kappas) -> list[tuple[float, float]]:
    out = []
    for k in kappas:
        fused = flash_noflash(noflash, flash, PipelineConfig(cfg.filter.with_kappa(float(k))))
        out.append((float(k), total_variation(fused).value))
        log.info("kappa=%g tv=%.6g", k, out[-1][1])
    return out


def write_tv_sweep(outdir: Path, sweep: list[tuple[float, float]]) -> list[Path]:
    csv_path = outdir / "tv_vs_kappa.csv"
    _write_csv(csv_path, ["kappa", "tv"], sweep)
    fig = Figure(figsize=(5, 3.5))
    ax = fig.add_subplot()
    ks, tvs = zip(*sweep)
    ax.plot(ks, tvs, marker="o")
    ax.set_xlabel("kappa")
    ax.set_ylabel("total variation")
    png = outdir / "tv_vs_kappa.png"
    _save(fig, png)
    return [csv_path, png]


def render_kappa_map(kappa, path) -> None:
    fig = Figure(figsize=(5, 4))
    ax = fig.add_subplot()
    im = ax.imshow(kappa, cmap="coolwarm", interpolation="nearest")
    ax.set_axis_off()
    fig.colorbar(im, ax=ax, label="kappa")
    _save(fig, Path(path))


def render_report(outdir, nlt: NltParams | None = None, sweep=None) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = write_frequency_response(outdir)
    written += write_alpha_curves(outdir)
    written += write_gompertz(outdir, nlt or NltParams())
    if sweep:
        written += write_tv_sweep(outdir, sweep)
    return written
