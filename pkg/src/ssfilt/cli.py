"""Command-line front end.

Exit status: 0 on success, 2 on invalid arguments or parameters (one-line
diagnostic on stderr, nothing written), 1 on I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import metrics, pipelines, report
from .config import ConfigError, build_config, read_config
from .io import ImageIOError, atomic_write_bytes, read_image, read_scalar_field, write_image, write_pfm
from .kappamap import NltParams, gompertz_kappa
from .pipelines import DEFAULT_PRESET, PRESETS, SHARPEN_DEFOCUS, SMOOTH_DEFOCUS, PipelineConfig
from .ssfilter import UNIFORM, filter, worker_count

log = logging.getLogger("ssfilt")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _scale_arg(text: str):
    if text.strip().lower() == UNIFORM:
        return UNIFORM
    return float(text)


def _presets_epilog(command: str) -> str:
    lines = ["presets (figure reproduced):"]
    for name, (pipe, desc, _) in PRESETS.items():
        if pipe == command:
            mark = "  [default]" if DEFAULT_PRESET.get(command) == name else ""
            lines.append(f"  {name:<14} {desc}{mark}")
    return "\n".join(lines)


def _fmt_default(value) -> str:
    return "field" if hasattr(value, "shape") else f"{value:g}" if isinstance(value, float) else str(value)


def _add_filter_args(p: argparse.ArgumentParser, command: str, kappa: bool = True) -> None:
    base = pipelines.preset(DEFAULT_PRESET[command])
    f = base.filter
    g = p.add_argument_group("filter parameters (override preset and config file)")
    g.add_argument("--preset", choices=sorted(PRESETS), help=f"parameter preset (default {DEFAULT_PRESET[command]})")
    g.add_argument("--config", metavar="FILE", help="key = value configuration file")
    g.add_argument("--radius", type=int, help=f"patch radius r (preset: {f.radius})")
    g.add_argument("--epsilon", type=float, help=f"regulariser epsilon > 0 (preset: {f.epsilon:g})")
    if kappa:
        k = g.add_mutually_exclusive_group()
        k.add_argument("--kappa", type=float, help=f"scalar gain kappa >= 0 (preset: {_fmt_default(f.kappa)})")
        k.add_argument("--kappa-map", metavar="PFM", help="per-pixel kappa field (PFM)")
    g.add_argument("--scale", type=_scale_arg, help=f"weight scale s > 0 or 'uniform' (preset: {f.scale})")
    g.add_argument("--weights", choices=("uniform", "adaptive"), help="patch weighting scheme")
    g.add_argument("--iterations", type=int, help=f"number of passes (preset: {f.iterations})")
    g.add_argument("--hsv", action="store_const", const=True, help="filter only the HSV value channel")


def _add_nlt_args(p: argparse.ArgumentParser, command: str) -> None:
    nlt = pipelines.preset(DEFAULT_PRESET[command]).nlt
    g = p.add_argument_group("gain transform kappa(t) = (kmax-kmin) exp(-0.69 exp(-c (t - t0))) + kmin")
    g.add_argument("--kappa-min", type=float, help=f"(preset: {nlt.kappa_min:g})")
    g.add_argument("--kappa-max", type=float, help=f"(preset: {nlt.kappa_max:g})")
    g.add_argument("--growth", type=float, help=f"growth rate c (preset: {nlt.growth:g})")
    g.add_argument("--midpoint", type=float, help=f"midpoint t0 (preset: {nlt.midpoint:g})")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=8, help="PNG/PGM/PPM sample depth")


def _sub(subparsers, name: str, help_: str, command: str | None = None):
    return subparsers.add_parser(
        name,
        help=help_,
        description=help_,
        epilog=_presets_epilog(command or name),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )


OVERRIDE_KEYS = (
    "radius", "epsilon", "kappa", "scale", "weights", "iterations", "hsv",
    "kappa_min", "kappa_max", "growth", "midpoint",
    "window", "refine_radius", "refine_epsilon", "mode", "resolution_ratio", "histogram_match",
)


def _config(args, command: str) -> PipelineConfig:
    values = read_config(args.config) if getattr(args, "config", None) else {}
    if getattr(args, "preset", None):
        values["preset"] = args.preset
    for key in OVERRIDE_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return build_config(values, DEFAULT_PRESET[command])


def _check_output(path: str, allowed=(".png", ".pgm", ".ppm", ".pnm", ".pfm")) -> None:
    if Path(path).suffix.lower() not in allowed:
        raise ConfigError(f"output {path!r}: unsupported format, use one of {', '.join(allowed)}")


def _with_kappa_map(cfg: PipelineConfig, args) -> PipelineConfig:
    if not getattr(args, "kappa_map", None):
        return cfg
    return replace(cfg, filter=cfg.filter.with_kappa(read_scalar_field(args.kappa_map)))


def cmd_filter(args) -> None:
    cfg = _config(args, "filter")
    _check_output(args.output)
    img = read_image(args.input)
    guide = read_image(args.guide) if args.guide else None
    cfg = _with_kappa_map(cfg, args)
    write_image(args.output, filter(img, guide, cfg.filter), args.bit_depth)


KAPPA_SOURCES = {"depth": "sdof", "blur": "blur", "mask": "face"}


def cmd_kappa(args) -> None:
    command = KAPPA_SOURCES[args.source]
    if args.source == "blur" and args.preset is None:
        args.preset = "fig13-sharpen" if args.mode == SHARPEN_DEFOCUS else "fig13-smooth"
    cfg = _config(args, command)
    _check_output(args.output, (".pfm",))
    if args.preview:
        _check_output(args.preview, (".png",))
    if args.source == "mask" and cfg.refine_radius > 0 and not args.image:
        raise ConfigError("--image is required to feather a mask (or pass --refine-radius 0)")
    if args.source == "depth":
        kappa = pipelines.kappa_from_depth(read_scalar_field(args.input), cfg)
    elif args.source == "blur":
        kappa = pipelines.kappa_from_blur(read_image(args.input), cfg)
    else:
        mask = read_scalar_field(args.input)
        img = read_image(args.image) if args.image else None
        if cfg.refine_radius > 0:
            kappa = pipelines.kappa_from_mask(mask, img, cfg)
        else:
            kappa = gompertz_kappa(1.0 - mask, cfg.nlt)
    write_pfm(args.output, kappa)
    if args.preview:
        report.render_kappa_map(kappa, args.preview)


def cmd_sdof(args) -> None:
    cfg = _config(args, "sdof")
    _check_output(args.output)
    img = read_image(args.input)
    depth = read_scalar_field(args.depth)
    write_image(args.output, pipelines.sdof(img, depth, cfg), args.bit_depth)


def cmd_blur(args) -> None:
    if args.preset is None:
        args.preset = "fig13-sharpen" if args.mode == SHARPEN_DEFOCUS else "fig13-smooth"
    cfg = _config(args, "blur")
    _check_output(args.output)
    img = read_image(args.input)
    write_image(args.output, pipelines.blur_guided(img, cfg), args.bit_depth)


def cmd_face(args) -> None:
    cfg = _config(args, "face")
    _check_output(args.output)
    img = read_image(args.input)
    mask = read_scalar_field(args.mask)
    write_image(args.output, pipelines.face_enhance(img, mask, cfg), args.bit_depth)


def cmd_flashfusion(args) -> None:
    cfg = _config(args, "flashfusion")
    _check_output(args.output)
    noflash = read_image(args.noflash)
    flash = read_image(args.flash)
    cfg = _with_kappa_map(cfg, args)
    write_image(args.output, pipelines.flash_noflash(noflash, flash, cfg), args.bit_depth)


def cmd_pansharpen(args) -> None:
    cfg = _config(args, "pansharpen")
    _check_output(args.output)
    ms = read_image(args.ms)
    pan = read_scalar_field(args.pan)
    write_image(args.output, pipelines.pansharpen(ms, pan, cfg), args.bit_depth)


def _emit(reports_by_source, csv_path) -> None:
    rows = []
    for source, rep in reports_by_source:
        print(f"source={source} {rep.to_kv()}")
        rows.append(rep.csv_row(source))
    if csv_path:
        atomic_write_bytes(csv_path, metrics.csv_text(rows).encode())


def cmd_metric(args) -> None:
    if args.metric == "tv":
        mask = read_scalar_field(args.mask) if args.mask else None
        out = [(p, metrics.total_variation(read_image(p), mask)) for p in args.images]
    elif args.metric == "ergas":
        if args.ratio <= 0:
            raise ConfigError("--ratio must be > 0")
        rep = metrics.ergas(read_image(args.fused), read_image(args.reference), args.ratio)
        out = [(args.fused, rep)]
    else:
        img = read_image(args.image)
        mask = read_scalar_field(args.mask)
        out = [(args.image, r) for r in metrics.region_stats(img, mask)]
    _emit(out, args.csv)


def _parse_kappas(text: str) -> list[float]:
    try:
        ks = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--kappas: expected comma-separated numbers, got {text!r}") from None
    if not ks or any(k < 0 for k in ks):
        raise ConfigError("--kappas: need at least one value, all >= 0")
    return ks


def cmd_report(args) -> None:
    cfg = _config(args, "flashfusion")
    kappas = _parse_kappas(args.kappas)
    if bool(args.noflash) != bool(args.flash):
        raise ConfigError("--noflash and --flash must be given together")
    nlt_values = {k: getattr(args, k) for k in ("kappa_min", "kappa_max", "growth", "midpoint")}
    nlt = replace(NltParams(), **{k: v for k, v in nlt_values.items() if v is not None})
    sweep = None
    if args.noflash:
        noflash = read_image(args.noflash)
        flash = read_image(args.flash)
        sweep = report.tv_sweep(noflash, flash, cfg, kappas)
    for path in report.render_report(args.outdir, nlt, sweep):
        print(f"wrote {path}")
    for k, tv in sweep or []:
        print(f"kappa={k:g} tv={tv:.10g}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ssfilt", description="Edge-aware smoothing-sharpening filter toolkit.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = _sub(sub, "filter", "apply the smoothing-sharpening filter to one image")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--self", dest="self_guided", action="store_true", help="self-guided (default)")
    src.add_argument("--guide", metavar="IMG", help="external guide image")
    _add_filter_args(p, "filter")
    _add_output_args(p)
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_filter)

    p = _sub(sub, "kappa", "compute a per-pixel kappa field (PFM) from a feature map", command="kappa")
    p.add_argument("source", choices=sorted(KAPPA_SOURCES), help="feature type of INPUT")
    p.add_argument("input")
    p.add_argument("output", help="kappa field, .pfm")
    p.add_argument("--image", help="colour image used to feather a mask")
    p.add_argument("--mode", choices=(SMOOTH_DEFOCUS, SHARPEN_DEFOCUS), help="blur source only")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", metavar="FILE")
    p.add_argument("--window", type=int, help="entropy window (odd)")
    p.add_argument("--refine-radius", type=int)
    p.add_argument("--refine-epsilon", type=float)
    p.add_argument("--preview", metavar="PNG", help="also render the field as a colour-mapped figure")
    _add_nlt_args(p, "sdof")
    p.epilog = "\n".join(
        [_presets_epilog("sdof"), _presets_epilog("blur").split("\n", 1)[1], _presets_epilog("face").split("\n", 1)[1]]
    )
    p.set_defaults(func=cmd_kappa)

    p = _sub(sub, "sdof", "shallow depth of field from a depth map (0 = near, 1 = far)")
    _add_filter_args(p, "sdof")
    _add_nlt_args(p, "sdof")
    _add_output_args(p)
    p.add_argument("input")
    p.add_argument("depth")
    p.add_argument("output")
    p.set_defaults(func=cmd_sdof)

    p = _sub(sub, "blur", "defocus-guided smoothing or sharpening")
    p.add_argument("--mode", choices=(SMOOTH_DEFOCUS, SHARPEN_DEFOCUS), default=SMOOTH_DEFOCUS)
    p.add_argument("--window", type=int, help="entropy window, odd (preset: 33)")
    p.add_argument("--refine-radius", type=int, help="guided refinement radius (preset: 32)")
    p.add_argument("--refine-epsilon", type=float, help="guided refinement epsilon (preset: 0.01)")
    _add_filter_args(p, "blur")
    _add_nlt_args(p, "blur")
    _add_output_args(p)
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_blur)

    p = _sub(sub, "face", "smooth a masked skin region, sharpen the rest")
    p.add_argument("--refine-radius", type=int, help="mask feathering radius, 0 disables (preset: 4)")
    p.add_argument("--refine-epsilon", type=float, help="mask feathering epsilon (preset: 0.01)")
    _add_filter_args(p, "face")
    _add_nlt_args(p, "face")
    _add_output_args(p)
    p.add_argument("input")
    p.add_argument("mask", help="skin mask, 1 = skin")
    p.add_argument("output")
    p.set_defaults(func=cmd_face)

    p = _sub(sub, "flashfusion", "enhance a no-flash image guided by a flash image")
    _add_filter_args(p, "flashfusion")
    _add_output_args(p)
    p.add_argument("noflash")
    p.add_argument("flash")
    p.add_argument("output")
    p.set_defaults(func=cmd_flashfusion)

    p = _sub(sub, "pansharpen", "fuse a multispectral image with a panchromatic band")
    p.add_argument("--no-histogram-match", dest="histogram_match", action="store_const", const=False)
    _add_filter_args(p, "pansharpen")
    _add_output_args(p)
    p.add_argument("ms")
    p.add_argument("pan")
    p.add_argument("output")
    p.set_defaults(func=cmd_pansharpen)

    p = _sub(sub, "metric", "print image quality metrics as key=value lines", command="metric")
    p.epilog = "ERGAS = 100 * ratio * sqrt(mean over bands of (RMSE/band mean)^2); ratio 4 matches the Fig. 17 setting."
    msub = p.add_subparsers(dest="metric", required=True, parser_class=_Parser)
    m = msub.add_parser("tv", help="total variation (sharpness proxy, Table 1)")
    m.add_argument("images", nargs="+")
    m.add_argument("--mask", help="restrict to pixels where mask = 1")
    m.add_argument("--csv", metavar="FILE", help="also write CSV rows")
    m = msub.add_parser("ergas", help="spectral distortion of a fused image")
    m.add_argument("fused")
    m.add_argument("reference")
    m.add_argument("--ratio", type=float, default=4.0, help="MS/PAN resolution ratio (default 4)")
    m.add_argument("--csv", metavar="FILE")
    m = msub.add_parser("region", help="mean, variance and TV inside a mask")
    m.add_argument("image")
    m.add_argument("mask")
    m.add_argument("--csv", metavar="FILE")
    p.set_defaults(func=cmd_metric)

    p = _sub(sub, "report", "render characteristic curves (and an optional TV-vs-kappa sweep) to PNG + CSV", command="flashfusion")
    p.add_argument("outdir")
    p.add_argument("--noflash", help="no-flash image for the TV sweep")
    p.add_argument("--flash", help="flash image for the TV sweep")
    p.add_argument("--kappas", default="0,10,50,100,200", help="sweep values (default: Table 1 set)")
    _add_filter_args(p, "flashfusion", kappa=False)
    _add_nlt_args(p, "filter")
    p.set_defaults(func=cmd_report)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        worker_count()
        args.func(args)
    except (ImageIOError, OSError) as exc:
        print(f"ssfilt: error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"ssfilt: error: {msg}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
