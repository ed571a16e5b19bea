"""Command-line front end: truth-table dumps, exhaustive sweeps, product
LUT export, quantized inference, and denoising evaluation.

Every command writes a small manifest JSON next to its artifacts so a run
can be reproduced from flags + seed alone.  Output files are written
atomically (temp file + rename).
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path

import click
import numpy as np

from . import __version__
from .compressor import (
    CompressorTruthTable,
    critical_path,
    exact_compressor,
    proposed_netlist,
    proposed_truth_table,
    table_from_error_pattern,
)
from .dataio import read_idx, read_pgm
from .metrics import build_product_lut, exhaustive_sweep
from .multiplier import Family, MultiplierConfig, build_plan
from .nn import WeightBundle, infer, quantize_image
from .quality import ImagePair, psnr, ssim

DEFAULT_SEED = 42

_FAMILIES = {
    "exact": Family.EXACT,
    "design1": Family.DESIGN1_HYBRID,
    "design2": Family.DESIGN2_TRUNCATED,
    "proposed": Family.PROPOSED_FULL_APPROX,
}


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(out_path: Path, command: str, config: dict, outputs: list[Path],
                    seed: int | None = None) -> None:
    digest = hashlib.sha256(
        json.dumps(config, sort_keys=True).encode()
    ).hexdigest()[:16]
    manifest = {
        "command": command,
        "config": config,
        "config_hash": digest,
        "seed": seed,
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
    }
    _atomic_write(out_path, (json.dumps(manifest, indent=1) + "\n").encode())


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _parse_design(design: str) -> CompressorTruthTable | None:
    """proposed/exact/pattern:<i,j,...> -> table; None means the exact cell."""
    if design == "proposed":
        return proposed_truth_table()
    if design == "exact":
        return None
    if design.startswith("pattern:"):
        spec = design[len("pattern:"):]
        try:
            indices = [int(tok, 0) for tok in spec.split(",") if tok]
        except ValueError:
            _fail(f"bad pattern spec {spec!r}")
        return table_from_error_pattern(indices, name=design)
    _fail(f"unknown design {design!r}")
    raise AssertionError("unreachable")


def _config_for(family: str, table_csv: str | None, threshold: int, trunc: int) -> MultiplierConfig:
    if family not in _FAMILIES:
        _fail(f"unknown family {family!r}; choose from {sorted(_FAMILIES)}")
    table = proposed_truth_table()
    if table_csv is not None:
        table = CompressorTruthTable.from_csv(
            Path(table_csv).read_text(), name=Path(table_csv).stem
        )
    return MultiplierConfig(
        family=_FAMILIES[family],
        approx_table=table,
        exact_column_threshold=threshold,
        truncation_width=trunc,
    )


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Approximate 4:2 compressor / 8x8 multiplier analysis toolkit."""


@main.group()
def compressor() -> None:
    """Compressor truth tables and netlist analysis."""


@compressor.command("dump")
@click.option("--design", required=True,
              help="proposed | exact | pattern:<idx,idx,...>")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Write the truth-table CSV here (default: stdout only).")
def compressor_dump(design: str, out_path: Path | None) -> None:
    """Dump a compressor truth table plus a critical-path summary."""
    table = _parse_design(design)
    if table is None:
        # exact 5-input cell: include cout so every row encodes exactly
        lines = ["x4,x3,x2,x1,cout,carry,sum"]
        for idx in range(16):
            bits = [(idx >> k) & 1 for k in range(4)]
            cout, carry, s = exact_compressor(*bits, 0)
            lines.append(
                f"{bits[3]},{bits[2]},{bits[1]},{bits[0]},{cout},{carry},{s}"
            )
        csv_text = "\n".join(lines) + "\n"
        error_rows: list[int] = []
        path_summary = "critical path: n/a (behavioral exact model)"
    else:
        csv_text = table.to_csv()
        error_rows = list(table.error_indices)
        if design == "proposed":
            cp = critical_path(proposed_netlist())
            path_summary = f"critical path: {len(cp)} stages ({' -> '.join(cp)})"
        else:
            path_summary = "critical path: n/a (behavioral table)"
    click.echo(csv_text, nl=False)
    click.echo(f"error rows: {len(error_rows)} {error_rows}")
    click.echo(path_summary)
    if out_path is not None:
        _atomic_write(out_path, csv_text.encode())
        _write_manifest(
            out_path.with_suffix(".manifest.json"),
            "compressor dump", {"design": design}, [out_path],
        )


@main.group()
def mult() -> None:
    """Multiplier sweeps and product-table export."""


@mult.command("sweep")
@click.option("--family", required=True, type=click.Choice(sorted(_FAMILIES)))
@click.option("--table", "table_csv", type=click.Path(exists=True), default=None,
              help="Approximate-compressor truth-table CSV.")
@click.option("--threshold", type=int, default=8,
              help="design1: first column using exact compressors.")
@click.option("--trunc", type=int, default=4,
              help="design2: number of truncated LSB columns.")
@click.option("--out", "out_prefix", type=click.Path(path_type=Path), default=None,
              help="Prefix for report/histogram/plan files.")
def mult_sweep(family: str, table_csv: str | None, threshold: int, trunc: int,
               out_prefix: Path | None) -> None:
    """Exhaustively sweep all 65,536 operand pairs and report error metrics."""
    if family != "design1" and threshold != 8:
        _fail("--threshold only applies to --family design1")
    if family != "design2" and trunc != 4:
        _fail("--trunc only applies to --family design2")
    try:
        cfg = _config_for(family, table_csv, threshold, trunc)
        report = exhaustive_sweep(cfg)
    except ValueError as exc:
        _fail(str(exc))
    click.echo(report.pretty())
    if cfg.family is Family.DESIGN2_TRUNCATED:
        from .multiplier import resolve_compensation

        click.echo(f"compensation constant: {resolve_compensation(cfg)}")
    if out_prefix is not None:
        report_path = out_prefix.with_name(out_prefix.name + "_report.csv")
        hist_path = out_prefix.with_name(out_prefix.name + "_hist.csv")
        plan_path = out_prefix.with_name(out_prefix.name + "_plan.txt")
        _atomic_write(report_path, report.to_csv().encode())
        _atomic_write(hist_path, report.histogram_csv().encode())
        _atomic_write(plan_path, build_plan(cfg).dump().encode())
        _write_manifest(
            out_prefix.with_name(out_prefix.name + "_manifest.json"),
            "mult sweep",
            {"family": family, "table": table_csv, "threshold": threshold,
             "trunc": trunc},
            [report_path, hist_path, plan_path],
        )


@mult.command("lut")
@click.option("--family", required=True, type=click.Choice(sorted(_FAMILIES)))
@click.option("--table", "table_csv", type=click.Path(exists=True), default=None)
@click.option("--threshold", type=int, default=8)
@click.option("--trunc", type=int, default=4)
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def mult_lut(family: str, table_csv: str | None, threshold: int, trunc: int,
             out_path: Path) -> None:
    """Export the 65,536-entry product table (little-endian uint16, no header)."""
    try:
        cfg = _config_for(family, table_csv, threshold, trunc)
        lut = build_product_lut(cfg)
    except ValueError as exc:
        _fail(str(exc))
    _atomic_write(out_path, lut.astype("<u2").tobytes())
    _write_manifest(
        out_path.with_suffix(out_path.suffix + ".manifest.json"),
        "mult lut",
        {"family": family, "table": table_csv, "threshold": threshold,
         "trunc": trunc},
        [out_path],
    )
    click.echo(f"wrote {out_path} ({lut.size} entries)")


def load_lut_file(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) != (1 << 16) * 2:
        raise ValueError(f"{path}: product lut must be 131072 bytes")
    return np.frombuffer(data, dtype="<u2").astype(np.uint16)


@main.group()
def nn() -> None:
    """Quantized inference with a pluggable product table."""


@nn.command("infer")
@click.option("--bundle", "bundle_path", required=True, type=click.Path(exists=True))
@click.option("--images", "images_path", required=True, type=click.Path(exists=True))
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True))
@click.option("--lut", "lut_path", required=True, type=click.Path(exists=True))
@click.option("--limit", type=int, default=None, help="Evaluate only the first N images.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
def nn_infer(bundle_path: str, images_path: str, labels_path: str, lut_path: str,
             limit: int | None, out_path: Path | None) -> None:
    """Classify an IDX image set and report accuracy."""
    try:
        bundle = WeightBundle.load(bundle_path)
        images = read_idx(images_path)
        labels = read_idx(labels_path)
        lut = load_lut_file(lut_path)
    except ValueError as exc:
        _fail(str(exc))
    if images.ndim != 3 or labels.ndim != 1 or len(images) != len(labels):
        _fail("images/labels shape mismatch")
    if limit is not None:
        images, labels = images[:limit], labels[:limit]
    correct = 0
    for img, label in zip(images, labels):
        pred = infer(bundle, quantize_image(img), lut)
        correct += int(pred == int(label))
    total = len(images)
    pct = 100.0 * correct / total if total else 0.0
    line = f"total={total} correct={correct} percent={pct:.2f}"
    click.echo(line)
    if out_path is not None:
        _atomic_write(out_path, (line + "\n").encode())
        _write_manifest(
            out_path.with_suffix(".manifest.json"),
            "nn infer",
            {"bundle": bundle_path, "images": images_path,
             "labels": labels_path, "lut": lut_path, "limit": limit},
            [out_path],
        )


@nn.command("denoise")
@click.option("--bundle", "bundle_path", required=True, type=click.Path(exists=True))
@click.option("--image", "image_path", required=True, type=click.Path(exists=True))
@click.option("--sigma", required=True, type=click.Choice(["25", "50"]))
@click.option("--lut", "lut_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def nn_denoise(bundle_path: str, image_path: str, sigma: str, lut_path: str,
               seed: int, out_path: Path) -> None:
    """Add seeded Gaussian noise, denoise through the bundle, report PSNR/SSIM."""
    try:
        bundle = WeightBundle.load(bundle_path)
        clean = read_pgm(image_path)
        lut = load_lut_file(lut_path)
    except ValueError as exc:
        _fail(str(exc))
    rng = np.random.default_rng(seed)
    noisy = np.clip(
        clean.astype(np.float64) + rng.normal(0.0, float(sigma), clean.shape),
        0, 255,
    ).astype(np.uint8)
    denoised_q = infer(bundle, quantize_image(noisy), lut)
    denoised = np.clip(
        np.rint(denoised_q.dequantize()[0] * 255.0), 0, 255
    ).astype(np.uint8)
    h, w = denoised.shape
    _atomic_write(out_path, f"P5\n{w} {h}\n255\n".encode("ascii") + denoised.tobytes())
    pair = ImagePair(reference=clean, test=denoised)
    noisy_pair = ImagePair(reference=clean, test=noisy)
    line = (
        f"sigma={sigma} seed={seed} "
        f"noisy_psnr={psnr(noisy_pair):.2f} psnr={psnr(pair):.2f} ssim={ssim(pair):.4f}"
    )
    click.echo(line)
    _write_manifest(
        out_path.with_suffix(".manifest.json"),
        "nn denoise",
        {"bundle": bundle_path, "image": image_path, "sigma": sigma,
         "lut": lut_path},
        [out_path],
        seed=seed,
    )


@main.group()
def report() -> None:
    """Merge and reshape sweep reports."""


@report.command("compare")
@click.option("--inputs", required=True, multiple=True,
              type=click.Path(exists=True), help="Report CSVs from `mult sweep`.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Write a plot-ready long-format CSV here.")
def report_compare(inputs: tuple[str, ...], out_path: Path | None) -> None:
    """Merge sweep reports into one comparison table."""
    header = "design,er,nmed,mred,max_ed,mean_ed"
    rows: list[list[str]] = []
    for path in inputs:
        lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
        if not lines or lines[0] != header:
            _fail(f"{path}: not a sweep report CSV")
        rows.extend(ln.split(",") for ln in lines[1:])
    click.echo(f"{'Design':<24} {'ER (%)':>9} {'NMED (%)':>9} {'MRED (%)':>9} {'max ED':>8}")
    for r in rows:
        click.echo(f"{r[0]:<24} {float(r[1]):>9.3f} {float(r[2]):>9.3f} "
                   f"{float(r[3]):>9.3f} {int(r[4]):>8d}")
    if out_path is not None:
        long_lines = ["design,metric,value"]
        for r in rows:
            for metric, value in zip(("er", "nmed", "mred", "max_ed", "mean_ed"), r[1:]):
                long_lines.append(f"{r[0]},{metric},{value}")
        _atomic_write(out_path, ("\n".join(long_lines) + "\n").encode())
        _write_manifest(
            out_path.with_suffix(".manifest.json"),
            "report compare", {"inputs": list(inputs)}, [out_path],
        )


if __name__ == "__main__":
    main()
