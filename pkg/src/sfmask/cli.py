"""Command-line entry point (``sfmask``)."""

from __future__ import annotations

import csv
import json
import logging
import os
import sys

import click
import numpy as np

from . import mask as masklib
from . import spectra
from .degrade import DegradationConfig, NoiseModel, degrade_sr, parse_kernel
from .imio import FORMATS, DecodeError, load_image, output_name, save_image
from .pipeline import (
    EXIT_CONFIG, EXIT_OK, EXIT_PARTIAL, ConfigError, image_rng, list_inputs, load_config,
    run_pipeline, verify,
)
from .sfm import SfmConfig, maybe_apply_sfm
from .transform import dct2_forward


def _open_csv(path):
    f = open(path, "w", newline="", encoding="utf-8")
    return f, csv.writer(f)


def _inputs(path):
    """(index, file path) pairs for a file or a directory of images."""
    if os.path.isdir(path):
        return [(i, os.path.join(path, n)) for i, n in enumerate(list_inputs(path))]
    return [(0, path)]


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose):
    """Stochastic frequency masking tools."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")


@main.command()
@click.option("--in", "src", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--range", "value_range", type=click.Choice(["byte", "unit"]), default="byte")
def dct(src, out, value_range):
    """Dump DCT-II coefficients as CSV rows (row, col, channel, value)."""
    spec = dct2_forward(load_image(src, value_range))
    f, w = _open_csv(out)
    with f:
        w.writerow(["row", "col", "channel", "value"])
        for (r, c, ch), v in np.ndenumerate(spec.coeffs):
            w.writerow([r, c, ch, repr(float(v))])


def _parse_dims(text):
    try:
        a, b = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise click.BadParameter(f"expected AxB, got {text!r}") from None
    return a, b


@main.command("mask-stats")
@click.option("--mode", type=click.Choice([masklib.CENTRAL, masklib.TARGETED]), default=masklib.CENTRAL)
@click.option("--dims", default="64x64", show_default=True)
@click.option("--n", "count", type=int, default=100_000, show_default=True)
@click.option("--bins", type=int, default=20, show_default=True)
@click.option("--rc", type=float, default=masklib.TARGETED_CENTER_FRACTION, show_default=True,
              help="target radius as a fraction of r_max (targeted mode)")
@click.option("--sd", type=float, default=masklib.TARGETED_SIGMA_FRACTION, show_default=True,
              help="sigma_delta as a fraction of r_max (targeted mode)")
@click.option("--seed", type=int, required=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def mask_stats(mode, dims, count, bins, rc, sd, seed, out):
    """Empirical per-band masking probability over many sampled masks."""
    dims = _parse_dims(dims)
    rng = np.random.default_rng(seed)
    r_max = masklib.max_radius(dims)
    if mode == masklib.CENTRAL:
        specs = [masklib.sample_central(dims, rng) for _ in range(count)]
    else:
        specs = [masklib.sample_targeted(dims, rc * r_max, sd * r_max, rng) for _ in range(count)]
    centers = (np.arange(bins) + 0.5) / bins * r_max
    freq = masklib.empirical_mask_frequency(specs, centers)
    f, w = _open_csv(out)
    with f:
        w.writerow(["radius", "radius_fraction", "empirical", "expected"])
        for r, p in zip(centers, freq):
            expected = masklib.band_mask_probability(r, r_max) if mode == masklib.CENTRAL else ""
            w.writerow([f"{r:.6f}", f"{r / r_max:.6f}", f"{p:.6f}", expected if expected == "" else f"{expected:.6f}"])


@main.command()
@click.option("--in", "src", required=True, type=click.Path(exists=True))
@click.option("--mode", type=click.Choice([masklib.CENTRAL, masklib.TARGETED]), default=masklib.CENTRAL)
@click.option("--rc", type=float, default=None, help="target radius as a fraction of r_max")
@click.option("--sd", type=float, default=None, help="sigma_delta as a fraction of r_max")
@click.option("--rate", type=float, default=1.0, show_default=True)
@click.option("--clamp", is_flag=True, help="clamp output to the nominal range")
@click.option("--seed", type=int, required=True)
@click.option("--format", "fmt", type=click.Choice(list(FORMATS)), default="png8", show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def sfm(src, mode, rc, sd, rate, clamp, seed, fmt, out):
    """Apply SFM to an image or a directory, writing a JSON sidecar per image."""
    try:
        cfg = SfmConfig(mode=mode, rate=rate, r_center=rc, sigma_delta=sd, clamp_output=clamp)
    except ValueError as e:
        raise click.UsageError(str(e))
    os.makedirs(out, exist_ok=True)
    failed = 0
    for index, path in _inputs(src):
        stem = os.path.splitext(os.path.basename(path))[0]
        try:
            img = load_image(path)
            res, applied, spec = maybe_apply_sfm(img, cfg, image_rng(seed, index))
            clamped = save_image(res, os.path.join(out, output_name(stem, fmt)), fmt)
        except (DecodeError, ValueError) as e:
            click.echo(f"error: {e}", err=True)
            failed += 1
            continue
        sidecar = {"input": os.path.basename(path), "index": index, "seed": seed, "applied": applied,
                   "mask_spec": spec.to_dict() if spec else None, "clamped_on_save": clamped}
        with open(os.path.join(out, stem + ".json"), "w", encoding="utf-8") as f:
            json.dump(sidecar, f, indent=2, sort_keys=True)
    sys.exit(EXIT_PARTIAL if failed else EXIT_OK)


@main.command()
@click.option("--in", "src", required=True, type=click.Path(exists=True))
@click.option("--kernel", default="bicubic", show_default=True, help="gaussian:SIGMA | bicubic | identity")
@click.option("--scale", type=int, default=4, show_default=True)
@click.option("--noise", default="none", show_default=True, help="none | awgn:S | awgn-blind:LO,HI | pg:GAIN,READ")
@click.option("--seed", type=int, required=True)
@click.option("--format", "fmt", type=click.Choice(list(FORMATS)), default="png8", show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def degrade(src, kernel, scale, noise, seed, fmt, out):
    """Blur, downsample and add noise to every input image."""
    try:
        cfg = DegradationConfig(parse_kernel(kernel), scale, NoiseModel.parse(noise))
    except ValueError as e:
        raise click.UsageError(str(e))
    os.makedirs(out, exist_ok=True)
    failed = 0
    for index, path in _inputs(src):
        stem = os.path.splitext(os.path.basename(path))[0]
        try:
            lr = degrade_sr(load_image(path), cfg, image_rng(seed, index))
            save_image(lr, os.path.join(out, output_name(stem, fmt)), fmt)
        except (DecodeError, ValueError) as e:
            click.echo(f"error: {e}", err=True)
            failed += 1
    sys.exit(EXIT_PARTIAL if failed else EXIT_OK)


def _write_profiles(path, columns):
    names = list(columns)
    first = columns[names[0]]
    f, w = _open_csv(path)
    with f:
        w.writerow(["radius", "count"] + names)
        for i, r in enumerate(first.centers):
            w.writerow([f"{r:.6f}", int(first.counts[i])] + [repr(float(columns[n].values[i])) for n in names])


@main.command()
@click.option("--in", "src", required=True, type=click.Path(exists=True))
@click.option("--bins", type=int, default=spectra.DEFAULT_BINS, show_default=True)
@click.option("--window", type=click.Choice(["none", "hann"]), default="none", show_default=True)
@click.option("--fit", nargs=2, type=float, default=None, help="fit a power law over [LO, HI]")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def psd(src, bins, window, fit, out):
    """Radial PSD averaged over all input images."""
    profiles = []
    for _, path in _inputs(src):
        try:
            profiles.append(spectra.radial_psd(load_image(path), bins, None if window == "none" else window))
        except (DecodeError, ValueError) as e:
            click.echo(f"skipping: {e}", err=True)
    if not profiles:
        raise click.ClickException("no usable images")
    avg = spectra.average_profiles(profiles)
    _write_profiles(out, {"psd": avg})
    if fit:
        res = spectra.fit_power_law(avg, *fit)
        click.echo(f"alpha={res.alpha:.4f} amplitude={res.amplitude:.6g} residual={res.residual:.4g}")


@main.command()
@click.option("--alpha", type=float, default=2.0, show_default=True)
@click.option("--amplitude", type=float, default=1.0, show_default=True)
@click.option("--sigma2", "variances", type=float, multiple=True, default=(3.0, 10.0), show_default=True)
@click.option("--bins", type=int, default=spectra.DEFAULT_BINS, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def snr(alpha, amplitude, variances, bins, out):
    """SNR versus frequency for a power-law signal under white noise."""
    signal = spectra.power_law_profile(alpha, bins, amplitude)
    cols = {"signal": signal}
    for v in variances:
        curve = spectra.snr_curve(signal, float(np.sqrt(v)))
        cols[f"snr_sigma2_{v:g}"] = curve
        cross = spectra.snr_crossover(curve)
        click.echo(f"sigma2={v:g}: SNR=1 at radius {'none' if cross is None else f'{cross:.4f}'}")
    _write_profiles(out, cols)


@main.group()
def pipeline():
    """Batch SFM + degradation runs with manifests."""


@pipeline.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=None)
@click.option("--task", default=None)
@click.option("--in", "input_dir", default=None)
@click.option("--out", "output_dir", default=None)
@click.option("--target-dir", default=None)
@click.option("--format", "fmt", default=None)
@click.option("--value-range", default=None)
@click.option("--mode", default=None)
@click.option("--rate", type=float, default=None)
@click.option("--rc", type=float, default=None)
@click.option("--sd", type=float, default=None)
@click.option("--clamp/--no-clamp", default=None)
@click.option("--kernel", default=None)
@click.option("--scale", type=int, default=None)
@click.option("--noise", default=None)
@click.option("--workers", type=int, default=1, show_default=True)
def pipeline_run(config_path, seed, task, input_dir, output_dir, target_dir, fmt, value_range, mode,
                 rate, rc, sd, clamp, kernel, scale, noise, workers):
    """Run a batch from a TOML config; flags override config keys."""
    def absolute(p):
        return None if p is None else os.path.abspath(p)

    overrides = {
        "seed": seed, "task": task, "input_dir": absolute(input_dir), "output_dir": absolute(output_dir),
        "target_dir": absolute(target_dir), "format": fmt, "value_range": value_range,
        "sfm.mode": mode, "sfm.rate": rate, "sfm.r_center": rc, "sfm.sigma_delta": sd,
        "sfm.clamp_output": clamp, "degradation.kernel": kernel, "degradation.scale": scale,
        "degradation.noise": noise,
    }
    try:
        cfg = load_config(config_path, overrides)
        manifest = run_pipeline(cfg, workers=workers)
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(f"{len(manifest.records)} images, {manifest.applied} with SFM, {manifest.failed} failed")
    sys.exit(manifest.exit_code)


@pipeline.command("verify")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
def pipeline_verify(manifest_path):
    """Re-run a manifest's config and compare outputs."""
    try:
        problems = verify(manifest_path)
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    for p in problems:
        click.echo(p)
    click.echo("verify: OK" if not problems else f"verify: {len(problems)} problem(s)")
    sys.exit(EXIT_PARTIAL if problems else EXIT_OK)


if __name__ == "__main__":
    main()
