"""Batch generation of SFM training inputs.

Each task follows its own recipe:

* ``sr_synthetic``: SFM on the HR image, then blur + downsample (+ noise).
* ``sr_real``: SFM directly on the given LR image.
* ``denoise_synthetic``: SFM on the clean image, then synthetic noise.
* ``denoise_real``: SFM directly on the noisy image.

Targets are never modified. They are copied byte-for-byte into
``<output>/target`` (synthetic tasks copy the clean/HR input, real tasks copy
the matching file from ``target_dir`` when one is given). Network inputs go
to ``<output>/input``.

Every image draws from its own stream seeded by ``(seed, index)``, where
index is the position in the sorted file list. Results therefore do not
depend on worker count or filesystem order.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
import shutil
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .degrade import DegradationConfig, NoiseModel, add_noise, degrade_sr, parse_kernel
from .imio import FORMATS, IMAGE_EXTENSIONS, DecodeError, load_image, output_name, save_image
from .sfm import SfmConfig, maybe_apply_sfm

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

TASKS = ("sr_synthetic", "sr_real", "denoise_synthetic", "denoise_real")
SYNTHETIC_TASKS = ("sr_synthetic", "denoise_synthetic")
MANIFEST_NAME = "manifest.json"

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    task: str
    seed: int
    input_dir: str
    output_dir: str
    sfm: SfmConfig = field(default_factory=SfmConfig)
    degradation: Optional[DegradationConfig] = None
    format: str = "png8"
    target_dir: Optional[str] = None
    value_range: str = "byte"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; expected one of {', '.join(TASKS)}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}; expected one of {', '.join(FORMATS)}")
        if self.value_range not in ("byte", "unit"):
            raise ConfigError(f"unknown value_range {self.value_range!r}")
        if self.task in SYNTHETIC_TASKS and self.degradation is None:
            raise ConfigError(f"task {self.task} needs a [degradation] section")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        """Output-determining fields only; the output location is implied."""
        return {
            "task": self.task,
            "seed": int(self.seed),
            "input_dir": self.input_dir,
            "target_dir": self.target_dir,
            "format": self.format,
            "value_range": self.value_range,
            "sfm": self.sfm.to_dict(),
            "degradation": self.degradation.to_dict() if self.degradation else None,
        }

    @classmethod
    def from_dict(cls, d: dict, output_dir: Optional[str] = None) -> "PipelineConfig":
        d = dict(d)
        unknown = set(d) - {
            "task", "seed", "input_dir", "output_dir", "target_dir", "format",
            "value_range", "sfm", "degradation", "workers",
        }
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for key in ("task", "seed", "input_dir"):
            if d.get(key) is None:
                raise ConfigError(f"missing required config key {key!r}")
        out = output_dir or d.get("output_dir")
        if out is None:
            raise ConfigError("missing required config key 'output_dir'")
        try:
            sfm = SfmConfig(**(d.get("sfm") or {}))
            deg = d.get("degradation")
            if deg is not None:
                deg = DegradationConfig(
                    kernel=parse_kernel(str(deg.get("kernel", "bicubic"))),
                    scale=int(deg.get("scale", 4)),
                    noise=NoiseModel.parse(str(deg.get("noise", "none"))),
                )
            return cls(
                task=d["task"],
                seed=int(d["seed"]),
                input_dir=str(d["input_dir"]),
                output_dir=str(out),
                sfm=sfm,
                degradation=deg,
                format=d.get("format", "png8"),
                target_dir=d.get("target_dir"),
                value_range=d.get("value_range", "byte"),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None


PATH_KEYS = ("input_dir", "output_dir", "target_dir")


def load_config(path, overrides: Optional[dict] = None) -> PipelineConfig:
    """Read a TOML config and apply flat or nested `overrides` (None values skipped).

    Relative directories in the file are taken relative to the file itself.
    """
    try:
        with open(path, "rb") as f:
            d = tomllib.load(f)
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    base = os.path.dirname(os.path.abspath(path))
    for key in PATH_KEYS:
        if isinstance(d.get(key), str):
            d[key] = os.path.normpath(os.path.join(base, d[key]))
    return PipelineConfig.from_dict(merge_overrides(d, overrides or {}))


def merge_overrides(d: dict, overrides: dict) -> dict:
    d = {k: (dict(v) if isinstance(v, dict) else v) for k, v in d.items()}
    for key, value in overrides.items():
        if value is None:
            continue
        if "." in key:
            section, sub = key.split(".", 1)
            d.setdefault(section, {})
            d[section] = dict(d[section] or {})
            d[section][sub] = value
        else:
            d[key] = value
    return d


def list_inputs(directory) -> list[str]:
    """Sorted names of image files directly inside `directory`."""
    if not os.path.isdir(directory):
        raise ConfigError(f"input directory {directory} does not exist")
    names = sorted(
        n for n in os.listdir(directory)
        if not n.startswith(".")
        and n.lower().endswith(IMAGE_EXTENSIONS)
        and os.path.isfile(os.path.join(directory, n))
    )
    stems = [os.path.splitext(n)[0] for n in names]
    if len(set(stems)) != len(stems):
        raise ConfigError(f"input names in {directory} collide after dropping extensions")
    return names


def image_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))


def image_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(image_seed(seed, index))


def stream_id(seed: int, index: int) -> str:
    return image_seed(seed, index).generate_state(2, np.uint64).tobytes().hex()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def process_image(cfg: PipelineConfig, index: int, name: str) -> dict:
    """Run one image through the task recipe and write its outputs.

    RNG draw order per image: SFM gate and mask (always 3 draws), then the
    blind noise level (1 draw, blind AWGN only), then noise samples.
    """
    stem = os.path.splitext(name)[0]
    src = os.path.join(cfg.input_dir, name)
    rec = {
        "index": index,
        "input": name,
        "status": "ok",
        "seed": {"master": int(cfg.seed), "index": index, "stream": stream_id(cfg.seed, index)},
    }
    try:
        img = load_image(src, cfg.value_range)
        rng = image_rng(cfg.seed, index)
        out, applied, spec = maybe_apply_sfm(img, cfg.sfm, rng)
        rec["applied"] = applied
        rec["mask_spec"] = spec.to_dict() if spec else None
        rec["noise_sigma"] = None
        rec["kernel_sigma"] = None

        if cfg.task in SYNTHETIC_TASKS:
            deg = cfg.degradation
            noise = deg.noise.resolve(rng)
            if noise.kind == "awgn":
                rec["noise_sigma"] = noise.sigma
            if cfg.task == "sr_synthetic":
                rec["kernel_sigma"] = deg.kernel.sigma
                out = degrade_sr(out, dataclasses.replace(deg, noise=noise), rng)
            else:
                out = add_noise(out, noise, rng)
            target_src = src
        else:
            target_src = None
            if cfg.target_dir:
                candidate = os.path.join(cfg.target_dir, name)
                if os.path.isfile(candidate):
                    target_src = candidate

        in_rel = os.path.join("input", output_name(stem, cfg.format))
        rec["clamped"] = save_image(out, os.path.join(cfg.output_dir, in_rel), cfg.format)
        outputs = {"input": {"path": in_rel, "sha256": sha256_file(os.path.join(cfg.output_dir, in_rel))}}
        if target_src is not None:
            tgt_rel = os.path.join("target", name)
            shutil.copyfile(target_src, os.path.join(cfg.output_dir, tgt_rel))
            outputs["target"] = {"path": tgt_rel, "sha256": sha256_file(os.path.join(cfg.output_dir, tgt_rel))}
        rec["outputs"] = outputs
    except (DecodeError, ValueError, OSError) as e:
        log.warning("failed on %s: %s", src, e)
        rec["status"] = "failed"
        rec["error"] = str(e).replace(cfg.output_dir, "<output>")
    return rec


def _process_star(args):
    return process_image(*args)


@dataclass
class Manifest:
    config: dict
    records: list
    tool: str = "sfmask"
    version: str = __version__

    @property
    def failed(self) -> int:
        return sum(r["status"] != "ok" for r in self.records)

    @property
    def applied(self) -> int:
        return sum(bool(r.get("applied")) for r in self.records)

    @property
    def exit_code(self) -> int:
        return EXIT_PARTIAL if self.failed else EXIT_OK

    def to_dict(self) -> dict:
        return {
            "tool": self.tool,
            "version": self.version,
            "config": self.config,
            "summary": {"images": len(self.records), "applied": self.applied, "failed": self.failed},
            "records": self.records,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.dumps())

    @classmethod
    def read(cls, path) -> "Manifest":
        with open(path, encoding="utf-8") as f:
            d = json.load(f)
        return cls(d["config"], d["records"], d.get("tool", "sfmask"), d.get("version", ""))


def run_pipeline(cfg: PipelineConfig, workers: int = 1) -> Manifest:
    """Process every image under ``cfg.input_dir`` and write the manifest.

    Raises ConfigError when there is nothing to process. Per-image failures
    are recorded and reflected in ``Manifest.exit_code``.
    """
    names = list_inputs(cfg.input_dir)
    if not names:
        raise ConfigError(f"no images found in {cfg.input_dir}")
    if cfg.target_dir is not None and not os.path.isdir(cfg.target_dir):
        raise ConfigError(f"target directory {cfg.target_dir} does not exist")
    os.makedirs(os.path.join(cfg.output_dir, "input"), exist_ok=True)
    os.makedirs(os.path.join(cfg.output_dir, "target"), exist_ok=True)

    jobs = [(cfg, i, n) for i, n in enumerate(names)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_process_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        records = [_process_star(j) for j in jobs]

    manifest = Manifest(cfg.to_dict(), records)
    manifest.write(os.path.join(cfg.output_dir, MANIFEST_NAME))
    return manifest


def verify(manifest_path) -> list[str]:
    """Re-run a manifest's config and compare against what it records.

    Checks that files on disk still match their recorded hashes and that a
    fresh run reproduces every record exactly. Returns a list of problems
    (empty when verification passes).
    """
    manifest = Manifest.read(manifest_path)
    out_dir = os.path.dirname(os.path.abspath(manifest_path))
    problems = []
    for rec in manifest.records:
        for role, entry in (rec.get("outputs") or {}).items():
            path = os.path.join(out_dir, entry["path"])
            if not os.path.isfile(path):
                problems.append(f"{rec['input']}: {role} output {entry['path']} missing")
            elif sha256_file(path) != entry["sha256"]:
                problems.append(f"{rec['input']}: {role} output {entry['path']} hash mismatch")

    with tempfile.TemporaryDirectory() as tmp:
        cfg = PipelineConfig.from_dict(manifest.config, output_dir=tmp)
        fresh = run_pipeline(cfg)
    if fresh.config != manifest.config:
        problems.append("config header does not round-trip")
    old = {r["input"]: r for r in manifest.records}
    new = {r["input"]: r for r in fresh.records}
    for name in sorted(set(old) | set(new)):
        if name not in new:
            problems.append(f"{name}: recorded but no longer in input set")
        elif name not in old:
            problems.append(f"{name}: present in input set but not recorded")
        elif _canonical(old[name]) != _canonical(new[name]):
            problems.append(f"{name}: re-run does not reproduce record")
    return problems


def _canonical(rec):
    # error messages embed absolute paths of the run that produced them
    rec = {k: v for k, v in rec.items() if k != "error"}
    return json.loads(json.dumps(rec, sort_keys=True))
