"""Command line driver: ``igopca {synth,fit,reconstruct,compare,kstest,spectrum}``.

Errors go to stderr as ``igopca: error[<tag>]: <message>`` with exit code 1.
Flags may also come from a JSON file given with ``--config``; explicit flags
win over the file, which wins over built-in defaults.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import igo
from .baseline import L2Model, l2_fit, l2_reconstruct
from .errors import IgoError, ManifestError, MissingGroundTruthError
from .experiments import (
    compare,
    image_pair_ks_trials,
    region_error,
    spectrum_report,
    synthetic_ks_trials,
)
from .io import (
    atomic_write_text,
    load_image,
    load_model,
    save_model,
    save_orientation,
    save_pgm,
    write_csv,
)
from .orientation import GradientFilterSpec, compute_orientation
from .rng import derive_seed
from .stats import random_orientation_image
from .synth import Corruption, SynthConfig, synthesize

MANIFEST_FORMAT = "igopca-manifest"
MANIFEST_VERSION = 1


# manifest


def write_manifest(out_dir, dataset):
    """Write images, clean copies and ``manifest.json`` into ``out_dir``."""
    out_dir = Path(out_dir)
    entries = []
    for i, (obs, clean, corr) in enumerate(zip(dataset.observed, dataset.clean, dataset.corruptions)):
        name = f"img_{i:04d}.pgm"
        save_pgm(out_dir / "images" / name, obs)
        save_pgm(out_dir / "clean" / name, clean)
        entries.append({
            "path": f"images/{name}",
            "clean_path": f"clean/{name}",
            "split": "train",
            "corruption": corr.to_dict(),
        })
    cfg = dataset.config
    manifest = {
        "format": MANIFEST_FORMAT,
        "version": MANIFEST_VERSION,
        "height": cfg.height,
        "width": cfg.width,
        "config": vars(cfg),
        "images": entries,
    }
    atomic_write_text(out_dir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def read_manifest(path):
    path = Path(path)
    try:
        manifest = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(path, f"cannot read manifest ({exc})") from None
    if manifest.get("format") != MANIFEST_FORMAT or manifest.get("version") != MANIFEST_VERSION:
        raise ManifestError(path, "not an igopca manifest of a supported version")
    h, w = manifest["height"], manifest["width"]
    for i, entry in enumerate(manifest["images"]):
        for key in ("path", "clean_path"):
            if key in entry and not (path.parent / entry[key]).exists():
                raise ManifestError(path, f"image {i}: {entry[key]} does not exist")
        c = Corruption.from_dict(entry.get("corruption", {"mode": "none"}))
        if c.mode == "occlusion" and (c.x < 0 or c.y < 0 or c.x + c.w > w or c.y + c.h > h):
            raise ManifestError(path, f"image {i}: occlusion rectangle outside the image")
    return manifest


def manifest_images(manifest_path, manifest, key="path"):
    base = Path(manifest_path).parent
    return np.stack([load_image(base / e[key]) for e in manifest["images"]])


# commands


def _filter(args):
    return GradientFilterSpec(kind=args.filter, sigma=args.sigma)


def cmd_synth(args):
    cfg = SynthConfig(n=args.n, height=args.height, width=args.width, rank=args.rank, mode=args.mode,
                      fraction=args.fraction, patch=args.patch, seed=args.seed, spread=args.spread,
                      noise=args.noise)
    manifest = write_manifest(args.out, synthesize(cfg))
    n_bad = sum(e["corruption"]["mode"] != "none" for e in manifest["images"])
    print(f"wrote {len(manifest['images'])} images ({n_bad} corrupted) to {args.out}")


def cmd_fit(args):
    manifest = read_manifest(args.manifest)
    images = manifest_images(args.manifest, manifest)
    if args.method == "igo":
        spec = _filter(args)
        phis = [compute_orientation(x, spec, args.magnitude_floor) for x in images]
        model = igo.fit(phis, args.k, spec, serial=args.serial)
        spectrum = model.subspace.spectrum
    else:
        model = l2_fit(images, args.k, serial=args.serial)
        spectrum = model.spectrum
    save_model(model, args.out)
    if args.components_dir:
        _write_components(model, Path(args.components_dir))
    print(f"saved {args.method} model with k={args.k} to {args.out}")
    print("spectrum: " + " ".join(f"{v:.6g}" for v in spectrum))


def _write_components(model, out_dir):
    for l in range(model.k):
        b = model.basis[:, l].reshape(model.shape)
        if isinstance(model, L2Model):
            lo, hi = b.min(), b.max()
            img = (b - lo) / (hi - lo) if hi > lo else np.zeros_like(b)
        else:
            img = np.mod(np.angle(b), 2 * np.pi) / (2 * np.pi)
        save_pgm(out_dir / f"component_{l:02d}.pgm", img)


def cmd_reconstruct(args):
    model = load_model(args.model)
    out_dir = Path(args.out)
    spec = model.filter if isinstance(model, igo.IgoModel) else _filter(args)
    rows = []
    for path in args.images:
        img = load_image(path)
        phi = compute_orientation(img, spec, args.magnitude_floor)
        if isinstance(model, igo.IgoModel):
            rec = igo.reconstruct(model, phi)
        else:
            rec_img = l2_reconstruct(model, img)
            save_pgm(out_dir / f"{Path(path).stem}.recon.pgm", rec_img)
            rec = compute_orientation(rec_img, spec, args.magnitude_floor)
        save_orientation(rec, out_dir / f"{Path(path).stem}.orient")
        err = region_error(rec, phi)
        rows.append((str(path), err))
        print(f"{path}: d2/p={err:.6g}")
    write_csv(out_dir / "reconstruction.csv", "reconstruction", ["image", "d2_over_p"], rows)


def cmd_compare(args):
    manifest = read_manifest(args.manifest)
    if any("clean_path" not in e for e in manifest["images"]):
        raise MissingGroundTruthError("manifest has no clean ground-truth copies; regenerate it with synth")
    observed = manifest_images(args.manifest, manifest)
    clean = manifest_images(args.manifest, manifest, key="clean_path")
    corruptions = [Corruption.from_dict(e["corruption"]) for e in manifest["images"]]
    report = compare(observed, clean, corruptions, args.k, _filter(args), args.magnitude_floor, args.serial)
    rows = [(r.index, r.mode, r.clean_pixels, r.igo_error, r.l2_error, r.l2_rmse, r.alignment, r.component)
            for r in report.rows]
    write_csv(args.out, "compare",
              ["index", "mode", "clean_pixels", "igo_error", "l2_error", "l2_rmse", "alignment", "component"], rows)
    print(f"igo_clean_error={report.igo_mean_error:.6g}")
    print(f"l2_clean_error={report.l2_mean_error:.6g}")
    print(f"l2_clean_rmse={report.l2_mean_rmse:.6g}")
    print(f"igo_flatness={report.igo_flatness:.6g}")
    if report.outlier_alignments:
        print(f"outlier_alignment_min={min(report.outlier_alignments):.6g}")
    return report


def cmd_kstest(args):
    if args.dir:
        paths = sorted(p for p in Path(args.dir).iterdir() if p.suffix.lower() in (".pgm", ".png"))
        images = [load_image(p) for p in paths]
        trials = image_pair_ks_trials(images, args.alpha, args.trials, _filter(args), args.magnitude_floor)
    else:
        trials = synthetic_ks_trials(args.trials or 0, args.height, args.width, args.seed, args.alpha)
    write_csv(args.out, "kstest", ["seed", "n", "D", "p_value", "accepted"],
              [(t.seed, t.n, t.statistic, t.p_value, int(t.accepted)) for t in trials])
    if trials:
        rate = np.mean([t.accepted for t in trials])
        mean_p = np.mean([t.p_value for t in trials])
        print(f"trials={len(trials)} acceptance={rate:.4f} mean_p_value={mean_p:.4f}")
    else:
        print("trials=0")
    return trials


def cmd_spectrum(args):
    if args.manifest:
        manifest = read_manifest(args.manifest)
        spec = _filter(args)
        phis = [compute_orientation(x, spec, args.magnitude_floor) for x in manifest_images(args.manifest, manifest)]
    else:
        phis = [random_orientation_image(args.height, args.width, derive_seed(args.seed, i)) for i in range(args.n)]
    report = spectrum_report(phis, serial=args.serial)
    p = phis[0].size
    write_csv(args.out, "spectrum", ["index", "eigenvalue", "normalized"],
              [(i, float(v * p), float(v)) for i, v in enumerate(report.normalized)])
    print(f"n={len(phis)} p={p} flatness={report.flatness:.6g}")
    return report


# parser


def _add_filter_flags(p):
    p.add_argument("--filter", default="central-difference", choices=["central-difference", "gaussian-derivative"])
    p.add_argument("--sigma", type=float, default=1.0, help="gaussian-derivative scale")
    p.add_argument("--magnitude-floor", type=float, default=1e-8)


def build_parser():
    parser = argparse.ArgumentParser(prog="igopca", description="PCA of image gradient orientations")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="JSON file of flag defaults")
        p.add_argument("--serial", action="store_true", help="force the bit-reproducible serial path")
        p.set_defaults(func=func)
        return p

    p = command("synth", cmd_synth, "generate a synthetic corrupted dataset")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--rank", type=int, default=3)
    p.add_argument("--mode", default="occlusion", choices=["none", "occlusion", "replacement"])
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--patch", type=int, default=45)
    p.add_argument("--spread", type=float, default=0.35)
    p.add_argument("--noise", type=float, default=0.003)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = command("fit", cmd_fit, "fit an IGO or l2 model")
    p.add_argument("manifest")
    p.add_argument("--method", choices=["igo", "l2"], default="igo")
    p.add_argument("--k", type=int, default=5)
    _add_filter_flags(p)
    p.add_argument("--components-dir", help="also write component images here")
    p.add_argument("--out", required=True)

    p = command("reconstruct", cmd_reconstruct, "reconstruct images with a saved model")
    p.add_argument("model")
    p.add_argument("images", nargs="+")
    _add_filter_flags(p)
    p.add_argument("--out", required=True, help="output directory")

    p = command("compare", cmd_compare, "compare IGO-PCA with l2 PCA on a manifest")
    p.add_argument("manifest")
    p.add_argument("--k", type=int, default=5)
    _add_filter_flags(p)
    p.add_argument("--out", required=True, help="CSV report path")

    p = command("kstest", cmd_kstest, "KS uniformity test of orientation differences")
    p.add_argument("--dir", help="directory of PGM/PNG images; omit for synthetic pairs")
    p.add_argument("--trials", type=int, default=None, help="number of pairs (synthetic default 1000)")
    p.add_argument("--height", type=int, default=100)
    p.add_argument("--width", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    _add_filter_flags(p)
    p.add_argument("--out", required=True)

    p = command("spectrum", cmd_spectrum, "normalised eigen-spectrum of a full-rank IGO fit")
    p.add_argument("--manifest")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--height", type=int, default=200)
    p.add_argument("--width", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    _add_filter_flags(p)
    p.add_argument("--out", required=True)
    return parser, sub


def parse_args(argv):
    parser, sub = build_parser()
    pre, _ = parser.parse_known_args(argv)
    if getattr(pre, "config", None):
        try:
            cfg = json.loads(Path(pre.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {pre.config}: {exc}")
        sub.choices[pre.command].set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
    args = parser.parse_args(argv)
    if args.command == "kstest" and args.trials is None and not args.dir:
        args.trials = 1000
    return args


def main(argv=None):
    args = parse_args(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except IgoError as exc:
        print(f"igopca: error[{exc.tag}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"igopca: error[io]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
