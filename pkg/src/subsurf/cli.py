"""Command-line surface.

Subcommands: convert, synth, attr {gtc,got,sobel,glcm}, fault {detect,track},
salt {delineate,track}, label {features,retrieve,overseg,classify,annotate},
render. Every run echoes the resolved config to ``<out>.config.toml``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import attributes, fault, salt
from .config import DEFAULTS, load_config, write_sidecar
from .curves import load_polylines, save_polylines
from .errors import SubsurfError
from .features import CzekanowskiKNN, FeatureConfig, retrieve_similar, \
    texture_feature_vector
from .labeling import AugmentedDataset, label_volume, oversegment_slic_gray
from .nmf import nmf_pixel_annotation
from .render import read_pgm, render_gray_png, render_labels_png, \
    render_rgb_png, write_pgm
from .salt import BoundaryCurve, track_salt_sections
from .segy import load_segy, write_segy
from .synthetic import EllipsoidSpec, FaultSpec, SyntheticSpec, \
    TextureSplitSpec, generate_synthetic
from .volume import SeismicVolume, extract_section, read_svol, \
    read_svol_volume, write_svol


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _is_svol(path) -> bool:
    with open(path, "rb") as f:
        return f.read(4) == b"SVOL"


def _load_volume(path, il_byte: int = 189,
                 xl_byte: int = 193) -> SeismicVolume:
    if _is_svol(path):
        return read_svol_volume(path)
    return load_segy(path, il_byte=il_byte, xl_byte=xl_byte)


def _save_volume(volume: SeismicVolume, path, il_byte: int = 189,
                 xl_byte: int = 193) -> None:
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".sgy", ".segy"):
        write_segy(volume, path, il_byte=il_byte, xl_byte=xl_byte)
    else:
        write_svol(volume, path)


def _parse_section(spec: str) -> tuple[str, int]:
    try:
        axis, idx = spec.split(":")
        return axis, int(idx)
    except ValueError:
        raise SubsurfError(f"bad section spec {spec!r}; expected axis:index")


def _resolve_config(args) -> dict:
    config = load_config(getattr(args, "config", None))
    seed = getattr(args, "seed", None)
    if seed is None:
        seed = os.environ.get("SUBSURF_SEED")
    if seed is not None:
        config["general"]["seed"] = int(seed)
    workers = getattr(args, "workers", None)
    if workers is not None:
        config["general"]["workers"] = int(workers)
    return config


def _feature_config(config: dict) -> FeatureConfig:
    fc = config["features"]
    return FeatureConfig(n_scales=fc["n_scales"],
                         n_orientations=fc["n_orientations"],
                         top_singular=fc["top_singular"],
                         include_glcm=fc["include_glcm"])


# ------------------------------------------------------------- commands

def cmd_convert(args, config):
    volume = _load_volume(args.infile, args.il_byte, args.xl_byte)
    _save_volume(volume, args.out, args.il_byte, args.xl_byte)
    write_sidecar(args.out, config)
    return 0


def _synthetic_spec_from_toml(path, default_seed: int) -> SyntheticSpec:
    with open(path, "rb") as f:
        doc = tomllib.load(f)
    vol = doc.get("volume", {})
    spec = SyntheticSpec(
        shape=tuple(vol.get("dims", [32, 32, 32])),
        seed=int(vol.get("seed", default_seed)),
        noise_level=float(vol.get("noise_level", 0.02)),
        sample_interval=float(vol.get("sample_interval", 4000.0)))
    if "fault" in doc:
        fl = doc["fault"]
        spec.fault = FaultSpec(x0=float(fl["x0"]),
                               displacement=float(fl["displacement"]),
                               slope_inline=float(fl.get("slope_inline", 0.0)),
                               slope_sample=float(fl.get("slope_sample", 0.0)))
    if "ellipsoid" in doc:
        el = doc["ellipsoid"]
        spec.ellipsoid = EllipsoidSpec(center=tuple(el["center"]),
                                       radii=tuple(el["radii"]),
                                       drift=float(el.get("drift", 0.0)))
    if "texture_split" in doc:
        spec.texture_split = TextureSplitSpec(
            boundary=int(doc["texture_split"]["boundary"]))
    return spec


def cmd_synth(args, config):
    spec = _synthetic_spec_from_toml(args.spec, config["general"]["seed"])
    volume, truth = generate_synthetic(spec)
    _save_volume(volume, args.out)
    if args.gt:
        write_svol(truth.labels.astype(np.float32), args.gt)
    write_sidecar(args.out, config)
    return 0


def cmd_attr_gtc(args, config):
    volume = _load_volume(args.infile)
    att = attributes.gtc(volume, tuple(config["gtc"]["cube"]))
    stem, ext = os.path.splitext(str(args.out))
    for ch in range(3):
        write_svol(att.values[ch].astype(np.float32), f"{stem}.e{ch + 1}{ext}")
    disc = attributes.gtc_discontinuity(att)
    write_svol(disc.astype(np.float32), args.out)
    write_sidecar(args.out, config)
    return 0


def cmd_attr_got(args, config):
    volume = _load_volume(args.infile)
    params = attributes.GoTParams(scales=tuple(config["got"]["scales"]),
                                  weights=tuple(config["got"]["weights"]),
                                  axes=tuple(config["got"]["axes"]))
    att = attributes.got3d(volume, params)
    write_svol(att.values[0].astype(np.float32), args.out)
    write_sidecar(args.out, config)
    return 0


def cmd_attr_sobel(args, config):
    volume = _load_volume(args.infile)
    axis, idx = _parse_section(args.section)
    img = extract_section(volume, axis, idx).image
    if args.angle == "all":
        out = attributes.sobel_magnitude(img)
    else:
        out = attributes.sobel_directional(img, int(args.angle))
    write_svol(out.astype(np.float32), args.out)
    write_sidecar(args.out, config)
    return 0


def cmd_attr_glcm(args, config):
    volume = _load_volume(args.infile)
    axis, idx = _parse_section(args.section)
    img = extract_section(volume, axis, idx).image
    offsets = tuple(tuple(o) for o in config["glcm"]["offsets"])
    feats = attributes.glcm_features(img, config["glcm"]["levels"], offsets)
    with open(args.out, "w") as f:
        f.write("\n".join(f"{v:.12g}" for v in feats) + "\n")
    write_sidecar(args.out, config)
    return 0


def cmd_fault_detect(args, config):
    axis, idx = _parse_section(args.section)
    hough = fault.HoughParams(
        rho_res=config["hough"]["rho_res"],
        theta_res=np.deg2rad(config["hough"]["theta_res_deg"]),
        theta_range=np.deg2rad(config["hough"]["theta_range_deg"]),
        min_support=config["hough"]["min_support"],
        max_gap=config["hough"]["max_gap"],
        min_length=config["hough"]["min_length"])
    prune = fault.PruneParams(
        d_merge=config["prune"]["d_merge"],
        theta_merge=np.deg2rad(config["prune"]["theta_merge_deg"]))
    volume = _load_volume(args.infile)
    network = fault.detect_faults(volume, axis, idx,
                                  cube=tuple(config["gtc"]["cube"]),
                                  percentile=config["fault"]["percentile"],
                                  hough=hough, prune=prune,
                                  d_chain=config["fault"]["d_chain"])
    save_polylines(args.out, network.polylines)
    write_sidecar(args.out, config)
    return 0


def cmd_fault_track(args, config):
    volume = _load_volume(args.infile)
    polylines, _ = load_polylines(args.ref)
    network = fault.FaultNetwork(polylines,
                                 [[i] for i in range(len(polylines))])
    params = fault.TrackParams(
        block=config["fault_track"]["block"],
        search=config["fault_track"]["search"],
        max_ref_distance=config["fault_track"]["max_ref_distance"])
    indices = [int(s) for s in args.sections.split(",")]
    tracked = fault.track_faults_sections({args.ref_index: network}, volume,
                                          indices, params=params)
    os.makedirs(args.out_dir, exist_ok=True)
    for p, net in tracked.items():
        out = os.path.join(args.out_dir, f"faults_{p:05d}.txt")
        save_polylines(out, net.polylines)
    write_sidecar(os.path.join(args.out_dir, "tracking"), config)
    return 0


def cmd_salt_delineate(args, config):
    volume = _load_volume(args.infile)
    axis, idx = _parse_section(args.section)
    section = extract_section(volume, axis, idx)
    if args.got:
        got = read_svol(args.got)
        got_map = got[idx].T if got.ndim == 3 else got[0]
    else:
        params = attributes.GoTParams(scales=tuple(config["got"]["scales"]),
                                      weights=tuple(config["got"]["weights"]),
                                      axes=tuple(config["got"]["axes"]))
        got_map = attributes.got3d(volume, params).values[0][idx].T
    curve = salt.delineate_salt_boundary(section, got_map,
                                         config["salt"]["theta_rel"])
    save_polylines(args.out, [curve.points], [curve.closed])
    write_sidecar(args.out, config)
    return 0


def cmd_salt_track(args, config):
    volume = _load_volume(args.infile)
    refs = []
    for item in args.refs.split(","):
        path, idx = item.rsplit(":", 1)
        polylines, closed = load_polylines(path)
        refs.append(BoundaryCurve(points=polylines[0], closed=closed[0],
                                  section_index=int(idx)))
    indices = [int(s) for s in args.sections.split(",")]
    curves = track_salt_sections(
        volume, refs, indices,
        n_patch=config["salt"]["n_patch"],
        n_group=config["salt"]["n_group"],
        reduced_dims=tuple(config["salt"]["reduced_dims"]),
        search=config["salt"]["search"])
    os.makedirs(args.out_dir, exist_ok=True)
    for curve in curves:
        out = os.path.join(args.out_dir, f"salt_{curve.section_index:05d}.txt")
        save_polylines(out, [curve.points], [curve.closed])
    write_sidecar(os.path.join(args.out_dir, "tracking"), config)
    return 0


def cmd_label_features(args, config):
    patch = read_svol(args.infile)
    if patch.ndim == 3:
        patch = patch[0]
    vec = texture_feature_vector(patch, _feature_config(config))
    with open(args.out, "w") as f:
        f.write("\n".join(f"{v:.12g}" for v in vec) + "\n")
    write_sidecar(args.out, config)
    return 0


def _dataset_class_names(n: int) -> list[str]:
    return [f"class{i}" for i in range(n)]


def cmd_label_retrieve(args, config):
    dataset = AugmentedDataset.load(args.corpus,
                                    _dataset_class_names(args.classes))
    fc = _feature_config(config)
    exemplar = read_svol(args.exemplar)
    if exemplar.ndim == 3:
        exemplar = exemplar[0]
    query = texture_feature_vector(exemplar, fc)
    corpus = [texture_feature_vector(dataset.x[:, n]
                                     .reshape(dataset.image_shape), fc)
              for n in range(dataset.n_images)]
    results = retrieve_similar(query, corpus, args.k)
    with open(args.out, "w") as f:
        for rank, (idx, score) in enumerate(results, 1):
            f.write(f"{rank} {idx} {score:.9f}\n")
    write_sidecar(args.out, config)
    return 0


def cmd_label_overseg(args, config):
    volume = _load_volume(args.infile)
    axis, idx = _parse_section(args.section)
    section = extract_section(volume, axis, idx)
    seg = oversegment_slic_gray(section, config["slic"]["n_segments"],
                                config["slic"]["compactness"])
    write_pgm(seg.labels % 256, args.out)
    write_sidecar(args.out, config)
    return 0


def cmd_label_classify(args, config):
    dataset = AugmentedDataset.load(args.dataset,
                                    _dataset_class_names(args.classes))
    fc = _feature_config(config)
    feats = [texture_feature_vector(dataset.x[:, n]
                                    .reshape(dataset.image_shape), fc)
             for n in range(dataset.n_images)]
    knn = CzekanowskiKNN(k=5).fit(feats, dataset.y)
    volume = _load_volume(args.infile)
    result = label_volume(volume, knn, config["slic"]["n_segments"],
                          config["slic"]["compactness"], fc)
    write_svol(result.labels.astype(np.float32), args.out)
    write_sidecar(args.out, config)
    return 0


def cmd_label_annotate(args, config):
    dataset = AugmentedDataset.load(args.dataset,
                                    _dataset_class_names(args.classes))
    nc = config["nmf"]
    labels, model = nmf_pixel_annotation(
        dataset, n_features_per_class=nc["n_features_per_class"],
        rho_w=nc["rho_w"], lam1=nc["lambda1"], lam2=nc["lambda2"],
        gamma1=nc["gamma1"], max_iter=nc["max_iter"], tol=nc["tol"],
        seed=config["general"]["seed"])
    os.makedirs(args.out, exist_ok=True)
    for n in range(dataset.n_images):
        grid = labels[:, n].reshape(dataset.image_shape)
        write_pgm(grid, os.path.join(args.out, f"labels_{n:05d}.pgm"))
    write_sidecar(os.path.join(args.out, "annotate"), config)
    return 0


def cmd_render(args, config):
    path = str(args.infile)
    if path.endswith(".pgm"):
        grid = read_pgm(path).astype(np.int64)
    else:
        grid = read_svol(path)
        if grid.ndim == 3 and args.section:
            axis, idx = _parse_section(args.section)
            vol = SeismicVolume(grid, 1.0)
            grid = extract_section(vol, axis, idx).image
        elif grid.ndim == 3:
            grid = grid[0]
    if args.mode == "labels":
        render_labels_png(np.asarray(grid, dtype=np.int64), args.out)
    elif args.mode == "rgb":
        stem, ext = os.path.splitext(path)
        base = stem[:-3] if stem.endswith((".e1", ".e2", ".e3")) else stem
        chans = [read_svol(f"{base}.e{c}{ext}") for c in (1, 2, 3)]
        if args.section:
            axis, idx = _parse_section(args.section)
            chans = [extract_section(SeismicVolume(c, 1.0), axis, idx).image
                     for c in chans]
        else:
            chans = [c[0] for c in chans]
        render_rgb_png(np.stack(chans), args.out)
    else:
        render_gray_png(np.asarray(grid, dtype=np.float64), args.out)
    write_sidecar(args.out, config)
    return 0


# ------------------------------------------------------------- parser

def build_parser() -> _Parser:
    parser = _Parser(prog="subsurf",
                     description="Seismic structural interpretation toolkit")
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--seed", type=int,
                        help="RNG seed (fallback: SUBSURF_SEED env var)")
    parser.add_argument("--workers", type=int, help="worker count")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert between SEG-Y and SVOL")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--il-byte", type=int, default=189,
                   help="trace-header byte (1-based) of the inline number")
    p.add_argument("--xl-byte", type=int, default=193,
                   help="trace-header byte (1-based) of the crossline number")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("synth", help="generate a synthetic volume")
    p.add_argument("--spec", required=True, help="synthetic spec TOML")
    p.add_argument("--out", required=True)
    p.add_argument("--gt", help="also write ground-truth labels (SVOL)")
    p.set_defaults(func=cmd_synth)

    attr = sub.add_parser("attr", help="attribute computation")
    attr_sub = attr.add_subparsers(dest="attr_command", required=True)
    p = attr_sub.add_parser("gtc")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attr_gtc)
    p = attr_sub.add_parser("got")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attr_got)
    p = attr_sub.add_parser("sobel")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--section", required=True, help="axis:index")
    p.add_argument("--angle", default="all",
                   choices=["0", "45", "90", "-45", "all"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attr_sobel)
    p = attr_sub.add_parser("glcm")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--section", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attr_glcm)

    flt = sub.add_parser("fault", help="fault detection / tracking")
    flt_sub = flt.add_subparsers(dest="fault_command", required=True)
    p = flt_sub.add_parser("detect")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--section", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fault_detect)
    p = flt_sub.add_parser("track")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--ref", required=True, help="reference polyline file")
    p.add_argument("--ref-index", type=int, required=True)
    p.add_argument("--sections", required=True, help="comma-separated")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_fault_track)

    slt = sub.add_parser("salt", help="salt-dome delineation / tracking")
    slt_sub = slt.add_subparsers(dest="salt_command", required=True)
    p = slt_sub.add_parser("delineate")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--section", required=True)
    p.add_argument("--got", help="precomputed GoT SVOL")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_salt_delineate)
    p = slt_sub.add_parser("track")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--refs", required=True,
                   help="comma-separated path:section_index")
    p.add_argument("--sections", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_salt_track)

    lbl = sub.add_parser("label", help="weakly-supervised labeling")
    lbl_sub = lbl.add_subparsers(dest="label_command", required=True)
    p = lbl_sub.add_parser("features")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_label_features)
    p = lbl_sub.add_parser("retrieve")
    p.add_argument("--exemplar", required=True)
    p.add_argument("--corpus", required=True, help="dataset directory")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_label_retrieve)
    p = lbl_sub.add_parser("overseg")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--section", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_label_overseg)
    p = lbl_sub.add_parser("classify")
    p.add_argument("--dataset", required=True)
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_label_classify)
    p = lbl_sub.add_parser("annotate")
    p.add_argument("--dataset", required=True)
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_label_annotate)

    p = sub.add_parser("render", help="render grids to PGM/PNG")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--section", help="axis:index for 3D inputs")
    p.add_argument("--mode", default="gray", choices=["gray", "labels", "rgb"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
        return args.func(args, config)
    except SubsurfError as exc:
        print(f"subsurf: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"subsurf: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
