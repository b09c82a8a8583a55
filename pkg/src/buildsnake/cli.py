"""Command-line pipeline: synth, extract, evaluate, fit-transform."""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lidar, metrics, raster, synthetic
from .config import MODES, SnakeConfig
from .geometry import polygon_to_wkt, wkt_to_polygon
from .polygonize import building_mbr, fit_rectilinear
from .snake import prepare_fields, run_snake
from .transform import AffineTransform2D, fit_least_squares

EXIT_OK = 0
EXIT_PIPELINE = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    """Bad usage, unreadable inputs, or invalid parameter values."""


class StageError(Exception):
    """A pipeline stage failed on valid-looking inputs."""


PIPELINE_DEFAULTS = {
    "opening_radius": 1,
    "min_segment_area_m2": 10.0,
    "connectivity": 8,
    "ground_class": 2,
    "density": None,  # points/m^2; None = estimate from cloud extent
    "eval_cell_size": 1.0,
    "workers": None,  # None = available parallelism
    "sym_diff_tol": 0.10,
    "mbr_source": "lidar",  # or "snake" for the orientation baseline
}


@dataclass
class ExtractedBuilding:
    building_id: int
    init_pixels: np.ndarray
    snake: np.ndarray
    footprint: np.ndarray
    shape_level: str
    orientation_deg: float


def extract_buildings(
    gray: np.ndarray,
    cloud: lidar.PointCloud3D,
    t: AffineTransform2D,
    cfg: SnakeConfig,
    pipeline: dict,
    debug: dict | None = None,
) -> list[ExtractedBuilding]:
    """Run the full LiDAR -> snake -> polygonize pipeline on one scene."""
    density = pipeline.get("density")
    if density is None:
        xy = cloud.xyz[:, :2]
        extent = np.prod(xy.max(axis=0) - xy.min(axis=0))
        if extent <= 0:
            raise StageError("[lidar] cloud has zero planar extent")
        density = len(cloud) / float(extent)
    try:
        boundaries, grid, labels = lidar.extract_boundaries(
            cloud,
            density=density,
            ground_class=pipeline["ground_class"],
            opening_radius=pipeline["opening_radius"],
            min_area_m2=pipeline["min_segment_area_m2"],
            connectivity=pipeline["connectivity"],
        )
    except ValueError as exc:
        raise StageError(f"[lidar] {exc}") from exc
    if debug is not None:
        debug["grid"] = grid
        debug["labels"] = labels
    if not boundaries:
        return []

    fields = prepare_fields(gray, cfg)
    if debug is not None:
        debug["fields"] = fields
    projected = [lidar.project_boundary(b, t) for b in boundaries]

    def process(pb: lidar.ProjectedBoundary) -> ExtractedBuilding:
        contour = run_snake(pb, gray, cfg, fields=fields)
        mbr_pts = pb.pixels if pipeline["mbr_source"] == "lidar" else contour
        mbr = building_mbr(mbr_pts)
        try:
            poly = fit_rectilinear(contour, mbr, sym_diff_tol=pipeline["sym_diff_tol"])
            footprint, level, orientation = poly.polygon, poly.shape_level, poly.orientation_deg
        except ValueError:
            # Collapsed snake (degenerate sliver segment): fall back to the
            # boundary MBR so one bad building does not abort the run.
            print(
                f"warning: building {pb.building_id}: snake degenerate, using boundary MBR",
                file=sys.stderr,
            )
            footprint, level, orientation = mbr.corners(), "rectangle", mbr.angle_deg
        return ExtractedBuilding(
            building_id=pb.building_id,
            init_pixels=pb.pixels,
            snake=contour,
            footprint=footprint,
            shape_level=level,
            orientation_deg=orientation,
        )

    workers = pipeline.get("workers")
    try:
        if workers is not None and int(workers) == 1:
            results = [process(pb) for pb in projected]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(process, projected))
    except ValueError as exc:
        raise StageError(f"[snake] {exc}") from exc
    return sorted(results, key=lambda r: r.building_id)


# ---------------------------------------------------------------------------
# Subcommand helpers


def _read_file(path: str, stage: str) -> bytes:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"[{stage}] file not found: {path}")
    return p.read_bytes()


def _load_gray(path: str) -> np.ndarray:
    img = raster.load_pnm(_read_file(path, "image"))
    if isinstance(img, tuple):
        return raster.rgb_to_gray(*img)
    return img


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _resolve_config(args) -> tuple[SnakeConfig, dict, dict]:
    """Merge config file values with CLI flag overrides."""
    base: dict = {}
    if getattr(args, "config", None):
        try:
            base = json.loads(_read_file(args.config, "config").decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"[config] invalid JSON in {args.config}: {exc}") from exc
    merged = dict(base)
    for key in list(SnakeConfig.field_names()) + list(PIPELINE_DEFAULTS):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    for key in ("image", "cloud", "transform", "outdir", "truth"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    try:
        cfg = SnakeConfig.from_dict(merged)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[config] {exc}") from exc
    pipeline = {k: merged.get(k, v) for k, v in PIPELINE_DEFAULTS.items()}
    return cfg, pipeline, merged


def _write_svg(path: Path, size, results, truth=None):
    w, h = size
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">'
    ]

    def path_for(poly, color, dash=""):
        d = "M " + " L ".join(f"{p[0]:.3f} {p[1]:.3f}" for p in poly) + " Z"
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        return f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1"{extra}/>'

    for r in results:
        parts.append(path_for(r.init_pixels, "#e08020", dash="4 2"))
        parts.append(path_for(r.footprint, "#2060e0"))
    for poly in truth or []:
        parts.append(path_for(poly, "#20a040"))
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")


def cmd_extract(args) -> int:
    cfg, pipeline, merged = _resolve_config(args)
    for key in ("image", "cloud", "transform"):
        if key not in merged:
            raise ConfigError(f"[config] missing required input: --{key}")
    outdir = Path(merged.get("outdir", "."))
    outdir.mkdir(parents=True, exist_ok=True)

    gray = _load_gray(merged["image"])
    try:
        cloud = lidar.parse_xyz(_read_file(merged["cloud"], "cloud").decode("utf-8"))
    except ValueError as exc:
        raise ConfigError(f"[cloud] {exc}") from exc
    try:
        t = AffineTransform2D.from_line(_read_file(merged["transform"], "transform").decode("utf-8"))
    except ValueError as exc:
        raise ConfigError(f"[transform] {exc}") from exc

    debug: dict | None = {} if getattr(args, "debug_dir", None) else None
    results = extract_buildings(gray, cloud, t, cfg, pipeline, debug=debug)
    if not results:
        print("warning: no building segments extracted from the cloud", file=sys.stderr)

    run_config = {k: merged.get(k, None) for k in ("image", "cloud", "transform", "truth")}
    run_config["outdir"] = str(outdir)
    run_config.update(cfg.to_dict())
    run_config.update(pipeline)
    (outdir / "run.json").write_text(_json_dump(run_config), encoding="utf-8")

    wkt_lines = [polygon_to_wkt(r.footprint) for r in results]
    (outdir / "footprints.wkt").write_text("".join(line + "\n" for line in wkt_lines), encoding="utf-8")
    buildings = [
        {
            "id": r.building_id,
            "shape_level": r.shape_level,
            "orientation_deg": round(r.orientation_deg, 6),
        }
        for r in results
    ]
    (outdir / "buildings.json").write_text(_json_dump(buildings), encoding="utf-8")

    truth_polys = None
    if merged.get("truth"):
        truth_polys = [
            wkt_to_polygon(line)
            for line in _read_file(merged["truth"], "truth").decode("utf-8").splitlines()
            if line.strip()
        ]
    if getattr(args, "svg", False):
        _write_svg(outdir / "overlay.svg", (gray.shape[1], gray.shape[0]), results, truth_polys)

    if debug is not None:
        ddir = Path(args.debug_dir)
        ddir.mkdir(parents=True, exist_ok=True)
        if debug.get("grid") is not None:
            (ddir / "binary_grid.pgm").write_bytes(raster.save_pgm(debug["grid"].cells * 255.0))
        if debug.get("labels") is not None:
            labels = debug["labels"]
            scale = 255.0 / max(labels.max(), 1)
            (ddir / "labels.pgm").write_bytes(raster.save_pgm(labels * scale))
        if debug.get("fields") is not None and debug["fields"].gvf is not None:
            g = debug["fields"].gvf
            mag = np.hypot(g.u, g.v)
            mx = mag.max()
            (ddir / "gvf_magnitude.pgm").write_bytes(raster.save_pgm(mag * (255.0 / mx if mx > 0 else 0)))
        for r in results:
            (ddir / f"snake_{r.building_id}.wkt").write_text(polygon_to_wkt(r.snake) + "\n", encoding="utf-8")
            (ddir / f"init_{r.building_id}.wkt").write_text(polygon_to_wkt(r.init_pixels) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    def read_wkts(path: str, stage: str):
        return [
            wkt_to_polygon(line)
            for line in _read_file(path, stage).decode("utf-8").splitlines()
            if line.strip()
        ]

    extracted = read_wkts(args.extracted, "extracted")
    truth = read_wkts(args.truth, "truth")
    if args.pairing == "index":
        n = min(len(extracted), len(truth))
        matches = [(i, i) for i in range(n)]
    else:
        # Greedy one-to-one pairing on centroid distance.
        ce = [np.asarray(p).mean(axis=0) for p in extracted]
        ct = [np.asarray(p).mean(axis=0) for p in truth]
        dist = np.array([[np.linalg.norm(a - b) for b in ct] for a in ce]).reshape(
            len(extracted), len(truth)
        )
        matches = []
        while dist.size and np.isfinite(dist).any():
            i, j = np.unravel_index(np.argmin(dist), dist.shape)
            matches.append((int(i), int(j)))
            dist[i, :] = np.inf
            dist[:, j] = np.inf
        matches.sort()
    pairs = [(i, extracted[i], truth[j]) for i, j in matches]
    try:
        report = metrics.evaluate_pairs(
            pairs, cell_size=args.cell_size, distance_scale=args.distance_scale
        )
    except ValueError as exc:
        raise StageError(f"[metrics] {exc}") from exc
    matched_e = {i for i, _ in matches}
    matched_t = {j for _, j in matches}
    report["unmatched"] = {
        "extracted": [i for i in range(len(extracted)) if i not in matched_e],
        "truth": [j for j in range(len(truth)) if j not in matched_t],
    }
    text = _json_dump(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.preset:
        spec = synthetic.PRESETS[args.preset]()
    else:
        try:
            spec = synthetic.SceneSpec.from_json(_read_file(args.spec, "spec").decode("utf-8"))
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"[spec] invalid scene spec: {exc}") from exc
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    img, cloud, truth, t = synthetic.generate_scene(spec)
    (outdir / "scene.pgm").write_bytes(raster.save_pgm(img))
    (outdir / "cloud.xyz").write_text(lidar.write_xyz(cloud), encoding="utf-8")
    (outdir / "transform.txt").write_text(t.to_line() + "\n", encoding="utf-8")
    (outdir / "truth.wkt").write_text(
        "".join(polygon_to_wkt(p) + "\n" for p in truth), encoding="utf-8"
    )
    (outdir / "scene_spec.json").write_text(_json_dump(spec.to_dict()), encoding="utf-8")
    return EXIT_OK


def cmd_fit_transform(args) -> int:
    pairs = []
    for lineno, line in enumerate(_read_file(args.pairs, "pairs").decode("utf-8").splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 4:
            raise ConfigError(f"[pairs] line {lineno}: expected 'sx sy tx ty'")
        sx, sy, tx, ty = (float(p) for p in parts)
        pairs.append(((sx, sy), (tx, ty)))
    try:
        t = fit_least_squares(pairs)
    except ValueError as exc:
        raise ConfigError(f"[pairs] {exc}") from exc
    line = t.to_line() + "\n"
    if args.out:
        Path(args.out).write_text(line, encoding="utf-8")
    else:
        print(line, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing


def _add_extract_flags(p: argparse.ArgumentParser):
    p.add_argument("--image", help="orthophoto (PGM or PPM)")
    p.add_argument("--cloud", help="LiDAR point cloud (xyz text)")
    p.add_argument("--transform", help="meters-to-pixels transform file")
    p.add_argument("--truth", help="optional truth WKT for the SVG overlay")
    p.add_argument("--outdir", help="output directory (default .)")
    p.add_argument("--config", help="JSON config; flags override its values")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--workers", type=int)
    p.add_argument("--debug-dir", dest="debug_dir", help="dump stage rasters and raw snakes")
    p.add_argument("--svg", action="store_true", help="write overlay.svg")
    for key, typ in [
        ("alpha", float), ("beta", float), ("gamma", float), ("max_iters", int),
        ("epsilon", float), ("resample_every", int), ("w_line", float),
        ("w_edge", float), ("w_term", float), ("sigma", float), ("mu", float),
        ("gvf_iters", int), ("delta", float), ("shape_weight", float),
        ("opening_radius", int), ("min_segment_area_m2", float),
        ("connectivity", int), ("ground_class", int), ("density", float),
        ("sym_diff_tol", float),
    ]:
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=typ)
    p.add_argument("--mbr-source", dest="mbr_source", choices=("lidar", "snake"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="buildsnake",
        description="Building footprint extraction from an orthophoto and airborne LiDAR",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="run the full extraction pipeline")
    _add_extract_flags(p_extract)
    p_extract.set_defaults(func=cmd_extract)

    p_eval = sub.add_parser("evaluate", help="compare extracted footprints to ground truth")
    p_eval.add_argument("--extracted", required=True)
    p_eval.add_argument("--truth", required=True)
    p_eval.add_argument("--cell-size", dest="cell_size", type=float, default=1.0)
    p_eval.add_argument(
        "--distance-scale",
        dest="distance_scale",
        type=float,
        default=1.0,
        help="meters per polygon unit, applied to EDC",
    )
    p_eval.add_argument(
        "--pairing",
        choices=("centroid", "index"),
        default="centroid",
        help="how extracted and truth polygons are matched",
    )
    p_eval.add_argument("--out", help="report path (default: stdout)")
    p_eval.set_defaults(func=cmd_evaluate)

    p_synth = sub.add_parser("synth", help="generate a synthetic scene")
    group = p_synth.add_mutually_exclusive_group(required=True)
    group.add_argument("--spec", help="scene spec JSON file")
    group.add_argument("--preset", choices=sorted(synthetic.PRESETS))
    p_synth.add_argument("--outdir", required=True)
    p_synth.set_defaults(func=cmd_synth)

    p_fit = sub.add_parser("fit-transform", help="least-squares affine fit from point pairs")
    p_fit.add_argument("--pairs", required=True, help="lines of 'sx sy tx ty'")
    p_fit.add_argument("--out")
    p_fit.set_defaults(func=cmd_fit_transform)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except Exception as exc:  # unexpected -> pipeline failure, not a traceback
        print(f"error: [internal] {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
