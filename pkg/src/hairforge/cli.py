"""Headless command-line entry points for every pipeline stage.

Exit codes: 0 success, 1 usage error, 2 runtime error (IO, blowup,
unreachable services), 3 validation failure (rejected input data).
Every command except serve (and the wall-clock columns of bench) is
deterministic given its flags and seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import socket
import sys
import time
from pathlib import Path

import numpy as np

from .assets import (load_database, load_index, read_hairstyle, save_index,
                     thumbnail_path, write_hairstyle)
from .errors import (AllEmpty, BadMagic, BadThresholds, DegenerateCamera,
                     DimensionMismatch, DuplicateId, EmptyImage, EmptyText,
                     HairforgeError, InvalidHairstyle, MalformedResponse,
                     NonFiniteInput, NonRigidTransform, NonUnitDirection,
                     NumericalBlowup, ProviderMismatch, ProviderUnavailable,
                     ServiceUnavailable, Timeout, TruncatedFile,
                     VersionUnsupported)
from .growth import GrowthParams, grow_strand, sweep_grid
from .model import Hairstyle, Strand

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_VALIDATION = 3

_VALIDATION_ERRORS = (InvalidHairstyle, BadMagic, TruncatedFile,
                      VersionUnsupported, BadThresholds, EmptyImage,
                      NonUnitDirection, NonRigidTransform, NonFiniteInput,
                      DuplicateId, EmptyText, DimensionMismatch,
                      ProviderMismatch, AllEmpty, DegenerateCamera)
_RUNTIME_ERRORS = (ServiceUnavailable, Timeout, MalformedResponse,
                   ProviderUnavailable, OSError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the documented usage code is 1
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _vec3(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _float_list(text: str):
    try:
        return [float(p) for p in text.split(",") if p]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text: str):
    try:
        return [int(p) for p in text.split(",") if p]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


# -- grow ----------------------------------------------------------------

def _growth_params(args) -> GrowthParams:
    try:
        return GrowthParams(
            p_gamma_cap=args.p_gamma_cap, p_gravity=args.p_gravity,
            p_spiral=args.p_spiral, p_helix_radius=args.p_helix_radius,
            p_freq=args.p_freq, steps=args.steps,
            segment_scale=args.segment_scale,
            perturbation_scale=args.perturbation_scale)
    except ValueError as exc:
        raise UsageError(f"grow: {exc}") from exc


def cmd_grow(args) -> int:
    params = _growth_params(args)
    direction = np.asarray(args.dir, np.float64)
    if args.jitter:
        rng = np.random.default_rng(args.seed)
        direction = direction + params.perturbation_scale * rng.standard_normal(3)
    norm = float(np.linalg.norm(direction))
    if norm < 1e-12:
        raise UsageError("grow: --dir must be non-zero")
    direction = tuple(direction / norm)

    if args.sweep is not None:
        if not args.sweep:
            raise UsageError("grow: --sweep needs ph= and pgravity= axes")
        grid_axes = {"ph": None, "pgravity": None}
        for item in args.sweep:
            key, _, values = item.partition("=")
            if key not in grid_axes or not values:
                raise UsageError(f"grow: bad sweep axis {item!r} "
                                 "(expected ph=... and pgravity=...)")
            grid_axes[key] = _float_list(values)
        if grid_axes["ph"] is None or grid_axes["pgravity"] is None:
            raise UsageError("grow: --sweep needs both ph= and pgravity=")
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        rows = sweep_grid(tuple(args.root), direction, params,
                          grid_axes["ph"], grid_axes["pgravity"])
        manifest = {"ph": grid_axes["ph"], "pgravity": grid_axes["pgravity"],
                    "files": []}
        for ph, row in zip(grid_axes["ph"], rows):
            for pg, strand in zip(grid_axes["pgravity"], row):
                name = f"ph{ph:g}_pgravity{pg:g}.hair"
                style = Hairstyle(id=Path(name).stem, strands=(strand,),
                                  source="procedural")
                write_hairstyle(style, out_dir / name)
                manifest["files"].append({"ph": ph, "pgravity": pg, "file": name})
        (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))
        print(f"wrote {len(manifest['files'])} files to {out_dir}")
        return EXIT_OK

    strand = grow_strand(tuple(args.root), direction, params)
    style = Hairstyle(id=Path(args.out).stem, strands=(strand,),
                      source="procedural")
    write_hairstyle(style, args.out)
    print(f"wrote {args.out}: 1 strand, {len(strand)} vertices")
    return EXIT_OK


# -- simulate --------------------------------------------------------------

def cmd_simulate(args) -> int:
    from .fixtures import bare_mesh, make_head_mesh
    from .sim import SimConfig, WindField, build_sim, set_wind, snapshot_style, step

    if args.steps < 0:
        raise UsageError("simulate: --steps must be >= 0")
    style = read_hairstyle(args.infile)
    cfg_kwargs = {"gravity": tuple(args.gravity)}
    if args.dt is not None:
        cfg_kwargs["dt"] = args.dt
    cfg = SimConfig(**cfg_kwargs)
    head = make_head_mesh() if args.collide_head else bare_mesh()
    state = build_sim(style, head, cfg)
    if args.wind:
        values = _float_list(args.wind)
        if len(values) != 4:
            raise UsageError("simulate: --wind expects dx,dy,dz,strength")
        d = np.asarray(values[:3], np.float64)
        norm = float(np.linalg.norm(d))
        if norm < 1e-12:
            raise UsageError("simulate: wind direction must be non-zero")
        set_wind(state, WindField(direction=tuple(d / norm),
                                  strength=values[3], enabled=True))

    start_pos = state.pos.copy()
    try:
        for _ in range(args.steps):
            step(state, cfg)
    except NumericalBlowup as exc:
        print(f"simulation blew up at step {exc.step_index}; state rolled back",
              file=sys.stderr)
        return EXIT_RUNTIME

    disp = float(np.abs(state.pos.astype(np.float64)
                        - start_pos.astype(np.float64)).max()) if state.pos.size else 0.0
    result = snapshot_style(state, Path(args.out).stem)
    write_hairstyle(result, args.out)
    print(f"stepped {args.steps} steps; max displacement {disp:.3e} cm; "
          f"wrote {args.out}")
    return EXIT_OK


# -- retrieve ----------------------------------------------------------------

def cmd_retrieve(args) -> int:
    from .retrieval import build_index, embed_text, get_provider, retrieve_top_k

    provider = get_provider(args.provider)
    captions = {}
    if args.db:
        styles = load_database(args.db)
        captions = {s.id: s.caption for s in styles}
    if args.index:
        index = load_index(args.index)
    elif args.db:
        index = build_index(sorted(captions.items()), provider)
    else:
        raise UsageError("retrieve: need --index and/or --db")

    query = embed_text(args.query, provider)
    result = retrieve_top_k(index, query, k=args.k)
    if args.json:
        print(json.dumps([{"id": sid, "score": score,
                           "caption": captions.get(sid, "")}
                          for sid, score in result.entries]))
    else:
        for sid, score in result.entries:
            line = f"{sid}\t{score:.4f}"
            if sid in captions:
                line += f"\t{captions[sid]}"
            print(line)
    return EXIT_OK


# -- bench ---------------------------------------------------------------

def _bench_style(n_strands: int, n_vertices: int) -> Hairstyle:
    side = int(np.ceil(np.sqrt(n_strands)))
    xs = np.linspace(-10.0, 10.0, side)
    zs = np.linspace(-10.0, 10.0, side)
    spacing = 0.5
    strands = []
    for i in range(n_strands):
        x = float(xs[i % side])
        z = float(zs[i // side])
        verts = np.zeros((n_vertices, 3))
        verts[:, 0] = x
        verts[:, 1] = -spacing * np.arange(n_vertices)
        verts[:, 2] = z
        strands.append(Strand(verts))
    return Hairstyle(id=f"bench-{n_strands}", strands=strands, source="procedural")


def cmd_bench(args) -> int:
    from .fixtures import bare_mesh
    from .sim import build_sim, step_frame

    rows = []
    for n in args.strands:
        if n == 0:
            rows.append({"strands": 0, "vertices": args.vertices, "particles": 0,
                         "frames": args.frames, "mean_ms": 0.0, "p50_ms": 0.0,
                         "p90_ms": 0.0, "max_ms": 0.0})
            continue
        state = build_sim(_bench_style(n, args.vertices), bare_mesh())
        step_frame(state)  # jit warmup and first-touch outside timing
        samples = []
        for _ in range(args.frames):
            t0 = time.perf_counter()
            step_frame(state)
            samples.append((time.perf_counter() - t0) * 1e3)
        samples = np.sort(np.asarray(samples))
        rows.append({
            "strands": n, "vertices": args.vertices,
            "particles": state.particle_count, "frames": args.frames,
            "mean_ms": float(samples.mean()),
            "p50_ms": float(np.percentile(samples, 50)),
            "p90_ms": float(np.percentile(samples, 90)),
            "max_ms": float(samples.max()),
        })

    if args.json:
        print(json.dumps(rows))
    else:
        cols = ["strands", "vertices", "particles", "frames",
                "mean_ms", "p50_ms", "p90_ms", "max_ms"]
        print(",".join(cols))
        for row in rows:
            print(",".join(f"{row[c]:.3f}" if isinstance(row[c], float)
                           else str(row[c]) for c in cols))
    return EXIT_OK


# -- edges -----------------------------------------------------------------

def cmd_edges(args) -> int:
    from .imaging import canny, decode_png, encode_png

    img = decode_png(Path(args.infile).read_bytes())
    edge = canny(img, sigma=args.sigma, low=args.low, high=args.high)
    Path(args.out).write_bytes(encode_png(edge))
    print(f"wrote {args.out}: {edge.edge_pixel_count} edge pixels")
    return EXIT_OK


# -- index -----------------------------------------------------------------

def cmd_index(args) -> int:
    from .imaging import Camera, encode_png, rasterize_strands
    from .retrieval import build_index, get_provider

    if args.index_action != "build":
        raise UsageError(f"index: unknown action {args.index_action!r}")
    styles = load_database(args.db)
    provider = get_provider(args.provider)
    index = build_index([(s.id, s.caption) for s in styles], provider)
    save_index(index, args.out)
    print(f"indexed {index.size} styles -> {args.out}")
    if args.thumbnails:
        from .fixtures import make_head_mesh

        head = make_head_mesh()
        cam = Camera(eye=(0.0, 4.0, 42.0), target=(0.0, 0.0, 0.0),
                     width=128, height=128)
        for style in styles:
            png = encode_png(rasterize_strands(style, cam, head=head))
            Path(thumbnail_path(args.db, style.id)).write_bytes(png)
        print(f"wrote {len(styles)} thumbnails to {args.db}")
    return EXIT_OK


# -- serve -----------------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig.from_env(port=args.port, assets=args.assets,
                                    index=args.index, embed_url=args.embed_url,
                                    gen_url=args.gen_url)
    app = create_app(config)
    sock = socket.create_server(("127.0.0.1", config.port))
    print(f"listening on port {sock.getsockname()[1]}", flush=True)
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
    server.run(sockets=[sock])
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="hairforge",
                     description="Interactive hair authoring toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grow", help="grow strands procedurally")
    p.add_argument("--root", type=_vec3, default=(0.0, 9.0, 0.0))
    p.add_argument("--dir", type=_vec3, default=(0.0, 1.0, 0.0))
    p.add_argument("--seed", type=int, default=0,
                   help="seed for --jitter direction perturbation")
    p.add_argument("--jitter", action="store_true",
                   help="perturb --dir by perturbation-scale noise from --seed")
    p.add_argument("--steps", type=int, default=16)
    p.add_argument("--segment-scale", type=float, default=1.0)
    p.add_argument("--p-gamma-cap", type=float, default=0.2)
    p.add_argument("--p-gravity", type=float, default=0.05)
    p.add_argument("--p-spiral", type=float, default=0.3)
    p.add_argument("--p-helix-radius", type=float, default=0.5)
    p.add_argument("--p-freq", type=float, default=1.0)
    p.add_argument("--perturbation-scale", type=float, default=0.1)
    p.add_argument("--sweep", nargs="*", default=None,
                   metavar="AXIS=V1,V2,...",
                   help="grid axes ph=... pgravity=...; --out becomes a directory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grow)

    p = sub.add_parser("simulate", help="step a hairstyle offline")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--steps", type=int, default=600)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--gravity", type=_vec3, default=(0.0, -981.0, 0.0))
    p.add_argument("--wind", default=None, metavar="DX,DY,DZ,STRENGTH")
    p.add_argument("--collide-head", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("retrieve", help="query an embedding index")
    p.add_argument("--index", default=None)
    p.add_argument("--db", default=None)
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--provider", default="fallback")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("bench", help="frame-time benchmark, CSV output")
    p.add_argument("--strands", type=_int_list, default=[2000])
    p.add_argument("--vertices", type=int, default=16)
    p.add_argument("--frames", type=int, default=60)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("edges", help="extract an edge map from a PNG")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sigma", type=float, default=1.4)
    p.add_argument("--low", type=float, default=100.0)
    p.add_argument("--high", type=float, default=200.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("index", help="build an embedding index from a database")
    p.add_argument("index_action", choices=["build"])
    p.add_argument("--db", required=True)
    p.add_argument("--provider", default="fallback")
    p.add_argument("--thumbnails", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("serve", help="run the session server")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--assets", default=None)
    p.add_argument("--index", default=None)
    p.add_argument("--embed-url", default=None)
    p.add_argument("--gen-url", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except NumericalBlowup as exc:
        print(f"simulation blew up at step {exc.step_index}", file=sys.stderr)
        return EXIT_RUNTIME
    except _VALIDATION_ERRORS as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _RUNTIME_ERRORS as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except HairforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
