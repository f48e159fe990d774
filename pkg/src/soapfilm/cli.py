"""Command line front end: ``build``, ``node`` and ``analyze``."""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import logging
import os
import sys
import tempfile

import numpy as np

from . import pipeline
from .assemble import NODE, AssemblyError, BrepCensus, LatticeMesh, ObjStreamSink
from .cut import CutError
from .fair import FairingError
from .film import FilmError
from .geometry import GeometryError
from .graph import GraphError, load_graph, node_star
from .mesh import MeshError
from .meshio import FORMATS, ExportError, export, read_mesh, write_obj
from .metrics import (OriginalNodeOracle, deviation, deviation_csv, mean_curvature,
                      timing_csv, timing_report, vertex_deviation)
from .pipeline import ConfigError, PipelineConfig
from .shapes import REGULAR, regular_directions, star_graph
from .subdiv import SubdivisionError
from .voronoi import VoronoiError

log = logging.getLogger("soapfilm")

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 1, 2
USER_ERRORS = (GraphError, CutError, ConfigError, ExportError, FilmError, VoronoiError,
               GeometryError, OSError)
INTERNAL_ERRORS = (AssemblyError, FairingError, SubdivisionError, MeshError)
EXTENSIONS = {"obj": ".obj", "stl_binary": ".stl", "ply": ".ply"}


# -- output helpers ---------------------------------------------------------

class AtomicOutputs:
    """Collects output files in temporaries; all are renamed into place on commit."""

    def __init__(self):
        self.pending = []
        umask = os.umask(0)
        os.umask(umask)
        self.mode = 0o666 & ~umask

    @contextlib.contextmanager
    def open(self, path):
        path = os.path.abspath(path)
        d = os.path.dirname(path)
        os.makedirs(d, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".soapfilm-", dir=d)
        self.pending.append((tmp, path))
        with os.fdopen(fd, "wb") as fh:
            yield fh

    def write(self, path, data: bytes):
        with self.open(path) as fh:
            fh.write(data)

    def commit(self):
        for tmp, path in self.pending:
            os.chmod(tmp, self.mode)
            os.replace(tmp, path)
        self.pending = []

    def discard(self):
        for tmp, _ in self.pending:
            with contextlib.suppress(OSError):
                os.unlink(tmp)
        self.pending = []


def patch_mesh(mesh, node_id=0) -> LatticeMesh:
    """Wrap an open nodal patch as an exportable mesh."""
    n = len(mesh.triangles)
    return LatticeMesh(mesh.positions, mesh.triangles, np.full(n, NODE, np.int8),
                       np.full(n, node_id, np.int64), BrepCensus(0, 1, 0))


def _stem(path, fmt):
    ext = EXTENSIONS[fmt]
    return path[: -len(ext)] if path.endswith(ext) else os.path.splitext(path)[0]


def _emit(obj):
    sys.stdout.write(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _write_dumps(out: AtomicOutputs, stem, dumps):
    for node_id, d in sorted(dumps.items()):
        base = f"{stem}.dumps/node_{node_id}"
        if "cuts" in d:
            out.write(base + "_cuts.json", json.dumps(d["cuts"], indent=1).encode())
        for key in ("film", "faired", "subdiv"):
            if key in d:
                with out.open(f"{base}_{key}.obj") as fh:
                    write_obj(patch_mesh(d[key], node_id), fh)


# -- config -----------------------------------------------------------------

def config_from_args(args) -> PipelineConfig:
    overrides = dict(lam=args.lam, iterations=args.iters, layers=args.layers, radius=args.radius,
                     seed=args.seed, threads=args.threads, format=args.format,
                     segments=args.segments, samples=args.samples,
                     dump_cuts=args.dump_cuts or None, dump_film=args.dump_film or None,
                     dump_faired=args.dump_faired or None, dump_subdiv=args.dump_subdiv)
    doc = {"threads": pipeline.default_threads()}
    if args.config:
        try:
            with open(args.config) as fh:
                doc.update(json.load(fh))
        except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    return PipelineConfig.from_dict(doc, **overrides)


def read_directions(path):
    """Direction list: JSON ``[[x, y, z], ...]`` or whitespace-separated rows."""
    with open(path, "rb") as fh:
        raw = fh.read().decode()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError:
        try:
            data = [[float(x) for x in line.replace(",", " ").split()]
                    for line in raw.splitlines() if line.strip() and not line.startswith("#")]
        except ValueError as exc:
            raise GraphError(f"invalid direction file: {exc}") from exc
    d = np.asarray(data, dtype=float) if data else np.zeros((0, 3))
    if d.ndim != 2 or d.shape[1] != 3 or len(d) < 2:
        raise GraphError("invalid direction file: need at least two rows of 3 numbers")
    norm = np.linalg.norm(d, axis=1)
    if not np.all(np.isfinite(d)) or np.any(norm == 0):
        raise GraphError("invalid direction file: zero or non-finite direction")
    return d / norm[:, None]


def node_graph(spec, config: PipelineConfig):
    r = 1.0 if config.radius is None else config.radius
    dirs = regular_directions(spec) if spec in REGULAR else read_directions(spec)
    return star_graph(dirs, length=10.0 * r, radius=r)


def run_node_spec(spec, config):
    graph = node_graph(spec, config)
    star = node_star(graph, 0)
    res = pipeline.run_star(star, config)
    return star, res


# -- commands ---------------------------------------------------------------

def cmd_build(args, out: AtomicOutputs):
    config = config_from_args(args)
    graph = load_graph(args.graph)
    target = args.output or _stem(args.graph, "obj") + EXTENSIONS[config.format]
    stem = _stem(target, config.format)
    if args.stream:
        if config.format != "obj":
            raise ConfigError("--stream supports only the obj format")
        with out.open(target) as fh:
            sink = ObjStreamSink(fh)
            result = pipeline.build_lattice(graph, config, sink=sink)
            c = result.census
            fh.write(f"# census cylindrical={c.cylindrical} subdivision={c.subdivision} "
                     f"boundary_curves={c.boundary_curves} planar_caps={c.planar_caps}\n".encode())
    else:
        result = pipeline.build_lattice(graph, config)
        with out.open(target) as fh:
            export(result.mesh, config.format, fh)
    summary = timing_report(result.timings, graph.n_edges, graph.n_nodes) if result.timings else None
    if args.timings:
        out.write(args.timings, timing_csv(result.timings, summary).encode())
    _write_dumps(out, stem, result.dumps)
    c = result.census
    _emit({"output": target, "census": {"cylindrical": c.cylindrical, "subdivision": c.subdivision,
                                        "boundary_curves": c.boundary_curves,
                                        "planar_caps": c.planar_caps},
           "timing": summary})


def cmd_node(args, out: AtomicOutputs):
    config = config_from_args(args)
    star, res = run_node_spec(args.spec, config)
    name = args.spec if args.spec in REGULAR else os.path.splitext(os.path.basename(args.spec))[0]
    target = args.output or name + EXTENSIONS[config.format]
    stem = _stem(target, config.format)
    rep = deviation(res.patch, OriginalNodeOracle.from_star(star), config.samples, config.seed)
    with out.open(target) as fh:
        export(patch_mesh(res.patch.mesh), config.format, fh)
    out.write(args.csv or stem + ".deviation.csv", deviation_csv([(name, rep)]).encode())
    _write_dumps(out, stem, {0: res.dumps} if res.dumps else {})
    _emit({"output": target, "valence": star.valence, "deviation": rep.as_row(),
           "smoothing_ms": res.smoothing_ms, "construction_ms": res.construction_ms})


def _curvature_stats(h):
    ok = h[np.isfinite(h)]
    if len(ok) == 0:
        return {"vertices": 0, "min": None, "max": None, "avg": None}
    return {"vertices": int(len(ok)), "min": float(ok.min()), "max": float(ok.max()),
            "avg": float(ok.mean())}


def cmd_analyze(args, out: AtomicOutputs):
    config = config_from_args(args)
    src = args.input
    if src in REGULAR or args.node:
        star, res = run_node_spec(src, config)
        mesh = res.patch.mesh
        oracle = OriginalNodeOracle.from_star(star)
        rep = deviation(res.patch, oracle, config.samples, config.seed)
        name = src if src in REGULAR else os.path.splitext(os.path.basename(src))[0]
        positions, triangles = mesh.positions, mesh.triangles
        h = mean_curvature(positions, triangles)
        scalars = {"curvature": np.nan_to_num(h), "deviation": vertex_deviation(mesh, oracle)}
    else:
        positions, triangles = read_mesh(src)
        rep = None
        name = os.path.splitext(os.path.basename(src))[0]
        h = mean_curvature(positions, triangles)
        scalars = {"curvature": np.nan_to_num(h)}
    stem = args.output or name
    stats = _curvature_stats(h)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "quantity", "count", "min", "max", "avg", "std"])
    if rep is not None:
        w.writerow([name, "deviation", rep.samples, "", f"{rep.max:.6f}", f"{rep.avg:.6f}",
                    f"{rep.std:.6f}"])
    ok = h[np.isfinite(h)]
    if len(ok):
        w.writerow([name, "mean_curvature", len(ok), f"{ok.min():.6f}", f"{ok.max():.6f}",
                    f"{ok.mean():.6f}", f"{ok.std():.6f}"])
    else:
        w.writerow([name, "mean_curvature", 0, "", "", "", ""])
    out.write(stem + ".analysis.csv", buf.getvalue().encode())
    n = len(triangles)
    lm = LatticeMesh(positions, triangles, np.full(n, NODE, np.int8), np.zeros(n, np.int64),
                     BrepCensus(0, 1, 0))
    with out.open(stem + ".curvature.ply") as fh:
        export(lm, "ply", fh, vertex_scalars=scalars)
    _emit({"input": src, "curvature": stats, "deviation": rep.as_row() if rep else None,
           "csv": stem + ".analysis.csv", "ply": stem + ".curvature.ply"})


# -- parser -----------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="JSON config file (flags override it)")
    p.add_argument("--lambda", dest="lam", type=float, help="cut enlargement ratio in (0, 0.5)")
    p.add_argument("--iters", type=int, help="PN-Loop iterations")
    p.add_argument("--layers", type=int, help="upsampling layers between circle and cell border")
    p.add_argument("--radius", type=float, help="override every strut radius (mm)")
    p.add_argument("--seed", type=int, help="seed for deviation sampling")
    p.add_argument("--threads", type=int, help="worker processes for node pipelines")
    p.add_argument("--format", choices=FORMATS, help="mesh output format")
    p.add_argument("--segments", type=int, help="longitudinal segments per strut sleeve")
    p.add_argument("--samples", type=int, help="deviation sample count")
    p.add_argument("-o", "--output", help="output path (mesh) or stem (analyze)")
    p.add_argument("--dump-cuts", action="store_true", help="write per-node cut records")
    p.add_argument("--dump-film", action="store_true", help="write per-node film meshes")
    p.add_argument("--dump-faired", action="store_true", help="write per-node faired meshes")
    p.add_argument("--dump-subdiv", type=int, metavar="K", help="write subdivision level K")
    p.add_argument("-v", "--verbose", action="count", default=0)


def make_parser():
    parser = argparse.ArgumentParser(prog="soapfilm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    b = sub.add_parser("build", help="build a lattice mesh from a JSON graph")
    b.add_argument("graph")
    b.add_argument("--stream", action="store_true",
                   help="stream OBJ fragments as nodes finish (large graphs)")
    b.add_argument("--timings", help="per-node timing CSV path")
    _common(b)
    n = sub.add_parser("node", help="single-node experiment with deviation report")
    n.add_argument("spec", help="regular6 | regular12 | regular20 | direction file")
    n.add_argument("--csv", help="deviation CSV path")
    _common(n)
    a = sub.add_parser("analyze", help="deviation and curvature reports")
    a.add_argument("input", help="mesh file or node spec")
    a.add_argument("--node", action="store_true", help="treat input as a direction file")
    _common(a)
    return parser


COMMANDS = {"build": cmd_build, "node": cmd_node, "analyze": cmd_analyze}


def _error_doc(exc):
    if hasattr(exc, "to_dict"):
        doc = exc.to_dict()
    else:
        doc = {"error": type(exc).__name__, "message": str(exc)}
    doc.setdefault("type", type(exc).__name__)
    return doc


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    out = AtomicOutputs()
    try:
        COMMANDS[args.command](args, out)
        out.commit()
        return EXIT_OK
    except USER_ERRORS as exc:
        code = EXIT_USER
        doc = _error_doc(exc)
    except INTERNAL_ERRORS as exc:
        code = EXIT_INTERNAL
        doc = _error_doc(exc)
    except Exception as exc:  # noqa: BLE001 - reported as an invariant violation
        code = EXIT_INTERNAL
        doc = _error_doc(exc)
        log.debug("internal error", exc_info=True)
    out.discard()
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
