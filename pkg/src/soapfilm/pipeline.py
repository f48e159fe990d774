"""Per-node pipeline orchestration and whole-lattice builds."""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .assemble import Assembler, AssemblyError, MemorySink, LatticeMesh
from .cut import CutError, DEFAULT_LAMBDA, node_cuts
from .fair import build_laplacian, fair, upsample
from .film import adjust_vertices, build_film, insert_curve_points
from .geometry import Circle3
from .graph import LatticeGraph, node_star
from .mesh import is_closed_manifold
from .meshio import FORMATS
from .metrics import DEFAULT_SAMPLES, DEFAULT_SEED, TimingRecord
from .subdiv import subdivide

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    def to_dict(self):
        return {"error": "config", "message": str(self)}


@dataclass
class PipelineConfig:
    lam: float = DEFAULT_LAMBDA
    iterations: int = 3
    layers: int = 3
    radius: float | None = None
    seed: int = DEFAULT_SEED
    format: str = "obj"
    threads: int = 1
    segments: int = 1
    samples: int = DEFAULT_SAMPLES
    dump_cuts: bool = False
    dump_film: bool = False
    dump_faired: bool = False
    dump_subdiv: int | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not (isinstance(self.lam, (int, float)) and 0 < self.lam < 0.5):
            raise ConfigError(f"lambda must lie in (0, 0.5), got {self.lam!r}")
        for name, lo in (("iterations", 0), ("layers", 0), ("threads", 1), ("segments", 1),
                         ("samples", 1)):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < lo:
                raise ConfigError(f"{name} must be an integer >= {lo}, got {v!r}")
        if self.radius is not None and not (np.isfinite(self.radius) and self.radius > 0):
            raise ConfigError(f"radius must be positive, got {self.radius!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) \
                or not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.dump_subdiv is not None and not 0 <= self.dump_subdiv <= self.iterations:
            raise ConfigError(f"dump_subdiv must lie in [0, iterations], got {self.dump_subdiv!r}")

    @classmethod
    def from_dict(cls, doc: dict, **overrides) -> "PipelineConfig":
        """Defaults < ``doc`` < non-None ``overrides``; unknown keys are rejected."""
        names = {f.name for f in fields(cls)}
        doc = dict(doc)
        if "lambda" in doc:
            doc["lam"] = doc.pop("lambda")
        unknown = set(doc) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**doc)

    @classmethod
    def from_file(cls, path, **overrides) -> "PipelineConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(doc, **overrides)

    def to_dict(self):
        return asdict(self)


@dataclass
class NodeResult:
    node: int
    degree: int
    patch: object  # SubdividedPatch
    cuts: list
    smoothing_ms: float
    construction_ms: float
    dumps: dict = field(default_factory=dict)

    @property
    def timing(self) -> TimingRecord:
        return TimingRecord(self.node, self.degree, self.smoothing_ms, self.construction_ms)


def run_star(star, config: PipelineConfig, cuts=None) -> NodeResult:
    """Cut, build film, fair and subdivide one node of valence >= 2."""
    t0 = time.perf_counter()
    if cuts is None:
        cuts = node_cuts(star, config.lam)
    film = insert_curve_points(adjust_vertices(build_film(cuts, star.node), star), star)
    up = upsample(film, star, config.layers)
    t1 = time.perf_counter()
    faired = fair(up, build_laplacian(up))
    t2 = time.perf_counter()
    keep = config.dump_subdiv is not None
    patch = subdivide(faired, star, config.iterations, keep_levels=keep)
    t3 = time.perf_counter()
    dumps = {}
    if config.dump_cuts:
        dumps["cuts"] = [c.to_dict() for c in cuts]
    if config.dump_film:
        dumps["film"] = film
    if config.dump_faired:
        dumps["faired"] = faired
    if keep:
        dumps["subdiv"] = patch.levels[config.dump_subdiv]
        patch.levels = []
    log.debug("node %s: smoothing %.1f ms, construction %.1f ms",
              star.node.id, (t2 - t1) * 1e3, (t3 - t0) * 1e3)
    return NodeResult(star.node.id, star.valence, patch, cuts, (t2 - t1) * 1e3, (t3 - t0) * 1e3, dumps)


def with_radius(graph: LatticeGraph, radius) -> LatticeGraph:
    if radius is None:
        return graph
    from .graph import Edge
    return LatticeGraph(list(graph.nodes), [Edge(e.id, e.a, e.b, None) for e in graph.edges], radius)


def all_cuts(graph: LatticeGraph, lam: float) -> dict:
    """Cuts keyed by (edge id, node id); valence-1 ends get a zero cut at the node."""
    out = {}
    for node in graph.nodes:
        star = node_star(graph, node.id)
        if star.valence == 1:
            s = star.incident[0]
            out[(s.edge_id, node.id)] = None
            continue
        for c in node_cuts(star, lam):
            out[(c.edge_id, node.id)] = c
    for e in graph.edges:
        ca, cb = out[(e.id, e.a)], out[(e.id, e.b)]
        total = (ca.cut_length if ca else 0.0) + (cb.cut_length if cb else 0.0)
        length = graph.edge_length(e)
        if total >= length:
            raise CutError(f"cuts {total:.6g} at both ends of edge {e.id} exceed its length "
                           f"{length:.6g}", e.id, e.a)
    return out


def cap_circle(graph: LatticeGraph, node_id) -> tuple[Circle3, int]:
    star = node_star(graph, node_id)
    s = star.incident[0]
    return Circle3(star.node.xyz, s.direction, s.radius), s.edge_id


_WORKER = {}


def _init_worker(graph, config):
    _WORKER["graph"] = graph
    _WORKER["config"] = config


def _work(args):
    node_id, cuts = args
    return run_star(node_star(_WORKER["graph"], node_id), _WORKER["config"], cuts)


def iter_node_results(graph: LatticeGraph, config: PipelineConfig, cuts: dict):
    """Yield NodeResults for every node of valence >= 2, in node order."""
    jobs = []
    for node in graph.nodes:
        eids = graph.incident_edges(node.id)
        if len(eids) >= 2:
            jobs.append((node.id, [cuts[(e, node.id)] for e in sorted(eids)]))
    if config.threads <= 1 or len(jobs) < 2:
        for nid, c in jobs:
            yield run_star(node_star(graph, nid), config, c)
        return
    with ProcessPoolExecutor(config.threads, initializer=_init_worker,
                             initargs=(graph, config)) as pool:
        yield from pool.map(_work, jobs, chunksize=8)


@dataclass
class BuildResult:
    mesh: LatticeMesh | None
    census: object
    timings: list
    dumps: dict


def build_lattice(graph: LatticeGraph, config: PipelineConfig, sink=None,
                  check: bool = True) -> BuildResult:
    """Run every node and stitch the lattice.

    With ``sink=None`` the mesh is assembled in memory (and checked for
    watertightness); otherwise fragments stream into ``sink`` as nodes finish.
    """
    graph = with_radius(graph, config.radius)
    cuts = all_cuts(graph, config.lam)
    memory = sink is None
    sink = MemorySink() if memory else sink
    cap_ring = 4 * 2 ** config.iterations
    asm = Assembler(graph, sink, cap_ring, config.segments)
    timings = []
    dumps = {}
    for res in iter_node_results(graph, config, cuts):
        asm.add_patch(res.node, res.patch.mesh)
        timings.append(res.timing)
        if res.dumps:
            dumps[res.node] = res.dumps
    for node in graph.nodes:
        if graph.valence(node.id) == 1:
            circle, eid = cap_circle(graph, node.id)
            asm.add_cap(node.id, circle, eid)
    census = asm.census()
    mesh = None
    if memory:
        mesh = sink.result(census)
        if check and len(mesh.triangles) and not is_closed_manifold(mesh.triangles):
            raise AssemblyError("assembled mesh is not a closed, consistently oriented manifold")
    return BuildResult(mesh, census, timings, dumps)


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)
