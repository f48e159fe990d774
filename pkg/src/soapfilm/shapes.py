"""Benchmark direction sets, synthetic lattice graphs and reference meshes."""

from __future__ import annotations

import itertools

import numpy as np

from .graph import Edge, LatticeGraph, Node

PHI = (1.0 + 5.0 ** 0.5) / 2.0
TWO_PI_ = 2.0 * np.pi


def octahedron_directions():
    return np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0],
                     [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float)


def icosahedron_directions():
    pts = []
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            pts += [(0, s1, s2 * PHI), (s1, s2 * PHI, 0), (s2 * PHI, 0, s1)]
    pts = np.array(pts, dtype=float)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def dodecahedron_directions():
    pts = [p for p in itertools.product((-1, 1), repeat=3)]
    inv = 1.0 / PHI
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            pts += [(0, s1 * inv, s2 * PHI), (s1 * inv, s2 * PHI, 0), (s2 * PHI, 0, s1 * inv)]
    pts = np.array(pts, dtype=float)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


REGULAR = {
    "regular6": octahedron_directions,
    "regular12": icosahedron_directions,
    "regular20": dodecahedron_directions,
}


def regular_directions(name):
    try:
        return REGULAR[name]()
    except KeyError:
        raise ValueError(f"unknown regular node {name!r}") from None


def star_graph(directions, length=10.0, radius=1.0, center=(0.0, 0.0, 0.0)):
    """One center node (id 0) with a strut of ``length`` along each direction."""
    c = np.asarray(center, dtype=float)
    dirs = np.asarray(directions, dtype=float)
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    nodes = [Node(0, tuple(c))]
    edges = []
    for k, d in enumerate(dirs):
        nodes.append(Node(k + 1, tuple(c + length * d)))
        edges.append(Edge(k, 0, k + 1))
    return LatticeGraph(nodes, edges, radius)


def cube_cell(size=10.0, radius=1.0):
    corners = list(itertools.product((0.0, size), repeat=3))
    nodes = [Node(i, p) for i, p in enumerate(corners)]
    edges = []
    for a, b in itertools.combinations(range(8), 2):
        if sum(x != y for x, y in zip(corners[a], corners[b])) == 1:
            edges.append(Edge(len(edges), a, b))
    return LatticeGraph(nodes, edges, radius)


def grid_graph(nx, ny, nz, spacing=10.0, radius=1.0, diagonals=False):
    """Cubic grid lattice; ``diagonals`` adds a body-centered node per cell (BCC)."""
    index = {}
    nodes = []
    for i, j, k in itertools.product(range(nx), range(ny), range(nz)):
        index[(i, j, k)] = len(nodes)
        nodes.append(Node(len(nodes), (i * spacing, j * spacing, k * spacing)))
    edges = []

    def add(a, b):
        edges.append(Edge(len(edges), a, b))

    for (i, j, k), a in index.items():
        for di, dj, dk in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
            b = index.get((i + di, j + dj, k + dk))
            if b is not None:
                add(a, b)
    if diagonals:
        for i, j, k in itertools.product(range(nx - 1), range(ny - 1), range(nz - 1)):
            c = len(nodes)
            nodes.append(Node(c, ((i + 0.5) * spacing, (j + 0.5) * spacing, (k + 0.5) * spacing)))
            for di, dj, dk in itertools.product((0, 1), repeat=3):
                add(c, index[(i + di, j + dj, k + dk)])
    return LatticeGraph(nodes, edges, radius)


def icosphere(refinements=0):
    """Unit icosphere: icosahedron split 1-to-4 ``refinements`` times, projected to the sphere."""
    v = icosahedron_directions()
    faces = []
    n = len(v)
    d = v @ v.T
    edge_dot = np.max(d[~np.eye(n, dtype=bool)])
    for a, b, c in itertools.combinations(range(n), 3):
        if min(d[a, b], d[b, c], d[a, c]) > edge_dot - 1e-9:
            tri = [a, b, c]
            if np.dot(np.cross(v[b] - v[a], v[c] - v[a]), v[a]) < 0:
                tri = [a, c, b]
            faces.append(tri)
    f = np.array(faces)
    for _ in range(refinements):
        v, f = _split(v, f)
        v = v / np.linalg.norm(v, axis=1, keepdims=True)
    return v, f


def _split(v, f):
    cache = {}
    verts = list(v)

    def mid(a, b):
        key = (min(a, b), max(a, b))
        if key not in cache:
            cache[key] = len(verts)
            verts.append((v[a] + v[b]) / 2)
        return cache[key]

    out = []
    for a, b, c in f:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
    return np.array(verts), np.array(out)


def synthetic_lattice(nx, ny, nz, spacing=10.0, jitter=0.05, seed=0, face_diagonals=True,
                      radius=None):
    """Jittered body-centred cubic lattice, optionally with face diagonals.

    Corner nodes reach degree 26 with face diagonals (6 axis, 12 face, 8 body
    neighbours). ``jitter`` displaces every node uniformly by up to
    ``jitter * spacing`` per coordinate. The default radius is one twelfth of
    the shortest edge, which keeps all cuts inside their struts.
    """
    rng = np.random.default_rng(seed)
    index = {}
    pts = []
    for i, j, k in itertools.product(range(nx), range(ny), range(nz)):
        index[("c", i, j, k)] = len(pts)
        pts.append((i, j, k))
    for i, j, k in itertools.product(range(nx - 1), range(ny - 1), range(nz - 1)):
        index[("b", i, j, k)] = len(pts)
        pts.append((i + 0.5, j + 0.5, k + 0.5))
    pts = np.array(pts, dtype=float) * spacing
    pts += rng.uniform(-jitter * spacing, jitter * spacing, pts.shape)
    pairs = []
    for (kind, i, j, k), a in index.items():
        if kind == "c":
            steps = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
            if face_diagonals:
                steps += [(1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1)]
            for d in steps:
                b = index.get(("c", i + d[0], j + d[1], k + d[2]))
                if b is not None:
                    pairs.append((a, b))
        else:
            for d in itertools.product((0, 1), repeat=3):
                pairs.append((a, index[("c", i + d[0], j + d[1], k + d[2])]))
    if radius is None:
        p = np.array(pairs)
        radius = float(np.min(np.linalg.norm(pts[p[:, 0]] - pts[p[:, 1]], axis=1))) / 12.0
    nodes = [Node(n, tuple(map(float, q))) for n, q in enumerate(pts)]
    edges = [Edge(n, a, b) for n, (a, b) in enumerate(pairs)]
    return LatticeGraph(nodes, edges, radius)


def cylinder_patch(n=8, rows=7, height=3.0, radius=1.0, rotation=None, offset=None,
                   jitter=0.0, seed=0):
    """Open control patch sampled from one cylinder, with exact outward normals.

    Rows of ``n`` points (angles optionally jittered per row) are zipped into
    triangles; the first and last rows are boundary circles, the next rows
    inward collar1/collar2, the rest interior.
    """
    from .assemble import zip_rings
    from .geometry import Circle3
    from .mesh import BOUNDARY, COLLAR1, COLLAR2, INTERIOR, ControlMesh

    rng = np.random.default_rng(seed)
    R = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
    t = np.zeros(3) if offset is None else np.asarray(offset, dtype=float)
    base = TWO_PI_ * np.arange(n) / n
    rows_phi = [np.sort(np.mod(base + jitter * rng.uniform(-0.5, 0.5, n) * TWO_PI_ / n, TWO_PI_))
                for _ in range(rows)]
    z = np.linspace(0.0, height, rows)
    pos, nrm, roles, strut = [], [], [], []
    for k, (phi, zk) in enumerate(zip(rows_phi, z)):
        edge = min(k, rows - 1 - k)
        role = (BOUNDARY, COLLAR1, COLLAR2)[edge] if edge < 3 else INTERIOR
        radial = np.c_[np.cos(phi), np.sin(phi), np.zeros(n)]
        pos.append(radius * radial + [0, 0, zk])
        nrm.append(radial)
        roles += [role] * n
        strut += [0 if k < rows / 2 else 1] * n
    pos = np.concatenate(pos) @ R.T + t
    nrm = np.concatenate(nrm) @ R.T
    tris = []
    for k in range(rows - 1):
        local = zip_rings(rows_phi[k], rows_phi[k + 1])
        ids = np.r_[np.arange(k * n, (k + 1) * n), np.arange((k + 1) * n, (k + 2) * n)]
        tris.append(ids[local])
    axis = R @ [0, 0, 1.0]
    circles = [Circle3(t, -axis, radius), Circle3(t + height * axis, axis, radius)]
    nv = len(pos)
    circle = np.full(nv, -1, dtype=np.int64)
    u = np.full(nv, np.nan)
    circle[:n], circle[-n:] = 0, 1
    u[:n] = circles[0].parameter_of(pos[:n])
    u[-n:] = circles[1].parameter_of(pos[-n:])
    pos[:n] = circles[0](u[:n])
    pos[-n:] = circles[1](u[-n:])
    return ControlMesh(pos, nrm, np.array(roles, np.int8), np.array(strut, np.int64), circle, u,
                       np.concatenate(tris), circles, t.copy())
