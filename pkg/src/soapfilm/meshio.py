"""OBJ / binary STL / PLY writers and readers for assembled lattice meshes."""

from __future__ import annotations

import struct

import numpy as np

FORMATS = ("obj", "stl_binary", "ply")
KIND_NAMES = {0: "strut", 1: "node", 2: "cap"}


class ExportError(RuntimeError):
    pass


def format_vertices(positions, prefix="v") -> bytes:
    p = np.ascontiguousarray(positions, dtype=float)
    if len(p) == 0:
        return b""
    return ((prefix + " %r %r %r\n") * len(p) % tuple(p.ravel().tolist())).encode()


def format_faces(triangles, base=1) -> bytes:
    t = np.ascontiguousarray(triangles, dtype=np.int64) + base
    if len(t) == 0:
        return b""
    return (("f %d %d %d\n") * len(t) % tuple(t.ravel().tolist())).encode()


def _runs(kind, ref):
    """Contiguous runs of equal (kind, ref) as (start, stop, kind, ref)."""
    if len(kind) == 0:
        return []
    change = np.nonzero((np.diff(kind) != 0) | (np.diff(ref) != 0))[0] + 1
    starts = np.r_[0, change]
    stops = np.r_[change, len(kind)]
    return [(int(a), int(b), int(kind[a]), int(ref[a])) for a, b in zip(starts, stops)]


def write_obj(mesh, sink):
    sink.write(b"# soapfilm lattice mesh\n")
    c = mesh.census
    sink.write(f"# census cylindrical={c.cylindrical} subdivision={c.subdivision} "
               f"boundary_curves={c.boundary_curves} planar_caps={c.planar_caps}\n".encode())
    sink.write(format_vertices(mesh.positions))
    for a, b, kind, ref in _runs(mesh.kind, mesh.ref):
        sink.write(f"g {KIND_NAMES[kind]}_{ref}\n".encode())
        sink.write(format_faces(mesh.triangles[a:b]))


def write_stl_binary(mesh, sink):
    p = mesh.positions[mesh.triangles]
    n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    norm = np.linalg.norm(n, axis=1, keepdims=True)
    n = np.divide(n, norm, out=np.zeros_like(n), where=norm > 0)
    header = b"soapfilm binary STL"
    sink.write(header.ljust(80, b" "))
    sink.write(struct.pack("<I", len(p)))
    rec = np.zeros(len(p), dtype=np.dtype([("n", "<f4", 3), ("v", "<f4", (3, 3)), ("a", "<u2")]))
    rec["n"] = n
    rec["v"] = p
    sink.write(rec.tobytes())


def write_ply(mesh, sink, vertex_scalars=None):
    scalars = dict(vertex_scalars or {})
    nv, nf = len(mesh.positions), len(mesh.triangles)
    lines = ["ply", "format ascii 1.0", "comment soapfilm lattice mesh",
             f"element vertex {nv}", "property double x", "property double y", "property double z"]
    for name in scalars:
        lines.append(f"property double {name}")
    lines += [f"element face {nf}", "property list uchar int vertex_indices",
              "property int kind", "property int ref", "end_header"]
    sink.write(("\n".join(lines) + "\n").encode())
    cols = [mesh.positions] + [np.asarray(v, dtype=float)[:, None] for v in scalars.values()]
    data = np.hstack(cols)
    if nv:
        fmt = " ".join(["%r"] * data.shape[1]) + "\n"
        sink.write((fmt * nv % tuple(data.ravel().tolist())).encode())
    if nf:
        f = np.c_[np.full(nf, 3), mesh.triangles, mesh.kind, mesh.ref].astype(np.int64)
        sink.write(("%d %d %d %d %d %d\n" * nf % tuple(f.ravel().tolist())).encode())


def export(mesh, format, sink, vertex_scalars=None):
    if mesh is None or len(mesh.triangles) == 0:
        raise ExportError("nothing to export")
    try:
        if format == "obj":
            write_obj(mesh, sink)
        elif format == "stl_binary":
            write_stl_binary(mesh, sink)
        elif format == "ply":
            write_ply(mesh, sink, vertex_scalars)
        else:
            raise ExportError(f"unknown format {format!r}")
    except OSError as exc:
        raise ExportError(f"sink write failure: {exc}") from exc


def read_obj(source):
    data = source.read() if hasattr(source, "read") else open(source, "rb").read()
    v, f = [], []
    for line in data.decode().splitlines():
        if line.startswith("v "):
            v.append([float(x) for x in line.split()[1:4]])
        elif line.startswith("f "):
            f.append([int(x.split("/")[0]) - 1 for x in line.split()[1:4]])
    return np.array(v, dtype=float).reshape(-1, 3), np.array(f, dtype=np.int64).reshape(-1, 3)


def read_stl_binary(source):
    data = source.read() if hasattr(source, "read") else open(source, "rb").read()
    (count,) = struct.unpack_from("<I", data, 80)
    rec = np.frombuffer(data, dtype=np.dtype([("n", "<f4", 3), ("v", "<f4", (3, 3)), ("a", "<u2")]),
                        count=count, offset=84)
    tris = rec["v"].astype(float)
    return tris, count


def read_ply(source):
    data = source.read() if hasattr(source, "read") else open(source, "rb").read()
    text = data.decode().splitlines()
    nv = nf = 0
    props = []
    k = 0
    while text[k] != "end_header":
        parts = text[k].split()
        if parts[:2] == ["element", "vertex"]:
            nv = int(parts[2])
            current = "vertex"
        elif parts[:2] == ["element", "face"]:
            nf = int(parts[2])
            current = "face"
        elif parts and parts[0] == "property" and current == "vertex":
            props.append(parts[-1])
        k += 1
    k += 1
    vals = np.array([[float(x) for x in text[k + i].split()] for i in range(nv)]).reshape(nv, -1)
    faces = np.array([[int(x) for x in text[k + nv + i].split()[1:4]] for i in range(nf)],
                     dtype=np.int64).reshape(-1, 3)
    scalars = {name: vals[:, i] for i, name in enumerate(props) if name not in "xyz"}
    return vals[:, :3], faces, scalars


def read_mesh(path):
    """Read positions and triangles from an OBJ, binary STL or PLY file (by extension)."""
    p = str(path).lower()
    if p.endswith(".obj"):
        return read_obj(path)
    if p.endswith(".ply"):
        v, f, _ = read_ply(path)
        return v, f
    if p.endswith(".stl"):
        tris, _ = read_stl_binary(path)
        flat = tris.reshape(-1, 3)
        uniq, inv = np.unique(flat, axis=0, return_inverse=True)
        return uniq, inv.reshape(-1, 3)
    raise ExportError(f"cannot infer mesh format from {path!r}")
