"""Point-cloud and mesh file I/O: xyz, PLY (ascii + binary LE), OBJ, SVG, CSV."""

import struct

import numpy as np


class ParseError(ValueError):
    """Malformed input file; message carries path and line/offset."""


def load_points(path: str):
    """Read a point cloud; returns (points (M,3), normals (M,3) or None).

    xyz: whitespace-separated ``x y z [nx ny nz]`` per line. PLY: ascii or
    binary_little_endian vertex element with x/y/z and optional nx/ny/nz.
    Normals are kept for evaluation only, never fed to the solver.
    """
    name = str(path).lower()
    if name.endswith(".ply"):
        return _load_ply(path)
    return _load_xyz(path)


def _load_xyz(path):
    pts, nrm = [], []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) not in (3, 6):
                raise ParseError(f"{path}:{lineno}: expected 3 or 6 columns, got {len(parts)}")
            try:
                vals = [float(p) for p in parts]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            pts.append(vals[:3])
            if len(vals) == 6:
                nrm.append(vals[3:])
    if not pts:
        raise ParseError(f"{path}: no points")
    if nrm and len(nrm) != len(pts):
        raise ParseError(f"{path}: normals present on only some lines")
    return np.array(pts), (np.array(nrm) if nrm else None)


_PLY_TYPES = {
    "float": ("f", 4), "float32": ("f", 4), "double": ("d", 8), "float64": ("d", 8),
    "uchar": ("B", 1), "uint8": ("B", 1), "char": ("b", 1), "int8": ("b", 1),
    "short": ("h", 2), "ushort": ("H", 2), "int": ("i", 4), "int32": ("i", 4),
    "uint": ("I", 4), "uint32": ("I", 4),
}


def _load_ply(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(b"ply"):
        raise ParseError(f"{path}: not a PLY file")
    try:
        header_end = raw.index(b"end_header\n") + len(b"end_header\n")
    except ValueError:
        raise ParseError(f"{path}: missing end_header")
    header = raw[:header_end].decode("ascii", errors="replace").splitlines()
    fmt = None
    n_vertices = 0
    props = []           # vertex property (name, type) pairs
    in_vertex = False
    skip_elements = []   # (count, props) after vertex element, ascii only handling
    for lineno, line in enumerate(header[1:], start=2):
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            in_vertex = parts[1] == "vertex"
            if in_vertex:
                n_vertices = int(parts[2])
            else:
                skip_elements.append(int(parts[2]))
        elif parts[0] == "property" and in_vertex:
            if parts[1] == "list":
                raise ParseError(f"{path}:{lineno}: list property on vertex element")
            if parts[1] not in _PLY_TYPES:
                raise ParseError(f"{path}:{lineno}: unknown type {parts[1]}")
            props.append((parts[2], parts[1]))
    if fmt not in ("ascii", "binary_little_endian"):
        raise ParseError(f"{path}: unsupported format {fmt}")
    names = [p[0] for p in props]
    for need in ("x", "y", "z"):
        if need not in names:
            raise ParseError(f"{path}: vertex element lacks property {need}")
    has_normals = all(n in names for n in ("nx", "ny", "nz"))

    if fmt == "ascii":
        body = raw[header_end:].decode("ascii", errors="replace").splitlines()
        rows = []
        for lineno, line in enumerate(body[:n_vertices], start=len(header) + 1):
            parts = line.split()
            if len(parts) < len(props):
                raise ParseError(f"{path}:{lineno}: expected {len(props)} values")
            try:
                rows.append([float(v) for v in parts[:len(props)]])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
        if len(rows) != n_vertices:
            raise ParseError(f"{path}: expected {n_vertices} vertices, got {len(rows)}")
        data = np.array(rows)
    else:
        codes = "".join(_PLY_TYPES[t][0] for _, t in props)
        rec = struct.Struct("<" + codes)
        need = rec.size * n_vertices
        blob = raw[header_end:header_end + need]
        if len(blob) < need:
            raise ParseError(f"{path}: truncated at byte {header_end + len(blob)}")
        data = np.array([rec.unpack_from(blob, i * rec.size) for i in range(n_vertices)],
                        dtype=float)
    cols = {n: data[:, i] for i, n in enumerate(names)}
    pts = np.stack([cols["x"], cols["y"], cols["z"]], axis=1)
    nrm = (np.stack([cols["nx"], cols["ny"], cols["nz"]], axis=1)
           if has_normals else None)
    return pts, nrm


def save_oriented_ply(path, points, normals, areas=None, degenerate=None):
    points = np.asarray(points, dtype=float)
    normals = np.asarray(normals, dtype=float)
    if points.shape[1] == 2:  # planar clouds embed at z = 0
        points = np.column_stack([points, np.zeros(len(points))])
        normals = np.column_stack([normals, np.zeros(len(normals))])
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(points)}\n")
        for name in ("x", "y", "z", "nx", "ny", "nz"):
            fh.write(f"property float {name}\n")
        if areas is not None:
            fh.write("property float area\n")
        fh.write("end_header\n")
        for i in range(len(points)):
            row = list(points[i]) + list(normals[i])
            if areas is not None:
                row.append(areas[i])
            fh.write(" ".join(f"{v:.9g}" for v in row) + "\n")


def save_mesh_obj(path, mesh):
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def save_mesh_ply(path, mesh):
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(mesh.vertices)}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        fh.write(f"element face {len(mesh.triangles)}\n")
        fh.write("property list uchar int vertex_indices\n")
        fh.write("end_header\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for t in mesh.triangles:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")


def load_mesh(path: str):
    """Minimal OBJ/PLY(ascii) mesh reader for the metrics command."""
    from .isosurface import Mesh
    name = str(path).lower()
    verts, faces = [], []
    if name.endswith(".obj"):
        with open(path) as fh:
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                if parts[0] == "v":
                    verts.append([float(x) for x in parts[1:4]])
                elif parts[0] == "f":
                    idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                    for i in range(1, len(idx) - 1):
                        faces.append([idx[0], idx[i], idx[i + 1]])
    elif name.endswith(".ply"):
        with open(path) as fh:
            lines = fh.read().splitlines()
        n_v = n_f = 0
        it = iter(enumerate(lines))
        for i, line in it:
            if line.startswith("element vertex"):
                n_v = int(line.split()[2])
            elif line.startswith("element face"):
                n_f = int(line.split()[2])
            elif line.startswith("end_header"):
                body = lines[i + 1:]
                break
        else:
            raise ParseError(f"{path}: missing end_header")
        for line in body[:n_v]:
            verts.append([float(x) for x in line.split()[:3]])
        for line in body[n_v:n_v + n_f]:
            parts = [int(x) for x in line.split()]
            idx = parts[1:1 + parts[0]]
            for i in range(1, len(idx) - 1):
                faces.append([idx[0], idx[i], idx[i + 1]])
    else:
        raise ParseError(f"{path}: unsupported mesh format")
    if not verts:
        raise ParseError(f"{path}: no vertices")
    return Mesh(vertices=np.array(verts), triangles=np.array(faces, dtype=int))


def save_polylines_svg(path, polylines, stroke="black", width=800):
    """Closed 2-D contours as one SVG path each."""
    if polylines:
        allpts = np.vstack(polylines)
        lo, hi = allpts.min(axis=0), allpts.max(axis=0)
        span = float(max((hi - lo).max(), 1e-12))
    else:
        lo, span = np.zeros(2), 1.0
    pad = 0.05 * span

    def to_px(p):
        q = (p - lo + pad) / (span + 2 * pad) * width
        return q[0], width - q[1]  # flip y for SVG's down axis

    with open(path, "w") as fh:
        fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
                 f'height="{width}" viewBox="0 0 {width} {width}">\n')
        for poly in polylines:
            d = " ".join(("M" if i == 0 else "L") + f" {to_px(p)[0]:.2f} {to_px(p)[1]:.2f}"
                         for i, p in enumerate(poly))
            fh.write(f'  <path d="{d} Z" fill="none" stroke="{stroke}"/>\n')
        fh.write("</svg>\n")


def save_polylines_csv(path, polylines):
    with open(path, "w") as fh:
        fh.write("contour,vertex,x,y\n")
        for ci, poly in enumerate(polylines):
            for vi, p in enumerate(poly):
                fh.write(f"{ci},{vi},{p[0]:.9g},{p[1]:.9g}\n")
