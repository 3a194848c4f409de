"""Analytic test shapes: seeded clouds with exact normals, and reference meshes."""

import numpy as np

from .isosurface import Mesh


def sphere_cloud(n: int, seed: int = 0, radius: float = 1.0, center=(0.0, 0.0, 0.0)):
    """Uniform samples on a sphere with exact outward normals."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return np.asarray(center) + radius * v, v


def fibonacci_sphere(n: int, radius: float = 1.0, center=(0.0, 0.0, 0.0)):
    """Near-equal-area sphere quadrature: points, normals, per-point areas."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = np.pi * (1.0 + np.sqrt(5.0)) * i
    s = np.sqrt(1.0 - z * z)
    d = np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)
    areas = np.full(n, 4.0 * np.pi * radius ** 2 / n)
    return np.asarray(center) + radius * d, d, areas


def torus_cloud(n: int, seed: int = 0, major: float = 1.0, minor: float = 0.4):
    """Area-uniform torus samples (rejection on the minor angle) with normals."""
    rng = np.random.default_rng(seed)
    pts = np.empty((n, 3))
    nrm = np.empty((n, 3))
    got = 0
    while got < n:
        miss = n - got
        u = rng.uniform(0.0, 2.0 * np.pi, size=2 * miss + 16)
        w = rng.uniform(0.0, 2.0 * np.pi, size=len(u))
        keep = rng.uniform(size=len(u)) <= (major + minor * np.cos(w)) / (major + minor)
        u, w = u[keep][:miss], w[keep][:miss]
        took = len(u)
        ring = major + minor * np.cos(w)
        pts[got:got + took] = np.stack([ring * np.cos(u), ring * np.sin(u),
                                        minor * np.sin(w)], axis=1)
        nrm[got:got + took] = np.stack([np.cos(w) * np.cos(u), np.cos(w) * np.sin(u),
                                        np.sin(w)], axis=1)
        got += took
    return pts, nrm


def circle_cloud(n: int, seed: int = 0, radius: float = 1.0, stratified: bool = True):
    """Planar circle samples (stratified angles by default) with outward normals."""
    rng = np.random.default_rng(seed)
    if stratified:
        t = (np.arange(n) + rng.uniform(size=n)) / n * 2.0 * np.pi
    else:
        t = rng.uniform(0.0, 2.0 * np.pi, size=n)
    d = np.stack([np.cos(t), np.sin(t)], axis=1)
    return radius * d, d


def annulus_cloud(n: int, seed: int = 0, outer: float = 1.0, inner: float = 0.4):
    """Two concentric rings bounding an annulus; inner normals point inward
    (outward of the region). n is the total count, split evenly."""
    n_out = n // 2
    p1, d1 = circle_cloud(n_out, seed, radius=outer)
    p2, d2 = circle_cloud(n - n_out, seed + 1, radius=inner)
    return np.vstack([p1, p2]), np.vstack([d1, -d2])


def icosphere(subdivisions: int = 4, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> Mesh:
    """Subdivided icosahedron projected to the sphere."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    for _ in range(subdivisions):
        cache = {}
        verts_list = list(verts)

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts_list[a] + verts_list[b]
                m /= np.linalg.norm(m)
                cache[key] = len(verts_list)
                verts_list.append(m)
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
        verts = np.array(verts_list)
        faces = np.array(new_faces)
    return Mesh(vertices=np.asarray(center) + radius * verts, triangles=faces)


def torus_mesh(n_major: int = 128, n_minor: int = 64, major: float = 1.0,
               minor: float = 0.4) -> Mesh:
    u = np.linspace(0.0, 2.0 * np.pi, n_major, endpoint=False)
    w = np.linspace(0.0, 2.0 * np.pi, n_minor, endpoint=False)
    uu, ww = np.meshgrid(u, w, indexing="ij")
    ring = major + minor * np.cos(ww)
    verts = np.stack([ring * np.cos(uu), ring * np.sin(uu),
                      minor * np.sin(ww)], axis=-1).reshape(-1, 3)
    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            a = i * n_minor + j
            b = ((i + 1) % n_major) * n_minor + j
            c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
            d = i * n_minor + (j + 1) % n_minor
            faces += [[a, b, c], [a, c, d]]
    return Mesh(vertices=verts, triangles=np.array(faces))
