"""Shared mesh builders for the test suite."""

import numpy as np
import pytest

from quadspline.mesh import QuadMesh


def torus_point(theta, phi, R=2.0, r=1.0):
    return np.array([(R + r * np.cos(phi)) * np.cos(theta),
                     (R + r * np.cos(phi)) * np.sin(theta),
                     r * np.sin(phi)])


def torus_grid(n=8, m=8, thetas=None, phis=None, perturb=0.0, seed=0):
    """Closed n x m quad grid on a torus; optional vertex jitter."""
    if thetas is None:
        thetas = 2.0 * np.pi * np.arange(n) / n
    if phis is None:
        phis = 2.0 * np.pi * np.arange(m) / m
    verts = np.array([torus_point(t, p) for t in thetas for p in phis])
    if perturb:
        rng = np.random.default_rng(seed)
        verts = verts + rng.normal(0.0, perturb, verts.shape)
    faces = []
    for i in range(n):
        for j in range(m):
            faces.append([i * m + j,
                          ((i + 1) % n) * m + j,
                          ((i + 1) % n) * m + (j + 1) % m,
                          i * m + (j + 1) % m])
    return QuadMesh(verts, faces)


def open_grid(nx=5, ny=5, spacing=1.0, height=None):
    """Planar (nx+1) x (ny+1) vertex grid, z from height(x, y) if given."""
    verts = []
    for j in range(ny + 1):
        for i in range(nx + 1):
            x, y = i * spacing, j * spacing
            z = height(x, y) if height else 0.0
            verts.append([x, y, z])
    faces = []
    for j in range(ny):
        for i in range(nx):
            a = j * (nx + 1) + i
            faces.append([a, a + 1, a + nx + 2, a + nx + 1])
    return QuadMesh(verts, faces)


def cube_mesh():
    verts = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
             [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]]
    faces = [[0, 3, 2, 1], [4, 5, 6, 7], [0, 1, 5, 4],
             [1, 2, 6, 5], [2, 3, 7, 6], [3, 0, 4, 7]]
    return QuadMesh(verts, faces)


def grid_with_rotated_edge(nx=8, ny=8, at=(3, 3), height=None):
    """Planar open grid with one interior edge rotated.

    Rotating the vertical edge between face (i,j) and face (i+1,j) produces
    two valence-3 and two valence-5 vertices while keeping the mesh all-quad
    and planar.
    """
    mesh = open_grid(nx, ny, height=height)
    i, j = at

    def vid(ii, jj):
        return jj * (nx + 1) + ii

    # faces (i,j) and (i+1,j) share the vertical edge (i+1, j)-(i+1, j+1)
    f1 = [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
    f2 = [vid(i + 1, j), vid(i + 2, j), vid(i + 2, j + 1), vid(i + 1, j + 1)]
    faces = [list(f) for f in mesh.faces]
    idx1 = faces.index(f1)
    idx2 = faces.index(f2)
    # hexagon (i,j),(i+1,j),(i+2,j),(i+2,j+1),(i+1,j+1),(i,j+1); re-split
    # along the other medium diagonal
    faces[idx1] = [vid(i + 2, j), vid(i + 2, j + 1), vid(i + 1, j + 1),
                   vid(i, j + 1)]
    faces[idx2] = [vid(i, j + 1), vid(i, j), vid(i + 1, j), vid(i + 2, j)]
    return QuadMesh(mesh.vertices, faces)


def torus_with_rotated_edge(n=10, m=10, at=(4, 4)):
    mesh = torus_grid(n, m)
    i, j = at

    def vid(ii, jj):
        return (ii % n) * m + (jj % m)

    f1 = [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
    f2 = [vid(i + 1, j), vid(i + 2, j), vid(i + 2, j + 1), vid(i + 1, j + 1)]
    faces = [list(f) for f in mesh.faces]
    idx1 = faces.index(f1)
    idx2 = faces.index(f2)
    faces[idx1] = [vid(i + 2, j), vid(i + 2, j + 1), vid(i + 1, j + 1),
                   vid(i, j + 1)]
    faces[idx2] = [vid(i, j + 1), vid(i, j), vid(i + 1, j), vid(i + 2, j)]
    return QuadMesh(mesh.vertices, faces)


def jittered_torus(n=12, m=8, strength=0.55, seed=7):
    """Torus grid with per-vertex angular jitter: every section polyline is
    unevenly spaced in its own way, so ribbon-averaged parameters are poor."""
    rng = np.random.default_rng(seed)
    verts = []
    base_t = 2 * np.pi * np.arange(n) / n
    base_p = 2 * np.pi * np.arange(m) / m
    step_t = 2 * np.pi / n
    for i in range(n):
        for j in range(m):
            th = base_t[i] + strength * step_t * rng.uniform(-0.5, 0.5)
            verts.append(torus_point(th, base_p[j]))
    faces = []
    for i in range(n):
        for j in range(m):
            faces.append([i * m + j,
                          ((i + 1) % n) * m + j,
                          ((i + 1) % n) * m + (j + 1) % m,
                          i * m + (j + 1) % m])
    return QuadMesh(verts, faces)


def subdivide_quads(mesh):
    """One round of linear quad subdivision (midpoints + centroids)."""
    verts = [p.copy() for p in mesh.vertices]
    mid = {}

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in mid:
            verts.append(0.5 * (mesh.vertices[a] + mesh.vertices[b]))
            mid[key] = len(verts) - 1
        return mid[key]

    faces = []
    for quad in mesh.faces:
        a, b, c, d = (int(v) for v in quad)
        ab, bc, cd, da = (midpoint(a, b), midpoint(b, c),
                          midpoint(c, d), midpoint(d, a))
        verts.append(0.25 * (mesh.vertices[a] + mesh.vertices[b]
                             + mesh.vertices[c] + mesh.vertices[d]))
        m = len(verts) - 1
        faces += [[a, ab, m, da], [ab, b, bc, m],
                  [m, bc, c, cd], [da, m, cd, d]]
    return QuadMesh(np.asarray(verts), faces)


def sphere_mesh(rounds=2):
    """Cube subdivided and projected to the unit sphere: eight isolated
    valence-3 vertices, everything else regular."""
    mesh = cube_mesh()
    mesh.vertices[:] = mesh.vertices - 0.5
    for _ in range(rounds):
        mesh = subdivide_quads(mesh)
    lengths = np.linalg.norm(mesh.vertices, axis=1, keepdims=True)
    mesh.vertices[:] = mesh.vertices / lengths
    return mesh


# closed convex polyline with one long edge among short ones: uniform
# parametrization wiggles, centripetal does not
FIG1_POLYLINE = np.array([
    [0, 0], [1, 0], [2, 0], [3, 0], [4, 0], [10, 3],
    [4, 6], [3, 6], [2, 6], [1, 6], [0, 6], [-6, 3]], dtype=float)


@pytest.fixture
def torus():
    mesh = torus_grid(8, 8)
    mesh.build_connectivity()
    return mesh


@pytest.fixture
def cube():
    mesh = cube_mesh()
    mesh.build_connectivity()
    return mesh
