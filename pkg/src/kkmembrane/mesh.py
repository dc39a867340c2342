"""Structured cell grids split by a flat interior membrane.

Two geometries are supported: an interval ``(0, L1) | (L1, L1 + L2)`` and
a rectangle ``(0, L1 + L2) x (0, H)`` cut by the vertical line ``x = L1``.
Cells of the left part (subdomain 1) are numbered first, then cells of the
right part (subdomain 2); in 2D each block is row-major (``j * nx + i``).
Every outer boundary face carries a homogeneous Dirichlet condition.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidGeometryError

VOLUME_RTOL = 1e-12


def _frozen(a, dtype=float):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class MembraneMesh:
    """Cell-centred grid on a domain with one interior membrane.

    Faces are stored as flat arrays. ``face_cells[f] = (a, b)``; for a
    membrane face ``a`` lies in subdomain 1 and ``b`` in subdomain 2.
    ``face_half[f]`` holds the distances from the centres of ``a`` and ``b``
    to the face. Dirichlet (wall) faces carry their owning cell and the
    half-distance from that cell centre to the wall.
    """

    dim: int
    centers: np.ndarray
    volumes: np.ndarray
    subdomain: np.ndarray
    face_cells: np.ndarray
    face_area: np.ndarray
    face_half: np.ndarray
    face_center: np.ndarray
    face_membrane: np.ndarray
    wall_cell: np.ndarray
    wall_area: np.ndarray
    wall_dist: np.ndarray
    wall_side: np.ndarray
    wall_center: np.ndarray
    lengths: tuple
    shape: tuple

    @property
    def n_cells(self):
        return self.volumes.size

    @property
    def face_dist(self):
        return self.face_half.sum(axis=1)

    @property
    def membrane_faces(self):
        return np.flatnonzero(self.face_membrane)

    @property
    def interior_faces(self):
        """Indices of faces that join two cells of the same subdomain."""
        return np.flatnonzero(~self.face_membrane)

    @property
    def total_volume(self):
        return float(self.volumes.sum())

    def side_mask(self, side):
        return self.subdomain == side

    def check_field(self, field):
        field = np.asarray(field, dtype=float)
        if field.shape[-1] != self.n_cells:
            raise DimensionError(
                f"field has {field.shape[-1]} values, mesh has {self.n_cells} cells")
        return field

    def validate(self):
        """Assert the structural invariants; raises InvalidGeometryError."""
        a, b = self.face_cells[:, 0], self.face_cells[:, 1]
        same = self.subdomain[a] == self.subdomain[b]
        if np.any(same == self.face_membrane):
            raise InvalidGeometryError("face is neither intra-subdomain nor membrane")
        mem = self.face_membrane
        if not mem.any():
            raise InvalidGeometryError("no membrane faces")
        if np.any(self.subdomain[a[mem]] != 1) or np.any(self.subdomain[b[mem]] != 2):
            raise InvalidGeometryError("membrane face orientation broken")
        for side in (1, 2):
            if not np.any(self.wall_side == side):
                raise InvalidGeometryError(f"no Dirichlet faces on outer boundary {side}")
        pairs = np.sort(self.face_cells, axis=1)
        if np.unique(pairs, axis=0).shape[0] != pairs.shape[0]:
            raise InvalidGeometryError("duplicate interior face")
        expected = self.lengths[0] + self.lengths[1]
        if self.dim == 2:
            expected *= self.lengths[2]
        if abs(self.total_volume - expected) > VOLUME_RTOL * expected:
            raise InvalidGeometryError("cell volumes do not add up to |Omega1| + |Omega2|")
        return self


def _check_dims(lengths, counts):
    if any(not np.isfinite(x) or x <= 0 for x in lengths):
        raise InvalidGeometryError(f"lengths must be positive, got {lengths}")
    if any(int(n) != n or n < 2 for n in counts):
        raise InvalidGeometryError(f"cell counts must be integers >= 2, got {counts}")


def build_interval_mesh(length1, length2, n1, n2):
    """Uniform 1D mesh of ``(0, length1) | (length1, length1 + length2)``.

    >>> m = build_interval_mesh(1.0, 1.0, 4, 4)
    >>> m.n_cells, m.face_cells[m.membrane_faces].tolist()
    (8, [[3, 4]])
    """
    _check_dims((length1, length2), (n1, n2))
    n1, n2 = int(n1), int(n2)
    h1, h2 = length1 / n1, length2 / n2
    x1 = (np.arange(n1) + 0.5) * h1
    x2 = length1 + (np.arange(n2) + 0.5) * h2
    n = n1 + n2
    centers = np.concatenate([x1, x2])[:, None]
    volumes = np.concatenate([np.full(n1, h1), np.full(n2, h2)])
    subdomain = np.concatenate([np.ones(n1, int), np.full(n2, 2)])

    left = np.arange(n - 1)
    cells = np.stack([left, left + 1], axis=1)
    half = np.stack([volumes[left] / 2, volumes[left + 1] / 2], axis=1)
    face_x = np.concatenate([np.arange(1, n1 + 1) * h1, length1 + np.arange(1, n2) * h2])
    membrane = np.zeros(n - 1, bool)
    membrane[n1 - 1] = True

    return MembraneMesh(
        dim=1,
        centers=_frozen(centers),
        volumes=_frozen(volumes),
        subdomain=_frozen(subdomain, int),
        face_cells=_frozen(cells, int),
        face_area=_frozen(np.ones(n - 1)),
        face_half=_frozen(half),
        face_center=_frozen(face_x[:, None]),
        face_membrane=_frozen(membrane, bool),
        wall_cell=_frozen([0, n - 1], int),
        wall_area=_frozen([1.0, 1.0]),
        wall_dist=_frozen([h1 / 2, h2 / 2]),
        wall_side=_frozen([1, 2], int),
        wall_center=_frozen([[0.0], [length1 + length2]]),
        lengths=(float(length1), float(length2)),
        shape=(n1, n2),
    ).validate()


def build_rect_mesh(length1, length2, height, n1, n2, ny):
    """Uniform 2D mesh of ``(0, length1 + length2) x (0, height)`` with the
    membrane on ``x = length1``.

    The outer boundary is entirely Dirichlet; bottom/top wall faces are
    attributed to the subdomain of their owning cell.
    """
    _check_dims((length1, length2, height), (n1, n2, ny))
    n1, n2, ny = int(n1), int(n2), int(ny)
    dy = height / ny
    blocks = [(n1, length1 / n1, 0.0, 1, 0), (n2, length2 / n2, length1, 2, n1 * ny)]

    centers, volumes, subdomain = [], [], []
    cells, area, half, fcenter, membrane = [], [], [], [], []
    wcell, warea, wdist, wside, wcenter = [], [], [], [], []

    def idx(block, i, j):
        nx, _, _, _, off = block
        return off + j * nx + i

    for block in blocks:
        nx, dx, x0, side, _ = block
        ii, jj = np.meshgrid(np.arange(nx), np.arange(ny))
        ii, jj = ii.ravel(), jj.ravel()
        centers.append(np.stack([x0 + (ii + 0.5) * dx, (jj + 0.5) * dy], axis=1))
        volumes.append(np.full(ii.size, dx * dy))
        subdomain.append(np.full(ii.size, side))
        for j in range(ny):
            yc = (j + 0.5) * dy
            for i in range(nx - 1):
                cells.append((idx(block, i, j), idx(block, i + 1, j)))
                area.append(dy)
                half.append((dx / 2, dx / 2))
                fcenter.append((x0 + (i + 1) * dx, yc))
                membrane.append(False)
        for j in range(ny - 1):
            for i in range(nx):
                cells.append((idx(block, i, j), idx(block, i, j + 1)))
                area.append(dx)
                half.append((dy / 2, dy / 2))
                fcenter.append((x0 + (i + 0.5) * dx, (j + 1) * dy))
                membrane.append(False)
        for i in range(nx):
            xc = x0 + (i + 0.5) * dx
            for j, yw in ((0, 0.0), (ny - 1, height)):
                wcell.append(idx(block, i, j))
                warea.append(dx)
                wdist.append(dy / 2)
                wside.append(side)
                wcenter.append((xc, yw))

    b1, b2 = blocks
    for j in range(ny):
        yc = (j + 0.5) * dy
        cells.append((idx(b1, n1 - 1, j), idx(b2, 0, j)))
        area.append(dy)
        half.append((b1[1] / 2, b2[1] / 2))
        fcenter.append((length1, yc))
        membrane.append(True)
        for block, i, xw in ((b1, 0, 0.0), (b2, n2 - 1, length1 + length2)):
            wcell.append(idx(block, i, j))
            warea.append(dy)
            wdist.append(block[1] / 2)
            wside.append(block[3])
            wcenter.append((xw, yc))

    return MembraneMesh(
        dim=2,
        centers=_frozen(np.concatenate(centers)),
        volumes=_frozen(np.concatenate(volumes)),
        subdomain=_frozen(np.concatenate(subdomain), int),
        face_cells=_frozen(cells, int),
        face_area=_frozen(area),
        face_half=_frozen(half),
        face_center=_frozen(fcenter),
        face_membrane=_frozen(membrane, bool),
        wall_cell=_frozen(wcell, int),
        wall_area=_frozen(warea),
        wall_dist=_frozen(wdist),
        wall_side=_frozen(wside, int),
        wall_center=_frozen(wcenter),
        lengths=(float(length1), float(length2), float(height)),
        shape=(n1, n2, ny),
    ).validate()


def membrane_traces(mesh, field, operator=None):
    """One-sided values of ``field`` on every membrane face.

    Without ``operator`` the trace on each side is the adjacent cell value
    (first order). With an assembled operator the trace is extrapolated from
    the cell centre along the discrete membrane flux, which is exact for
    piecewise-linear profiles and makes the jump equal to ``-flux / kappa``.

    Returns an array of shape ``(n_membrane_faces, 2)``; column 0 is the
    subdomain-1 side, column 1 the subdomain-2 side.
    """
    field = mesh.check_field(field)
    if field.ndim != 1:
        raise DimensionError("membrane_traces expects a single scalar field")
    mem = mesh.membrane_faces
    a, b = mesh.face_cells[mem, 0], mesh.face_cells[mem, 1]
    ua, ub = field[a], field[b]
    if operator is None:
        return np.stack([ua, ub], axis=1)
    d1, d2 = operator.side_diffusion
    q = operator.membrane_conductance / mesh.face_area[mem] * (ua - ub)
    t1 = ua - q * mesh.face_half[mem, 0] / d1
    t2 = ub + q * mesh.face_half[mem, 1] / d2
    return np.stack([t1, t2], axis=1)
