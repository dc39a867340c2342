import numpy as np
import pytest

from kkmembrane.errors import DimensionError, InvalidGeometryError
from kkmembrane.mesh import build_interval_mesh, build_rect_mesh, membrane_traces


def test_interval_four_four():
    m = build_interval_mesh(1.0, 1.0, 4, 4)
    assert m.n_cells == 8
    assert m.face_cells[m.membrane_faces].tolist() == [[3, 4]]
    np.testing.assert_allclose(m.centers[:, 0], 0.125 + 0.25 * np.arange(8))


def test_interval_unequal_lengths():
    m = build_interval_mesh(1.0, 2.0, 2, 4)
    assert m.n_cells == 6
    np.testing.assert_allclose(m.volumes, 0.5)
    assert m.total_volume == pytest.approx(3.0, rel=1e-12)


def test_interval_volume_sum():
    m = build_interval_mesh(1.0, 1.0, 100, 100)
    assert abs(m.total_volume - 2.0) <= 1e-12 * 2.0


def test_interval_walls():
    m = build_interval_mesh(1.0, 1.0, 4, 4)
    assert m.wall_center[:, 0].tolist() == [0.0, 2.0]
    assert m.wall_side.tolist() == [1, 2]
    np.testing.assert_allclose(m.wall_dist, 0.125)


@pytest.mark.parametrize("args", [(0.0, 1.0, 4, 4), (1.0, -1.0, 4, 4), (1.0, 1.0, 1, 4),
                                  (1.0, 1.0, 4, 1)])
def test_interval_invalid(args):
    with pytest.raises(InvalidGeometryError):
        build_interval_mesh(*args)


def test_rect_counts():
    m = build_rect_mesh(1, 1, 1, 2, 2, 2)
    assert m.n_cells == 8
    assert m.membrane_faces.size == 2
    assert m.wall_cell.size == 12


def test_rect_volume():
    m = build_rect_mesh(1, 1, 1, 4, 4, 4)
    assert abs(m.total_volume - 2.0) <= 1e-12 * 2.0


def test_rect_membrane_orientation():
    m = build_rect_mesh(2, 1, 1, 4, 2, 2)
    mem = m.membrane_faces
    np.testing.assert_allclose(m.face_center[mem, 0], 2.0)
    assert np.all(m.subdomain[m.face_cells[mem, 0]] == 1)
    assert np.all(m.subdomain[m.face_cells[mem, 1]] == 2)
    assert np.all(m.centers[m.face_cells[mem, 0], 0] < 2.0)


def test_rect_invalid():
    with pytest.raises(InvalidGeometryError):
        build_rect_mesh(1, 1, 0, 2, 2, 2)
    with pytest.raises(InvalidGeometryError):
        build_rect_mesh(1, 1, 1, 2, 2, 1)


def test_rect_refinement_doubles_membrane():
    a = build_rect_mesh(1, 1, 1, 4, 4, 4)
    b = build_rect_mesh(1, 1, 1, 8, 8, 8)
    assert b.membrane_faces.size == 2 * a.membrane_faces.size
    assert b.total_volume == pytest.approx(a.total_volume, rel=1e-12)


def test_faces_unique_and_typed():
    m = build_rect_mesh(1, 1, 1, 3, 3, 3)
    pairs = np.sort(m.face_cells, axis=1)
    assert np.unique(pairs, axis=0).shape[0] == pairs.shape[0]
    same = m.subdomain[m.face_cells[:, 0]] == m.subdomain[m.face_cells[:, 1]]
    assert np.all(same != m.face_membrane)


def test_mesh_is_read_only():
    m = build_interval_mesh(1, 1, 2, 2)
    with pytest.raises(ValueError):
        m.volumes[0] = 3.0


def test_traces_constant():
    m = build_rect_mesh(1, 1, 1, 3, 3, 3)
    tr = membrane_traces(m, np.full(m.n_cells, 2.5))
    np.testing.assert_array_equal(tr, 2.5)


def test_traces_indicator():
    m = build_interval_mesh(1, 1, 4, 4)
    tr = membrane_traces(m, (m.subdomain == 2).astype(float))
    assert tr.tolist() == [[0.0, 1.0]]


def test_traces_dimension_error():
    m = build_interval_mesh(1, 1, 4, 4)
    with pytest.raises(DimensionError):
        membrane_traces(m, np.zeros(7))
