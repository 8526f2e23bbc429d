import numpy as np
import pytest

from polyan import heatmap
from polyan.errors import PreconditionViolation
from polyan.tools import harmonic
from polyan.tools.harmonic import GridField


def _pixels(data: bytes, header: bytes) -> np.ndarray:
    assert data.startswith(header)
    return np.frombuffer(data[len(header):], dtype=np.uint8).reshape(-1, 3)


def test_linear_gray_scale():
    data = heatmap.encode_ppm(np.array([[0.0, 1.0], [2.0, 3.0]]))
    px = _pixels(data, b"P6\n2 2\n255\n")
    assert list(px[:, 0]) == [0, 85, 170, 255]
    assert np.all(px == px[:, :1])


def test_constant_field_is_uniform():
    data = heatmap.encode_ppm(np.full((3, 5), 7.0 + 1j))
    px = _pixels(data, b"P6\n5 3\n255\n")
    assert np.all(px == px[0, 0])


def test_nan_nodes_are_black():
    gray = heatmap.grayscale(np.array([[np.nan, 1.0], [2.0, -4.0]]))
    assert gray[0, 0] == 0
    assert gray[1, 1] == 255


def test_empty_field_is_rejected():
    with pytest.raises(PreconditionViolation):
        heatmap.grayscale(np.full((2, 2), np.nan))


def test_heatmap_file(tmp_path):
    path = tmp_path / "map.ppm"
    heatmap.emit_heatmap(np.eye(4), path)
    assert path.read_bytes().startswith(b"P6\n4 4\n255\n")
    assert len(path.read_bytes()) == len(b"P6\n4 4\n255\n") + 4 * 4 * 3


def test_lattice_fields_put_the_highest_row_on_top(tmp_path):
    dom = harmonic.from_mask(np.ones((4, 3), dtype=bool), 1.0)
    F = GridField(dom, dom.Z.imag + 0j)
    path = tmp_path / "y.ppm"
    heatmap.emit_heatmap(F, path)
    header = b"P6\n3 4\n255\n"
    px = _pixels(path.read_bytes(), header).reshape(4, 3, 3)[..., 0]
    assert np.all(px[0] == 255)
    assert np.all(px[-1] == 0)
