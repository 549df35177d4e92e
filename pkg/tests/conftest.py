import numpy as np
import pytest

from rgdist import TriMesh, build_ops, disk_mesh, jittered_mesh, rect_mesh


@pytest.fixture(scope="session")
def unit_triangle():
    return TriMesh(
        np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, np.sqrt(3.0) / 2.0, 0.0]]),
        np.array([[0, 1, 2]]),
    )


@pytest.fixture(scope="session")
def small_disk():
    return disk_mesh(8)


@pytest.fixture(scope="session")
def small_disk_ops(small_disk):
    return build_ops(small_disk)


@pytest.fixture(scope="session")
def strip():
    return rect_mesh(16, 4, 4.0, 1.0)


@pytest.fixture(scope="session")
def strip_ops(strip):
    return build_ops(strip)


@pytest.fixture(scope="session")
def bumpy_square():
    return jittered_mesh(9, 9, seed=11, height_fn=lambda x, y: 0.3 * np.sin(2 * x) * np.cos(2 * y))


def make_obj(tmp_path, text, name="mesh.obj"):
    p = tmp_path / name
    p.write_text(text)
    return p


def write_obj(mesh, path):
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
    return path


def make_off(tmp_path, text, name="mesh.off"):
    p = tmp_path / name
    p.write_text(text)
    return p
