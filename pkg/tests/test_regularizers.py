import numpy as np
import pytest

from rgdist import (
    LineField,
    TriMesh,
    bilaplacian_matrix,
    build_ops,
    dirichlet_matrix,
    external_matrix,
    interpolate_line_field,
    localize_field,
    mesh_scale,
    vfa_matrix,
)
from rgdist.meshgen import disk_mesh, rect_mesh
from rgdist.regularizers import read_constraints


def random_rotation(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((3, 3))
    Q, _ = np.linalg.qr(A)
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    return Q


def projected_field(mesh, direction):
    nr = mesh.face_normals_raw()
    nr = nr / np.linalg.norm(nr, axis=1)[:, None]
    d = np.asarray(direction, dtype=float)
    t = d[None, :] - (nr @ d)[:, None] * nr
    t /= np.linalg.norm(t, axis=1)[:, None]
    return LineField(t)


class TestDirichlet:
    def test_is_laplacian_bitwise(self, small_disk_ops):
        W = dirichlet_matrix(small_disk_ops)
        assert W.matrix is small_disk_ops.laplacian
        assert W.kind == "dirichlet"
        assert W.scale_exponent == 0.5

    def test_energy_matches_face_sum(self, small_disk_ops):
        rng = np.random.default_rng(0)
        u = rng.standard_normal(small_disk_ops.num_vertices)
        W = dirichlet_matrix(small_disk_ops)
        per_face = 0.5 * (small_disk_ops.face_areas * small_disk_ops.gradient_norms(u) ** 2).sum()
        assert W.energy(u) == pytest.approx(per_face, rel=1e-8)

    def test_constant_energy_zero(self, small_disk_ops):
        W = dirichlet_matrix(small_disk_ops)
        assert abs(W.energy(np.full(small_disk_ops.num_vertices, 4.2))) < 1e-10


class TestVfa:
    def test_beta_zero_equals_dirichlet(self, strip_ops, strip):
        V = projected_field(strip, [1.0, 0.0, 0.0])
        Wv = vfa_matrix(strip_ops, V, 0.0)
        Wd = dirichlet_matrix(strip_ops)
        assert (Wv.matrix != Wd.matrix).nnz == 0

    def test_aligned_energy_on_single_triangle(self):
        mesh = TriMesh(np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0]]), [[0, 1, 2]])
        ops = build_ops(mesh)
        V = LineField(np.array([[1.0, 0.0, 0.0]]))
        area = ops.face_areas[0]
        u = mesh.vertices[:, 0]  # gradient (1,0,0), aligned with V
        W = vfa_matrix(ops, V, 1.0)
        assert 0.5 * u @ (W.matrix @ u) == pytest.approx(area * (1 + 1) * 0.5, rel=1e-12)

    def test_perpendicular_energy_unchanged(self):
        mesh = TriMesh(np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0]]), [[0, 1, 2]])
        ops = build_ops(mesh)
        V = LineField(np.array([[1.0, 0.0, 0.0]]))
        area = ops.face_areas[0]
        u = mesh.vertices[:, 1]  # gradient (0,1,0), perpendicular to V
        W = vfa_matrix(ops, V, 1.0)
        assert 0.5 * u @ (W.matrix @ u) == pytest.approx(area * 0.5, rel=1e-12)

    def test_monotone_in_beta(self, bumpy_square):
        ops = build_ops(bumpy_square)
        V = projected_field(bumpy_square, [0.6, 0.8, 0.1])
        rng = np.random.default_rng(3)
        u = rng.standard_normal(ops.num_vertices)
        energies = [
            u @ (vfa_matrix(ops, V, b).matrix @ u) for b in (0.0, 0.5, 2.0, 10.0)
        ]
        assert all(b >= a - 1e-10 for a, b in zip(energies, energies[1:]))

    def test_negative_beta_rejected(self, strip_ops, strip):
        with pytest.raises(ValueError):
            vfa_matrix(strip_ops, projected_field(strip, [1, 0, 0]), -1.0)

    def test_field_size_mismatch(self, strip_ops):
        with pytest.raises(ValueError, match="faces"):
            vfa_matrix(strip_ops, LineField(np.ones((3, 3))), 1.0)


class TestBilaplacian:
    def test_constant_in_kernel(self, small_disk_ops):
        W = bilaplacian_matrix(small_disk_ops)
        c = np.full(small_disk_ops.num_vertices, 2.5)
        scale = abs(W.matrix).max()
        assert np.abs(W.matrix @ c).max() <= 1e-8 * scale

    def test_psd(self, small_disk_ops):
        W = bilaplacian_matrix(small_disk_ops)
        rng = np.random.default_rng(1)
        for _ in range(5):
            x = rng.standard_normal(small_disk_ops.num_vertices)
            assert x @ (W.matrix @ x) >= -1e-10 * (x @ x) * abs(W.matrix).max()

    def test_scale_rule_exponent(self, small_disk_ops):
        assert bilaplacian_matrix(small_disk_ops).scale_exponent == 1.5

    def test_linear_interior_rows_vanish_under_refinement(self):
        # bilaplacian of a linear function is 0; interior residual shrinks
        res = []
        for cells in (8, 16):
            mesh = rect_mesh(cells, cells, 1.0, 1.0)
            ops = build_ops(mesh)
            W = bilaplacian_matrix(ops)
            u = mesh.vertices[:, 0] + 0.5 * mesh.vertices[:, 1]
            r = np.abs(W.matrix @ u)
            interior = (
                (mesh.vertices[:, 0] > 0.26)
                & (mesh.vertices[:, 0] < 0.74)
                & (mesh.vertices[:, 1] > 0.26)
                & (mesh.vertices[:, 1] < 0.74)
            )
            res.append(r[interior].max())
        assert res[0] < 1e-10
        assert res[1] < 1e-10


class TestExternal:
    def test_round_trip_laplacian(self, tmp_path, small_disk_ops):
        L = small_disk_ops.laplacian.tocoo()
        p = tmp_path / "w.txt"
        with open(p, "w") as fh:
            for i, j, v in zip(L.row, L.col, L.data):
                fh.write(f"{i} {j} {float(v)!r}\n")
        W = external_matrix(p, small_disk_ops.num_vertices, scale_exponent=0.5)
        assert abs(W.matrix - small_disk_ops.laplacian).max() < 1e-12
        assert W.kind == "external"

    def test_empty_file_zero_matrix(self, tmp_path):
        p = tmp_path / "w.txt"
        p.write_text("")
        W = external_matrix(p, 10)
        assert W.matrix.shape == (10, 10)
        assert W.matrix.nnz == 0

    def test_dimension_error(self, tmp_path):
        p = tmp_path / "w.txt"
        p.write_text("0 10 1.0\n")
        with pytest.raises(ValueError, match="dimension"):
            external_matrix(p, 10)

    def test_asymmetry_rejected(self, tmp_path):
        p = tmp_path / "w.txt"
        p.write_text("0 1 1.0\n1 0 0.5\n")
        with pytest.raises(ValueError, match="asymmetry"):
            external_matrix(p, 3)

    def test_duplicates_summed(self, tmp_path):
        p = tmp_path / "w.txt"
        p.write_text("0 0 1.0\n0 0 2.0\n")
        W = external_matrix(p, 2)
        assert W.matrix[0, 0] == 3.0


class TestRigidMotionInvariance:
    def test_w_invariant_under_rotation(self, bumpy_square):
        mesh = bumpy_square
        ops = build_ops(mesh)
        Q = random_rotation(9)
        moved = TriMesh(mesh.vertices @ Q.T + np.array([0.3, -1.0, 2.0]), mesh.faces)
        mops = build_ops(moved)

        for build in (dirichlet_matrix, bilaplacian_matrix):
            Wa = build(ops).matrix
            Wb = build(mops).matrix
            assert abs(Wa - Wb).max() <= 1e-9 * abs(Wa).max()

        V = projected_field(mesh, [1.0, 0.2, 0.0])
        Va = LineField(V.vectors @ Q.T)  # rotate the field alongside
        Wa = vfa_matrix(ops, V, 3.0).matrix
        Wb = vfa_matrix(mops, Va, 3.0).matrix
        assert abs(Wa - Wb).max() <= 1e-9 * abs(Wa).max()

    def test_scaling_behavior(self, bumpy_square):
        s = 2.6
        base = build_ops(bumpy_square)
        scaled = build_ops(mesh_scale(bumpy_square, s))
        Wd_a = dirichlet_matrix(base).matrix
        Wd_b = dirichlet_matrix(scaled).matrix
        assert abs(Wd_b - Wd_a).max() <= 1e-10 * abs(Wd_a).max()
        Wb_a = bilaplacian_matrix(base).matrix
        Wb_b = bilaplacian_matrix(scaled).matrix
        assert abs(Wb_b - Wb_a / s**2).max() <= 1e-10 * abs(Wb_a / s**2).max()


class TestLineFieldInterpolation:
    def test_single_constraint_on_flat_disk(self):
        mesh = disk_mesh(6)
        ops = build_ops(mesh)
        field = interpolate_line_field(mesh, ops, [(0, np.array([1.0, 0.0, 0.0]))])
        field.validate_unit(mesh)
        # flat connection: the line stays (1, 0, 0) up to sign everywhere
        dots = np.abs(field.vectors @ np.array([1.0, 0.0, 0.0]))
        assert np.arccos(np.clip(dots, -1, 1)).max() < 1e-6

    def test_two_identical_constraints(self):
        mesh = disk_mesh(5)
        ops = build_ops(mesh)
        one = interpolate_line_field(mesh, ops, [(3, np.array([0.0, 1.0, 0.0]))])
        two = interpolate_line_field(
            mesh, ops, [(3, np.array([0.0, 1.0, 0.0])), (40, one.vectors[40])]
        )
        dots = np.abs((one.vectors * two.vectors).sum(axis=1))
        assert dots.min() > 1 - 1e-8

    def test_constrained_faces_reproduced(self, bumpy_square):
        mesh = bumpy_square
        ops = build_ops(mesh)
        constraints = [(10, np.array([1.0, 0.5, 0.2])), (100, np.array([0.0, 1.0, -0.1]))]
        field = interpolate_line_field(mesh, ops, constraints)
        for fidx, d in constraints:
            nr = mesh.face_normals_raw()[fidx]
            nr = nr / np.linalg.norm(nr)
            t = d - (d @ nr) * nr
            t /= np.linalg.norm(t)
            assert abs(field.vectors[fidx] @ t) > 1 - 1e-9

    def test_no_constraints_rejected(self, small_disk, small_disk_ops):
        with pytest.raises(ValueError, match="constraint"):
            interpolate_line_field(small_disk, small_disk_ops, [])

    def test_normal_direction_rejected(self, small_disk, small_disk_ops):
        with pytest.raises(ValueError, match="normal"):
            interpolate_line_field(small_disk, small_disk_ops, [(0, np.array([0.0, 0.0, 1.0]))])

    def test_zero_vector_rejected(self, small_disk, small_disk_ops):
        with pytest.raises(ValueError, match="zero"):
            interpolate_line_field(small_disk, small_disk_ops, [(0, np.zeros(3))])

    def test_read_constraints(self, tmp_path):
        p = tmp_path / "c.txt"
        p.write_text("# comment\n3 1.0 0.5 0.0\n\n7 0 1 0\n")
        cons = read_constraints(p)
        assert len(cons) == 2
        assert cons[0][0] == 3
        assert np.allclose(cons[1][1], [0, 1, 0])


class TestLocalize:
    def test_sigma_inf_leaves_field(self, small_disk, small_disk_ops):
        field = interpolate_line_field(small_disk, small_disk_ops, [(0, np.array([1.0, 0, 0]))])
        out = localize_field(small_disk, small_disk_ops, field, [0], sigma=1e12)
        assert np.abs(out.vectors - field.vectors).max() < 1e-10

    def test_gaussian_scaling_matches_distance(self, small_disk, small_disk_ops):
        from rgdist import AdmmSettings, solve_fixed_source

        field = interpolate_line_field(small_disk, small_disk_ops, [(0, np.array([1.0, 0, 0]))])
        sigma = 0.25
        out = localize_field(small_disk, small_disk_ops, field, [0], sigma=sigma)
        mags = np.linalg.norm(out.vectors, axis=1)
        # contract: scale is exp(-d_f^2 / 2 sigma^2) with d_f the face mean
        # of the unregularized vertex distances
        settings = AdmmSettings(alpha_hat=0.0, eps_abs=1e-8, eps_rel=1e-4, max_iter=50000)
        d = solve_fixed_source(small_disk, small_disk_ops, None, [0], settings).u
        d_face = d[small_disk.faces].mean(axis=1)
        expected = np.exp(-(d_face**2) / (2 * sigma**2))
        assert np.abs(mags - expected).max() < 1e-10
        # faces touching the center keep scale ~1; a face ~2 sigma out sits
        # near exp(-2) of the Euclidean radius (mesh-resolution slack)
        assert mags[0] > 0.9
        centers = small_disk.vertices[small_disk.faces].mean(axis=1)
        r = np.linalg.norm(centers[:, :2], axis=1)
        idx = int(np.argmin(np.abs(r - 2 * sigma)))
        assert np.exp(-2.0) / 2 < mags[idx] < np.exp(-2.0) * 2

    def test_empty_centers_rejected(self, small_disk, small_disk_ops):
        field = interpolate_line_field(small_disk, small_disk_ops, [(0, np.array([1.0, 0, 0]))])
        with pytest.raises(ValueError, match="centers"):
            localize_field(small_disk, small_disk_ops, field, [], sigma=0.5)

    def test_bad_sigma_rejected(self, small_disk, small_disk_ops):
        field = interpolate_line_field(small_disk, small_disk_ops, [(0, np.array([1.0, 0, 0]))])
        with pytest.raises(ValueError, match="sigma"):
            localize_field(small_disk, small_disk_ops, field, [0], sigma=0.0)
