import numpy as np
import pytest

from rgdist import (
    AdmmSettings,
    build_ops,
    circle_dirichlet_exact,
    circle_hessian_exact,
    circle_metric_check,
    dirichlet_matrix,
    disk_exact,
    external_matrix,
    jittered_mesh,
    mesh_diameter,
    rect_mesh,
    reference_solve,
    ring_ops,
    solve_fixed_source,
    solve_ring_1d,
    vfa_matrix,
)
from rgdist.regularizers import LineField

TWO_PI = 2.0 * np.pi


class TestCircleDirichletFormula:
    def test_value_at_antipode(self):
        assert circle_dirichlet_exact(np.pi, 0.5) == pytest.approx(np.pi - 0.25, abs=1e-12)

    def test_continuity_at_interfaces(self):
        for alpha in (0.3, 0.5, 1.0):
            L = np.pi - alpha
            for x in (L, TWO_PI - L):
                left = circle_dirichlet_exact(x - 1e-9, alpha)
                right = circle_dirichlet_exact(x + 1e-9, alpha)
                assert left == pytest.approx(right, abs=1e-7)

    def test_saturates_above_pi(self):
        x = np.linspace(0, TWO_PI, 50)
        assert np.allclose(
            circle_dirichlet_exact(x, 5.0), circle_dirichlet_exact(x, np.pi), atol=1e-12
        )

    def test_obstacle_characterization(self):
        # u <= distance everywhere; alpha*u'' + 1 = 0 strictly inside the cap
        alpha = 0.4
        x = np.linspace(0.0, TWO_PI, 2001)[1:-1]
        u = circle_dirichlet_exact(x, alpha)
        d = np.minimum(x, TWO_PI - x)
        assert (u <= d + 1e-12).all()
        L = np.pi - alpha
        inside = (x > L + 0.05) & (x < TWO_PI - L - 0.05)
        h = x[1] - x[0]
        upp = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
        assert np.abs(alpha * upp[inside[1:-1]] + 1.0).max() < 1e-6

    def test_alpha_must_be_positive(self):
        with pytest.raises(ValueError):
            circle_dirichlet_exact(1.0, 0.0)


class TestCircleHessianFormula:
    def test_value_at_antipode(self):
        # c = 1 at alpha = 1/3; u(pi) = pi - 3c/8
        assert circle_hessian_exact(np.pi, 1.0 / 3.0) == pytest.approx(np.pi - 0.375, abs=1e-12)

    def test_continuity_at_interfaces(self):
        alpha = 1.0 / 3.0
        c = 1.0
        for x in (np.pi - c, np.pi + c):
            left = circle_hessian_exact(x - 1e-9, alpha)
            right = circle_hessian_exact(x + 1e-9, alpha)
            assert left == pytest.approx(right, abs=1e-7)
        assert circle_hessian_exact(np.pi - c, alpha) == pytest.approx(np.pi - c, abs=1e-9)

    def test_symmetric_about_antipode(self):
        alpha = 1.0 / 3.0
        eps = 1e-5
        d = circle_hessian_exact(np.pi + eps, alpha) - circle_hessian_exact(np.pi - eps, alpha)
        assert abs(d) < 1e-12  # even about pi, so derivative vanishes there

    def test_invalid_regime_rejected(self):
        with pytest.raises(ValueError, match="c < pi"):
            circle_hessian_exact(1.0, 50.0)


class TestDiskFormula:
    def test_center_value(self):
        assert disk_exact(0.0, 0.1) == pytest.approx(0.9, abs=1e-15)

    def test_interface_continuity(self):
        assert disk_exact(0.2, 0.1) == pytest.approx(0.8, abs=1e-12)

    def test_boundary_zero(self):
        assert disk_exact(1.0, 0.1) == pytest.approx(0.0, abs=1e-15)

    def test_gradient_bound(self):
        r = np.linspace(0.0, 1.0, 2001)
        u = disk_exact(r, 0.15)
        g = np.abs(np.diff(u) / np.diff(r))
        assert g.max() <= 1.0 + 1e-9
        outside = r[:-1] >= 2 * 0.15 + 1e-3
        assert np.abs(g[outside] - 1.0).max() < 1e-9

    def test_invalid_regime(self):
        with pytest.raises(ValueError, match="2\\*alpha"):
            disk_exact(0.5, 0.6)


class TestCircleMetric:
    def test_no_violations_small_alpha(self):
        assert circle_metric_check(0.5, 200) <= 1e-12

    def test_no_violations_saturated(self):
        assert circle_metric_check(5.0, 200) <= 1e-12

    def test_degenerate_triplets_tight(self):
        # x = y = z contributes exactly 0, so the max is >= 0
        assert circle_metric_check(0.7, 64) >= -1e-15


class TestRingOps:
    def test_operator_identities(self):
        ops = ring_ops(64)
        n = 64
        assert ops.block_size == 1
        assert np.abs(ops.laplacian @ np.ones(n)).max() < 1e-12
        prod = (ops.div @ ops.grad).toarray()
        assert np.abs(prod - ops.laplacian.toarray()).max() < 1e-10
        rng = np.random.default_rng(0)
        u = rng.standard_normal(n)
        quad = u @ (ops.laplacian @ u)
        face = (ops.face_areas * (ops.grad @ u) ** 2).sum()
        assert quad == pytest.approx(face, rel=1e-10)
        assert ops.total_area == pytest.approx(TWO_PI)

    def test_minimum_size(self):
        with pytest.raises(ValueError):
            ring_ops(8)


class TestRingSolver:
    def test_dirichlet_matches_formula(self):
        N = 500
        res = solve_ring_1d(N, 0.5, "dirichlet")
        x = TWO_PI * np.arange(N) / N
        err = np.abs(res.u - circle_dirichlet_exact(x, 0.5)).max()
        assert res.converged
        assert err <= 0.01
        assert res.u[0] == 0.0

    def test_unregularized_matches_ring_distance(self):
        N = 256
        res = solve_ring_1d(N, 0.0, "dirichlet")
        x = TWO_PI * np.arange(N) / N
        d = np.minimum(x, TWO_PI - x)
        h = TWO_PI / N
        assert np.abs(res.u - d).max() <= 2 * h

    def test_alpha_zero_via_raw(self):
        res = solve_ring_1d(64, 0.0, "dirichlet")
        assert res.alpha == 0.0

    def test_bilaplacian_matches_quartic(self):
        N = 500
        alpha = 1.0 / 3.0
        res = solve_ring_1d(N, alpha, "bilaplacian")
        x = TWO_PI * np.arange(N) / N
        err = np.abs(res.u - circle_hessian_exact(x, alpha)).max()
        assert res.converged
        assert err <= 0.02
        assert abs(res.u[N // 2] - (np.pi - 0.375)) <= 1e-2

    def test_shifted_source(self):
        N = 128
        res = solve_ring_1d(N, 0.5, "dirichlet", source=32)
        x = TWO_PI * np.arange(N) / N
        expected = circle_dirichlet_exact(x - x[32], 0.5)
        assert np.abs(res.u - expected).max() <= 0.02
        assert res.u[32] == 0.0

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            solve_ring_1d(64, 0.5, "hessian-ish")

    def test_refinement_decreases_error(self):
        # free-boundary/grid alignment makes the decay stepwise, not
        # monotone at every doubling; this alpha wraps at both doublings
        alpha = 0.4624
        errs = []
        for N in (125, 250, 500):
            res = solve_ring_1d(N, alpha, "dirichlet")
            x = TWO_PI * np.arange(N) / N
            errs.append(np.abs(res.u - circle_dirichlet_exact(x, alpha)).max())
        assert errs[1] <= 0.6 * errs[0]
        assert errs[2] <= 0.6 * errs[1]


class TestReferenceSolver:
    def make_field(self, mesh, d=np.array([1.0, 0.3, 0.0])):
        nr = mesh.face_normals_raw()
        nr = nr / np.linalg.norm(nr, axis=1)[:, None]
        t = d[None, :] - (nr @ d)[:, None] * nr
        t /= np.linalg.norm(t, axis=1)[:, None]
        return LineField(t)

    def test_agrees_with_admm_on_random_meshes(self):
        rng_seeds = [0, 1, 2]
        for seed in rng_seeds:
            mesh = jittered_mesh(
                8, 8, seed=seed, height_fn=lambda x, y: 0.2 * np.sin(2 * x + 1) * np.cos(y)
            )
            ops = build_ops(mesh)
            diam = mesh_diameter(mesh)
            for kind in ("dirichlet", "vfa"):
                for ah in (0.0, 0.05):
                    if kind == "vfa":
                        W = vfa_matrix(ops, self.make_field(mesh), 5.0)
                    else:
                        W = dirichlet_matrix(ops)
                    s = AdmmSettings(alpha_hat=ah, eps_abs=1e-10, eps_rel=1e-6, max_iter=60000)
                    admm = solve_fixed_source(mesh, ops, W, [0], s)
                    ref = reference_solve(mesh, ops, W, [0], admm.alpha, tol=1e-6)
                    assert np.abs(admm.u - ref.u).max() <= 1e-4 * diam

    def test_zero_external_matrix_matches_unregularized(self, tmp_path):
        mesh = jittered_mesh(6, 6, seed=9)
        ops = build_ops(mesh)
        p = tmp_path / "zero.txt"
        p.write_text("")
        W0 = external_matrix(p, mesh.num_vertices)
        s = AdmmSettings(alpha_hat=0.0, eps_abs=1e-10, eps_rel=1e-6, max_iter=60000)
        base = solve_fixed_source(mesh, ops, None, [0], s)
        # raw alpha > 0 with W = 0 is the same problem as alpha = 0
        s_raw = AdmmSettings(alpha_raw=0.5, eps_abs=1e-10, eps_rel=1e-6, max_iter=60000)
        viaW = solve_fixed_source(mesh, ops, W0, [0], s_raw)
        assert np.abs(base.u - viaW.u).max() <= 1e-5 * mesh_diameter(mesh)

    def test_path_strip_distances(self):
        # thin strip of right triangles: distances along the strip are
        # near-exact chain distances
        mesh = rect_mesh(20, 1, 10.0, 0.5)
        ops = build_ops(mesh)
        ref = reference_solve(mesh, ops, None, [0], 0.0, tol=1e-7)
        x = mesh.vertices[:, 0]
        y = mesh.vertices[:, 1]
        expected = np.sqrt(x**2 + y**2 * 0)  # distance dominated by x along the strip
        h = 0.5
        corner = np.hypot(x, y)
        assert (ref.u <= corner + 1e-6).all()
        assert np.abs(ref.u - corner).max() <= 2 * h

    def test_size_cap(self):
        mesh = jittered_mesh(25, 25, seed=0)
        ops = build_ops(mesh)
        with pytest.raises(ValueError, match="n <= 500"):
            reference_solve(mesh, ops, None, [0], 0.0)
