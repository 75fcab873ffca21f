import numpy as np
import pytest

from steinerflow.exemplars import (
    ExemplarParams,
    default_flank_bump,
    eval_f,
    eval_grad_u,
    eval_u,
    gradient_bound,
    inner_boundary_gradient,
    inner_boundary_value,
    outer_boundary_gradient,
    perturbed_evaluators,
    sample,
    sample_perturbed,
    sample_shifted,
)
from steinerflow.validation import ValidationError

from oracles import exemplar_laplacian


@pytest.fixture(scope="module")
def params():
    return ExemplarParams()


class TestParams:
    def test_defaults_valid(self, params):
        assert params.p == 2.0 and params.s == 3.0 and params.dim == 2

    def test_rejects_close_centers(self):
        with pytest.raises(ValidationError):
            ExemplarParams(x1=(0.0, 0.0), x2=(1.0, 0.0))

    def test_rejects_degenerate_exponent(self):
        with pytest.raises(ValidationError):
            ExemplarParams(p=3.0, s=2.5)  # needs s > p/(p-2) = 3

    def test_ring_center_bound(self):
        with pytest.raises(ValidationError):
            ExemplarParams(variant="ring", x1=(3.0, 0.0))


class TestValues:
    def test_peak_value(self, params):
        assert eval_u(params, np.array(params.x1)) == pytest.approx(2.0, abs=1e-14)

    def test_boundary_values_and_gradient(self, params):
        x = np.array([6.0, 0.0])
        assert eval_u(params, x) == pytest.approx(0.0, abs=1e-14)
        g = eval_grad_u(params, x)
        assert np.linalg.norm(g) == pytest.approx(outer_boundary_gradient(params), abs=1e-12)
        assert outer_boundary_gradient(params) == pytest.approx(36.0 / 11.0)

    def test_ring_inner_boundary(self):
        ring = ExemplarParams(variant="ring", x1=(1.0, 0.5))
        x = np.array([1.5, 0.5])  # distance 1/2 from the bump center
        assert eval_u(ring, x) == pytest.approx(inner_boundary_value(ring), abs=1e-14)
        assert inner_boundary_value(ring) == pytest.approx(1.0 + 0.75**3)
        g = np.linalg.norm(eval_grad_u(ring, x))
        assert g == pytest.approx(inner_boundary_gradient(ring), abs=1e-12)
        assert inner_boundary_gradient(ring) == pytest.approx(3.0 * 0.75**2)

    def test_ring_range_bounds(self):
        ring = ExemplarParams(variant="ring", x1=(1.0, 0.5))
        u = sample(ring, 96)
        eta = ring.eta
        assert u.sup <= eta + 1e-14
        pts = u.points()
        hole = np.linalg.norm(pts - np.array([1.0, 0.5]), axis=-1) < 0.5
        interior = (u.values > 0) & ~hole
        assert u.values[interior].max() < eta
        assert np.all(u.values[hole] == eta)

    def test_plateau_value(self, params):
        for x in ([0.0, 4.2], [-4.0, 1.5]):
            assert eval_u(params, np.array(x)) == pytest.approx(1.0, abs=1e-14)


class TestGradients:
    def test_fd_match_away_from_interfaces(self, params):
        rng = np.random.default_rng(0)
        pts = rng.uniform(-6.3, 6.3, size=(4000, 2))
        r0 = np.linalg.norm(pts, axis=1)
        r1 = np.linalg.norm(pts - np.array(params.x1), axis=1)
        r2 = np.linalg.norm(pts - np.array(params.x2), axis=1)
        away = np.ones(len(pts), bool)
        for rr, R in [(r0, 5.0), (r0, 6.0), (r1, 1.0), (r2, 1.0)]:
            away &= np.abs(rr - R) > 0.05
        pts = pts[away]
        h = 1e-5
        exact = eval_grad_u(params, pts)
        for k in range(2):
            shift = np.zeros(2)
            shift[k] = h
            fd = (eval_u(params, pts + shift) - eval_u(params, pts - shift)) / (2 * h)
            assert np.abs(fd - exact[:, k]).max() < 5e-8

    def test_gradient_bound_is_sup(self, params):
        rng = np.random.default_rng(1)
        pts = rng.uniform(-6.5, 6.5, size=(200_000, 2))
        gn = np.linalg.norm(eval_grad_u(params, pts), axis=1)
        bound = gradient_bound(params)
        assert gn.max() <= bound + 1e-12
        assert gn.max() > 0.95 * bound


class TestSource:
    def test_branches_agree_at_one(self, params):
        assert eval_f(params, 1.0) == pytest.approx(0.0, abs=1e-14)
        # Continuity with the Hoelder-1/3 modulus from both sides.
        for eps in (1e-6, 1e-9, 1e-12):
            assert abs(eval_f(params, 1.0 - eps)) < 30.0 * eps ** (1.0 / 3.0)
            assert abs(eval_f(params, 1.0 + eps)) < 30.0 * eps ** (1.0 / 3.0)

    def test_value_at_zero(self, params):
        # direct substitution: (6/11) * (100/11 + 4 + N) with N = 2
        expect = (6.0 / 11.0) * (100.0 / 11.0 + 6.0)
        assert eval_f(params, 0.0) == pytest.approx(expect, abs=1e-12)
        assert expect == pytest.approx(996.0 / 121.0)

    def test_matches_laplacian_at_boundary_limit(self, params):
        # -lap(u) -> f(0+) as |x| -> 6 from inside.
        x = np.array([[5.999999, 0.0]])
        lap = exemplar_laplacian(params, x)[0]
        assert -lap == pytest.approx(eval_f(params, 0.0), rel=1e-4)

    def test_holder_exponent_near_one(self, params):
        deltas = np.array([1e-5, 1e-6, 1e-7, 1e-8])
        vals = np.abs(eval_f(params, 1.0 + deltas))
        slope = np.polyfit(np.log(deltas), np.log(vals), 1)[0]
        assert slope == pytest.approx(1.0 - 2.0 / params.s, abs=0.02)

    def test_rejects_out_of_range(self, params):
        with pytest.raises(ValidationError):
            eval_f(params, 2.5)

    def test_pde_identity_pointwise(self, params):
        # -lap u = f(u) exactly on both branches (p = 2).
        rng = np.random.default_rng(3)
        pts = rng.uniform(-6.2, 6.2, size=(5000, 2))
        u = eval_u(params, pts)
        inside = (u > 1e-9) & (u < 2.0)
        pts, u = pts[inside], u[inside]
        lap = exemplar_laplacian(params, pts)
        assert np.abs(-lap - eval_f(params, u)).max() < 5e-9


class TestSampling:
    def test_grid_max_near_two(self, params):
        u = sample(params, 64)
        assert u.sup == pytest.approx(2.0, abs=0.08)

    def test_boundary_cells_zero(self, params):
        u = sample(params, 48)
        assert u.values[0].max() == 0.0 and u.values[-1].max() == 0.0
        assert u.values[:, 0].max() == 0.0 and u.values[:, -1].max() == 0.0

    def test_refinement_halves_probe_error(self, params):
        rng = np.random.default_rng(2)
        probes = rng.uniform(-6.0, 6.0, size=(4000, 2))
        exact = eval_u(params, probes)

        def probe_err(n):
            u = sample(params, n)
            interp = np.empty(len(probes))
            coords0, coords1 = u.coords(0), u.coords(1)
            for i, (x, y) in enumerate(probes):
                i0 = min(np.searchsorted(coords0, x) - 1, u.shape[0] - 2)
                j0 = min(np.searchsorted(coords1, y) - 1, u.shape[1] - 2)
                fx = (x - coords0[i0]) / u.spacing[0]
                fy = (y - coords1[j0]) / u.spacing[1]
                block = u.values[i0 : i0 + 2, j0 : j0 + 2]
                interp[i] = (
                    block[0, 0] * (1 - fx) * (1 - fy)
                    + block[1, 0] * fx * (1 - fy)
                    + block[0, 1] * (1 - fx) * fy
                    + block[1, 1] * fx * fy
                )
            return np.abs(interp - exact).max()

        e64, e128 = probe_err(64), probe_err(128)
        assert e128 < 0.6 * e64

    def test_resource_guard(self, params):
        with pytest.raises(ValidationError):
            sample(ExemplarParams(dim=3), 3000)

    def test_minimum_resolution(self, params):
        with pytest.raises(ValidationError):
            sample(params, 8)


class TestPerturbations:
    def test_flank_bump_location_and_size(self, params):
        bump = default_flank_bump(params)
        assert bump.center == (-1.9, 0.0)
        u = sample(params, 64)
        up = sample_perturbed(params, 64)
        diff = up.values - u.values
        assert diff.max() == pytest.approx(0.05, abs=1e-2)
        pts = u.points()[diff > 1e-12]
        assert np.linalg.norm(pts - np.array(bump.center), axis=1).max() <= bump.radius + 1e-9

    def test_perturbed_evaluators_consistent(self, params):
        val, grad = perturbed_evaluators(params)
        pts = np.array([[-1.9, 0.1], [0.0, 0.0], [3.0, 3.0]])
        base = eval_u(params, pts)
        assert val(pts)[1] == pytest.approx(base[1] + 0.05 * default_flank_bump(params).value(pts[1]))
        h = 1e-6
        for k in range(2):
            shift = np.zeros(2)
            shift[k] = h
            fd = (val(pts + shift) - val(pts - shift)) / (2 * h)
            assert np.abs(fd - grad(pts)[:, k]).max() < 1e-6

    def test_shifted_overlaps_decay_band(self, params):
        u = sample_shifted(params, 96, shift=2.2)
        pts = u.points()
        moved = np.array([4.7, 0.0])
        near = np.linalg.norm(pts - moved, axis=-1) < 0.9
        assert u.values[near].max() > 1.5
        with pytest.raises(ValidationError):
            sample_shifted(ExemplarParams(variant="ring"), 64)
