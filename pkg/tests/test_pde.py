import numpy as np
import pytest

from steinerflow import ExemplarParams, NonlinearityPair, sample
from steinerflow.exemplars import eval_f, sample_shifted
from steinerflow.gridfn import SampledGridFunction
from steinerflow.pde import (
    TestFunction,
    boundary_verdict,
    brock_derivative,
    default_grad_threshold,
    pairing_inequality_check,
    strong_residual,
    weak_residual,
)
from steinerflow.validation import DegenerateLevelError, ValidationError

from oracles import exemplar_laplacian


@pytest.fixture(scope="module")
def params():
    return ExemplarParams()


@pytest.fixture(scope="module")
def pair(params):
    return NonlinearityPair.power(2.0, f=lambda z: eval_f(params, np.clip(z, 0.0, 2.0)))


@pytest.fixture(scope="module")
def u128(params):
    return sample(params, 128)


def radial_pde_solution(p: float, n: int = 129, dim: int = 2, R: float = 2.0):
    """u solving -div(|grad u|^{p-2} grad u) = 1 on the ball of radius R.

    The radial profile integrates in closed form: u'(r) = -(r / dim)^(1/(p-1)).
    """
    exponent = 1.0 / (p - 1.0)
    coeff = (1.0 / dim) ** exponent / (exponent + 1.0)

    def profile(r):
        r = np.minimum(r, R)
        return coeff * (R ** (exponent + 1.0) - r ** (exponent + 1.0))

    half = R * 1.25
    axis = np.linspace(-half, half, n)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    rr = np.sqrt(sum(m * m for m in mesh))
    vals = profile(rr)
    vals[rr >= R] = 0.0
    h = 2 * half / (n - 1)
    grid = SampledGridFunction(vals, (-half,) * dim, (h,) * dim, (R / dim) ** exponent)
    source = NonlinearityPair.power(p, f=lambda z: np.ones_like(np.asarray(z)))
    return grid, source


class TestTestFunction:
    def test_c1_bump(self):
        phi = TestFunction((0.0, 0.0), 1.0, power=3)
        u = sample(ExemplarParams(), 48)
        vals = phi.values(u)
        assert vals.max() <= 1.0
        pts = u.points()
        outside = np.linalg.norm(pts, axis=-1) > 1.0
        assert vals[outside].max() == 0.0
        grads = phi.gradient(u)
        assert all(np.abs(g[outside]).max() == 0.0 for g in grads)

    def test_gradient_matches_fd(self):
        phi = TestFunction((0.3, -0.2), 1.5, power=4)
        u = sample(ExemplarParams(), 96)
        g = phi.gradient(u)
        num0 = np.gradient(phi.values(u), u.spacing[0], axis=0)
        inner = phi.values(u) > 1e-3
        assert np.abs((g[0] - num0)[inner]).max() < 5e-2

    def test_rejects_degenerate(self):
        with pytest.raises(ValidationError):
            TestFunction((0.0,), -1.0)
        with pytest.raises(ValidationError):
            TestFunction((0.0,), 1.0, power=1)


class TestWeakResidual:
    def test_exemplar_residual_small(self, u128, pair):
        rng = np.random.default_rng(0)
        h = max(u128.spacing)
        for _ in range(5):
            phi = TestFunction(tuple(rng.uniform(-3.5, 3.5, 2)), rng.uniform(0.6, 1.4))
            assert abs(weak_residual(u128, pair, phi)) <= 0.5 * h

    def test_flat_region_zero(self, u128, pair):
        phi = TestFunction((0.0, 4.0), 0.5)
        assert abs(weak_residual(u128, pair, phi)) < 1e-10

    def test_radial_solution_first_order(self):
        maxima = {}
        for n in (65, 129, 257):
            grid, source = radial_pde_solution(2.0, n)
            phi = TestFunction((0.4, -0.3), 0.8)
            maxima[n] = abs(weak_residual(grid, source, phi))
        assert maxima[257] < maxima[65]
        hs = np.array([2 * 2.5 / (n - 1) for n in (65, 129, 257)])
        errs = np.array([maxima[65], maxima[129], maxima[257]])
        order = np.polyfit(np.log(hs), np.log(np.maximum(errs, 1e-15)), 1)[0]
        assert order >= 0.9

    def test_support_violation_rejected(self, u128, pair):
        with pytest.raises(ValidationError):
            weak_residual(u128, pair, TestFunction((6.0, 0.0), 1.0))

    def test_needs_source(self, u128):
        with pytest.raises(ValidationError):
            weak_residual(u128, NonlinearityPair.power(2.0), TestFunction((0.0, 0.0), 1.0))


class TestStrongResidual:
    def test_p2_matches_analytic_laplacian_scale(self, u128, params, pair):
        sr = strong_residual(u128, pair)
        pts = u128.points()
        h = max(u128.spacing)
        r0 = np.linalg.norm(pts, axis=-1)
        r1 = np.linalg.norm(pts - np.array(params.x1), axis=-1)
        r2 = np.linalg.norm(pts - np.array(params.x2), axis=-1)
        away = np.ones(u128.shape, bool)
        for rr, R in [(r0, 5.0), (r0, 6.0), (r1, 1.0), (r2, 1.0)]:
            away &= np.abs(rr - R) > 4 * h
        live = ~sr.mask & away
        # FD Laplacian against the analytic one on the same cells.
        lap = exemplar_laplacian(params, pts[live])
        assert np.abs(np.asarray(sr)[live] - (-lap - eval_f(params, u128.values[live]))).max() < 60 * h * h

    def test_plateau_masked(self, u128, pair):
        sr = strong_residual(u128, pair)
        pts = u128.points()
        plateau = (np.linalg.norm(pts, axis=-1) < 4.5) & (np.abs(u128.values - 1.0) < 1e-12)
        assert sr.mask[plateau].all()

    def test_radial_solution_p3(self):
        errs = {}
        for n in (65, 129):
            grid, source = radial_pde_solution(3.0, n)
            sr = strong_residual(grid, source)
            pts = grid.points()
            rr = np.linalg.norm(pts, axis=-1)
            h = max(grid.spacing)
            live = ~sr.mask & (rr > 0.4) & (rr < 2.0 - 4 * h)
            errs[n] = float(np.abs(np.asarray(sr)[live]).max())
        assert errs[129] < errs[65]
        assert errs[129] <= 6.0 * (2 * 2.5 / 128)


class TestBoundaryVerdict:
    def test_outer_constant(self, u128, params):
        v = boundary_verdict(u128, "outer_positive_c")
        target = 12.0 * params.s / 11.0
        assert abs(v.c - target) / target < 0.03
        assert v.node_count > 50
        assert v.band_width == pytest.approx(2 * max(u128.spacing))

    def test_ring_both_bands(self):
        ring = ExemplarParams(variant="ring", x1=(1.0, 0.5))
        u = sample(ring, 256)
        outer, inner = boundary_verdict(u, "ring", eta=ring.eta)
        assert abs(outer.c - 36.0 / 11.0) / (36.0 / 11.0) < 0.02
        target = ring.s * 0.75 ** (ring.s - 1.0)
        assert abs(inner.c - target) / target < 0.02

    def test_cone_slope_recovered(self):
        n = 129
        axis = np.linspace(-2.0, 2.0, n)
        X, Y = np.meshgrid(axis, axis, indexing="ij")
        r = np.sqrt(X * X + Y * Y)
        vals = np.maximum(1.0 - r, 0.0)  # slope exactly 1
        u = SampledGridFunction(vals, (-2.0, -2.0), (4.0 / (n - 1),) * 2, 1.0)
        v = boundary_verdict(u, "outer_positive_c")
        assert abs(v.c - 1.0) < 0.02

    def test_ring_needs_eta(self, u128):
        with pytest.raises(ValidationError):
            boundary_verdict(u128, "ring")

    def test_empty_band_rejected(self):
        vals = np.zeros((8, 8))
        u = SampledGridFunction(vals, (0.0, 0.0), (1.0, 1.0))
        with pytest.raises(DegenerateLevelError):
            boundary_verdict(u, "outer_positive_c")


class TestBrockDerivative:
    def test_symmetric_bump_slope_zero(self):
        n = 97
        axis = np.linspace(-3.0, 3.0, n)
        X, Y = np.meshgrid(axis, axis, indexing="ij")
        vals = np.maximum(1.0 - (X * X + Y * Y) / 4.0, 0.0) ** 2
        u = SampledGridFunction(vals, (-3.0, -3.0), (6.0 / (n - 1),) * 2, 1.0)
        p2 = NonlinearityPair.power(2.0)
        slope, report, table = brock_derivative(u, 0, p2.G, levels=128, g=p2.g)
        assert report.passed
        assert abs(slope) <= 0.2 * report.slack

    def test_exemplar_passes_shifted_fails(self, params):
        p2 = NonlinearityPair.power(2.0)
        u = sample(params, 128)
        slope_u, rep_u, _ = brock_derivative(u, 0, p2.G, levels=256, g=p2.g)
        assert rep_u.passed
        shifted = sample_shifted(params, 128)
        slope_s, rep_s, _ = brock_derivative(shifted, 0, p2.G, levels=256, g=p2.g)
        assert not rep_s.passed
        assert slope_s < -rep_s.slack

    def test_energy_upper_bound_reported(self, params):
        p2 = NonlinearityPair.power(2.0)
        u = sample(params, 64)
        _, report, table = brock_derivative(u, 0, p2.G, levels=64, g=p2.g)
        assert "max_E" in report.note
        assert table.shape == (7,)


class TestPairingInequality:
    def test_exemplar(self, u128, pair):
        rep = pairing_inequality_check(u128, pair, 0.05, 0.1, levels=128)
        assert rep.passed
