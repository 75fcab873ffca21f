"""Weak and strong residuals of the degenerate equation, boundary verdicts,
and the vanishing-derivative symmetry criterion.

The flux field g(|grad u|) grad u / |grad u| is undefined where the gradient
vanishes; following the weak formulation it is set to zero wherever the
finite-difference gradient falls below a threshold shared with the local
symmetry analysis.  All quadrature is the midpoint rule on grid cells and all
gradients are central differences, so error budgets stay first order and easy
to reason about.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cst import cst, refine_along_axis
from .gridfn import SampledGridFunction
from .nonlinearity import NonlinearityPair
from .properties import DEFAULT_T_LADDER, PropertyReport, energy, refinement_unit
from .validation import DegenerateLevelError, ValidationError

__all__ = [
    "BoundaryVerdict",
    "TestFunction",
    "boundary_verdict",
    "brock_derivative",
    "default_grad_threshold",
    "pairing_inequality_check",
    "strong_residual",
    "weak_residual",
]


def default_grad_threshold(u: SampledGridFunction) -> float:
    """Three times a finite-difference truncation estimate for the gradient.

    The truncation error of a central difference is h^2 |u'''| / 6; the third
    derivative is estimated by third differences along each axis.  A high
    quantile over the support stands in for the smooth-region maximum (the
    raw maximum sits on support kinks, where the estimate is meaningless and
    would swallow the whole gradient range).
    """
    samples = []
    for axis in range(u.dim):
        vals = np.moveaxis(u.values, axis, -1)
        if vals.shape[-1] < 4:
            continue
        d3 = np.abs(np.diff(vals, n=3, axis=-1)) / (6.0 * u.spacing[axis])
        supp = np.moveaxis(u.support_mask(), axis, -1)[..., :-3]
        picked = d3[supp]
        if picked.size:
            samples.append(picked.ravel())
    if not samples:
        return 1e-12
    est = float(np.percentile(np.concatenate(samples), 90.0))
    return max(3.0 * est, 1e-12)


@dataclass(frozen=True)
class TestFunction:
    """A compactly supported polynomial bump ((1 - |x-z|^2/r^2)_+)^k, k >= 2."""

    __test__ = False  # not a pytest case, despite the conventional PDE name

    center: tuple[float, ...]
    radius: float
    power: int = 3

    def __post_init__(self):
        if self.radius <= 0:
            raise ValidationError("bump radius must be positive")
        if self.power < 2:
            raise ValidationError("bump power must be >= 2 for a C^1 bump")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def _rho2(self, pts: np.ndarray) -> np.ndarray:
        d = (pts - np.asarray(self.center)) / self.radius
        return (d * d).sum(axis=-1)

    def values(self, u: SampledGridFunction) -> np.ndarray:
        rho2 = self._rho2(u.points())
        return np.maximum(1.0 - rho2, 0.0) ** self.power

    def gradient(self, u: SampledGridFunction) -> list[np.ndarray]:
        pts = u.points()
        d = pts - np.asarray(self.center)
        rho2 = self._rho2(pts)
        base = np.maximum(1.0 - rho2, 0.0) ** (self.power - 1)
        coeff = -2.0 * self.power / self.radius**2 * base
        return [coeff * d[..., k] for k in range(u.dim)]


def _masked_flux(u: SampledGridFunction, pair: NonlinearityPair, tau: float):
    grads = u.gradient()
    gn = u.gradient_norm()
    live = gn >= tau
    safe = np.where(live, gn, 1.0)
    scale = np.where(live, np.asarray(pair.g(gn)) / safe, 0.0)
    return [scale * g for g in grads], gn, live


def weak_residual(
    u: SampledGridFunction,
    pair: NonlinearityPair,
    phi: TestFunction,
    tau: float | None = None,
) -> float:
    """int g(|grad u|) grad u . grad phi / |grad u| dx - int f(u) phi dx."""
    if pair.f is None:
        raise ValidationError("weak_residual needs a source term f")
    pv = phi.values(u)
    support_violation = (pv > 0) & (u.values == 0.0)
    if support_violation.any():
        raise ValidationError("test function support leaves the solution support")
    if tau is None:
        tau = default_grad_threshold(u)
    flux, _, _ = _masked_flux(u, pair, tau)
    pg = phi.gradient(u)
    lhs = u.integrate(sum(fk * gk for fk, gk in zip(flux, pg)))
    rhs = u.integrate(np.asarray(pair.f(u.values)) * pv)
    return lhs - rhs


def strong_residual(
    u: SampledGridFunction,
    pair: NonlinearityPair,
    tau: float | None = None,
) -> np.ma.MaskedArray:
    """Pointwise -div(flux) - f(u), masked where the gradient mask interferes.

    The flux g(|grad u|) grad u / |grad u| is evaluated on staggered
    half-cell faces (the conservative discretization; for g(z) = z this is
    the compact 5-point Laplacian).  A node is masked when its own gradient
    is below the threshold or when the stencil touches such a node.
    """
    if pair.f is None:
        raise ValidationError("strong_residual needs a source term f")
    if tau is None:
        tau = default_grad_threshold(u)
    grads = u.gradient()
    gn = u.gradient_norm()
    div = np.zeros_like(u.values)
    for axis in range(u.dim):
        h = u.spacing[axis]
        vals = np.moveaxis(u.values, axis, -1)
        normal = np.diff(vals, axis=-1) / h  # exact central difference at faces
        face_sq = normal * normal
        for other in range(u.dim):
            if other == axis:
                continue
            go = np.moveaxis(grads[other], axis, -1)
            avg = 0.5 * (go[..., :-1] + go[..., 1:])
            face_sq = face_sq + avg * avg
        face_norm = np.sqrt(face_sq)
        live_face = face_norm >= tau
        safe = np.where(live_face, face_norm, 1.0)
        flux = np.where(live_face, np.asarray(pair.g(face_norm)) / safe, 0.0) * normal
        contrib = np.zeros_like(vals)
        contrib[..., 1:-1] = (flux[..., 1:] - flux[..., :-1]) / h
        div += np.moveaxis(contrib, -1, axis)
    residual = -div - np.asarray(pair.f(u.values))
    bad = gn < tau
    grown = bad.copy()
    for axis in range(u.dim):
        grown |= np.roll(bad, 1, axis=axis) | np.roll(bad, -1, axis=axis)
    return np.ma.masked_array(residual, mask=grown)


# -- boundary bands -------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryVerdict:
    """Gradient statistics over a thin band along a boundary of the domain.

    ``c_estimates`` holds the raw band median of |grad u| followed by the
    value extrapolated to the boundary from a linear fit of |grad u| against
    the distance proxy (u for the outer boundary, eta - u for the inner one).
    """

    mode: str
    c_estimates: tuple[float, ...]
    sup_deviation: float
    band_width: float
    node_count: int

    @property
    def c(self) -> float:
        return self.c_estimates[-1]


def _band_statistics(u, proxy, band_width, tau) -> tuple[float, float, float, int]:
    """Median and boundary-extrapolated gradient over a band of given depth.

    The band holds nodes whose value proxy (distance to the boundary times
    the local gradient) is below band_width * |grad u|, so its spatial depth
    is the requested width whatever the local slope.  Nodes whose difference
    stencil crosses the boundary kink (a neighbor with proxy <= 0) are
    excluded; their gradients are systematically wrong.
    """
    gn = u.gradient_norm()
    clean = proxy > 0.0
    for axis in range(u.dim):
        clean &= np.roll(proxy, 1, axis=axis) > 0.0
        clean &= np.roll(proxy, -1, axis=axis) > 0.0
    band = clean & (gn > tau) & (proxy < band_width * gn)
    count = int(band.sum())
    if count < u.dim + 2:
        raise DegenerateLevelError("boundary band holds too few valid nodes")
    x = proxy[band]
    y = gn[band]
    median = float(np.median(y))
    # Quadratic extrapolation to the boundary when the band is populated
    # enough; the curvature of |grad u| against the proxy otherwise biases
    # the intercept by the band depth.
    if count >= 32:
        A = np.vstack([x * x, x, np.ones_like(x)]).T
    else:
        A = np.vstack([x, np.ones_like(x)]).T
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    extrapolated = float(sol[-1])
    fitted = A @ sol
    sup_dev = float(np.abs(y - fitted).max())
    return median, extrapolated, sup_dev, count


def boundary_verdict(
    u: SampledGridFunction,
    mode: str = "outer_positive_c",
    band_width: float | None = None,
    eta: float | None = None,
    eps: float | None = None,
    tau: float | None = None,
) -> BoundaryVerdict | tuple[BoundaryVerdict, BoundaryVerdict]:
    """Estimate the boundary gradient constant(s) from a near-boundary band.

    Modes: ``outer_positive_c`` fits |grad u| against u over {0 < u < L w}
    and reports the boundary intercept; ``degenerate`` reports the band's
    gradient range for comparison against eps; ``ring`` repeats the outer
    estimate near u = 0 and near u = eta and returns both verdicts.
    """
    if band_width is None:
        band_width = 2.0 * max(u.spacing)
    if band_width <= 0:
        raise ValidationError("band_width must be positive")
    if tau is None:
        tau = default_grad_threshold(u)

    if mode == "outer_positive_c":
        med, ext, dev, count = _band_statistics(u, u.values, band_width, tau)
        return BoundaryVerdict(mode, (med, ext), dev, band_width, count)
    if mode == "degenerate":
        med, ext, dev, count = _band_statistics(u, u.values, band_width, tau)
        top = med + dev
        if eps is not None and (top >= eps or med <= tau):
            raise DegenerateLevelError(
                f"band gradients not inside (tau, eps): median {med}, max about {top}"
            )
        return BoundaryVerdict(mode, (med, ext), dev, band_width, count)
    if mode == "ring":
        if eta is None:
            raise ValidationError("ring mode needs the inner plateau value eta")
        outer = boundary_verdict(u, "outer_positive_c", band_width, tau=tau)
        inner_proxy = eta - u.values
        med, ext, dev, count = _band_statistics(u, inner_proxy, band_width, tau)
        inner = BoundaryVerdict("ring_inner", (med, ext), dev, band_width, count)
        return outer, inner
    raise ValidationError(f"unknown mode {mode!r}")


# -- vanishing-derivative criterion ---------------------------------------------


def brock_derivative(
    u: SampledGridFunction,
    axis: int,
    G,
    t_ladder=DEFAULT_T_LADDER,
    levels: int = 256,
    eps_crit: float | None = None,
    g=None,
    axis_refine: int = 8,
) -> tuple[float, PropertyReport, np.ndarray]:
    """Slope of t -> int G(|grad u^t|) - int G(|grad u^0|) near t = 0.

    Both energies run through the identical ladder reconstruction so the
    static quantization bias cancels, and the evaluation lattice is
    supersampled along the flow axis (``axis_refine`` subcells per cell):
    without that, the smoothing caused by resampling the shifted sections at
    the coarse nodes decreases the energy linearly in t and buries the limit.
    E(t) may never exceed its slack (energies do not increase along the
    flow), and the report passes when the fitted slope through the origin is
    within ``eps_crit`` of zero.  Returns (slope, report, E table).
    """
    uf = refine_along_axis(u, axis, axis_refine)
    ts = np.asarray(sorted(t_ladder), dtype=float)
    base = cst(uf, axis, 0.0, levels=levels)
    e_base = energy(base, G)
    table = np.array(
        [energy(cst(uf, axis, float(t), levels=levels), G) - e_base for t in ts]
    )
    slope = float((table * ts).sum() / (ts * ts).sum())
    if eps_crit is None:
        eps_crit = brock_eps_crit(uf, G, levels, g, axis=axis)
    upper = eps_crit * (ts + ts.min())
    upper_ok = bool((table <= upper).all())
    passed = upper_ok and abs(slope) <= eps_crit
    report = PropertyReport(
        name=f"brock_axis{axis}",
        lhs=slope,
        rhs=0.0,
        slack=float(eps_crit),
        passed=passed,
        relation="eq",
        note=f"max_E={table.max():.3e}"
        + ("" if upper_ok else " (energy increased beyond slack)"),
    )
    return slope, report, table


def brock_eps_crit(u: SampledGridFunction, G, levels: int, g=None, axis: int = 0) -> float:
    """Calibrated noise floor for the energy-derivative fit.

    Scales like the residual resampling wobble of the paired reconstruction:
    gradient-energy density g(L) L over the support area, times the lattice
    unit along the flow axis (h_axis + sup/M), with the constant fixed on the
    closed-form battery (locally symmetric inputs fit well below it,
    symmetry-breaking perturbations well above).
    """
    L = u.lipschitz()
    if g is None:
        eps = 1e-6 * max(L, 1.0)
        gL = (float(G(L + eps)) - float(G(max(L - eps, 0.0)))) / (2 * eps)
    else:
        gL = float(g(L))
    unit = u.spacing[axis] + u.sup / levels
    return 0.02 * gL * L * np.sqrt(_supp_measure(u)) * unit


def _supp_measure(u: SampledGridFunction) -> float:
    return float(u.support_mask().sum()) * u.cell_volume


def pairing_inequality_check(
    u: SampledGridFunction,
    pair: NonlinearityPair,
    t: float,
    gamma: float,
    levels: int = 256,
    axis: int = 0,
    tau: float | None = None,
    name: str = "weak_form_pairing",
) -> PropertyReport:
    """Testing the equation with the flow increment of (u - gamma)_+.

    For a weak solution, int_{u^t > gamma} g(|grad u|) |grad u^t| minus the
    same integral at t = 0 dominates int f(u) [(u - gamma)_+^t - (u-gamma)_+];
    this is the Cauchy-Schwarz step applied to the weak form.
    """
    if pair.f is None:
        raise ValidationError("the pairing check needs a source term f")
    if tau is None:
        tau = default_grad_threshold(u)
    gn = u.gradient_norm()
    gvals = np.where(gn >= tau, np.asarray(pair.g(gn)), 0.0)
    u0 = cst(u, axis, 0.0, levels=levels)
    ut = cst(u, axis, float(t), levels=levels)
    lhs_pairing = u.integrate(gvals * ut.gradient_norm() * (ut.values > gamma)) - u.integrate(
        gvals * u0.gradient_norm() * (u0.values > gamma)
    )
    fvals = np.asarray(pair.f(u.values))
    rhs_pairing = u.integrate(
        fvals
        * (
            np.maximum(ut.values - gamma, 0.0)
            - np.maximum(u0.values - gamma, 0.0)
        )
    )
    L = u.lipschitz()
    slack = 4.0 * float(pair.g(L)) * refinement_unit(u, levels) * np.sqrt(_supp_measure(u)) * (
        1.0 + float(np.abs(fvals).max())
    )
    return PropertyReport.build(name, rhs_pairing, lhs_pairing, slack)
