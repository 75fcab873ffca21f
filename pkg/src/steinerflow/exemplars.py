"""Closed-form p-Laplacian test solutions built from radial bumps on a plateau.

Two families are provided.  The three-mountain function places two congruent
radial bumps on the unit-height plateau of a larger radial "table" function
supported in the ball of radius 6; it solves -div(|grad u|^{p-2} grad u) =
f(u) in that ball with |grad u| = 12 s / 11 on the boundary.  The ring
variant keeps a single bump and caps the function at its inner plateau value,
which turns the domain into a (generally nonconcentric) ring with constant
boundary data on both components.

All evaluations, gradients included, are exact piecewise formulas; they serve
as ground truth for the finite-difference machinery elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gridfn import SampledGridFunction
from .validation import ValidationError

__all__ = [
    "ExemplarParams",
    "FlankBump",
    "eval_f",
    "eval_grad_u",
    "eval_u",
    "gradient_bound",
    "inner_boundary_value",
    "inner_boundary_gradient",
    "outer_boundary_gradient",
    "perturbed_evaluators",
    "sample",
    "sample_perturbed",
]

BOX_HALF_WIDTH = 6.5
OUTER_RADIUS = 6.0
PLATEAU_RADIUS = 5.0
HOLE_RADIUS = 0.5
MAX_GRID_CELLS = 1 << 26


@dataclass(frozen=True)
class ExemplarParams:
    """Parameters of the explicit solutions.

    ``variant`` is ``"three_mountain"`` (bumps at x1 and x2) or ``"ring"``
    (single bump at x1, capped at the inner plateau value).
    """

    p: float = 2.0
    s: float = 3.0
    dim: int = 2
    x1: tuple[float, ...] = (-2.5, 0.0)
    x2: tuple[float, ...] = (2.5, 0.0)
    variant: str = "three_mountain"

    def __post_init__(self):
        if self.variant not in ("three_mountain", "ring"):
            raise ValidationError(f"unknown variant {self.variant!r}")
        if self.p < 2.0:
            raise ValidationError(f"need p >= 2, got {self.p}")
        if self.s <= 2.0:
            raise ValidationError(f"need s > 2, got {self.s}")
        if self.p > 2.0 and self.s <= self.p / (self.p - 2.0):
            raise ValidationError("for p > 2 the exponent must satisfy s > p / (p - 2)")
        if self.dim < 1:
            raise ValidationError("dim must be >= 1")
        x1 = tuple(float(c) for c in self.x1)[: self.dim]
        x2 = tuple(float(c) for c in self.x2)[: self.dim]
        x1 = x1 + (0.0,) * (self.dim - len(x1))
        x2 = x2 + (0.0,) * (self.dim - len(x2))
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)
        n1 = math.hypot(*x1)
        if self.variant == "three_mountain":
            n2 = math.hypot(*x2)
            sep = math.dist(x1, x2)
            if n1 >= 4.0 or n2 >= 4.0:
                raise ValidationError("bump centers must lie in the ball of radius 4")
            if sep <= 2.0:
                raise ValidationError("bump centers must be more than 2 apart")
        else:
            if n1 >= 2.0:
                raise ValidationError("the ring bump center must lie in the ball of radius 2")

    @property
    def eta(self) -> float:
        """Inner plateau value of the ring variant: 1 + (3/4)^s."""
        return inner_boundary_value(self)


def _bump(r2: np.ndarray, s: float) -> np.ndarray:
    """w(r) = (1 - r^2)^s inside the unit ball, 0 outside."""
    inside = r2 < 1.0
    out = np.zeros_like(r2)
    out[inside] = (1.0 - r2[inside]) ** s
    return out


def _bump_radial_slope(r2: np.ndarray, s: float) -> np.ndarray:
    """dw/dr / r = -2 s (1 - r^2)^{s-1} inside the unit ball (0 outside)."""
    inside = r2 < 1.0
    out = np.zeros_like(r2)
    out[inside] = -2.0 * s * (1.0 - r2[inside]) ** (s - 1.0)
    return out


def _table(r2: np.ndarray, s: float) -> np.ndarray:
    """v: height 1 inside radius 5, decaying to 0 at radius 6, 0 outside."""
    out = np.zeros_like(r2)
    out[r2 < PLATEAU_RADIUS**2] = 1.0
    band = (r2 >= PLATEAU_RADIUS**2) & (r2 <= OUTER_RADIUS**2)
    out[band] = 1.0 - ((r2[band] - 25.0) / 11.0) ** s
    return out


def _table_radial_slope(r2: np.ndarray, s: float) -> np.ndarray:
    """dv/dr / r on the decaying band, 0 elsewhere."""
    out = np.zeros_like(r2)
    band = (r2 >= PLATEAU_RADIUS**2) & (r2 <= OUTER_RADIUS**2)
    out[band] = -(2.0 * s / 11.0) * ((r2[band] - 25.0) / 11.0) ** (s - 1.0)
    return out


def _as_points(x, dim: int) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.shape == (dim,):
        return pts[None, :]
    if pts.ndim < 1 or pts.shape[-1] != dim:
        raise ValidationError(f"points must have trailing dimension {dim}")
    return pts


def eval_u(params: ExemplarParams, x) -> np.ndarray:
    """Exact values of the exemplar solution at arbitrary points."""
    pts = _as_points(x, params.dim)
    r2_0 = (pts * pts).sum(axis=-1)
    d1 = pts - np.asarray(params.x1)
    r2_1 = (d1 * d1).sum(axis=-1)
    u = _table(r2_0, params.s) + _bump(r2_1, params.s)
    if params.variant == "three_mountain":
        d2 = pts - np.asarray(params.x2)
        r2_2 = (d2 * d2).sum(axis=-1)
        u = u + _bump(r2_2, params.s)
    else:
        u = np.minimum(u, params.eta)
    return u if np.asarray(x).shape != (params.dim,) else float(u[0])


def eval_grad_u(params: ExemplarParams, x) -> np.ndarray:
    """Exact gradient (chain rule per radial piece); zero on plateaus and caps."""
    pts = _as_points(x, params.dim)
    r2_0 = (pts * pts).sum(axis=-1)
    grad = pts * _table_radial_slope(r2_0, params.s)[..., None]
    d1 = pts - np.asarray(params.x1)
    r2_1 = (d1 * d1).sum(axis=-1)
    grad = grad + d1 * _bump_radial_slope(r2_1, params.s)[..., None]
    if params.variant == "three_mountain":
        d2 = pts - np.asarray(params.x2)
        r2_2 = (d2 * d2).sum(axis=-1)
        grad = grad + d2 * _bump_radial_slope(r2_2, params.s)[..., None]
    else:
        capped = r2_1 < HOLE_RADIUS**2
        grad[capped] = 0.0
    return grad if np.asarray(x).shape != (params.dim,) else grad[0]


def eval_f(params: ExemplarParams, z) -> np.ndarray:
    """The piecewise source term f on [0, 2], split at height 1.

    The coefficient ``2 p s - 2 s - p + n`` uses the space dimension for n;
    with that reading, -div(|grad u|^{p-2} grad u) = f(u) holds identically on
    both radial pieces.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0.0) or np.any(z > 2.0):
        raise ValidationError("f is defined on [0, 2] only")
    p, s, n = params.p, params.s, float(params.dim)
    out = np.empty_like(z)

    lo = z <= 1.0
    zl = z[lo]
    ql = (1.0 - zl) ** (1.0 / s)
    out[lo] = (
        (2.0 * s / 11.0) ** (p - 1.0)
        * (25.0 + 11.0 * ql) ** (p / 2.0 - 1.0)
        * (1.0 - zl) ** (p - p / s - 1.0)
        * ((50.0 / 11.0) * (p - 1.0) * (s - 1.0) + (2.0 * p * s - 2.0 * s - p + n) * ql)
    )

    hi = ~lo
    zh = z[hi]
    qh = (zh - 1.0) ** (1.0 / s)
    with np.errstate(invalid="ignore"):
        shape = (1.0 - qh) ** (p / 2.0 - 1.0)
    shape = np.where(qh == 1.0, 1.0 if p == 2.0 else 0.0, shape)
    out[hi] = (
        (2.0 * s) ** (p - 1.0)
        * shape
        * (zh - 1.0) ** (p - p / s - 1.0)
        * (-2.0 * (s - 1.0) * (p - 1.0) + (2.0 * p * s - 2.0 * s - p + n) * qh)
    )
    return out if z.shape else float(out)


def outer_boundary_gradient(params: ExemplarParams) -> float:
    """|grad u| on the outer sphere of radius 6: 12 s / 11."""
    return 12.0 * params.s / 11.0


def inner_boundary_value(params: ExemplarParams) -> float:
    """u on the ring's inner sphere: the bump sits on the unit plateau, 1 + (3/4)^s."""
    return 1.0 + 0.75**params.s


def inner_boundary_gradient(params: ExemplarParams) -> float:
    """|grad u| on the ring's inner sphere of radius 1/2: s (3/4)^{s-1}."""
    return params.s * 0.75 ** (params.s - 1.0)


def gradient_bound(params: ExemplarParams) -> float:
    """Exact global Lipschitz constant: max of the outer slope and the bump slope."""
    s = params.s
    r_star = 1.0 / math.sqrt(2.0 * s - 1.0)
    bump_max = 2.0 * s * r_star * (1.0 - r_star**2) ** (s - 1.0)
    return max(outer_boundary_gradient(params), bump_max)


def sample(params: ExemplarParams, n: int, box_half: float = BOX_HALF_WIDTH) -> SampledGridFunction:
    """Sample the exemplar on an ``n**dim`` grid covering ``[-box_half, box_half]^dim``."""
    n = int(n)
    if n < 16:
        raise ValidationError("grid resolution must be at least 16")
    if params.dim * n**params.dim > MAX_GRID_CELLS:
        raise ValidationError(f"requested grid exceeds the {MAX_GRID_CELLS} cell cap")
    axis = np.linspace(-box_half, box_half, n)
    mesh = np.meshgrid(*([axis] * params.dim), indexing="ij")
    pts = np.stack(mesh, axis=-1)
    values = eval_u(params, pts)
    spacing = (2.0 * box_half / (n - 1),) * params.dim
    origin = (-box_half,) * params.dim
    return SampledGridFunction(values, origin, spacing, gradient_bound(params))


# -- perturbation used by the symmetry-breaking tests ------------------------


@dataclass(frozen=True)
class FlankBump:
    """A small radial bump added on a mountain flank to break its radiality."""

    center: tuple[float, ...]
    amplitude: float = 0.05
    radius: float = 0.5
    s: float = 3.0

    def value(self, pts: np.ndarray) -> np.ndarray:
        d = (np.asarray(pts, dtype=float) - np.asarray(self.center)) / self.radius
        return self.amplitude * _bump((d * d).sum(axis=-1), self.s)

    def grad(self, pts: np.ndarray) -> np.ndarray:
        d = (np.asarray(pts, dtype=float) - np.asarray(self.center)) / self.radius
        slope = _bump_radial_slope((d * d).sum(axis=-1), self.s)
        return (self.amplitude / self.radius) * d * slope[..., None]

    def gradient_bound(self) -> float:
        r_star = 1.0 / math.sqrt(2.0 * self.s - 1.0)
        peak = 2.0 * self.s * r_star * (1.0 - r_star**2) ** (self.s - 1.0)
        return self.amplitude * peak / self.radius


def default_flank_bump(params: ExemplarParams, amplitude: float = 0.05) -> FlankBump:
    center = tuple(c + off for c, off in zip(params.x1, (0.6,) + (0.0,) * (params.dim - 1)))
    return FlankBump(center=center, amplitude=amplitude, s=params.s)


def perturbed_evaluators(params: ExemplarParams, bump: FlankBump | None = None):
    """(value, gradient) callables for the exemplar plus a flank perturbation."""
    if bump is None:
        bump = default_flank_bump(params)

    def value(pts):
        return eval_u(params, pts) + bump.value(pts)

    def grad(pts):
        return eval_grad_u(params, pts) + bump.grad(pts)

    return value, grad


def sample_perturbed(
    params: ExemplarParams,
    n: int,
    bump: FlankBump | None = None,
    box_half: float = BOX_HALF_WIDTH,
) -> SampledGridFunction:
    if bump is None:
        bump = default_flank_bump(params)
    base = sample(params, n, box_half)
    pts = base.points()
    values = base.values + bump.value(pts)
    hint = gradient_bound(params) + bump.gradient_bound()
    return SampledGridFunction(values, base.origin, base.spacing, hint)


def sample_shifted(
    params: ExemplarParams,
    n: int,
    shift: float = 2.2,
    box_half: float = BOX_HALF_WIDTH,
) -> SampledGridFunction:
    """The exemplar with the second mountain pushed off its admissible position.

    The shifted bump overlaps the outer decay band, so its superlevel
    sections are no longer centered on a fixed axis position and the flow
    strictly decreases convex gradient energies; this is the symmetry-broken
    input for the energy-derivative test.
    """
    if params.variant != "three_mountain":
        raise ValidationError("only the three-mountain variant can be shifted")
    n = int(n)
    if n < 16:
        raise ValidationError("grid resolution must be at least 16")
    axis = np.linspace(-box_half, box_half, n)
    mesh = np.meshgrid(*([axis] * params.dim), indexing="ij")
    pts = np.stack(mesh, axis=-1)
    moved = np.asarray(params.x2) + np.array([shift] + [0.0] * (params.dim - 1))
    r2_0 = (pts * pts).sum(axis=-1)
    d1 = pts - np.asarray(params.x1)
    d2 = pts - moved
    values = (
        _table(r2_0, params.s)
        + _bump((d1 * d1).sum(axis=-1), params.s)
        + _bump((d2 * d2).sum(axis=-1), params.s)
    )
    spacing = (2.0 * box_half / (n - 1),) * params.dim
    return SampledGridFunction(values, (-box_half,) * params.dim, spacing, gradient_bound(params))
