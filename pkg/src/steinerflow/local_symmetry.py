"""Reflection-based local symmetry detection and the annular decomposition.

A function is locally symmetric in a direction when every point on a rising
section slope has a partner across the crest with equal value, mirrored slope
along the direction, and equal transverse gradient.  Functions with that
property in every tested direction decompose into annuli carrying strictly
decreasing radial profiles plus a flat remainder; this module detects the
annuli, fits their centers, and validates the radial structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage, optimize

from .gridfn import SampledGridFunction
from .properties import PropertyReport
from .validation import ValidationError, check_axis

__all__ = [
    "Annulus",
    "AnnularDecomposition",
    "SymmetryViolation",
    "decompose",
    "is_locally_symmetric_in_direction",
    "levelset_ball_check",
    "reflection_partner",
]


@dataclass(frozen=True)
class SymmetryViolation:
    point: tuple[float, ...]
    partner: tuple[float, ...] | None
    residual: float


@dataclass(frozen=True)
class Annulus:
    """A spherical shell on which the function is radial and strictly decreasing."""

    center: tuple[float, ...]
    inner_radius: float
    outer_radius: float
    profile_radii: np.ndarray
    profile_values: np.ndarray
    radial_residual: float
    monotone: bool
    inner_bound_ok: bool

    def profile(self, r: np.ndarray) -> np.ndarray:
        return np.interp(r, self.profile_radii, self.profile_values)


@dataclass(frozen=True)
class AnnularDecomposition:
    annuli: tuple[Annulus, ...]
    flat_mask: np.ndarray
    residual_fraction: float
    flagged: tuple[int, ...]

    def disjoint(self) -> bool:
        items = self.annuli
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                a, b = items[i], items[j]
                d = float(np.linalg.norm(np.subtract(a.center, b.center)))
                separate = d >= a.outer_radius + b.outer_radius
                b_in_a = d + b.outer_radius <= a.inner_radius
                a_in_b = d + a.outer_radius <= b.inner_radius
                if not (separate or b_in_a or a_in_b):
                    return False
        return True


# -- partners along a section -----------------------------------------------


_SCAN_REFINE = 16


def _first_down_crossing(coords, vals, start_pos, target):
    """First position right of start where a sampled section returns to target.

    ``coords``/``vals`` sample the section (finely for the analytic path);
    the crossing is linearly interpolated.  Returns None when the section
    never comes back down to the value.  An exact plateau at the target value
    resolves to the plateau's far edge.
    """
    n = coords.size
    i = int(np.searchsorted(coords, start_pos, side="right"))
    # Move off the start while the section still climbs.
    while i < n and vals[i] > target:
        i += 1
    if i >= n:
        return None
    if i == 0:
        return None
    if vals[i] == target:
        while i + 1 < n and vals[i + 1] == target:
            i += 1
        return float(coords[i])
    prev = vals[i - 1]
    if prev <= target:
        return None  # never rose above the value: no corridor
    frac = (prev - target) / (prev - vals[i])
    return float(coords[i - 1] + frac * (coords[i] - coords[i - 1]))


def _refine_crossing(value_fn, point, axis, target, lo, hi):
    q = np.array(point, dtype=float)

    def along(s):
        q[axis] = s
        return float(value_fn(q)) - target

    try:
        if along(lo) > 0 > along(hi):
            return float(optimize.brentq(along, lo, hi, xtol=1e-13))
    except ValueError:
        pass
    return None


def reflection_partner(
    u: SampledGridFunction,
    index: tuple[int, ...],
    axis: int,
    value_fn=None,
) -> tuple[float, ...] | None:
    """The mirror point of a grid node across the crest of its section.

    The partner is the first point beyond the node, along the positive axis
    direction, where the section returns to the node's value with the section
    strictly above that value in between.  With ``value_fn`` the section is
    scanned on a refined lattice and the crossing is root-polished on the
    exact function; otherwise the linear interpolant of the grid samples is
    used as the section.
    """
    axis = check_axis(axis, u.dim)
    coords = u.coords(axis)
    line_index = list(index)
    line_index[axis] = slice(None)
    point = [u.origin[k] + u.spacing[k] * index[k] for k in range(u.dim)]
    start = point[axis]
    if value_fn is not None:
        fine = np.linspace(coords[0], coords[-1], (coords.size - 1) * _SCAN_REFINE + 1)
        line_pts = np.tile(np.asarray(point, dtype=float), (fine.size, 1))
        line_pts[:, axis] = fine
        fvals = np.asarray(value_fn(line_pts), dtype=float)
        target = float(value_fn(np.asarray(point, dtype=float)))
        cross = _first_down_crossing(fine, fvals, start, target)
        if cross is None:
            return None
        step = fine[1] - fine[0]
        polished = _refine_crossing(value_fn, point, axis, target, max(start, cross - step), cross + step)
        if polished is not None:
            cross = polished
    else:
        vals = u.values[tuple(line_index)]
        target = float(vals[index[axis]])
        cross = _first_down_crossing(coords, vals, start, target)
        if cross is None:
            return None
    partner = list(point)
    partner[axis] = cross
    return tuple(partner)


def _interp_gradient_on_line(u, grads, index, axis, x):
    """Each gradient component linearly interpolated at position x on the section."""
    coords = u.coords(axis)
    line_index = list(index)
    line_index[axis] = slice(None)
    return np.array([np.interp(x, coords, g[tuple(line_index)]) for g in grads])


def is_locally_symmetric_in_direction(
    u: SampledGridFunction,
    axis: int,
    tol: float,
    tau: float | None = None,
    value_fn=None,
    grad_fn=None,
    max_violations: int = 200,
) -> tuple[bool, list[SymmetryViolation]]:
    """Check the reflection conditions at every sampled rising point.

    A point qualifies when 0 < u < sup u and its axis derivative exceeds the
    gradient threshold; its partner must carry the mirrored axis derivative
    and identical transverse derivatives within ``tol``.  Analytic value and
    gradient callables replace the finite-difference fields when provided.
    """
    axis = check_axis(axis, u.dim)
    sup = u.sup
    if grad_fn is not None:
        pts = u.points()
        grad_field = grad_fn(pts)
        grads = [grad_field[..., k] for k in range(u.dim)]
    else:
        grads = u.gradient()
    if tau is None:
        from .pde import default_grad_threshold

        tau = default_grad_threshold(u) if grad_fn is None else 1e-9

    candidates = (u.values > 0.0) & (u.values < sup) & (grads[axis] > tau)
    if grad_fn is None:
        # The linear interpolant must actually rise at the node, otherwise the
        # section has no corridor and the reflection premise is vacuous there.
        rising = np.zeros_like(candidates)
        sl_lo = [slice(None)] * u.dim
        sl_hi = [slice(None)] * u.dim
        sl_lo[axis] = slice(None, -1)
        sl_hi[axis] = slice(1, None)
        diff = u.values[tuple(sl_hi)] > u.values[tuple(sl_lo)]
        rising[tuple(sl_lo)] = diff
        candidates &= rising
    violations: list[SymmetryViolation] = []
    for index in np.argwhere(candidates):
        index = tuple(int(k) for k in index)
        partner = reflection_partner(u, index, axis, value_fn=value_fn)
        point = tuple(u.origin[k] + u.spacing[k] * index[k] for k in range(u.dim))
        if partner is None:
            violations.append(SymmetryViolation(point, None, np.inf))
        else:
            if grad_fn is not None:
                g_here = np.asarray(grad_fn(np.array(point)))
                g_there = np.asarray(grad_fn(np.array(partner)))
            else:
                g_here = np.array([g[index] for g in grads])
                g_there = _interp_gradient_on_line(u, grads, index, axis, partner[axis])
            diff = g_here - g_there
            diff[axis] = g_here[axis] + g_there[axis]
            residual = float(np.abs(diff).max())
            if residual > tol:
                violations.append(SymmetryViolation(point, partner, residual))
        if len(violations) >= max_violations:
            break
    return (not violations), violations


# -- annular decomposition ----------------------------------------------------


def _fit_center(points: np.ndarray, values: np.ndarray, bands: int = 8) -> np.ndarray:
    """Shared sphere center from level-set point clouds.

    Points are grouped into value bands that each see one sphere radius; the
    algebraic (Kasa) system is linear in the center and per-band radius
    offsets, and one Gauss-Newton step on the geometric residual refines it.
    """
    dim = points.shape[1]
    qs = np.quantile(values, np.linspace(0.1, 0.9, bands + 1))
    labels = np.clip(np.searchsorted(qs, values) - 1, 0, bands - 1)
    rows = []
    rhs = []
    for b in range(bands):
        sel = labels == b
        if sel.sum() < dim + 1:
            continue
        pts = points[sel]
        block = np.zeros((pts.shape[0], dim + bands))
        block[:, :dim] = 2.0 * pts
        block[:, dim + b] = 1.0
        rows.append(block)
        rhs.append((pts * pts).sum(axis=1))
    A = np.vstack(rows)
    bvec = np.concatenate(rhs)
    sol, *_ = np.linalg.lstsq(A, bvec, rcond=None)
    center = sol[:dim]

    # One Gauss-Newton step on sum (|x - z| - rho_band)^2.
    d = points - center
    r = np.sqrt((d * d).sum(axis=1))
    rho = np.zeros_like(r)
    for b in range(bands):
        sel = labels == b
        if sel.any():
            rho[sel] = r[sel].mean()
    res = r - rho
    with np.errstate(invalid="ignore", divide="ignore"):
        J = -d / np.where(r[:, None] > 0, r[:, None], 1.0)
    step, *_ = np.linalg.lstsq(J, -res, rcond=None)
    return center - step


def decompose(
    u: SampledGridFunction,
    tol: float,
    tau: float | None = None,
) -> AnnularDecomposition:
    """Split the set {0 < u < sup u} into radial annuli plus a flat remainder.

    Connected components of the non-flat region are clustered, a center is
    fitted per component, and the radial profile is extracted by binning.
    Components whose radiality residual, profile monotonicity, or inner-ball
    bound fail the tolerance are flagged rather than silently accepted.
    """
    if tau is None:
        from .pde import default_grad_threshold

        tau = default_grad_threshold(u)
    sup = u.sup
    V = (u.values > 0.0) & (u.values < sup)
    gn = u.gradient_norm()
    moving = V & (gn > tau)
    labels, count = ndimage.label(moving)
    pts_all = u.points()
    h = max(u.spacing)

    annuli: list[Annulus] = []
    flagged: list[int] = []
    for k in range(1, count + 1):
        sel = labels == k
        if int(sel.sum()) < 2 * u.dim + 2:
            continue
        pts = pts_all[sel].reshape(-1, u.dim)
        vals = u.values[sel]
        center = _fit_center(pts, vals)
        radii = np.linalg.norm(pts - center, axis=1)
        r_in = max(0.0, float(radii.min()) - 0.5 * h)
        r_out = float(radii.max()) + 0.5 * h
        edges = np.arange(r_in, r_out + h, h)
        if edges.size < 3:
            continue
        which = np.clip(np.digitize(radii, edges) - 1, 0, edges.size - 2)
        prof_r = []
        prof_v = []
        for b in range(edges.size - 1):
            m = which == b
            if m.any():
                prof_r.append(radii[m].mean())
                prof_v.append(vals[m].mean())
        prof_r = np.asarray(prof_r)
        prof_v = np.asarray(prof_v)
        residual = float(np.abs(vals - np.interp(radii, prof_r, prof_v)).max())
        monotone = bool(np.all(np.diff(prof_v) < 0))
        inner_nodes = (np.linalg.norm(pts_all - center, axis=-1) <= r_in) & (u.values > 0)
        if inner_nodes.any():
            inner_ok = bool(u.values[inner_nodes].min() >= prof_v[0] - tol)
        else:
            inner_ok = True
        annulus = Annulus(
            center=tuple(float(c) for c in center),
            inner_radius=r_in,
            outer_radius=r_out,
            profile_radii=prof_r,
            profile_values=prof_v,
            radial_residual=residual,
            monotone=monotone,
            inner_bound_ok=inner_ok,
        )
        annuli.append(annulus)
        if residual > tol or not monotone or not inner_ok:
            flagged.append(len(annuli) - 1)

    flat_mask = V & (gn <= tau)
    covered = flat_mask.copy()
    for a in annuli:
        d = np.linalg.norm(pts_all - np.asarray(a.center), axis=-1)
        covered |= (d > a.inner_radius) & (d < a.outer_radius)
    v_count = int(V.sum())
    residual_fraction = 0.0 if v_count == 0 else float((V & ~covered).sum()) / v_count
    return AnnularDecomposition(tuple(annuli), flat_mask, residual_fraction, tuple(flagged))


# -- superlevel components as balls --------------------------------------------


def levelset_ball_check(
    u: SampledGridFunction,
    c: float,
    tol: float,
    value_fn=None,
    grad_fn=None,
    directions: int = 64,
) -> PropertyReport:
    """Each component of {u > c} should be a ball with constant boundary gradient.

    With analytic callables the boundary is sampled by radial root-finding
    from the component center, otherwise grid nodes in a one-cell band around
    the level are used.  The report's lhs is the worst relative radius
    deviation, its note carries the worst relative gradient spread.
    """
    if not 0 < c:
        raise ValidationError("level must be positive")
    if c >= u.sup:
        return PropertyReport.build(f"level_ball_c{c:g}", 0.0, 0.0, tol, note="empty level")
    mask = u.values > c
    labels, count = ndimage.label(mask)
    pts_all = u.points()
    h = max(u.spacing)
    worst_shape = 0.0
    worst_grad = 0.0
    for k in range(1, count + 1):
        sel = labels == k
        pts = pts_all[sel].reshape(-1, u.dim)
        center = pts.mean(axis=0)
        if value_fn is not None:
            radii = []
            grads = []
            angles = np.linspace(0.0, 2.0 * np.pi, directions, endpoint=False)
            span = float(np.linalg.norm(pts - center, axis=1).max()) + 2.0 * h
            for th in angles:
                direction = np.zeros(u.dim)
                direction[0] = np.cos(th)
                direction[1 % u.dim] = np.sin(th) if u.dim > 1 else direction[1 % u.dim]

                def radial(r):
                    return float(value_fn(center + r * direction)) - c

                try:
                    r_hit = optimize.brentq(radial, 1e-9, span, xtol=1e-12)
                except ValueError:
                    continue
                radii.append(r_hit)
                if grad_fn is not None:
                    grads.append(float(np.linalg.norm(grad_fn(center + r_hit * direction))))
            radii = np.asarray(radii)
        else:
            boundary = sel & (np.abs(u.values - c) < u.lipschitz() * h)
            bpts = pts_all[boundary].reshape(-1, u.dim)
            if bpts.shape[0] == 0:
                bpts = pts
            radii = np.linalg.norm(bpts - center, axis=1)
            grads = u.gradient_norm()[boundary].tolist()
        if radii.size == 0:
            continue
        mean_r = float(radii.mean())
        worst_shape = max(worst_shape, float(np.abs(radii - mean_r).max()) / max(mean_r, 1e-12))
        if grads:
            garr = np.asarray(grads)
            worst_grad = max(worst_grad, float(garr.std() / max(garr.mean(), 1e-12)))
    return PropertyReport.build(
        f"level_ball_c{c:g}",
        worst_shape,
        0.0,
        tol,
        note=f"components={count} grad_spread={worst_grad:.3e}",
    )
