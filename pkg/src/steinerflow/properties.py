"""Checkers for the rearrangement inequalities and the small-time lemma suite.

Every check produces a :class:`PropertyReport` whose ``slack`` field is an
explicit discretization budget built from the grid spacing h, the level count
M and the Lipschitz bound L.  All budgets are homogeneous in (h + sup/M), so
they halve under the simultaneous refinement h -> h/2, M -> 2M.

A report passes when the checked relation holds within its slack:
``le`` means lhs <= rhs + slack, ``eq`` means |lhs - rhs| <= slack.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cst import cst, shift_plus, truncate
from .gridfn import SampledGridFunction
from .nonlinearity import NonlinearityPair
from .sections import LevelLadder
from .validation import DegenerateLevelError, ValidationError

__all__ = [
    "PropertyReport",
    "boundary_flux",
    "cavalieri_check",
    "convexity_surplus_check",
    "energy",
    "energy_inequality_check",
    "f_pairing_check",
    "h_drift_check",
    "hardy_littlewood_check",
    "lipschitz_drift_check",
    "monotonicity_check",
    "monotonicity_in_level_check",
    "nonexpansivity_check",
    "prop_battery",
    "reports_to_csv",
    "support_containment_check",
    "truncated_monotonicity_check",
]

# Calibrated multipliers for the discretization budgets.  Every budget is
# homogeneous of degree one in (h, sup/M), so the simultaneous refinement
# h -> h/2, M -> 2M shrinks each budget by exactly 2.
C_CAVALIERI = 0.5
C_HARDY_LITTLEWOOD = 0.5
C_POINTWISE = 1.0
C_ENERGY = 1.0

DEFAULT_T_LADDER = tuple(2.0**-k for k in range(4, 11))


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of one verified relation between two computed quantities."""

    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    relation: str = "le"
    note: str = ""

    @classmethod
    def build(cls, name, lhs, rhs, slack, relation="le", note="") -> "PropertyReport":
        lhs = float(lhs)
        rhs = float(rhs)
        slack = float(slack)
        if relation == "le":
            ok = lhs <= rhs + slack
        elif relation == "eq":
            ok = abs(lhs - rhs) <= slack
        else:
            raise ValidationError(f"unknown relation {relation!r}")
        return cls(name, lhs, rhs, slack, bool(ok), relation, note)


def reports_to_csv(reports) -> str:
    lines = ["name,lhs,rhs,slack,pass"]
    for r in reports:
        lines.append(
            f"{r.name},{r.lhs:.17g},{r.rhs:.17g},{r.slack:.17g},{str(r.passed).lower()}"
        )
    return "\n".join(lines) + "\n"


# -- discretization budget ----------------------------------------------------


def refinement_unit(u: SampledGridFunction, levels: int) -> float:
    """h + sup/M: the refinement scale shared by all discretization budgets."""
    return max(u.spacing) + u.sup / levels


def pointwise_unit(u: SampledGridFunction, levels: int) -> float:
    """Sup-norm reconstruction scale: level quantization plus grid interpolation."""
    return u.sup / levels + 0.5 * max(u.spacing) * u.lipschitz()


def _supp_measure(u: SampledGridFunction) -> float:
    return float(u.support_mask().sum()) * u.cell_volume


# -- Cavalieri / monotonicity / contraction / pairing -------------------------


def cavalieri_check(
    u: SampledGridFunction,
    t: float,
    F,
    levels: int = 256,
    ut: SampledGridFunction | None = None,
    axis: int = 0,
    name: str = "cavalieri",
) -> PropertyReport:
    """Integrals of F(u) and F(u^t) agree within the quantization budget."""
    if ut is None:
        ut = cst(u, axis, t, levels=levels)
    lhs = u.integrate(np.asarray(F(u.values)) - float(F(0.0)))
    rhs = u.integrate(np.asarray(F(ut.values)) - float(F(0.0)))
    zs = np.linspace(0.0, max(u.sup, 1e-300), 512)
    lip_f = float(np.abs(np.diff(F(zs)) / np.diff(zs)).max()) if u.sup > 0 else 1.0
    slack = C_CAVALIERI * lip_f * _supp_measure(u) * refinement_unit(u, levels)
    return PropertyReport.build(name, lhs, rhs, slack, relation="eq")


def monotonicity_check(
    u: SampledGridFunction,
    v: SampledGridFunction,
    t: float,
    levels: int = 256,
    axis: int = 0,
    ut: SampledGridFunction | None = None,
    vt: SampledGridFunction | None = None,
    name: str = "monotonicity",
) -> PropertyReport:
    """u <= v pointwise implies u^t <= v^t pointwise, up to quantization."""
    if np.any(u.values > v.values):
        raise ValidationError("monotonicity check needs u <= v pointwise")
    if ut is None:
        ut = cst(u, axis, t, levels=levels)
    if vt is None:
        vt = cst(v, axis, t, levels=levels)
    lhs = float((ut.values - vt.values).max())
    slack = C_POINTWISE * (pointwise_unit(u, levels) + pointwise_unit(v, levels))
    return PropertyReport.build(name, lhs, 0.0, slack)


def _lp_norm(u: SampledGridFunction, data: np.ndarray, p: float) -> float:
    return float((np.abs(data) ** p).sum() * u.cell_volume) ** (1.0 / p)


def nonexpansivity_check(
    u: SampledGridFunction,
    v: SampledGridFunction,
    t: float,
    p: float,
    levels: int = 256,
    axis: int = 0,
    ut: SampledGridFunction | None = None,
    vt: SampledGridFunction | None = None,
    name: str | None = None,
) -> PropertyReport:
    """The flow contracts L^p distances: |u^t - v^t|_p <= |u - v|_p + slack."""
    if p < 1:
        raise ValidationError("nonexpansivity needs p >= 1")
    if u.shape != v.shape:
        raise ValidationError("grid mismatch")
    if ut is None:
        ut = cst(u, axis, t, levels=levels)
    if vt is None:
        vt = cst(v, axis, t, levels=levels)
    lhs = _lp_norm(u, ut.values - vt.values, p)
    rhs = _lp_norm(u, u.values - v.values, p)
    vol = max(_supp_measure(u), _supp_measure(v))
    slack = (
        C_POINTWISE
        * (pointwise_unit(u, levels) + pointwise_unit(v, levels))
        * vol ** (1.0 / p)
    )
    return PropertyReport.build(name or f"nonexpansivity_p{p:g}", lhs, rhs, slack)


def hardy_littlewood_check(
    u: SampledGridFunction,
    v: SampledGridFunction,
    t: float,
    levels: int = 256,
    axis: int = 0,
    ut: SampledGridFunction | None = None,
    vt: SampledGridFunction | None = None,
    name: str = "hardy_littlewood",
) -> PropertyReport:
    """The flow increases the L^2 pairing: int u v <= int u^t v^t + slack."""
    if u.shape != v.shape:
        raise ValidationError("grid mismatch")
    if ut is None:
        ut = cst(u, axis, t, levels=levels)
    if vt is None:
        vt = cst(v, axis, t, levels=levels)
    lhs = u.integrate(u.values * v.values)
    rhs = u.integrate(ut.values * vt.values)
    unit = refinement_unit(u, levels) + refinement_unit(v, levels)
    scale = max(u.sup, v.sup) * max(_supp_measure(u), _supp_measure(v))
    slack = C_HARDY_LITTLEWOOD * unit * scale
    return PropertyReport.build(name, lhs, rhs, slack)


def lipschitz_drift_check(
    u: SampledGridFunction,
    t: float,
    levels: int = 256,
    axis: int = 0,
    ut: SampledGridFunction | None = None,
    name: str = "lipschitz_drift",
) -> PropertyReport:
    """Sup-norm drift |u^t - u|_inf <= L R t plus quantization."""
    if ut is None:
        ut = cst(u, axis, t, levels=levels)
    lhs = float(np.abs(ut.values - u.values).max())
    rhs = u.lipschitz() * u.support_radius() * min(t, 1e18)
    slack = 2.0 * C_POINTWISE * pointwise_unit(u, levels)
    return PropertyReport.build(name, lhs, rhs, slack)


def support_containment_check(
    u: SampledGridFunction,
    t: float,
    levels: int = 256,
    axis: int = 0,
    ut: SampledGridFunction | None = None,
    name: str = "support_containment",
) -> PropertyReport:
    """The support never escapes the original support ball (one-cell slack)."""
    if ut is None:
        ut = cst(u, axis, t, levels=levels)
    radius = u.support_radius()
    mask = ut.values > 0.0
    if not mask.any():
        return PropertyReport.build(name, 0.0, 0.0, max(u.spacing))
    pts = u.points()[mask]
    reach = float(np.sqrt((pts * pts).sum(axis=1)).max())
    return PropertyReport.build(name, reach, radius, max(u.spacing))


# -- gradient energies ---------------------------------------------------------


def energy(u: SampledGridFunction, G) -> float:
    """int G(|grad u|) by the midpoint rule with finite-difference gradients."""
    return u.integrate(np.asarray(G(u.gradient_norm())))


def energy_inequality_check(
    u: SampledGridFunction,
    t: float,
    G,
    levels: int = 256,
    axis: int = 0,
    ut: SampledGridFunction | None = None,
    g=None,
    name: str = "energy_inequality",
) -> PropertyReport:
    """Convex gradient energies never increase along the flow."""
    if ut is None:
        ut = cst(u, axis, t, levels=levels)
    lhs = energy(ut, G)
    rhs = energy(u, G)
    slack = _energy_slack(u, G, levels, g)
    return PropertyReport.build(name, lhs, rhs, slack)


def _energy_slack(u: SampledGridFunction, G, levels: int, g=None) -> float:
    L = u.lipschitz()
    if g is None:
        eps = 1e-6 * max(L, 1.0)
        gL = (float(G(L + eps)) - float(G(max(L - eps, 0.0)))) / (2 * eps)
    else:
        gL = float(g(L))
    return C_ENERGY * gL * (1.0 + L) * refinement_unit(u, levels) * _supp_measure(u) ** 0.5


# -- level monotonicity (small-time lemmas) ------------------------------------


def _energy_gap(u, w0, t, G, levels, axis):
    """Energy change of one truncation along the flow, pairing t against 0."""
    wt = cst(w0, axis, t, levels=levels)
    w0q = cst(w0, axis, 0.0, levels=levels)
    return energy(wt, G) - energy(w0q, G)


def monotonicity_in_level_check(
    u: SampledGridFunction,
    t: float,
    gamma0: float,
    gamma1: float,
    G,
    levels: int = 256,
    axis: int = 0,
    g=None,
    name: str = "lemma_level_monotonicity",
) -> PropertyReport:
    """Higher cuts lose no more energy: Delta(gamma0) >= Delta(gamma1) - slack."""
    if not gamma0 >= gamma1 > 0:
        raise ValidationError("need gamma0 >= gamma1 > 0")
    d0 = _energy_gap(u, shift_plus(u, gamma0), t, G, levels, axis)
    d1 = _energy_gap(u, shift_plus(u, gamma1), t, G, levels, axis)
    slack = 2.0 * _energy_slack(u, G, levels, g)
    return PropertyReport.build(name, d1, d0, slack)


def truncated_monotonicity_check(
    u: SampledGridFunction,
    t: float,
    beta1: float,
    beta0: float,
    gamma0: float,
    gamma1: float,
    G,
    levels: int = 256,
    axis: int = 0,
    g=None,
    name: str = "lemma_truncated_monotonicity",
) -> PropertyReport:
    """Two-sided truncation version of the level monotonicity lemma."""
    if not beta1 >= beta0 >= gamma0 >= gamma1 > 0:
        raise ValidationError("need beta1 >= beta0 >= gamma0 >= gamma1 > 0")
    if beta0 <= gamma0 or beta1 <= gamma1:
        raise ValidationError("truncation needs beta > gamma")
    w0 = truncate(u, gamma0, beta0)
    w1 = truncate(u, gamma1, beta1)
    d0 = _energy_gap(u, w0, t, G, levels, axis)
    d1 = _energy_gap(u, w1, t, G, levels, axis)
    slack = 2.0 * _energy_slack(u, G, levels, g)
    return PropertyReport.build(name, d1, d0, slack)


def convexity_surplus_check(
    u: SampledGridFunction,
    t: float,
    gamma: float,
    pair: NonlinearityPair,
    levels: int = 256,
    axis: int = 0,
    ut: SampledGridFunction | None = None,
    name: str = "lemma_convexity_surplus",
) -> PropertyReport:
    """Energy change dominates the pairing change minus the drift change.

    With identical masks and quadrature on both sides the pointwise convexity
    bound G(b) - G(a) >= g(a)(b - a) makes this hold up to roundoff, so the
    slack is a pure roundoff allowance.
    """
    if gamma <= 0:
        raise ValidationError("gamma must be positive")
    if ut is None:
        ut = cst(u, axis, t, levels=levels)
    u0 = cst(u, axis, 0.0, levels=levels)
    gn0 = u0.gradient_norm()
    gnt = ut.gradient_norm()
    mask0 = u0.values > gamma
    maskt = ut.values > gamma
    G, g, h = pair.G, pair.g, pair.h

    energy_change = u.integrate(np.asarray(G(gnt)) * maskt) - u.integrate(np.asarray(G(gn0)) * mask0)
    pairing_change = u.integrate(np.asarray(g(gn0)) * gnt * maskt) - u.integrate(
        np.asarray(g(gn0)) * gn0 * mask0
    )
    drift_change = u.integrate(np.asarray(h(gn0)) * maskt) - u.integrate(np.asarray(h(gn0)) * mask0)
    lhs = pairing_change - drift_change
    scale = abs(energy_change) + abs(pairing_change) + abs(drift_change) + 1.0
    return PropertyReport.build(name, lhs, energy_change, 1e-10 * scale)


# -- boundary flux and the small-t regressions ---------------------------------


def boundary_flux(
    u: SampledGridFunction,
    gamma: float,
    g,
    delta: float | None = None,
    grad_floor: float | None = None,
) -> float:
    """Co-area estimate of the level-surface flux int_{u=gamma} g(|grad u|).

    Averages g(|grad u|) |grad u| over the band {|u - gamma| < delta} and
    divides by the level range the band actually covers (the nominal 2 delta
    is clipped at level 0 and at the maximum).  The default band half-width is
    2 h L, which keeps the band at least two cells thick wherever the gradient
    is at most L.
    """
    if not 0 < gamma:
        raise ValidationError("gamma must be positive")
    if gamma >= u.sup:
        return 0.0
    h = max(u.spacing)
    L = u.lipschitz()
    if delta is None:
        delta = 2.0 * h * L
    lo = max(gamma - delta, 0.0)
    hi = min(gamma + delta, u.sup)
    band = (u.values > lo) & (u.values < hi)
    if not band.any():
        raise DegenerateLevelError(f"empty band around level {gamma}")
    gn = u.gradient_norm()
    floor = grad_floor if grad_floor is not None else 1e-3 * L
    interior = band & (u.values > 0)
    if float(gn[interior].min()) < floor:
        raise DegenerateLevelError(f"vanishing gradient on the band around level {gamma}")
    integral = u.integrate(np.where(band, np.asarray(g(gn)) * gn, 0.0))
    return integral / (hi - lo)


def _fit_line(ts: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and intercept."""
    A = np.vstack([ts, np.ones_like(ts)]).T
    sol, *_ = np.linalg.lstsq(A, ys, rcond=None)
    return float(sol[0]), float(sol[1])


def _interior_critical_level(u: SampledGridFunction, tau: float | None = None) -> float:
    """Smallest value of u over interior critical points; the small-level regime
    of the drift lemmas is only meaningful below this surrogate threshold."""
    gn = u.gradient_norm()
    if tau is None:
        tau = 1e-2 * u.lipschitz()
    mask = (u.values > 0) & (gn <= tau)
    if not mask.any():
        return u.sup
    return float(u.values[mask].min())


def h_drift_check(
    u: SampledGridFunction,
    gamma: float,
    h,
    eps: float,
    t_ladder=DEFAULT_T_LADDER,
    levels: int = 256,
    axis: int = 0,
    beta: float | None = None,
    name: str = "lemma_h_drift",
) -> PropertyReport:
    """Drift of int h(|grad u|) over the moving superlevel set grows at most
    like eps * t.  With ``beta`` the set becomes the band {beta > u > gamma}."""
    if gamma <= 0:
        raise ValidationError("gamma must be positive")
    gn0 = u.gradient_norm()
    hfield = np.asarray(h(gn0))
    ts = np.asarray(sorted(t_ladder), dtype=float)
    base = cst(u, axis, 0.0, levels=levels)

    def band_integral(w: SampledGridFunction) -> float:
        mask = w.values > gamma
        if beta is not None:
            mask &= w.values < beta
        return u.integrate(hfield * mask)

    ref = band_integral(base)
    ys = np.array([band_integral(cst(u, axis, float(t), levels=levels)) - ref for t in ts])
    slope, intercept = _fit_line(ts, ys)
    delta0 = _interior_critical_level(u)
    note = f"gamma={gamma:g} delta0={delta0:g}" + ("" if gamma < delta0 else " (gamma above delta0 surrogate)")
    return PropertyReport.build(name, slope, eps, 0.0, note=note)


DEEP_T_LADDER = tuple(2.0**-k for k in range(10, 17))


def f_pairing_check(
    u: SampledGridFunction,
    gamma: float,
    f,
    eps: float,
    t_ladder=DEEP_T_LADDER,
    levels: int = 256,
    axis: int = 0,
    beta: float | None = None,
    name: str = "lemma_f_pairing",
) -> PropertyReport:
    """Pairing of f(u) against the flow increment stays above -eps * t + o(t).

    When the source term is merely Hoelder continuous the pairing behaves
    like a t + K t^q with q > 1, and an affine fit smears the superlinear
    part into the slope.  The exponent q is therefore estimated from the
    ladder itself and the linear coefficient is read off as the intercept of
    y/t regressed against t^(q-1); the report passes when that coefficient
    exceeds -eps.  With ``beta`` the truncation min(beta, (u - gamma)_+)
    replaces the one-sided cut.
    """
    if gamma <= 0:
        raise ValidationError("gamma must be positive")
    fvals = np.asarray(f(u.values))
    if beta is None:
        w0 = shift_plus(u, gamma)
    else:
        w0 = truncate(u, gamma, beta)
    ts = np.asarray(sorted(t_ladder), dtype=float)
    base = cst(w0, axis, 0.0, levels=levels)
    ys = []
    for t in ts:
        wt = cst(w0, axis, float(t), levels=levels)
        ys.append(u.integrate(fvals * (wt.values - base.values)))
    ys = np.asarray(ys)
    q = float(np.polyfit(np.log(ts), np.log(np.maximum(np.abs(ys), 1e-300)), 1)[0])
    if q > 1.1:
        x = ts ** (q - 1.0)
        A = np.vstack([x, np.ones_like(x)]).T
        sol, *_ = np.linalg.lstsq(A, ys / ts, rcond=None)
        slope = float(sol[1])
        detail = f"superlinear_coeff={sol[0]:.3g} exponent={q:.3f}"
    else:
        slope, intercept = _fit_line(ts, ys)
        detail = f"intercept={intercept:.3e} exponent={q:.3f}"
    delta0 = _interior_critical_level(u)
    note = f"{detail} gamma={gamma:g} delta0={delta0:g}"
    return PropertyReport.build(name, -eps, slope, 0.0, note=note)


# -- the standard battery -------------------------------------------------------


def prop_battery(
    u: SampledGridFunction,
    v: SampledGridFunction,
    t: float,
    levels: int,
    energy_Gs: dict[str, tuple] | None = None,
    axis: int = 0,
) -> list[PropertyReport]:
    """The rearrangement battery: Cavalieri, monotonicity, nonexpansivity
    (p = 1, 2), the L^2 pairing, sup-norm drift, support containment, and the
    energy inequality for each supplied convex integrand."""
    if energy_Gs is None:
        p2 = NonlinearityPair.power(2.0)
        p3 = NonlinearityPair.power(3.0)
        mc = NonlinearityPair.mean_curvature()
        energy_Gs = {
            "energy_quadratic": (p2.G, p2.g),
            "energy_cubic": (p3.G, p3.g),
            "energy_mean_curvature": (mc.G, mc.g),
        }
    ut = cst(u, axis, t, levels=levels)
    vt = cst(v, axis, t, levels=levels)
    lower = u.with_values(np.minimum(u.values, v.values))
    lower_t = cst(lower, axis, t, levels=levels)

    reports = [
        cavalieri_check(u, t, lambda z: z**2, levels, ut=ut, name="cavalieri_square"),
        cavalieri_check(u, t, lambda z: z**3, levels, ut=ut, name="cavalieri_cube"),
        monotonicity_check(lower, u, t, levels, ut=lower_t, vt=ut),
        nonexpansivity_check(u, v, t, 1.0, levels, ut=ut, vt=vt),
        nonexpansivity_check(u, v, t, 2.0, levels, ut=ut, vt=vt),
        hardy_littlewood_check(u, v, t, levels, ut=ut, vt=vt),
        lipschitz_drift_check(u, t, levels, ut=ut),
        support_containment_check(u, t, levels, ut=ut),
    ]
    for label, (G, g) in energy_Gs.items():
        reports.append(energy_inequality_check(u, t, G, levels, ut=ut, g=g, name=label))
    return reports
