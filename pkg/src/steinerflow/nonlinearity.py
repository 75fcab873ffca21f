"""Nonlinearity pairs (g, f) with the derived energy density G and drift h.

G is the antiderivative of g and h(z) = z g(z) - G(z).  For the built-in
power and mean-curvature types both derived functions are closed forms; for a
generic g they are tabulated once by adaptive Simpson quadrature and then
interpolated linearly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .validation import ValidationError, check_positive

__all__ = ["NonlinearityPair", "adaptive_simpson"]


def adaptive_simpson(fun: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Classic recursive adaptive Simpson rule with absolute tolerance ``tol``."""

    def simpson(lo, mid, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        flm = fun(lmid)
        frm = fun(rmid)
        left = simpson(lo, lmid, mid, flo, flm, fmid)
        right = simpson(mid, rmid, hi, fmid, frm, fhi)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return recurse(lo, mid, flo, flm, fmid, left, eps / 2.0, depth - 1) + recurse(
            mid, hi, fmid, frm, fhi, right, eps / 2.0, depth - 1
        )

    if a == b:
        return 0.0
    fa, fb = fun(a), fun(b)
    m = 0.5 * (a + b)
    fm = fun(m)
    whole = simpson(a, m, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 40)


def _vectorize(fn):
    def wrapped(z):
        z = np.asarray(z, dtype=float)
        return fn(z)

    return wrapped


@dataclass(frozen=True)
class NonlinearityPair:
    """The flux nonlinearity g, source term f, and the derived G and h."""

    g: Callable
    G: Callable
    h: Callable
    f: Callable | None = None
    f_jumps: tuple[float, ...] = ()
    label: str = "custom"

    # -- constructors -------------------------------------------------------

    @classmethod
    def power(cls, p: float, f: Callable | None = None, f_jumps=()) -> "NonlinearityPair":
        """g(z) = z^(p-1) for p > 1; G = z^p / p, h = z^p (p-1)/p."""
        p = float(p)
        if p <= 1:
            raise ValidationError(f"power type needs p > 1, got {p}")
        g = _vectorize(lambda z: z ** (p - 1.0))
        G = _vectorize(lambda z: z**p / p)
        h = _vectorize(lambda z: z**p * (p - 1.0) / p)
        return cls(g=g, G=G, h=h, f=f, f_jumps=tuple(f_jumps), label=f"power(p={p:g})")

    @classmethod
    def mean_curvature(cls, f: Callable | None = None, f_jumps=()) -> "NonlinearityPair":
        """g(z) = z / sqrt(1 + z^2); G = sqrt(1 + z^2) - 1, h = 1 - 1/sqrt(1 + z^2)."""
        g = _vectorize(lambda z: z / np.sqrt(1.0 + z * z))
        G = _vectorize(lambda z: np.sqrt(1.0 + z * z) - 1.0)
        h = _vectorize(lambda z: 1.0 - 1.0 / np.sqrt(1.0 + z * z))
        return cls(g=g, G=G, h=h, f=f, f_jumps=tuple(f_jumps), label="mean_curvature")

    @classmethod
    def from_g(
        cls,
        g: Callable,
        f: Callable | None = None,
        f_jumps=(),
        z_max: float = 16.0,
        nodes: int = 4096,
        tol: float = 1e-10,
    ) -> "NonlinearityPair":
        """Derive G by cumulative adaptive Simpson on a table, interpolated linearly."""
        z_max = check_positive(z_max, "z_max")
        grid = np.linspace(0.0, z_max, int(nodes) + 1)
        pieces = np.empty(grid.size)
        pieces[0] = 0.0
        per_tol = tol / nodes
        for i in range(1, grid.size):
            pieces[i] = adaptive_simpson(lambda z: float(g(z)), grid[i - 1], grid[i], per_tol)
        table = np.cumsum(pieces)

        def G(z):
            z = np.asarray(z, dtype=float)
            if np.any(z > z_max):
                raise ValidationError(f"tabulated G only covers [0, {z_max}]")
            return np.interp(z, grid, table)

        gv = _vectorize(g)

        def h(z):
            z = np.asarray(z, dtype=float)
            return z * gv(z) - G(z)

        return cls(g=gv, G=G, h=h, f=f, f_jumps=tuple(f_jumps), label="tabulated")

    # -- validation ----------------------------------------------------------

    def validate(self, z_max: float = 8.0, samples: int = 1000) -> None:
        """Check the structural assumptions on a sampled grid; raise on violation.

        g must vanish at 0 and strictly increase, G must vanish at 0 and pass a
        midpoint convexity test, and h must be nondecreasing.
        """
        z = np.linspace(0.0, z_max, samples)
        gz = np.asarray(self.g(z), dtype=float)
        if abs(gz[0]) > 1e-12:
            raise ValidationError(f"g(0) must be 0, got {gz[0]!r}")
        if np.any(np.diff(gz) <= 0):
            raise ValidationError("g must be strictly increasing")
        Gz = np.asarray(self.G(z), dtype=float)
        if abs(Gz[0]) > 1e-12:
            raise ValidationError(f"G(0) must be 0, got {Gz[0]!r}")
        mid = 0.5 * (Gz[:-2] + Gz[2:])
        if np.any(Gz[1:-1] > mid + 1e-10 * (1.0 + np.abs(mid))):
            raise ValidationError("G failed the midpoint convexity test")
        hz = np.asarray(self.h(z), dtype=float)
        if np.any(np.diff(hz) < -1e-10 * (1.0 + np.abs(hz[:-1]))):
            raise ValidationError("h must be nondecreasing")
