"""Nonnegative functions sampled on uniform N-dimensional grids, plus SGF I/O.

The SGF file format is line oriented text:

    SGF1
    dim N
    shape n1 ... nN
    origin o1 ... oN
    spacing h1 ... hN
    lipschitz L          (or: lipschitz unknown)
    <prod(ni) floats, row-major, last axis fastest>

Floats are serialized with 17 significant digits so write -> read round-trips
are bit exact at double precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import ValidationError, check_axis

__all__ = ["SampledGridFunction", "read_sgf", "write_sgf"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class SampledGridFunction:
    """A nonnegative sampled function with compact support inside its grid box.

    Values must vanish on every boundary face of the grid so that superlevel
    sets stay strictly inside the box.  Instances are immutable; derived
    functions are produced through :meth:`with_values`.
    """

    values: np.ndarray
    origin: tuple[float, ...]
    spacing: tuple[float, ...]
    lipschitz_hint: float | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim < 1:
            raise ValidationError("values must have at least one dimension")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("values must be finite")
        if vals.min() < 0:
            raise ValidationError("values must be nonnegative")
        origin = tuple(float(o) for o in np.atleast_1d(self.origin))
        spacing = tuple(float(h) for h in np.atleast_1d(self.spacing))
        if len(origin) != vals.ndim or len(spacing) != vals.ndim:
            raise ValidationError("origin and spacing must match the value dimensions")
        if any(h <= 0 for h in spacing):
            raise ValidationError("spacing must be positive")
        for axis in range(vals.ndim):
            face = np.moveaxis(vals, axis, 0)
            if np.any(face[0] != 0.0) or np.any(face[-1] != 0.0):
                raise ValidationError(
                    f"values must vanish on the grid boundary (axis {axis} face is nonzero)"
                )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        if self.lipschitz_hint is not None:
            lh = float(self.lipschitz_hint)
            if not np.isfinite(lh) or lh < 0:
                raise ValidationError("lipschitz_hint must be a finite nonnegative real")
            object.__setattr__(self, "lipschitz_hint", lh)

    # -- geometry ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def sup(self) -> float:
        return float(self.values.max())

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def coords(self, axis: int) -> np.ndarray:
        axis = check_axis(axis, self.dim)
        n = self.shape[axis]
        return self.origin[axis] + self.spacing[axis] * np.arange(n)

    def meshgrid(self) -> list[np.ndarray]:
        axes = [self.coords(k) for k in range(self.dim)]
        return np.meshgrid(*axes, indexing="ij")

    def points(self) -> np.ndarray:
        """All node coordinates as an array of shape ``shape + (dim,)``."""
        return np.stack(self.meshgrid(), axis=-1)

    # -- derived quantities --------------------------------------------------

    def with_values(self, values: np.ndarray, lipschitz_hint: float | None = None) -> "SampledGridFunction":
        hint = self.lipschitz_hint if lipschitz_hint is None else lipschitz_hint
        return SampledGridFunction(values, self.origin, self.spacing, hint)

    def integrate(self, field: np.ndarray | None = None) -> float:
        """Midpoint-rule integral of ``field`` (default: the values) over the box."""
        data = self.values if field is None else np.asarray(field)
        return float(data.sum() * self.cell_volume)

    def gradient(self) -> list[np.ndarray]:
        """Central differences inside, one-sided on the box faces."""
        return list(np.gradient(self.values, *self.spacing, edge_order=1))

    def gradient_norm(self) -> np.ndarray:
        grads = self.gradient()
        out = np.zeros_like(self.values)
        for g in grads:
            out += g * g
        return np.sqrt(out)

    def support_mask(self) -> np.ndarray:
        return self.values > 0.0

    def support_radius(self) -> float:
        """Largest node distance from the coordinate origin over the support."""
        mask = self.support_mask()
        if not mask.any():
            return 0.0
        pts = self.points()[mask]
        return float(np.sqrt((pts * pts).sum(axis=1)).max())

    def lipschitz(self) -> float:
        """The declared Lipschitz bound, or the max finite-difference gradient."""
        if self.lipschitz_hint is not None:
            return self.lipschitz_hint
        return float(self.gradient_norm().max())


# -- SGF serialization ------------------------------------------------------


def write_sgf(u: SampledGridFunction, path_or_file) -> None:
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", encoding="ascii") if own else path_or_file
    try:
        fh.write("SGF1\n")
        fh.write(f"dim {u.dim}\n")
        fh.write("shape " + " ".join(str(n) for n in u.shape) + "\n")
        fh.write("origin " + " ".join(_fmt(o) for o in u.origin) + "\n")
        fh.write("spacing " + " ".join(_fmt(h) for h in u.spacing) + "\n")
        if u.lipschitz_hint is None:
            fh.write("lipschitz unknown\n")
        else:
            fh.write(f"lipschitz {_fmt(u.lipschitz_hint)}\n")
        flat = u.values.reshape(u.shape[0], -1) if u.dim > 1 else u.values.reshape(1, -1)
        for row in flat:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")
    finally:
        if own:
            fh.close()


def _expect(line: str, key: str) -> list[str]:
    parts = line.split()
    if not parts or parts[0] != key:
        raise ValidationError(f"malformed SGF file: expected '{key}' line, got {line!r}")
    return parts[1:]


def read_sgf(path_or_file) -> SampledGridFunction:
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "r", encoding="ascii") if own else path_or_file
    try:
        magic = fh.readline().strip()
        if magic != "SGF1":
            raise ValidationError(f"not an SGF file (magic {magic!r})")
        dim = int(_expect(fh.readline(), "dim")[0])
        shape = tuple(int(s) for s in _expect(fh.readline(), "shape"))
        origin = tuple(float(s) for s in _expect(fh.readline(), "origin"))
        spacing = tuple(float(s) for s in _expect(fh.readline(), "spacing"))
        lip_tok = _expect(fh.readline(), "lipschitz")[0]
        lipschitz = None if lip_tok == "unknown" else float(lip_tok)
        if len(shape) != dim or len(origin) != dim or len(spacing) != dim:
            raise ValidationError("inconsistent SGF header")
        count = int(np.prod(shape))
        data = np.array(fh.read().split(), dtype=float)
        if data.size != count:
            raise ValidationError(f"SGF payload has {data.size} values, expected {count}")
        return SampledGridFunction(data.reshape(shape), origin, spacing, lipschitz)
    finally:
        if own:
            fh.close()
