"""Discretized locally compact abelian groups and their duals.

A :class:`GroupGrid` is a finite sampling of one of four one-dimensional
group kinds, or a finite product of such factors:

``finite_cyclic(N)``
    Z_N with counting measure (weight 1 per point); self-dual with the
    dual carrying weight 1/N.
``torus(M)``
    M equispaced samples of [0, 1) with total Haar mass 1 (weight 1/M);
    dual is ``truncated_integers(M/2)``.
``truncated_integers(B)``
    the integers -B..B-1 with counting measure; stands in for Z.
``line(step, extent)``
    a centered uniform grid on the real line with weight = step; dual is
    ``line(1/extent, 1/step)``.

The duality pairing is fixed as exp(2*pi*i * x.xi) (with the extra 1/N in
the exponent for the cyclic kind, where coordinates are integers).  Points
are always addressed by index; group products and inverses are index
arithmetic with wrap-around, which is exact for the pairings above because
dual frequencies are integer multiples of the wrap period.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json
import math

import numpy as np

COMPACT_KINDS = ("finite_cyclic", "torus")
FACTOR_KINDS = ("finite_cyclic", "torus", "truncated_integers", "line")


class GridError(ValueError):
    """Raised for malformed grids or incompatible grid pairs."""


@dataclass(frozen=True)
class Factor:
    """One 1-d group factor: sampled points, uniform Haar weight, pairing scale.

    ``phase_scale`` is the factor that multiplies x*xi inside the pairing
    exponent; 1/N for the cyclic kind (integer coordinates), 1 otherwise.
    """

    kind: str
    n: int
    points: np.ndarray = field(repr=False)
    weight: float
    phase_scale: float
    params: tuple

    def descriptor(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "finite_cyclic":
            d["n"] = self.params[0]
            if self.params[1] != 1.0:
                d["weight"] = self.params[1]
        elif self.kind == "torus":
            d["samples"] = self.params[0]
        elif self.kind == "truncated_integers":
            d["band"] = self.params[0]
        else:
            d["step"], d["extent"] = self.params
        return d


def _cyclic_factor(n: int, weight: float = 1.0) -> Factor:
    if n < 1:
        raise GridError(f"finite_cyclic needs n >= 1, got {n}")
    pts = np.arange(n, dtype=float)
    return Factor("finite_cyclic", n, pts, float(weight), 1.0 / n, (n, float(weight)))


def _torus_factor(m: int) -> Factor:
    # m even so the canonical dual band m/2 makes the transform square/unitary
    if m < 2 or m % 2:
        raise GridError(f"torus needs an even sample count >= 2, got {m}")
    pts = np.arange(m, dtype=float) / m
    return Factor("torus", m, pts, 1.0 / m, 1.0, (m,))


def _integers_factor(band: int) -> Factor:
    if band < 1:
        raise GridError(f"truncated_integers needs band >= 1, got {band}")
    pts = np.arange(-band, band, dtype=float)
    return Factor("truncated_integers", 2 * band, pts, 1.0, 1.0, (band,))


def _line_factor(step: float, extent: float) -> Factor:
    if step <= 0 or extent <= 0:
        raise GridError("line grid needs positive step and extent")
    ratio = extent / step
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise GridError(
            f"line grid extent/step must be a positive integer, got {ratio!r}"
        )
    pts = (np.arange(n, dtype=float) - n // 2) * step
    return Factor("line", n, pts, float(step), 1.0, (float(step), float(extent)))


def _dual_factor(f: Factor) -> Factor:
    if f.kind == "finite_cyclic":
        n, w = f.params
        return _cyclic_factor(n, 1.0 / (n * w))
    if f.kind == "torus":
        return _integers_factor(f.params[0] // 2)
    if f.kind == "truncated_integers":
        return _torus_factor(2 * f.params[0])
    step, extent = f.params
    return _line_factor(1.0 / extent, 1.0 / step)


class GroupGrid:
    """A product of sampled group factors, addressed by flat row-major index."""

    def __init__(self, factors):
        factors = tuple(factors)
        if not factors:
            raise GridError("empty product group")
        self.factors = factors
        self.shape = tuple(f.n for f in factors)
        self.size = int(np.prod(self.shape))
        self.ndim = len(factors)
        self.weight_per_point = float(np.prod([f.weight for f in factors]))
        self._coords = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def finite_cyclic(n: int, weight: float = 1.0) -> "GroupGrid":
        return GroupGrid([_cyclic_factor(n, weight)])

    @staticmethod
    def torus(samples: int) -> "GroupGrid":
        return GroupGrid([_torus_factor(samples)])

    @staticmethod
    def truncated_integers(band: int) -> "GroupGrid":
        return GroupGrid([_integers_factor(band)])

    @staticmethod
    def line(step: float, extent: float) -> "GroupGrid":
        return GroupGrid([_line_factor(step, extent)])

    # -- basic structure ---------------------------------------------------

    @property
    def coords(self) -> np.ndarray:
        """(size, ndim) array of point coordinates, row-major over factors."""
        if self._coords is None:
            axes = np.meshgrid(*[f.points for f in self.factors], indexing="ij")
            self._coords = np.stack([a.reshape(-1) for a in axes], axis=1)
        return self._coords

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, self.weight_per_point)

    @property
    def total_mass(self) -> float:
        return self.weight_per_point * self.size

    @property
    def is_compact_kind(self) -> bool:
        return all(f.kind in COMPACT_KINDS for f in self.factors)

    @property
    def is_finite_kind(self) -> bool:
        """True when the grid is an exact finite group (cyclic factors only)."""
        return all(f.kind == "finite_cyclic" for f in self.factors)

    def dual(self) -> "GroupGrid":
        return GroupGrid([_dual_factor(f) for f in self.factors])

    def __eq__(self, other):
        return isinstance(other, GroupGrid) and self.descriptor() == other.descriptor()

    def __repr__(self):
        inner = ",".join(f.kind + str(f.params) for f in self.factors)
        return f"GroupGrid[{inner}]"

    # -- index arithmetic ----------------------------------------------------
    # Group ops act on coordinates; indices are coordinates shifted by the
    # per-factor origin (index of coordinate 0: 0 for cyclic/torus samples,
    # mid-window for truncated/line kinds) and wrap modulo the cardinality.
    # For every dual pair built here the wrap period is invisible to the
    # pairing (frequencies are multiples of 1/period), so the wrap is exact,
    # not an approximation.

    def unravel(self, idx):
        return np.unravel_index(np.asarray(idx), self.shape)

    def ravel(self, multi):
        return np.ravel_multi_index(multi, self.shape, mode="wrap")

    def _origins(self):
        return tuple(
            0 if f.kind == "finite_cyclic" else int(np.argmin(np.abs(f.points)))
            for f in self.factors
        )

    def add_indices(self, i, j):
        mi = self.unravel(i)
        mj = self.unravel(j)
        summed = tuple(
            (a + b - o) % n
            for a, b, o, n in zip(mi, mj, self._origins(), self.shape)
        )
        return np.ravel_multi_index(summed, self.shape)

    def sub_indices(self, i, j):
        """Index of x_i * x_j^{-1} (broadcasting over i, j)."""
        mi = self.unravel(i)
        mj = self.unravel(j)
        diff = tuple(
            (a - b + o) % n
            for a, b, o, n in zip(mi, mj, self._origins(), self.shape)
        )
        return np.ravel_multi_index(diff, self.shape)

    def neg_indices(self, i):
        mi = self.unravel(i)
        neg = tuple(
            (2 * o - a) % n for a, o, n in zip(mi, self._origins(), self.shape)
        )
        return np.ravel_multi_index(neg, self.shape)

    @property
    def identity_index(self) -> int:
        return int(np.ravel_multi_index(self._origins(), self.shape))

    # -- serialization -------------------------------------------------------

    def descriptor(self) -> dict:
        if self.ndim == 1:
            return self.factors[0].descriptor()
        return {"kind": "product", "factors": [f.descriptor() for f in self.factors]}

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)

    @staticmethod
    def from_descriptor(d: dict) -> "GroupGrid":
        kind = d.get("kind")
        if kind == "product":
            subs = [GroupGrid.from_descriptor(s) for s in d["factors"]]
            return product_group(*subs)
        if kind == "finite_cyclic":
            return GroupGrid.finite_cyclic(int(d["n"]), float(d.get("weight", 1.0)))
        if kind == "torus":
            return GroupGrid.torus(int(d["samples"]))
        if kind == "truncated_integers":
            return GroupGrid.truncated_integers(int(d["band"]))
        if kind == "line":
            return GroupGrid.line(float(d["step"]), float(d["extent"]))
        raise GridError(f"unknown grid kind {kind!r}")

    @staticmethod
    def from_json(s: str) -> "GroupGrid":
        return GroupGrid.from_descriptor(json.loads(s))


def product_group(*grids: GroupGrid) -> GroupGrid:
    """Concatenate grids into one product grid (lexicographic indexing)."""
    factors = []
    for g in grids:
        factors.extend(g.factors)
    return GroupGrid(factors)


# -- duality pairing ---------------------------------------------------------


def assert_dual_pair(xgrid: GroupGrid, xigrid: GroupGrid) -> None:
    """Check that xigrid samples the dual of xgrid (band truncation allowed).

    The torus dual may carry any band <= samples/2 (Nyquist); other kinds
    must match the canonical dual exactly.
    """
    if xgrid.ndim != xigrid.ndim:
        raise GridError(
            f"grid pair mismatch: {xgrid.ndim} vs {xigrid.ndim} factors"
        )
    for k, (f, g) in enumerate(zip(xgrid.factors, xigrid.factors)):
        want = _dual_factor(f)
        if g.kind != want.kind:
            raise GridError(
                f"factor {k}: dual of {f.kind} is {want.kind}, got {g.kind}"
            )
        if f.kind == "torus":
            band = g.params[0]
            if band > f.params[0] // 2:
                raise GridError(
                    f"factor {k}: band {band} exceeds Nyquist {f.params[0] // 2}"
                )
        elif g.kind == "line":
            ws, we = want.params
            gs, ge = g.params
            if not (math.isclose(ws, gs, rel_tol=1e-9) and math.isclose(we, ge, rel_tol=1e-9)):
                raise GridError(f"factor {k}: line dual must be step={ws}, extent={we}")
        elif want.params[:1] != g.params[:1]:
            raise GridError(f"factor {k}: size mismatch {want.params} vs {g.params}")


def pairing_phase(xgrid: GroupGrid, xigrid: GroupGrid, x_coords, xi_coords):
    """Pairing phase in turns: pairing = exp(2*pi*i * phase).

    Coordinates are (n, ndim) arrays (or (ndim,) for single points);
    broadcasting applies across leading axes.
    """
    x = np.atleast_2d(np.asarray(x_coords, dtype=float))
    xi = np.atleast_2d(np.asarray(xi_coords, dtype=float))
    scales = np.array([f.phase_scale for f in xgrid.factors])
    return np.squeeze((x * xi * scales).sum(axis=-1))


def pairing(xgrid: GroupGrid, xigrid: GroupGrid, x_idx, xi_idx):
    """Value of the character <x_i, xi_k> = exp(2*pi*i*x.xi), by index."""
    assert_dual_pair(xgrid, xigrid)
    x = xgrid.coords[np.asarray(x_idx)]
    xi = xigrid.coords[np.asarray(xi_idx)]
    ph = pairing_phase(xgrid, xigrid, x, xi)
    return np.exp(2j * np.pi * ph)


def truncated_dual(xgrid: GroupGrid, band: int) -> GroupGrid:
    """Dual grid of a 1-d torus, truncated to |xi| < band (band <= Nyquist)."""
    if xgrid.ndim != 1 or xgrid.factors[0].kind != "torus":
        raise GridError("truncated_dual expects a 1-d torus grid")
    m = xgrid.factors[0].params[0]
    if band > m // 2:
        raise GridError(f"band {band} exceeds Nyquist {m // 2}")
    return GroupGrid.truncated_integers(band)


# -- grid functions ----------------------------------------------------------


@dataclass
class GridFunction:
    """Complex-valued function sampled on a GroupGrid."""

    grid: GroupGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(-1)
        if v.size != self.grid.size:
            raise GridError(
                f"value count {v.size} does not match grid size {self.grid.size}"
            )
        self.values = v

    def norm(self) -> float:
        return float(np.sqrt(self.grid.weight_per_point * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "GridFunction") -> complex:
        return complex(self.grid.weight_per_point * np.vdot(other.values, self.values))

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())
