"""At-infinity functionals sampled along filter bases.

A *filter base* stands in for "xi -> infinity along F": for every scale t it
produces sample points from the base element at that scale (radius > t, plus
whatever constraint the base adds: a shrinking cone, the complement of a
thickened set, a full-density set).  Scalar functionals (limsup, liminf)
sample over a geometric ladder of scales and extrapolate the per-scale
extremes with a + b / sqrt(t); field variants batch the fit over the x fiber.

Direction fans always contain the signed coordinate axes and the distinguished
direction of a directional base: sups of anisotropic functions are routinely
attained on measure-zero rays, and a fan that misses those rays under-reports
the limsup no matter how many points it spends.

Sampled sups are lower bounds for the true sups (sampled infs: upper bounds);
a bounded 1-d polish along the best rays closes most of the gap for smooth
integrands.  Verdicts derived from these numbers are evidence, not proofs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .groups import GroupGrid
from .sampling import _norm_ppf, annulus, kronecker, log_radii
from .symbols import (
    Symbol,
    ThickenedSet,
    halfline_set,
    parabola_graph,
    syndetic_thickening_filter_data,
)


class AsymptoticsError(ValueError):
    """Raised for unusable schedules or collapsing filter bases."""


DEFAULT_SCALES = (1e2, 1e3, 1e4, 1e5, 1e6)


@dataclass(frozen=True)
class SamplingSchedule:
    """Geometric ladder of scales plus the per-scale sampling budget."""

    scales: tuple = DEFAULT_SCALES
    points_per_scale: int = 10000
    span: float = 10.0
    seed: int = 0

    def __post_init__(self):
        s = tuple(float(x) for x in self.scales)
        if not s or s[0] <= 0 or any(a >= b for a, b in zip(s, s[1:])):
            raise AsymptoticsError("scales must be positive and strictly increasing")
        if self.points_per_scale < 16:
            raise AsymptoticsError("need at least 16 points per scale")
        object.__setattr__(self, "scales", s)

    def reduced(self, factor: int = 10) -> "SamplingSchedule":
        return SamplingSchedule(
            self.scales, max(self.points_per_scale // factor, 64), self.span, self.seed
        )


# -- filter bases -----------------------------------------------------------------


class FilterBase:
    """Sampler plus membership test for the base elements of a filter."""

    label = "base"
    dim = 1

    def sample(self, scale: float, n: int, span: float, seed: int) -> np.ndarray:
        raise NotImplementedError

    def mask(self, pts: np.ndarray, scale: float) -> np.ndarray:
        raise NotImplementedError


class StandardBase(FilterBase):
    """Complements of balls: |xi| > t."""

    def __init__(self, dim: int, extra_directions=None):
        self.dim = int(dim)
        self.extra_directions = extra_directions
        self.label = f"standard({self.dim}d)"

    def sample(self, scale, n, span, seed):
        return annulus(
            scale, scale * span, self.dim, n, seed, extra_directions=self.extra_directions
        )

    def mask(self, pts, scale):
        return np.linalg.norm(pts, axis=1) > scale


class DirectionalBase(FilterBase):
    """Shrinking cones: |xi| > t and angle(xi, omega0) <= aperture(t)."""

    def __init__(self, omega0, aperture=None):
        w = np.asarray(omega0, dtype=float).reshape(-1)
        nw = np.linalg.norm(w)
        if nw == 0:
            raise AsymptoticsError("omega0 must be nonzero")
        self.omega0 = w / nw
        self.dim = len(w)
        self.aperture = aperture or (lambda t: 1.0 / t)
        self.label = f"directional({np.round(self.omega0, 6).tolist()})"
        if self.dim > 1:
            proj = np.eye(self.dim) - np.outer(self.omega0, self.omega0)
            u, _, _ = np.linalg.svd(proj)
            self._perp = u[:, : self.dim - 1].T  # orthonormal complement rows

    def sample(self, scale, n, span, seed):
        if self.dim == 1:
            r = log_radii(scale, scale * span, n, seed)
            return (self.omega0[0] * r)[:, None]
        ndir = max(int(math.sqrt(n)), 8)
        nrad = max(n // ndir, 4)
        r = log_radii(scale, scale * span, nrad, seed + 7)
        a = float(self.aperture(scale))
        u = kronecker(ndir - 1, 1, seed)[:, 0]
        if self.dim == 2:
            theta = a * (2 * u - 1)
            perp = np.tile(self._perp[0], (ndir - 1, 1))
        else:
            theta = a * u
            g = _norm_ppf(kronecker(ndir - 1, self.dim - 1, seed + 11))
            perp = g @ self._perp
            nrm = np.linalg.norm(perp, axis=1, keepdims=True)
            nrm[nrm == 0] = 1.0
            perp /= nrm
        dirs = np.concatenate(
            [
                self.omega0[None, :],  # the distinguished ray, exactly
                np.cos(theta)[:, None] * self.omega0[None, :]
                + np.sin(theta)[:, None] * perp,
            ]
        )
        return (r[None, :, None] * dirs[:, None, :]).reshape(-1, self.dim)

    def mask(self, pts, scale):
        rr = np.linalg.norm(pts, axis=1)
        safe = np.where(rr == 0, 1.0, rr)
        cosang = (pts @ self.omega0) / safe
        return (rr > scale) & (cosang >= math.cos(float(self.aperture(scale))) - 1e-12)


class ThickenedComplementBase(FilterBase):
    """Complements of growing thickenings of a closed set E: dist(xi, E) > s(t)."""

    def __init__(self, E: ThickenedSet):
        self.E = E
        self.dim = E.dim
        self.label = f"ethick({E.label})"

    def sample(self, scale, n, span, seed):
        radius = self.E.complement_radius(scale)
        kept, total = [], 0
        for round_ in range(8):
            pts = annulus(scale, scale * span, self.dim, n, seed + 131 * round_)
            kept.append(pts[self.E.distance(pts) > radius])
            total += len(pts)
            if sum(len(k) for k in kept) >= n:
                break
        out = np.concatenate(kept) if kept else np.empty((0, self.dim))
        if len(out) < max(16, n // 100):
            raise AsymptoticsError(
                f"filter base {self.label} is (nearly) empty at scale {scale:g}: "
                f"{len(out)} of {total} samples survive the thickening -- the "
                "thickened set appears to swallow every neighborhood of infinity"
            )
        return out[:n]

    def mask(self, pts, scale):
        return (np.linalg.norm(pts, axis=1) > scale) & (
            self.E.distance(pts) > self.E.complement_radius(scale)
        )


class DensityBase(FilterBase):
    """The annulus minus an exceptional set; the sampled density of what is
    kept must stay above 1 - 1/sqrt(t), otherwise the base is rejected."""

    def __init__(self, dim: int, exceptional=None, min_density=None):
        self.dim = int(dim)
        self.exceptional = exceptional
        self.min_density = min_density or (lambda t: 1.0 - t**-0.5)
        self.label = "density" if exceptional is None else "density(-exceptional)"

    def sample(self, scale, n, span, seed):
        pts = annulus(scale, scale * span, self.dim, n, seed)
        if self.exceptional is None:
            return pts
        keep = ~np.asarray(self.exceptional(pts), dtype=bool)
        dens = float(keep.mean()) if len(keep) else 0.0
        if dens < self.min_density(scale):
            raise AsymptoticsError(
                f"exceptional set too thick at scale {scale:g}: kept density "
                f"{dens:.4f} < required {self.min_density(scale):.4f}"
            )
        return pts[keep]

    def mask(self, pts, scale):
        ok = np.linalg.norm(pts, axis=1) > scale
        if self.exceptional is not None:
            ok &= ~np.asarray(self.exceptional(pts), dtype=bool)
        return ok


class IntersectionBase(FilterBase):
    """Pointwise intersection: sample the first base, keep what all accept."""

    def __init__(self, *parts):
        if not parts:
            raise AsymptoticsError("intersection of no bases")
        if len({p.dim for p in parts}) != 1:
            raise AsymptoticsError("intersection parts disagree on dimension")
        self.parts = parts
        self.dim = parts[0].dim
        self.label = "intersection(" + ", ".join(p.label for p in parts) + ")"

    def sample(self, scale, n, span, seed):
        pts = self.parts[0].sample(scale, n, span, seed)
        keep = np.ones(len(pts), dtype=bool)
        for p in self.parts[1:]:
            keep &= p.mask(pts, scale)
        if keep.sum() < max(8, n // 200):
            raise AsymptoticsError(f"intersection base empty at scale {scale:g}")
        return pts[keep]

    def mask(self, pts, scale):
        out = np.ones(len(pts), dtype=bool)
        for p in self.parts:
            out &= p.mask(pts, scale)
        return out


def base_from_config(spec, dim: int) -> FilterBase:
    """Filter base from the config wire format (string or mapping)."""
    if spec is None or spec == "standard":
        return StandardBase(dim)
    if isinstance(spec, str):
        raise AsymptoticsError(f"unknown filter base {spec!r}")
    kind = spec.get("kind", "standard")
    if kind == "standard":
        return StandardBase(dim, extra_directions=spec.get("extra_directions"))
    if kind == "directional":
        ap = float(spec.get("aperture_scale", 1.0))
        return DirectionalBase(spec["omega0"], aperture=lambda t: ap / t)
    if kind == "ethick":
        shape = spec.get("set", "halfline")
        if shape == "halfline":
            E = halfline_set(float(spec.get("a", 0.0)))
        elif shape == "parabola":
            E = parabola_graph()
        else:
            raise AsymptoticsError(f"unknown thickened set {shape!r}")
        return ThickenedComplementBase(syndetic_thickening_filter_data(E))
    if kind == "density":
        return DensityBase(dim)
    if kind == "intersection":
        return IntersectionBase(*(base_from_config(p, dim) for p in spec["parts"]))
    raise AsymptoticsError(f"unknown filter base kind {kind!r}")


# -- extrapolation ------------------------------------------------------------------


def fit_inverse_sqrt(scales, values):
    """Least squares value(t) ~ a + b/sqrt(t).

    Returns (a, b, max_residual, rel_residual); a is the t -> infinity limit.
    """
    t = np.asarray(scales, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.size == 1:
        return float(y[0]), 0.0, 0.0, 0.0
    A = np.stack([np.ones_like(t), t**-0.5], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.max(np.abs(A @ coef - y)))
    rel = resid / max(1e-12, float(np.max(np.abs(y))))
    return float(coef[0]), float(coef[1]), resid, rel


@dataclass
class AsymptoticFit:
    label: str
    kind: str  # "sup" | "inf"
    scales: tuple
    per_scale: np.ndarray
    value: float  # extrapolated t -> infinity
    slope: float
    residual: float
    rel_residual: float

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "kind": self.kind,
            "scales": list(self.scales),
            "per_scale": [float(v) for v in self.per_scale],
            "value": self.value,
            "slope": self.slope,
            "residual": self.residual,
            "rel_residual": self.rel_residual,
        }


def _polish_span(n: int, dim: int, span: float) -> float:
    # geometric bracket covering a few sample gaps along a ray
    nrad = max(n // 2, 1) if dim == 1 else max(n // max(int(math.sqrt(n)), 8), 4)
    return float(min(max(span ** (4.0 / nrad), 1.001), span))


def _refine_ray_extremum(phi, pts, vals, maximize: bool, q: float, top: int = 6) -> float:
    """Polish the sampled extremum by bounded search along candidate rays."""
    s = 1.0 if maximize else -1.0
    sv = s * np.asarray(vals, dtype=float)
    best = float(np.max(sv))
    order = np.argsort(sv)[-top:]
    radii = np.linalg.norm(pts, axis=1)
    for i in order:
        r0 = radii[i]
        if r0 <= 0:
            continue
        u = pts[i] / r0
        res = minimize_scalar(
            lambda r: -s * float(np.real(phi((r * u)[None, :])[0])),
            bounds=(r0 / q, r0 * q),
            method="bounded",
            options={"xatol": max(r0 * 1e-12, 1e-12)},
        )
        best = max(best, -float(res.fun))
    return s * best


def limsup_along(
    phi,
    base: FilterBase,
    schedule: SamplingSchedule | None = None,
    polish: bool = True,
    label: str = "limsup",
) -> AsymptoticFit:
    """Extrapolated limsup of the real functional phi along the filter base."""
    sched = schedule or SamplingSchedule()
    q = _polish_span(sched.points_per_scale, base.dim, sched.span)
    sups = []
    for k, t in enumerate(sched.scales):
        pts = base.sample(t, sched.points_per_scale, sched.span, sched.seed + 977 * k)
        vals = np.real(np.asarray(phi(pts)))
        sups.append(
            _refine_ray_extremum(phi, pts, vals, True, q) if polish else float(vals.max())
        )
    sups = np.array(sups)
    a, b, resid, rel = fit_inverse_sqrt(sched.scales, sups)
    return AsymptoticFit(label, "sup", sched.scales, sups, a, b, resid, rel)


def liminf_along(phi, base, schedule=None, polish=True, label="liminf"):
    neg = limsup_along(
        lambda p: -np.real(np.asarray(phi(p))), base, schedule, polish, label
    )
    return AsymptoticFit(
        label, "inf", neg.scales, -neg.per_scale, -neg.value, -neg.slope,
        neg.residual, neg.rel_residual,
    )


# -- per-fiber fields ----------------------------------------------------------------


def _require_noncompact_dual(grid: GroupGrid):
    if grid.is_compact_kind:
        raise AsymptoticsError(
            "dual group grid is of compact kind: no neighborhood of infinity to sample"
        )


def _x_subsample(n: int, limit: int = 512) -> np.ndarray:
    if n <= limit:
        return np.arange(n)
    return np.unique(np.linspace(0, n - 1, limit).astype(int))


def modulus_field(
    symbol: Symbol,
    base: FilterBase,
    schedule: SamplingSchedule | None = None,
    mode: str = "limsup",
    x_idx=None,
    polish_extremal: int = 3,
    prefer_tensor: bool = True,
):
    """Per-fiber limsup (or liminf) of |f(x, .)| along the base.

    Returns (x_idx, values).  Single-term tensor symbols factor exactly; the
    generic path batches the per-scale extremes over shared sample points and
    then re-polishes the fibers where the min over x is attained (the sampled
    sup is a lower bound, so the reported min over x may sit slightly low).
    """
    if mode not in ("limsup", "liminf"):
        raise AsymptoticsError(f"unknown field mode {mode!r}")
    _require_noncompact_dual(symbol.xigrid)
    sched = schedule or SamplingSchedule()
    if x_idx is None:
        x_idx = _x_subsample(symbol.xgrid.size)
    x_idx = np.asarray(x_idx, dtype=int)
    maximize = mode == "limsup"
    terms = symbol.tensor_terms
    if prefer_tensor and terms is not None and len(terms) == 1:
        gv, psi = terms[0]
        mod = lambda p: np.abs(psi(p))
        f = limsup_along(mod, base, sched) if maximize else liminf_along(mod, base, sched)
        return x_idx, np.abs(gv[x_idx]) * f.value
    K = len(sched.scales)
    per_scale = np.empty((K, len(x_idx)))
    pts_cache = []
    for k, t in enumerate(sched.scales):
        pts = base.sample(t, sched.points_per_scale, sched.span, sched.seed + 977 * k)
        pts_cache.append(pts)
        ext = np.empty(len(x_idx))
        for s in range(0, len(x_idx), 64):
            block = np.abs(symbol.eval_outer(x_idx[s : s + 64], pts))
            ext[s : s + 64] = block.max(axis=1) if maximize else block.min(axis=1)
        per_scale[k] = ext
    A = np.stack([np.ones(K), np.asarray(sched.scales) ** -0.5], axis=1)
    coef, *_ = np.linalg.lstsq(A, per_scale, rcond=None)
    values = coef[0].copy()
    if polish_extremal:
        q = _polish_span(sched.points_per_scale, base.dim, sched.span)
        for j in np.argsort(values)[:polish_extremal]:
            xi = int(x_idx[j])
            phi_x = lambda p, _xi=xi: np.abs(symbol.eval_outer([_xi], p))[0]
            exts = [
                _refine_ray_extremum(phi_x, pts_cache[k], phi_x(pts_cache[k]), maximize, q)
                for k in range(K)
            ]
            values[j] = fit_inverse_sqrt(sched.scales, exts)[0]
    return x_idx, values


def gohberg_rhs_maxform(
    symbol: Symbol,
    base: FilterBase,
    schedule: SamplingSchedule | None = None,
    prefer_tensor: bool = True,
    polish: bool = True,
    label: str = "maxform",
) -> AsymptoticFit:
    """limsup along the base of sup over x of |f(x, xi)|."""
    _require_noncompact_dual(symbol.xigrid)
    sched = schedule or SamplingSchedule()
    terms = symbol.tensor_terms
    if prefer_tensor and terms is not None and len(terms) == 1:
        gv, psi = terms[0]
        f = limsup_along(lambda p: np.abs(psi(p)), base, sched, polish=polish, label=label)
        g = float(np.max(np.abs(gv)))
        return AsymptoticFit(
            label, "sup", f.scales, g * f.per_scale, g * f.value, g * f.slope,
            g * f.residual, f.rel_residual,
        )
    x_idx = _x_subsample(symbol.xgrid.size)

    def envelope(p):
        out = None
        for s in range(0, len(x_idx), 64):
            b = np.abs(symbol.eval_outer(x_idx[s : s + 64], p)).max(axis=0)
            out = b if out is None else np.maximum(out, b)
        return out

    return limsup_along(envelope, base, sched, polish=polish, label=label)


def gohberg_rhs_minform(
    symbol: Symbol,
    base: FilterBase,
    schedule: SamplingSchedule | None = None,
    prefer_tensor: bool = True,
):
    """min over x of limsup along the base of |f(x, .)|; returns (value, x_index)."""
    x_idx, vals = modulus_field(
        symbol, base, schedule, mode="limsup", prefer_tensor=prefer_tensor
    )
    j = int(np.argmin(vals))
    return float(vals[j]), int(x_idx[j])


def fredholm_floor(
    symbol: Symbol,
    base: FilterBase,
    schedule: SamplingSchedule | None = None,
    prefer_tensor: bool = True,
):
    """min over x of liminf along the base of |f(x, .)|; returns (value, x_index).

    This is the quantity whose strict positivity pushes invertibility out to
    infinity; it is clamped at zero since it estimates a modulus.
    """
    x_idx, vals = modulus_field(
        symbol, base, schedule, mode="liminf", prefer_tensor=prefer_tensor
    )
    j = int(np.argmin(vals))
    return float(max(vals[j], 0.0)), int(x_idx[j])


# -- cluster sets --------------------------------------------------------------------


@dataclass
class ClusterSet:
    """eps-raster cells of values persisting at every scale of the schedule."""

    eps: float
    cells: np.ndarray  # (m, 2) integer cell coordinates of (re, im)
    zero_added: bool
    label: str

    @property
    def centers(self) -> np.ndarray:
        return self.cells[:, 0] * self.eps + 1j * self.cells[:, 1] * self.eps

    @property
    def max_abs(self) -> float:
        return float(np.abs(self.centers).max()) if len(self.cells) else 0.0

    def contains_value(self, z: complex, slack: int = 1) -> bool:
        if not len(self.cells):
            return False
        z = complex(z)
        cz = np.array([round(z.real / self.eps), round(z.imag / self.eps)])
        return bool((np.abs(self.cells - cz[None, :]).max(axis=1) <= slack).any())

    def covers_real_interval(self, a: float, b: float, slack: int = 1) -> bool:
        lo, hi = int(round(a / self.eps)), int(round(b / self.eps))
        return all(self.contains_value(c * self.eps, slack) for c in range(lo, hi + 1))

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "cells": self.cells.tolist(),
            "zero_added": self.zero_added,
            "max_abs": self.max_abs,
            "label": self.label,
        }


_NEIGHBORHOOD = np.array(
    [[i, j] for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=np.int64
)


def _raster(vals: np.ndarray, eps: float) -> np.ndarray:
    cells = np.stack(
        [np.round(vals.real / eps), np.round(vals.imag / eps)], axis=1
    ).astype(np.int64)
    return np.unique(cells, axis=0)


def _dilate(cells: np.ndarray) -> np.ndarray:
    grown = (cells[:, None, :] + _NEIGHBORHOOD[None, :, :]).reshape(-1, 2)
    return np.unique(grown, axis=0)


def cluster_set(
    symbol: Symbol,
    base: FilterBase,
    schedule: SamplingSchedule | None = None,
    eps: float = 0.05,
    x_limit: int = 512,
    label: str = "cluster",
) -> ClusterSet:
    """eps-raster of the symbol values attained near infinity at every scale.

    Each scale's cell set is dilated by one cell before intersecting, so a
    value drifting across a cell boundary between scales is not dropped.  A
    zero cell is appended when the x group is non-compact (escape in x).
    """
    _require_noncompact_dual(symbol.xigrid)
    sched = schedule or SamplingSchedule()
    x_idx = _x_subsample(symbol.xgrid.size, x_limit)
    common = None
    for k, t in enumerate(sched.scales):
        pts = base.sample(t, sched.points_per_scale, sched.span, sched.seed + 977 * k)
        cells = []
        for s in range(0, len(x_idx), 64):
            vals = symbol.eval_outer(x_idx[s : s + 64], pts).ravel()
            cells.append(_raster(vals, eps))
        cells = _dilate(np.unique(np.concatenate(cells), axis=0))
        cset = set(map(tuple, cells.tolist()))
        common = cset if common is None else (common & cset)
    zero_added = not symbol.xgrid.is_compact_kind
    if zero_added:
        common.add((0, 0))
    out = (
        np.array(sorted(common), dtype=np.int64) if common else np.empty((0, 2), np.int64)
    )
    return ClusterSet(eps, out, zero_added, label)
