"""Symbols f(x, xi) and the function-class diagnostics attached to them.

A :class:`Symbol` is bound to a grid pair (X, Xi) and is materializable as a
table; closure-backed symbols can in addition be evaluated at dual points far
beyond the grid band, which is what every at-infinity functional needs (the
tail behaviour of f is simply not present in a finite table).

The built-in families cover the behaviours the spectral experiments probe:

* tensor products gamma(x) * psi(xi), the workhorse (multiplication times
  convolution on the operator side);
* radial waves sin(beta(|xi|)) with beta' -> 0: bounded oscillating symbols
  whose oscillation dies out at infinity ("vanishing oscillation");
* directional decay exp(-|<xi, omega>|): decay in a cone, none globally;
* compactly-concentrated and Cesaro-null families for the smaller ideals.

Verdicts produced here (oscillation PASS/FAIL, Cesaro membership) are
advisory diagnostics: they sample tails, they do not prove membership.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .fourier import PhaseFunction, partial_fourier_1
from .groups import GridError, GridFunction, GroupGrid, assert_dual_pair
from .sampling import annulus, log_radii


class SymbolError(ValueError):
    """Raised for ill-posed symbol constructions or evaluations."""


def _pts2d(pts) -> np.ndarray:
    p = np.asarray(pts, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    return p


def _radial(pts2d) -> np.ndarray:
    return np.linalg.norm(pts2d, axis=1)


# -- dual-variable closures ----------------------------------------------------


@dataclass
class DualClosure:
    """A function of the dual variable, evaluable at arbitrary points.

    ``fun`` maps an (n, d) float array to complex values (n,).  ``sup_bound``
    is a declared bound on |psi|; built-ins keep it tight.
    """

    fun: object
    sup_bound: float
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __call__(self, pts) -> np.ndarray:
        return np.asarray(self.fun(_pts2d(pts)), dtype=complex)


def constant_closure(c: complex) -> DualClosure:
    c = complex(c)
    return DualClosure(lambda p: np.full(len(p), c), abs(c), f"const({c})")


def vo_symbol(beta, beta_prime=None, name: str = "sin(beta(|xi|))") -> DualClosure:
    """Radial wave psi(xi) = sin(beta(|xi|)).

    ``beta`` must come with its derivative: the oscillation bound
    |psi(xi + z) - psi(xi)| <= |z| * sup |beta'| is the whole point of the
    family, and the diagnostics use it.
    """
    if beta_prime is None:
        raise SymbolError("vo_symbol requires the derivative of beta")
    return DualClosure(
        lambda p: np.sin(beta(_radial(p))).astype(complex),
        1.0,
        name,
        meta={"beta": beta, "beta_prime": beta_prime, "radial_wave": True},
    )


def power_wave(alpha: float) -> DualClosure:
    """sin(|xi|^alpha); oscillation dies out iff alpha < 1."""
    return vo_symbol(
        lambda r: r**alpha,
        lambda r: alpha * np.maximum(r, 1e-300) ** (alpha - 1.0),
        name=f"sin(|xi|^{alpha})",
    )


def sqrt_wave() -> DualClosure:
    return power_wave(0.5)


def shifted_wave(offset: float, alpha: float = 0.5) -> DualClosure:
    """offset + sin(|xi|^alpha); stays away from zero when offset > 1."""
    base = power_wave(alpha)
    psi = DualClosure(
        lambda p: offset + base(p),
        abs(offset) + 1.0,
        f"{offset}+sin(|xi|^{alpha})",
        meta=dict(base.meta),
    )
    return psi


def inverse_decay(power: float = 1.0) -> DualClosure:
    """psi(xi) = 1/(1+|xi|)^power: vanishes at infinity in every direction."""
    return DualClosure(
        lambda p: (1.0 / (1.0 + _radial(p)) ** power).astype(complex),
        1.0,
        f"(1+|xi|)^-{power}",
        meta={"c0": True},
    )


def directional_decay_symbol(omega0, rate: float = 1.0) -> DualClosure:
    """psi(xi) = exp(-rate*|<xi, omega0>|): decays inside cones around
    +-omega0, constant 1 on the orthogonal hyperplane."""
    w = np.asarray(omega0, dtype=float)
    n = np.linalg.norm(w)
    if n == 0:
        raise SymbolError("omega0 must be a nonzero direction")
    w = w / n
    return DualClosure(
        lambda p: np.exp(-rate * np.abs(_pts2d(p) @ w)).astype(complex),
        1.0,
        f"exp(-{rate}|<xi,omega0>|)",
        meta={"omega0": w},
    )


def dyadic_indicator() -> DualClosure:
    """Indicator of the union of [2^k, 2^k + k], k >= 1, on the positive axis.

    The union has full upper gaps; its Cesaro means over balls decay like
    (log n)^2 / n.
    """

    def fun(p):
        x = _pts2d(p)[:, 0]
        out = np.zeros(len(x))
        pos = x >= 2.0
        if pos.any():
            k = np.floor(np.log2(x[pos])).astype(int)
            out[pos] = (x[pos] <= 2.0**k + k).astype(float)
        return out.astype(complex)

    return DualClosure(fun, 1.0, "indicator(U[2^k, 2^k+k])", meta={"dyadic": True})


# -- x-variable profiles ---------------------------------------------------------


def cos_profile(offset: float = 2.0, amplitude: float = 1.0, frequency: int = 1):
    """gamma(x) = offset + amplitude*cos(2*pi*frequency*x) on torus coordinates."""

    def fun(coords):
        x = _pts2d(coords)[:, 0]
        return (offset + amplitude * np.cos(2 * np.pi * frequency * x)).astype(complex)

    fun.sup_bound = abs(offset) + abs(amplitude)
    return fun


def const_profile(value: complex = 1.0):
    def fun(coords):
        return np.full(len(_pts2d(coords)), complex(value))

    fun.sup_bound = abs(value)
    return fun


# -- symbols ---------------------------------------------------------------------


class Symbol:
    """Base: a two-variable symbol bound to a grid pair."""

    def __init__(self, xgrid: GroupGrid, xigrid: GroupGrid):
        assert_dual_pair(xgrid, xigrid)
        self.xgrid = xgrid
        self.xigrid = xigrid
        self._table = None

    has_closure = False
    tensor_terms = None

    @property
    def sup_bound(self) -> float:
        raise NotImplementedError

    def table(self) -> PhaseFunction:
        raise NotImplementedError

    def eval_outer(self, x_idx, xi_points) -> np.ndarray:
        """Values f(x_i, xi) on the outer product of grid indices x_idx and
        off-grid dual points xi_points; shape (len(x_idx), len(xi_points))."""
        raise SymbolError("symbol is tabulated only; off-grid evaluation undefined")

    def rebound(self, xgrid: GroupGrid, xigrid: GroupGrid) -> "Symbol":
        raise SymbolError("symbol is tabulated only; cannot rebind to new grids")


class TensorSymbol(Symbol):
    """Finite sum of tensor terms gamma_i(x) * psi_i(xi).

    gamma factors are given as closures over x coordinates (preferred; keeps
    the symbol rebindable to finer grids) or as plain per-point values.
    """

    def __init__(self, xgrid, xigrid, terms):
        super().__init__(xgrid, xigrid)
        self.terms = []
        for gamma, psi in terms:
            if not isinstance(psi, DualClosure):
                raise SymbolError("psi factor must be a DualClosure")
            if callable(gamma):
                gvals = np.asarray(gamma(xgrid.coords), dtype=complex)
                gfun = gamma
            else:
                gvals = np.asarray(gamma, dtype=complex).reshape(-1)
                if gvals.size != xgrid.size:
                    raise SymbolError("gamma values do not match the x grid")
                gfun = None
            self.terms.append((gfun, gvals, psi))

    has_closure = True

    @property
    def tensor_terms(self):
        return [(gvals, psi) for _, gvals, psi in self.terms]

    @property
    def sup_bound(self) -> float:
        return float(
            sum(np.max(np.abs(gv)) * psi.sup_bound for _, gv, psi in self.terms)
        )

    def psi_on_grid(self):
        return [psi(self.xigrid.coords) for _, _, psi in self.terms]

    def table(self) -> PhaseFunction:
        if self._table is None:
            vals = np.zeros((self.xgrid.size, self.xigrid.size), dtype=complex)
            for (_, gv, _), pv in zip(self.terms, self.psi_on_grid()):
                vals += np.outer(gv, pv)
            self._table = PhaseFunction(self.xgrid, self.xigrid, vals)
        return self._table

    def eval_outer(self, x_idx, xi_points) -> np.ndarray:
        x_idx = np.atleast_1d(np.asarray(x_idx, dtype=int))
        out = np.zeros((len(x_idx), len(_pts2d(xi_points))), dtype=complex)
        for _, gv, psi in self.terms:
            out += np.outer(gv[x_idx], psi(xi_points))
        return out

    def rebound(self, xgrid, xigrid) -> "TensorSymbol":
        rebuilt = []
        for gfun, gv, psi in self.terms:
            if gfun is None:
                if xgrid.descriptor() != self.xgrid.descriptor():
                    raise SymbolError(
                        "gamma given by values only; cannot rebind to a new x grid"
                    )
                rebuilt.append((gv, psi))
            else:
                rebuilt.append((gfun, psi))
        return TensorSymbol(xgrid, xigrid, rebuilt)


class TableSymbol(Symbol):
    """Symbol given by a dense table, optionally with a closure for off-grid xi."""

    def __init__(self, xgrid, xigrid, values, closure=None):
        super().__init__(xgrid, xigrid)
        self.values = np.asarray(values, dtype=complex).reshape(
            xgrid.size, xigrid.size
        )
        self.closure = closure
        if closure is not None and not callable(closure):
            raise SymbolError("closure must map (x_idx, xi_points) to values")

    @property
    def has_closure(self):
        return self.closure is not None

    @property
    def sup_bound(self) -> float:
        return float(np.max(np.abs(self.values)))

    def table(self) -> PhaseFunction:
        if self._table is None:
            self._table = PhaseFunction(self.xgrid, self.xigrid, self.values)
        return self._table

    def eval_outer(self, x_idx, xi_points):
        if self.closure is None:
            return super().eval_outer(x_idx, xi_points)
        x_idx = np.atleast_1d(np.asarray(x_idx, dtype=int))
        return np.asarray(self.closure(x_idx, _pts2d(xi_points)), dtype=complex)


def tensor_symbol(gamma, psi: DualClosure, xgrid: GroupGrid, xigrid: GroupGrid) -> TensorSymbol:
    return TensorSymbol(xgrid, xigrid, [(gamma, psi)])


def multiplier_symbol(psi: DualClosure, xgrid: GroupGrid, xigrid: GroupGrid) -> TensorSymbol:
    """x-independent symbol f(x, xi) = psi(xi) (a Fourier multiplier)."""
    return TensorSymbol(xgrid, xigrid, [(const_profile(1.0), psi)])


def constant_symbol(c: complex, xgrid: GroupGrid, xigrid: GroupGrid) -> TensorSymbol:
    return TensorSymbol(xgrid, xigrid, [(const_profile(c), constant_closure(1.0))])


# -- oscillation diagnostics -----------------------------------------------------


@dataclass
class OscillationProfile:
    """Sampled translation-oscillation sup: osc[i, j] = sup over |xi| >= radii[j]
    of |psi(xi + shifts[i]) - psi(xi)| (suffix maxima: non-increasing in R)."""

    shifts: np.ndarray
    radii: np.ndarray
    osc: np.ndarray
    tol: float
    verdict: str  # "PASS" | "FAIL"

    def as_dict(self) -> dict:
        return {
            "shifts": self.shifts.tolist(),
            "radii": self.radii.tolist(),
            "osc": self.osc.tolist(),
            "tol": self.tol,
            "verdict": self.verdict,
        }


# Acceptance-level default: sin(|xi|^0.75) must PASS at R_max = 1e6, and its
# true osc(1, 1e6) is 0.75e6^(-1/4) ~ 2.4e-2, so the gate sits above that.
OSCILLATION_TOL = 3e-2


def vanishing_oscillation_test(
    psi: DualClosure,
    shifts,
    radii,
    tol: float = OSCILLATION_TOL,
    samples: int = 20000,
    seed: int = 0,
    band: float | None = None,
    span: float = 10.0,
) -> OscillationProfile:
    """Estimate osc(shift, R) by dense tail sampling and return a verdict.

    PASS means every tested shift has sampled oscillation <= tol at the
    largest radius.  The sampled sup is a lower bound for the true sup, so
    PASS is advisory while FAIL is hard evidence.
    """
    shifts = _pts2d(shifts)
    radii = np.sort(np.asarray(radii, dtype=float))
    if radii[0] <= 0:
        raise SymbolError("radii must be positive")
    if band is not None and radii[-1] < band:
        raise SymbolError(
            f"largest radius {radii[-1]} is below the grid band {band}; "
            "the tail is not being probed"
        )
    dim = shifts.shape[1]
    pts = annulus(radii[0], radii[-1] * span, dim, samples, seed)
    r = np.linalg.norm(pts, axis=1)
    order = np.argsort(r)
    pts, r = pts[order], r[order]
    osc = np.zeros((len(shifts), len(radii)))
    for i, z in enumerate(shifts):
        diff = np.abs(psi(pts + z[None, :]) - psi(pts))
        # suffix maxima over the sorted radii give sup over |xi| >= R
        suffix = np.maximum.accumulate(diff[::-1])[::-1]
        idx = np.searchsorted(r, radii, side="left")
        osc[i] = [suffix[k] if k < len(suffix) else 0.0 for k in idx]
    verdict = "PASS" if np.all(osc[:, -1] <= tol) else "FAIL"
    return OscillationProfile(shifts, radii, osc, tol, verdict)


# -- Cesaro means -----------------------------------------------------------------


@dataclass
class CompactExhaustion:
    """Nested measurable sets D_1 c D_2 c ... on a dual grid, given as masks."""

    grid: GroupGrid
    masks: list
    labels: list

    def __post_init__(self):
        prev = None
        for k, m in enumerate(self.masks):
            m = np.asarray(m, dtype=bool).reshape(-1)
            if m.size != self.grid.size:
                raise SymbolError(f"mask {k} does not match the grid")
            if not m.any():
                raise SymbolError(f"set {k} has zero measure")
            if prev is not None and np.any(prev & ~m):
                raise SymbolError(f"sets are not nested at position {k}")
            self.masks[k] = m
            prev = m


def ball_exhaustion(grid: GroupGrid, radii) -> CompactExhaustion:
    radii = list(radii)
    if sorted(radii) != radii:
        raise SymbolError("ball radii must be increasing")
    r = np.linalg.norm(grid.coords, axis=1)
    return CompactExhaustion(grid, [r <= rad for rad in radii], [float(x) for x in radii])


@dataclass
class CesaroResult:
    labels: list
    means: np.ndarray
    measures: np.ndarray
    verdict: bool  # True = means tend to zero (tail-slope test)
    tail_slope: float

    def as_dict(self):
        return {
            "labels": self.labels,
            "means": self.means.tolist(),
            "measures": self.measures.tolist(),
            "verdict": bool(self.verdict),
            "tail_slope": self.tail_slope,
        }


def cesaro_mean(psi, exhaustion: CompactExhaustion) -> CesaroResult:
    """Means m_n = integral over D_n of |psi| / measure(D_n) plus a verdict
    (tail slope of log m_n against log measure) on whether m_n -> 0."""
    g = exhaustion.grid
    if isinstance(psi, GridFunction):
        vals = np.abs(psi.values)
    else:
        vals = np.abs(psi(g.coords))
    w = g.weight_per_point
    means, measures = [], []
    for m in exhaustion.masks:
        measures.append(w * int(m.sum()))
        means.append(w * float(vals[m].sum()) / measures[-1])
    means = np.array(means)
    measures = np.array(measures)
    tail = slice(max(len(means) - 4, 0), len(means))
    with np.errstate(divide="ignore"):
        y = np.log(np.maximum(means[tail], 1e-300))
        x = np.log(measures[tail])
    slope = float(np.polyfit(x, y, 1)[0]) if len(means) >= 2 else 0.0
    verdict = bool(slope < -0.1 or means[-1] < 1e-12)
    return CesaroResult(exhaustion.labels, means, measures, verdict, slope)


# -- thickened sets for the non-syndetic family -----------------------------------


@dataclass
class ThickenedSet:
    """A closed set E in the dual with a distance function, plus a certificate
    flag asserting E*K never covers the dual for compact K (not verified)."""

    distance: object  # (n, d) points -> distances (n,)
    dim: int
    gaps_certified: bool
    label: str

    def complement_radius(self, t: float) -> float:
        # thickening radius grows linearly in the base scale
        return float(t)


def halfline_set(a: float = 0.0) -> ThickenedSet:
    def dist(pts):
        return np.maximum(_pts2d(pts)[:, 0] - a, 0.0)

    return ThickenedSet(dist, 1, True, f"(-inf,{a}]")


def parabola_graph() -> ThickenedSet:
    """E = {(t, t^2)} in R^2; distance via coarse parametric scan + Newton."""

    def dist(pts):
        p = _pts2d(pts)
        a, b = p[:, 0], p[:, 1]
        T = float(max(4.0, np.sqrt(np.abs(b).max() + 1) + 2, np.abs(a).max() + 2))
        tgrid = np.linspace(-T, T, 2048)
        out = np.empty(len(p))
        chunk = 256
        for s in range(0, len(p), chunk):
            aa, bb = a[s : s + chunk, None], b[s : s + chunk, None]
            d2 = (tgrid[None, :] - aa) ** 2 + (tgrid[None, :] ** 2 - bb) ** 2
            t = tgrid[np.argmin(d2, axis=1)]
            for _ in range(12):  # Newton on the stationarity cubic
                f = 2 * t**3 + (1 - 2 * bb[:, 0]) * t - aa[:, 0]
                fp = 6 * t**2 + (1 - 2 * bb[:, 0])
                step = np.where(np.abs(fp) > 1e-12, f / np.where(fp == 0, 1, fp), 0.0)
                t = t - np.clip(step, -1.0, 1.0)
            out[s : s + chunk] = np.sqrt(
                (t - aa[:, 0]) ** 2 + (t**2 - bb[:, 0]) ** 2
            )
        return out

    ts = ThickenedSet(dist, 2, True, "graph(t->t^2)")
    ts.parametrize = lambda t: np.stack([t, np.asarray(t) ** 2], axis=1)
    return ts


def syndetic_thickening_filter_data(E: ThickenedSet, probe_scale: float = 1.0) -> ThickenedSet:
    """Validate E as the datum of a thickened-complement filter base.

    Degenerate sets whose unit thickening already covers everything (e.g.
    E = the whole dual) are rejected by probing an annulus.
    """
    probe = annulus(10.0 * probe_scale, 100.0 * probe_scale, E.dim, 512, seed=3)
    if not np.any(E.distance(probe) > probe_scale):
        raise SymbolError(
            f"thickened set {E.label!r} is degenerate: unit thickening covers the probe annulus"
        )
    return E


# -- diagnostics and IO ------------------------------------------------------------


def symbol_class_diagnostic(f: Symbol) -> float:
    """Truncated weighted sup-sum sum_eta w_eta * sup_xi |(F1 f)(eta, xi)|.

    A finite-table surrogate for a summability-class membership quantity;
    reported as a number, never used as a gate.
    """
    h = partial_fourier_1(f.table())
    row_sups = np.max(np.abs(h.values), axis=1)
    return float(h.xgrid.weight_per_point * row_sups.sum())


def save_symbol_csv(f: Symbol, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_index", "xi_index", "re", "im"])
        vals = f.table().values
        for i in range(vals.shape[0]):
            for k in range(vals.shape[1]):
                w.writerow([i, k, repr(float(vals[i, k].real)), repr(float(vals[i, k].imag))])


def load_symbol_csv(path, xgrid: GroupGrid, xigrid: GroupGrid) -> TableSymbol:
    vals = np.zeros((xgrid.size, xigrid.size), dtype=complex)
    seen = np.zeros(vals.shape, dtype=bool)
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if [h.strip() for h in header[:4]] != ["x_index", "xi_index", "re", "im"]:
            raise SymbolError("symbol CSV must have header x_index,xi_index,re,im")
        for row in rd:
            if not row:
                continue
            i, k = int(row[0]), int(row[1])
            if not (0 <= i < xgrid.size and 0 <= k < xigrid.size):
                raise SymbolError(f"symbol CSV index ({i},{k}) outside the grid pair")
            vals[i, k] = float(row[2]) + 1j * float(row[3])
            seen[i, k] = True
    if not seen.all():
        raise SymbolError("symbol CSV does not cover the full grid pair")
    return TableSymbol(xgrid, xigrid, vals)


# -- config-string registry ---------------------------------------------------------


def psi_from_config(spec) -> DualClosure:
    if isinstance(spec, str):
        if spec == "vo:sqrt":
            return sqrt_wave()
        if spec.startswith("vo:pow:"):
            return power_wave(float(spec.split(":")[2]))
        if spec == "dirdecay":
            return directional_decay_symbol([0.0, 1.0])
        if spec == "cesaro-indicator":
            return dyadic_indicator()
        raise SymbolError(f"unknown psi family {spec!r}")
    fam = spec.get("family")
    if fam == "vo:sqrt":
        return sqrt_wave()
    if fam == "vo:pow":
        return power_wave(float(spec["alpha"]))
    if fam == "vo:shifted":
        return shifted_wave(float(spec["offset"]), float(spec.get("alpha", 0.5)))
    if fam == "dirdecay":
        return directional_decay_symbol(
            spec.get("omega0", [0.0, 1.0]), float(spec.get("rate", 1.0))
        )
    if fam == "cesaro-indicator":
        return dyadic_indicator()
    if fam == "c0:inv":
        return inverse_decay(float(spec.get("power", 1.0)))
    if fam == "const":
        return constant_closure(complex(spec.get("value", 1.0)))
    raise SymbolError(f"unknown psi family {fam!r}")


def gamma_from_config(spec):
    if spec is None:
        return const_profile(1.0)
    prof = spec.get("profile", "const")
    if prof == "cos-offset":
        return cos_profile(
            float(spec.get("offset", 2.0)),
            float(spec.get("amplitude", 1.0)),
            int(spec.get("frequency", 1)),
        )
    if prof == "const":
        return const_profile(complex(spec.get("value", 1.0)))
    if prof == "values":
        return np.asarray(spec["data"], dtype=complex)
    raise SymbolError(f"unknown gamma profile {prof!r}")


def symbol_from_config(spec, xgrid: GroupGrid, xigrid: GroupGrid) -> Symbol:
    """Build a symbol from a config string or mapping (the CLI wire format)."""
    if isinstance(spec, str):
        if spec == "tensor":
            raise SymbolError("'tensor' needs a mapping with gamma and psi entries")
        return multiplier_symbol(psi_from_config(spec), xgrid, xigrid)
    fam = spec.get("family")
    if fam == "tensor":
        terms_spec = spec.get("terms")
        if terms_spec is None:
            terms_spec = [{"gamma": spec.get("gamma"), "psi": spec["psi"]}]
        terms = [
            (gamma_from_config(t.get("gamma")), psi_from_config(t["psi"]))
            for t in terms_spec
        ]
        return TensorSymbol(xgrid, xigrid, terms)
    if fam == "csv":
        return load_symbol_csv(spec["path"], xgrid, xigrid)
    if fam == "const":
        return constant_symbol(complex(spec.get("value", 1.0)), xgrid, xigrid)
    return multiplier_symbol(psi_from_config(spec), xgrid, xigrid)
