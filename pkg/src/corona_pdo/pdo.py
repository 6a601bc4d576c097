"""Operators Op(f) from two-variable symbols, plus their frequency pictures.

Construction is kernel-first: the symbol table is synthesized in its second
variable to the integral kernel kern(x, z), and

    matrix[x, y] = w_y * kern(x, x y^{-1}).

On the frequency side the same operator is a twisted convolution

    S[xi, eta] = w^_eta * (F1 f)(xi - eta, eta)

acting on Fourier coefficients; ``diagram_check`` verifies that the two
pictures are conjugate by the discrete transform pair to near machine
precision on finite cyclic grids.  A sampled torus operator with the full
Nyquist band has exactly the same matrix as the corresponding finite cyclic
operator (the Haar weights swap between the two pictures and cancel), which
is what makes frequency-side truncation analysis legitimate for sampled
symbols.

Everything here is dense and size-capped: this is a desk-scale verification
tool, not a solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fourier import (
    fourier,
    inverse_fourier,
    inverse_transform_matrix,
    partial_fourier_1,
    partial_fourier_2_inverse,
    transform_matrix,
)
from .groups import GridFunction, GroupGrid, pairing
from .symbols import Symbol

DENSE_CAP = 4096


class PdoError(ValueError):
    """Raised for unbuildable operators (size, grid kind, misuse)."""


def _check_cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise PdoError(
            f"{what} needs a dense {n} x {n} array; cap is {cap} "
            "(pass a larger cap explicitly if the memory is really there)"
        )


def op_matrix(symbol: Symbol, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense matrix of Op(f) on l2 of the x grid (kernel route)."""
    xg = symbol.xgrid
    _check_cap(xg.size, cap, "op_matrix")
    kern = partial_fourier_2_inverse(symbol.table(), out_grid=xg)
    rows = np.arange(xg.size)
    sub = xg.sub_indices(rows[:, None], rows[None, :])  # x y^{-1}
    return kern.values[rows[:, None], sub] * xg.weight_per_point


def op_apply(symbol: Symbol, u, method: str = "auto") -> GridFunction:
    """Apply Op(f) to u without materializing the matrix when possible.

    ``method``: "tensor" (FFT per tensor term), "matrix" (dense), "sum"
    (chunked frequency synthesis, no dense matrix), or "auto".
    """
    if method not in ("auto", "tensor", "matrix", "sum"):
        raise PdoError(f"unknown apply method {method!r}")
    if not isinstance(u, GridFunction):
        u = GridFunction(symbol.xgrid, u)
    if u.grid.descriptor() != symbol.xgrid.descriptor():
        raise PdoError("vector lives on a different grid than the symbol")
    terms = symbol.tensor_terms
    if method in ("auto", "tensor") and terms is not None:
        uhat = fourier(u, out_grid=symbol.xigrid)
        out = np.zeros(symbol.xgrid.size, dtype=complex)
        for gv, psi in terms:
            pv = psi(symbol.xigrid.coords)
            back = inverse_fourier(
                GridFunction(symbol.xigrid, pv * uhat.values), out_grid=symbol.xgrid
            )
            out += gv * back.values
        return GridFunction(symbol.xgrid, out)
    if method == "tensor":
        raise PdoError("symbol has no tensor terms")
    if method == "matrix" or (method == "auto" and symbol.xgrid.size <= 2048):
        return GridFunction(symbol.xgrid, op_matrix(symbol) @ u.values)
    # chunked synthesis: (Op u)(x) = sum_xi w^ <x, xi> f(x, xi) uhat(xi)
    uhat = fourier(u, out_grid=symbol.xigrid)
    what = symbol.xigrid.weight_per_point
    tab = symbol.table().values
    xi_idx = np.arange(symbol.xigrid.size)
    out = np.empty(symbol.xgrid.size, dtype=complex)
    for s in range(0, symbol.xgrid.size, 256):
        x_idx = np.arange(s, min(s + 256, symbol.xgrid.size))
        ph = pairing(symbol.xgrid, symbol.xigrid, x_idx[:, None], xi_idx[None, :])
        out[x_idx] = what * np.sum(ph * tab[x_idx] * uhat.values[None, :], axis=1)
    return GridFunction(symbol.xgrid, out)


# -- frequency picture ---------------------------------------------------------------


def _embed_dual_indices(xigrid: GroupGrid, omega: GroupGrid) -> np.ndarray:
    """Indices of the (possibly truncated) dual grid's points inside the full dual."""
    embeds = []
    for fx, fo in zip(xigrid.factors, omega.factors):
        step = fo.points[1] - fo.points[0] if fo.n > 1 else 1.0
        e = np.round((fx.points - fo.points[0]) / step).astype(int)
        if np.any(e < 0) or np.any(e >= fo.n) or not np.allclose(
            fo.points[e], fx.points, atol=1e-12
        ):
            raise PdoError("dual grid does not embed in the full dual of the x grid")
        embeds.append(e)
    multi = np.unravel_index(np.arange(xigrid.size), xigrid.shape)
    return np.ravel_multi_index(
        tuple(embeds[d][m] for d, m in enumerate(multi)), omega.shape
    )


def frequency_section(
    symbol: Symbol, indices=None, cap: int = 6000, prefer_tensor: bool = True
) -> np.ndarray:
    """Square frequency-side section S[a, b] = w^ * (F1 f)(xi_a - eta_b, eta_b).

    ``indices`` picks the rows/columns (defaults to the whole dual grid); the
    difference xi_a - eta_b wraps inside the full dual of the x grid, which is
    exact because dual frequencies are multiples of the wrap period.
    """
    xig = symbol.xigrid
    if indices is None:
        indices = np.arange(xig.size)
    indices = np.asarray(indices, dtype=int)
    _check_cap(len(indices), cap, "frequency_section")
    omega = symbol.xgrid.dual()
    embed = _embed_dual_indices(xig, omega)[indices]
    sub = omega.sub_indices(embed[:, None], embed[None, :])
    what = xig.weight_per_point
    terms = symbol.tensor_terms
    if prefer_tensor and terms is not None:
        S = np.zeros((len(indices), len(indices)), dtype=complex)
        psi_cols = xig.coords[indices]
        for gv, psi in terms:
            gh = fourier(GridFunction(symbol.xgrid, gv)).values
            S += gh[sub] * psi(psi_cols)[None, :]
        return S * what
    psi1 = partial_fourier_1(symbol.table())
    return psi1.values[sub, indices[None, :]] * what


def schrodinger_matrix(symbol: Symbol, cap: int = DENSE_CAP) -> np.ndarray:
    """Full frequency-side matrix (all dual indices)."""
    _check_cap(symbol.xigrid.size, cap, "schrodinger_matrix")
    return frequency_section(symbol, cap=max(cap, symbol.xigrid.size))


def diagram_check(symbol: Symbol) -> float:
    """Relative spectral-norm gap between the kernel route and F^-1 S F.

    Exact (up to roundoff) on finite cyclic grids, where the dual is the whole
    group and no truncation is involved.
    """
    xg = symbol.xgrid
    if not xg.is_finite_kind:
        raise PdoError("diagram check compares full transforms: finite cyclic only")
    M = op_matrix(symbol)
    S = schrodinger_matrix(symbol)
    F = transform_matrix(xg, symbol.xigrid)
    Fi = inverse_transform_matrix(xg, symbol.xigrid)
    num = float(np.linalg.norm(Fi @ S @ F - M, 2))
    den = max(float(np.linalg.norm(M, 2)), 1e-300)
    return num / den


# -- simple named operators ------------------------------------------------------------


def multiplication_operator(xgrid: GroupGrid, gamma_values) -> np.ndarray:
    g = np.asarray(gamma_values, dtype=complex).reshape(-1)
    if g.size != xgrid.size:
        raise PdoError("multiplier values do not match the grid")
    return np.diag(g)


def convolution_operator(xgrid: GroupGrid, xigrid: GroupGrid, psi_values) -> np.ndarray:
    """Fourier multiplier as a dense matrix: G diag(psi) F."""
    p = np.asarray(psi_values, dtype=complex).reshape(-1)
    if p.size != xigrid.size:
        raise PdoError("multiplier values do not match the dual grid")
    F = transform_matrix(xgrid, xigrid)
    G = inverse_transform_matrix(xgrid, xigrid)
    return G @ (p[:, None] * F)


def hs_norm(matrix: np.ndarray) -> float:
    """Hilbert-Schmidt norm sqrt(sum (w_x / w_y) |matrix[x,y]|^2).

    Grid weights are uniform across points, so the ratio is 1 and this is
    the Frobenius norm; kept as a named function because equality with the
    symbol's L2 norm is one of the exact identities the tests pin down.
    """
    return float(np.linalg.norm(matrix, "fro"))


@dataclass
class PdoOperator:
    """Op(f) with a lazily built dense matrix."""

    symbol: Symbol
    cap: int = DENSE_CAP
    _matrix: np.ndarray | None = field(default=None, repr=False)

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = op_matrix(self.symbol, self.cap)
        return self._matrix

    def apply(self, u) -> GridFunction:
        return op_apply(self.symbol, u)

    def hs_norm(self) -> float:
        return hs_norm(self.matrix())


# -- file formats ------------------------------------------------------------------------


_BIN_MAGIC = b"PDOM\x00\x01"


def save_matrix_bin(matrix: np.ndarray, path) -> None:
    """Little-endian flat binary: magic, rows/cols as u64, row-major re/im f64 pairs."""
    m = np.ascontiguousarray(matrix, dtype=np.complex128)
    inter = np.empty((m.shape[0], m.shape[1], 2), dtype="<f8")
    inter[..., 0] = m.real
    inter[..., 1] = m.imag
    with open(path, "wb") as fh:
        fh.write(_BIN_MAGIC)
        fh.write(np.array(m.shape, dtype="<u8").tobytes())
        fh.write(inter.tobytes())


def load_matrix_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(len(_BIN_MAGIC)) != _BIN_MAGIC:
            raise PdoError("not an operator matrix file (bad magic)")
        rows, cols = np.frombuffer(fh.read(16), dtype="<u8")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != 2 * rows * cols:
        raise PdoError("operator matrix file is truncated")
    data = data.reshape(int(rows), int(cols), 2)
    return (data[..., 0] + 1j * data[..., 1]).astype(np.complex128)


def save_matrix_csv(matrix: np.ndarray, path) -> None:
    m = np.asarray(matrix, dtype=np.complex128)
    with open(path, "w", newline="") as fh:
        fh.write("row,col,re,im\n")
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                fh.write(f"{i},{j},{float(m[i, j].real)!r},{float(m[i, j].imag)!r}\n")


def load_matrix_csv(path) -> np.ndarray:
    rows, cols, re, im = [], [], [], []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "row,col,re,im":
            raise PdoError("operator CSV must have header row,col,re,im")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b, c, d = line.split(",")
            rows.append(int(a))
            cols.append(int(b))
            re.append(float(c))
            im.append(float(d))
    if not rows:
        raise PdoError("operator CSV is empty")
    out = np.zeros((max(rows) + 1, max(cols) + 1), dtype=np.complex128)
    out[rows, cols] = np.array(re) + 1j * np.array(im)
    return out
