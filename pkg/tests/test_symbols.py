"""Symbol families and their tail diagnostics.

Frozen quantities used as fixed points below:
  * dyadic indicator on [-64, 64] (integer grid): 21 member points of 129;
  * full-strength wave sin(|xi|): translation-by-1 oscillation 2*sin(1/2);
  * parabola distances: dist((0,2)) = sqrt(7)/2, dist((0,-1)) = 1.
"""

import numpy as np
import pytest

from corona_pdo.groups import GridFunction, GroupGrid, truncated_dual
from corona_pdo.sampling import annulus
from corona_pdo.symbols import (
    CompactExhaustion,
    SymbolError,
    TableSymbol,
    TensorSymbol,
    ThickenedSet,
    ball_exhaustion,
    cesaro_mean,
    const_profile,
    constant_closure,
    constant_symbol,
    cos_profile,
    directional_decay_symbol,
    dyadic_indicator,
    halfline_set,
    inverse_decay,
    load_symbol_csv,
    multiplier_symbol,
    parabola_graph,
    power_wave,
    psi_from_config,
    save_symbol_csv,
    shifted_wave,
    sqrt_wave,
    symbol_class_diagnostic,
    symbol_from_config,
    syndetic_thickening_filter_data,
    tensor_symbol,
    vanishing_oscillation_test,
    vo_symbol,
)

RADII = np.logspace(2, 6, 9)


# -- tensor / table symbols --


def test_tensor_table_is_outer_product():
    xg = GroupGrid.torus(8)
    xig = xg.dual()
    f = tensor_symbol(cos_profile(2.0, 1.0), sqrt_wave(), xg, xig)
    g = 2.0 + np.cos(2 * np.pi * xg.coords[:, 0])
    p = np.sin(np.sqrt(np.abs(xig.coords[:, 0])))
    assert np.allclose(f.table().values, np.outer(g, p), atol=1e-14)
    assert f.sup_bound == pytest.approx(3.0)


def test_tensor_eval_outer_matches_table_on_grid():
    xg = GroupGrid.torus(8)
    xig = xg.dual()
    f = tensor_symbol(cos_profile(), sqrt_wave(), xg, xig)
    idx = np.array([0, 3, 5])
    assert np.allclose(f.eval_outer(idx, xig.coords), f.table().values[idx], atol=1e-14)


def test_tensor_rebound_to_finer_grids():
    f = tensor_symbol(
        cos_profile(), sqrt_wave(), GroupGrid.torus(8), truncated_dual(GroupGrid.torus(8), 2)
    )
    fine_x = GroupGrid.torus(32)
    fine_xi = truncated_dual(fine_x, 8)
    g = f.rebound(fine_x, fine_xi)
    direct = tensor_symbol(cos_profile(), sqrt_wave(), fine_x, fine_xi)
    assert np.allclose(g.table().values, direct.table().values, atol=1e-14)


def test_values_gamma_cannot_rebind_to_new_grid():
    xg = GroupGrid.finite_cyclic(4)
    xig = xg.dual()
    f = tensor_symbol(np.array([1.0, 2.0, 3.0, 4.0]), constant_closure(1.0), xg, xig)
    same = f.rebound(xg, xig)
    assert np.allclose(same.table().values, f.table().values)
    with pytest.raises(SymbolError):
        f.rebound(GroupGrid.finite_cyclic(8), GroupGrid.finite_cyclic(8).dual())


def test_multiplier_and_constant_tables():
    xg = GroupGrid.finite_cyclic(4)
    xig = xg.dual()
    m = multiplier_symbol(inverse_decay(1.0), xg, xig)
    expect = 1.0 / (1.0 + np.abs(xig.coords[:, 0]))
    assert np.allclose(m.table().values, np.tile(expect, (4, 1)))
    c = constant_symbol(2 + 1j, xg, xig)
    assert np.allclose(c.table().values, (2 + 1j) * np.ones((4, 4)))


def test_psi_must_be_dual_closure():
    xg = GroupGrid.finite_cyclic(4)
    with pytest.raises(SymbolError):
        TensorSymbol(xg, xg.dual(), [(const_profile(1.0), np.sin)])


def test_table_symbol_eval_outer_requires_closure():
    xg = GroupGrid.finite_cyclic(4)
    xig = xg.dual()
    vals = np.arange(16.0).reshape(4, 4)
    t = TableSymbol(xg, xig, vals)
    assert t.sup_bound == 15.0
    assert not t.has_closure
    with pytest.raises(SymbolError):
        t.eval_outer([0], np.array([[99.0]]))
    t2 = TableSymbol(
        xg, xig, vals, closure=lambda ix, pts: np.zeros((len(ix), len(pts)), dtype=complex)
    )
    assert t2.has_closure
    assert t2.eval_outer([0, 1], np.array([[99.0]])).shape == (2, 1)


# -- oscillation at infinity --


def test_slow_wave_oscillation_passes_and_obeys_derivative_bound():
    for alpha in (0.25, 0.5, 0.75):
        prof = vanishing_oscillation_test(power_wave(alpha), [[1.0]], RADII)
        assert prof.verdict == "PASS"
        # mean value bound: osc(1, R) <= alpha * (R-1)^(alpha-1)
        bound = alpha * (RADII - 1.0) ** (alpha - 1.0)
        assert np.all(prof.osc[0] <= bound * 1.0001)
        assert np.all(np.diff(prof.osc[0]) <= 1e-15)  # suffix maxima


def test_sampled_oscillation_not_degenerate():
    prof = vanishing_oscillation_test(power_wave(0.5), [[1.0]], RADII)
    # true sup at R=100 is ~0.05; the sampler must see a solid fraction
    assert prof.osc[0, 0] >= 0.015


def test_full_strength_wave_fails():
    psi = vo_symbol(lambda r: r, lambda r: np.ones_like(r), name="sin(|xi|)")
    prof = vanishing_oscillation_test(psi, [[1.0]], RADII)
    assert prof.verdict == "FAIL"
    assert 0.93 <= prof.osc[0, -1] <= 2 * np.sin(0.5) + 1e-12


def test_mean_value_bound_for_all_shifts():
    radii = np.logspace(2, 5, 7)
    shifts = [[0.5], [1.0], [2.0]]
    for alpha in (0.25, 0.5, 0.75):
        prof = vanishing_oscillation_test(power_wave(alpha), shifts, radii)
        for i, (z,) in enumerate(shifts):
            bound = z * alpha * (radii - z) ** (alpha - 1.0)
            assert np.all(prof.osc[i] <= bound * 1.0001)


def test_oscillation_band_guard_and_bad_radii():
    with pytest.raises(SymbolError):
        vanishing_oscillation_test(sqrt_wave(), [[1.0]], [10.0, 100.0], band=1000.0)
    with pytest.raises(SymbolError):
        vanishing_oscillation_test(sqrt_wave(), [[1.0]], [0.0, 10.0])


def test_vo_symbol_requires_derivative():
    with pytest.raises(SymbolError):
        vo_symbol(np.sqrt)


# -- directional decay --


def test_directional_decay_values_and_axis_sup():
    psi = directional_decay_symbol([0.0, 1.0])
    assert psi(np.array([[50.0, 0.0]]))[0] == 1.0  # orthogonal axis: exact 1
    assert psi(np.array([[3.0, 4.0]]))[0] == pytest.approx(np.exp(-4.0), rel=1e-14)
    pts = annulus(100.0, 1000.0, 2, 400, seed=0)
    # +-e1 lies in every direction fan, so the annulus sup is exactly 1
    assert np.abs(psi(pts)).max() == 1.0
    along = psi(np.array([[0.0, 200.0], [0.0, -200.0]]))
    assert np.allclose(np.abs(along), np.exp(-200.0))


def test_directional_decay_rejects_zero_direction():
    with pytest.raises(SymbolError):
        directional_decay_symbol([0.0, 0.0])


# -- Cesaro means --


def test_dyadic_indicator_pointwise():
    psi = dyadic_indicator()
    pts = np.array(
        [[1.5], [2.0], [3.0], [3.5], [5.0], [7.0], [64.0], [70.0], [71.0], [-5.0]]
    )
    assert psi(pts).real.tolist() == [0, 1, 1, 0, 1, 0, 1, 1, 0, 0]


def test_cesaro_means_match_exact_counts():
    grid = GroupGrid.truncated_integers(128)
    radii = [4, 8, 16, 32, 64]
    res = cesaro_mean(dyadic_indicator(), ball_exhaustion(grid, radii))
    members = set()
    for k in range(1, 8):
        members.update(range(2**k, 2**k + k + 1))
    for rad, mean, meas in zip(radii, res.means, res.measures):
        count = sum(1 for m in members if m <= rad)
        assert meas == pytest.approx(2 * rad + 1)
        assert mean == pytest.approx(count / (2 * rad + 1), abs=1e-14)
    assert res.means[-1] == pytest.approx(21 / 129, abs=1e-14)
    assert res.verdict


def test_cesaro_constant_and_zero():
    ex = ball_exhaustion(GroupGrid.truncated_integers(64), [8, 16, 32])
    one = cesaro_mean(constant_closure(1.0), ex)
    assert np.allclose(one.means, 1.0)
    assert not one.verdict
    zero = cesaro_mean(constant_closure(0.0), ex)
    assert np.allclose(zero.means, 0.0)
    assert zero.verdict


def test_cesaro_grid_function_input():
    grid = GroupGrid.truncated_integers(32)
    vals = dyadic_indicator()(grid.coords)
    ex = ball_exhaustion(grid, [4, 16])
    assert np.allclose(
        cesaro_mean(dyadic_indicator(), ex).means,
        cesaro_mean(GridFunction(grid, vals), ex).means,
    )


def test_exhaustion_must_nest_and_have_mass():
    grid = GroupGrid.truncated_integers(16)
    with pytest.raises(SymbolError):
        ball_exhaustion(grid, [8, 4])
    r = np.linalg.norm(grid.coords, axis=1)
    with pytest.raises(SymbolError):
        CompactExhaustion(grid, [r <= 8, r <= 4], ["a", "b"])
    with pytest.raises(SymbolError):
        CompactExhaustion(grid, [r < -1], ["empty"])


# -- thickened sets --


def test_halfline_distance_and_validation():
    E = halfline_set(0.0)
    assert E.distance(np.array([[-3.0], [5.0]])).tolist() == [0.0, 5.0]
    assert syndetic_thickening_filter_data(E) is E


def test_degenerate_thickening_rejected():
    whole = ThickenedSet(lambda p: np.zeros(len(p)), 1, False, "everything")
    with pytest.raises(SymbolError):
        syndetic_thickening_filter_data(whole)


def test_parabola_distance_frozen_points():
    E = parabola_graph()
    d = E.distance(np.array([[0.0, 2.0], [0.0, -1.0], [2.0, 4.0]]))
    assert d[0] == pytest.approx(np.sqrt(7.0) / 2.0, abs=1e-9)
    assert d[1] == pytest.approx(1.0, abs=1e-12)
    assert d[2] == pytest.approx(0.0, abs=1e-8)
    assert np.allclose(E.parametrize(np.array([1.0, 2.0])), [[1.0, 1.0], [2.0, 4.0]])


# -- diagnostics, IO, config --


def test_class_diagnostic_frozen_constant():
    xg = GroupGrid.finite_cyclic(4)
    f = constant_symbol(2.0, xg, xg.dual())
    # F1 of the constant concentrates at frequency zero with mass 4*2
    assert symbol_class_diagnostic(f) == pytest.approx(2.0, abs=1e-12)


def test_misc_closure_values():
    assert inverse_decay(1.0)(np.array([[3.0]]))[0] == pytest.approx(0.25)
    s = shifted_wave(2.0)
    assert s(np.array([[0.0]]))[0] == pytest.approx(2.0)
    assert s.sup_bound == pytest.approx(3.0)
    assert "beta" in s.meta


def test_symbol_csv_round_trip(tmp_path):
    xg = GroupGrid.finite_cyclic(3)
    xig = xg.dual()
    rng = np.random.default_rng(7)
    vals = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    path = tmp_path / "sym.csv"
    save_symbol_csv(TableSymbol(xg, xig, vals), path)
    g = load_symbol_csv(path, xg, xig)
    assert np.array_equal(g.values, vals)  # repr round-trips floats exactly


def test_symbol_csv_rejects_bad_header_gaps_and_oob(tmp_path):
    xg = GroupGrid.finite_cyclic(2)
    xig = xg.dual()
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c,d\n0,0,1,0\n")
    with pytest.raises(SymbolError):
        load_symbol_csv(bad, xg, xig)
    gap = tmp_path / "gap.csv"
    gap.write_text("x_index,xi_index,re,im\n0,0,1.0,0.0\n")
    with pytest.raises(SymbolError):
        load_symbol_csv(gap, xg, xig)
    oob = tmp_path / "oob.csv"
    oob.write_text("x_index,xi_index,re,im\n9,0,1.0,0.0\n")
    with pytest.raises(SymbolError):
        load_symbol_csv(oob, xg, xig)


def test_symbol_from_config_families():
    xg = GroupGrid.torus(8)
    xig = truncated_dual(xg, 4)
    f = symbol_from_config(
        {"family": "tensor", "gamma": {"profile": "cos-offset", "offset": 2.0}, "psi": "vo:sqrt"},
        xg,
        xig,
    )
    direct = tensor_symbol(cos_profile(2.0), sqrt_wave(), xg, xig)
    assert np.allclose(f.table().values, direct.table().values)
    m = symbol_from_config("vo:pow:0.75", xg, xig)
    assert m.has_closure and m.tensor_terms is not None
    c = symbol_from_config({"family": "const", "value": 3.0}, xg, xig)
    assert np.allclose(c.table().values, 3.0)
    with pytest.raises(SymbolError):
        symbol_from_config("tensor", xg, xig)
    with pytest.raises(SymbolError):
        symbol_from_config("no-such-family", xg, xig)
    with pytest.raises(SymbolError):
        psi_from_config({"family": "nope"})


def test_gamma_values_profile():
    xg = GroupGrid.finite_cyclic(4)
    f = symbol_from_config(
        {
            "family": "tensor",
            "gamma": {"profile": "values", "data": [1, 2, 3, 4]},
            "psi": {"family": "const", "value": 1.0},
        },
        xg,
        xg.dual(),
    )
    assert np.allclose(f.table().values, np.outer([1, 2, 3, 4], np.ones(4)))
