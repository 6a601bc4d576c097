"""Limsup/liminf extrapolation, filter bases, and cluster sets.

Oracles:
  * sin(sqrt|xi|) has standard limsup 1 and liminf -1; 2+sin has liminf 1;
  * exp(-|xi_2|) has standard limsup 1 (attained on the xi_1 axis only) and
    directional limsup ~ 0 along e2;
  * a two-point a + b/sqrt(t) fit is solvable by hand.
"""

import numpy as np
import pytest

from corona_pdo.asymptotics import (
    AsymptoticsError,
    DensityBase,
    DirectionalBase,
    IntersectionBase,
    SamplingSchedule,
    StandardBase,
    ThickenedComplementBase,
    base_from_config,
    cluster_set,
    fit_inverse_sqrt,
    fredholm_floor,
    gohberg_rhs_maxform,
    gohberg_rhs_minform,
    liminf_along,
    limsup_along,
    modulus_field,
)
from corona_pdo.groups import GroupGrid, truncated_dual
from corona_pdo.symbols import (
    ThickenedSet,
    constant_closure,
    cos_profile,
    directional_decay_symbol,
    dyadic_indicator,
    halfline_set,
    inverse_decay,
    multiplier_symbol,
    parabola_graph,
    shifted_wave,
    sqrt_wave,
    tensor_symbol,
)

SCHED = SamplingSchedule()


def _flagship():
    xg = GroupGrid.torus(64)
    return tensor_symbol(cos_profile(2.0), sqrt_wave(), xg, truncated_dual(xg, 16))


# -- fits and schedules --


def test_fit_inverse_sqrt_exact_two_points():
    # a + b/10 = 1.1, a + b/20 = 1.05  =>  a = 1, b = 1
    a, b, res, rel = fit_inverse_sqrt([100.0, 400.0], [1.1, 1.05])
    assert a == pytest.approx(1.0, abs=1e-12)
    assert b == pytest.approx(1.0, abs=1e-11)
    assert res <= 1e-12 and rel <= 1e-12


def test_schedule_validation():
    with pytest.raises(AsymptoticsError):
        SamplingSchedule(scales=(1e3, 1e2))
    with pytest.raises(AsymptoticsError):
        SamplingSchedule(scales=())
    with pytest.raises(AsymptoticsError):
        SamplingSchedule(points_per_scale=4)
    assert SamplingSchedule().reduced().points_per_scale == 1000


# -- scalar limsup / liminf --


def test_standard_limsup_slow_wave_is_one():
    psi = sqrt_wave()
    fit = limsup_along(lambda p: np.real(psi(p)), StandardBase(1), SCHED)
    assert fit.value == pytest.approx(1.0, abs=1e-3)
    assert np.all(fit.per_scale <= 1.0 + 1e-9)
    assert fit.kind == "sup"


def test_standard_limsup_constant_is_exact():
    fit = limsup_along(lambda p: np.ones(len(p)), StandardBase(2), SCHED)
    assert fit.value == pytest.approx(1.0, abs=1e-12)
    assert fit.residual <= 1e-12


def test_standard_limsup_of_decay_is_zero():
    psi = inverse_decay(1.0)
    fit = limsup_along(lambda p: np.abs(psi(p)), StandardBase(1), SCHED)
    assert abs(fit.value) <= 1e-3


def test_directional_vs_standard_for_axis_decay():
    psi = directional_decay_symbol([0.0, 1.0])
    phi = lambda p: np.abs(psi(p))
    along = limsup_along(phi, DirectionalBase([0.0, 1.0]), SCHED)
    std = limsup_along(phi, StandardBase(2), SCHED)
    ortho = limsup_along(phi, DirectionalBase([1.0, 0.0]), SCHED)
    assert along.value <= 1e-3
    assert std.value == pytest.approx(1.0, abs=1e-3)  # axis rays carry the sup
    assert ortho.value == pytest.approx(1.0, abs=1e-3)


def test_liminf_shifted_wave():
    psi = shifted_wave(2.0)
    fit = liminf_along(lambda p: np.abs(psi(p)), StandardBase(1), SCHED)
    assert fit.kind == "inf"
    assert fit.value == pytest.approx(1.0, abs=1e-2)
    assert np.all(fit.per_scale >= 1.0 - 1e-9)


def test_limsup_deterministic():
    psi = sqrt_wave()
    phi = lambda p: np.real(psi(p))
    f1 = limsup_along(phi, StandardBase(1), SCHED)
    f2 = limsup_along(phi, StandardBase(1), SCHED)
    assert np.array_equal(f1.per_scale, f2.per_scale)
    assert f1.value == f2.value


def test_base_independence_standard_vs_density():
    psi = sqrt_wave()
    phi = lambda p: np.real(psi(p))
    a = limsup_along(phi, StandardBase(1), SCHED).value
    b = limsup_along(phi, DensityBase(1), SCHED).value
    assert abs(a - b) <= 1e-3


# -- thickened-complement and density bases --


def test_ethick_halfline_excises_negative_axis():
    base = ThickenedComplementBase(halfline_set(0.0))
    neg = lambda p: (p[:, 0] < 0).astype(float)
    std = limsup_along(neg, StandardBase(1), SCHED, polish=False)
    eth = limsup_along(neg, base, SCHED, polish=False)
    assert std.value == pytest.approx(1.0, abs=1e-12)
    assert eth.value == pytest.approx(0.0, abs=1e-12)


def test_ethick_empty_raises():
    whole = ThickenedSet(lambda p: np.zeros(len(p)), 1, False, "everything")
    with pytest.raises(AsymptoticsError):
        ThickenedComplementBase(whole).sample(100.0, 1000, 10.0, 0)


def test_ethick_parabola_kills_distance_decay():
    E = parabola_graph()
    base = ThickenedComplementBase(E)
    phi = lambda p: np.exp(-E.distance(p))
    sched = SamplingSchedule(scales=(1e2, 1e3), points_per_scale=2000)
    fit = limsup_along(phi, base, sched, polish=False)
    assert fit.value <= 1e-3


def test_density_base_excludes_sparse_exceptional():
    ind = dyadic_indicator()
    exc = lambda p: np.real(ind(p)) > 0.5
    phi = lambda p: np.real(ind(p))
    sched = SamplingSchedule(scales=(1e2, 1e3), points_per_scale=20000)
    std = limsup_along(phi, StandardBase(1), sched, polish=False)
    dens = limsup_along(phi, DensityBase(1, exceptional=exc), sched, polish=False)
    assert std.value == pytest.approx(1.0, abs=1e-9)  # the union is hit at both scales
    assert dens.value == pytest.approx(0.0, abs=1e-12)


def test_density_guard_trips_on_thick_exceptional():
    base = DensityBase(1, exceptional=lambda p: p[:, 0] > 0)
    with pytest.raises(AsymptoticsError):
        base.sample(100.0, 1000, 10.0, 0)


def test_intersection_base_masks_and_guards():
    base = IntersectionBase(
        StandardBase(1), DensityBase(1, exceptional=lambda p: p[:, 0] < 0)
    )
    pts = base.sample(100.0, 2000, 10.0, 0)
    assert np.all(pts[:, 0] > 0)
    with pytest.raises(AsymptoticsError):
        IntersectionBase()
    with pytest.raises(AsymptoticsError):
        IntersectionBase(StandardBase(1), StandardBase(2))


def test_intersection_of_disjoint_cones_is_empty():
    b = IntersectionBase(DirectionalBase([1.0, 0.0]), DirectionalBase([-1.0, 0.0]))
    with pytest.raises(AsymptoticsError):
        b.sample(100.0, 2000, 10.0, 0)


def test_base_from_config():
    assert base_from_config(None, 2).label.startswith("standard")
    assert base_from_config({"kind": "directional", "omega0": [0, 1]}, 2).dim == 2
    assert base_from_config({"kind": "ethick", "set": "parabola"}, 2).dim == 2
    assert base_from_config({"kind": "density"}, 1).label == "density"
    inter = base_from_config(
        {"kind": "intersection", "parts": [{"kind": "standard"}, {"kind": "density"}]}, 1
    )
    assert inter.label.startswith("intersection")
    with pytest.raises(AsymptoticsError):
        base_from_config("weird", 1)
    with pytest.raises(AsymptoticsError):
        base_from_config({"kind": "ethick", "set": "moon"}, 1)


# -- per-fiber fields and Gohberg right-hand sides --


def test_gohberg_forms_flagship():
    f = _flagship()
    mx = gohberg_rhs_maxform(f, StandardBase(1), SCHED)
    mn, _ = gohberg_rhs_minform(f, StandardBase(1), SCHED)
    assert mx.value == pytest.approx(3.0, abs=3e-3)
    assert mn == pytest.approx(1.0, abs=1e-2)
    assert mn <= mx.value + 1e-3
    # generic (non-factorized) routes agree with the tensor fast paths
    mx2 = gohberg_rhs_maxform(f, StandardBase(1), SCHED, prefer_tensor=False)
    mn2, _ = gohberg_rhs_minform(f, StandardBase(1), SCHED, prefer_tensor=False)
    assert mx2.value == pytest.approx(mx.value, abs=2e-3)
    assert mn2 == pytest.approx(mn, abs=2e-2)


def test_fredholm_floor_values():
    xg = GroupGrid.torus(64)
    xig = truncated_dual(xg, 16)
    away, _ = fredholm_floor(multiplier_symbol(shifted_wave(2.0), xg, xig), StandardBase(1), SCHED)
    near, _ = fredholm_floor(multiplier_symbol(shifted_wave(1.0), xg, xig), StandardBase(1), SCHED)
    assert away == pytest.approx(1.0, abs=1e-2)
    assert near <= 1e-2


def test_modulus_field_generic_matches_tensor():
    f = _flagship()
    xs, tensor_vals = modulus_field(f, StandardBase(1), SCHED, mode="limsup")
    xs2, generic_vals = modulus_field(
        f, StandardBase(1), SCHED, mode="limsup", prefer_tensor=False
    )
    assert np.array_equal(xs, xs2)
    assert np.allclose(tensor_vals, generic_vals, atol=2e-2)
    with pytest.raises(AsymptoticsError):
        modulus_field(f, StandardBase(1), SCHED, mode="median")


# -- cluster sets --


def test_cluster_set_flagship_interval():
    cs = cluster_set(_flagship(), StandardBase(1), SCHED, eps=0.05)
    assert not cs.zero_added
    assert cs.max_abs == pytest.approx(3.0, abs=0.08)
    assert cs.covers_real_interval(-2.5, 2.5)
    assert not cs.contains_value(3.5 + 0j)
    assert not cs.contains_value(1.0 + 1.0j)


def test_cluster_zero_cell_for_noncompact_x():
    xg = GroupGrid.line(0.5, 16.0)
    f = multiplier_symbol(shifted_wave(2.0), xg, xg.dual())
    sched = SamplingSchedule(scales=(1e2, 1e3), points_per_scale=2000)
    cs = cluster_set(f, StandardBase(1), sched)
    assert cs.zero_added
    assert cs.contains_value(0j, slack=0)


def test_compact_dual_rejected():
    xg = GroupGrid.truncated_integers(8)
    f = multiplier_symbol(constant_closure(1.0), xg, xg.dual())
    with pytest.raises(AsymptoticsError):
        cluster_set(f, StandardBase(1))
    with pytest.raises(AsymptoticsError):
        gohberg_rhs_maxform(f, StandardBase(1))
