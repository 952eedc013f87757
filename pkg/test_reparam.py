#!/usr/bin/env python3
"""
Arc-length tables, inversion and the unit-speed pipeline (collapse + inversion).
"""

import math

import numpy as np
import pytest

from app.core.config import QuadConfig, ReparamConfig
from app.core.domains import unit_disc
from app.core.errors import ConstantPath, NotInvertible, OutOfRange
from app.core.fixtures import (
    bidisc_chord,
    isolated_zero_path,
    plateau_free_path,
    plateau_path,
    radial_path,
    sampled_plateau_path,
    spiral_path,
    two_plateau_path,
)
from app.core.paths import AffineSegment, ConstantSegment, Path
from app.core.reparam import (
    arc_length,
    check_strictly_increasing,
    direct_reparametrize_by_g,
    euclidean_lipschitz_bound,
    invert,
    unit_speed_reparametrize,
    verify_key_equation,
)

ELL = math.atanh(0.5)


def _split_radial():
    return Path(
        unit_disc(),
        0.5,
        (
            AffineSegment((0.0, 0.25), np.array([0j]), np.array([0.25 + 0j])),
            AffineSegment((0.25, 0.5), np.array([0.25 + 0j]), np.array([0.5 + 0j])),
        ),
    )


def _still_path():
    return Path(unit_disc(), 1.0, (ConstantSegment((0.0, 1.0), np.array([0.2 + 0.1j])),))


# ===== ARC LENGTH =====

def test_arc_length_of_radius():
    table = arc_length(radial_path())
    assert abs(table.total - ELL) <= 1e-8
    assert table.value_at(0.25) == pytest.approx(math.atanh(0.25), abs=1e-8)
    assert table.value_at(0.0) == 0.0


def test_arc_length_ignores_how_the_path_is_split():
    one, two = arc_length(radial_path()), arc_length(_split_radial())
    assert abs(one.total - two.total) <= 1e-8
    for t in (0.1, 0.25, 0.4):
        assert abs(one.value_at(t) - two.value_at(t)) <= 1e-8


def test_arc_length_of_constant_path_is_zero():
    table = arc_length(_still_path())
    assert table.total == 0.0
    assert np.all(table.values == 0.0)


def test_arc_length_of_sampled_path_with_tight_tolerance():
    # the one-sided difference region near each end is its own table interval
    table = arc_length(isolated_zero_path(), QuadConfig(tol=1e-10))
    assert table.total == pytest.approx(math.atanh(0.5) + math.atanh(0.1), abs=1e-7)
    h = isolated_zero_path().fd_step
    assert np.any(np.isclose(table.grid, h)) and np.any(np.isclose(table.grid, 1.0 - h))


def test_arc_length_rejects_outside_parameters():
    with pytest.raises(OutOfRange):
        arc_length(radial_path()).value_at(0.75)


def test_strictly_increasing_check_finds_plateau():
    ok, witness = check_strictly_increasing(arc_length(radial_path()))
    assert ok and witness is None
    ok, witness = check_strictly_increasing(arc_length(plateau_path()))
    assert not ok
    assert witness == (1.0, 2.0)


# ===== INVERSION =====

def test_invert_examples():
    table = arc_length(radial_path())
    assert invert(table, 0.0) == 0.0
    assert invert(table, table.total) == pytest.approx(0.5, abs=1e-9)
    assert invert(table, math.atanh(0.25)) == pytest.approx(0.25, abs=1e-8)
    with pytest.raises(OutOfRange):
        invert(table, table.total + 1.0)


def test_invert_round_trip_and_monotone():
    table = arc_length(spiral_path())
    s = np.sort(np.random.default_rng(1).uniform(0.0, table.total, 1000))
    t = np.array([invert(table, float(x)) for x in s])
    assert np.all(np.diff(t) >= 0.0)
    errors = [abs(table.value_at(float(a)) - float(b)) for a, b in zip(t, s)]
    assert max(errors) <= 1e-9 * (1.0 + table.total)


def test_invert_picks_leftmost_point_of_a_plateau():
    table = arc_length(plateau_path())
    assert invert(table, table.value_at(1.0)) == 1.0


# ===== UNIT-SPEED PIPELINE =====

def test_radius_becomes_tanh():
    result = unit_speed_reparametrize(radial_path())
    u = np.linspace(0.0, result.length, 400)
    assert abs(result.length - ELL) <= 1e-8
    assert np.max(np.abs(result.sigma.evaluate_many(u)[:, 0] - np.tanh(u))) <= 1e-6
    assert result.diagnostics.max_speed_error <= 1e-4
    assert not result.collapsed


def test_plateau_is_collapsed_before_inversion():
    result = unit_speed_reparametrize(plateau_path())
    reference = unit_speed_reparametrize(plateau_free_path())
    u = np.linspace(0.0, result.length, 200)
    assert result.collapsed
    assert result.plan.tau == pytest.approx(2.0)
    assert np.max(np.abs(result.sigma.evaluate_many(u) - reference.sigma.evaluate_many(u))) <= 1e-9


@pytest.mark.parametrize("make", [plateau_path, two_plateau_path])
def test_collapse_preserves_length_and_image(make):
    result = unit_speed_reparametrize(make())
    diag = result.diagnostics
    assert diag.length_discrepancy <= 1e-8 * (1.0 + result.length)
    assert diag.image_hausdorff <= 2.0 * diag.image_spacing
    assert verify_key_equation(result) <= 1e-4


def test_direct_inversion_refuses_plateaus():
    with pytest.raises(NotInvertible) as info:
        direct_reparametrize_by_g(plateau_path())
    a, b = info.value.witness
    assert a <= 1.0 + 1e-9 and b >= 2.0 - 1e-9


def test_direct_inversion_matches_pipeline_without_plateaus():
    direct = direct_reparametrize_by_g(spiral_path())
    piped = unit_speed_reparametrize(spiral_path())
    u = np.linspace(0.0, piped.length, 300)
    assert np.max(np.abs(direct.sigma.evaluate_many(u) - piped.sigma.evaluate_many(u))) <= 1e-12


def test_isolated_zero_of_speed_is_invertible():
    result = direct_reparametrize_by_g(isolated_zero_path())
    assert not result.collapsed
    assert result.zeros.intervals == ()
    assert verify_key_equation(result) <= 1e-4


def test_sampled_plateau_is_collapsed_before_inversion():
    path = sampled_plateau_path()
    result = unit_speed_reparametrize(path)
    u = np.linspace(0.0, result.length, 400)
    assert result.collapsed
    assert result.zeros.intervals[0] == pytest.approx((1.0, 2.0))
    assert result.length == pytest.approx(ELL, abs=1e-8)
    assert np.max(np.abs(result.sigma.evaluate_many(u)[:, 0] - np.tanh(u))) <= 1e-6
    assert result.diagnostics.max_speed_error <= 1e-4
    assert verify_key_equation(result) <= 1e-4

    with pytest.raises(NotInvertible) as info:
        direct_reparametrize_by_g(path)
    assert info.value.witness == pytest.approx((1.0, 2.0))


def test_sampled_path_with_tight_quadrature():
    result = unit_speed_reparametrize(isolated_zero_path(), ReparamConfig(quad=QuadConfig(tol=1e-10)))
    assert result.length == pytest.approx(math.atanh(0.5) + math.atanh(0.1), abs=1e-7)
    assert result.diagnostics.sigma_length_error <= 1e-6


def test_constant_path_is_rejected():
    with pytest.raises(ConstantPath):
        unit_speed_reparametrize(_still_path())


def test_reparametrising_twice_changes_nothing():
    first = unit_speed_reparametrize(radial_path())
    second = unit_speed_reparametrize(first.sigma)
    u = np.linspace(0.0, first.length, 200)
    assert abs(second.length - first.length) <= 1e-7
    assert np.max(np.abs(second.sigma.evaluate_many(u) - first.sigma.evaluate_many(u))) <= 1e-6


def test_key_equation_on_bidisc():
    result = unit_speed_reparametrize(bidisc_chord(), ReparamConfig(quad=QuadConfig(tol=1e-9)))
    assert verify_key_equation(result, 16) <= 1e-4
    assert result.length == pytest.approx(ELL, abs=1e-8)


# ===== LIPSCHITZ BOUND =====

@pytest.mark.parametrize("make", [radial_path, bidisc_chord, spiral_path])
def test_sigma_is_euclidean_lipschitz(make):
    result = unit_speed_reparametrize(make())
    L = euclidean_lipschitz_bound(result)
    rng = np.random.default_rng(2)
    s, t = rng.uniform(0.0, result.length, (2, 1000))
    gaps = np.linalg.norm(result.sigma.evaluate_many(s) - result.sigma.evaluate_many(t), axis=1)
    assert np.all(gaps <= L * np.abs(s - t) * (1.0 + 1e-5) + 1e-12)


def test_lipschitz_window_must_fit():
    result = unit_speed_reparametrize(radial_path())
    with pytest.raises(OutOfRange):
        euclidean_lipschitz_bound(result, window=(0.2, result.length + 1.0))


# ===== OUTPUT =====

def test_result_json_and_csv_shapes():
    result = unit_speed_reparametrize(bidisc_chord())
    payload = result.to_json()
    assert {"length", "collapsed", "plan", "zero_set", "diagnostics", "table", "sigma"} <= set(payload)
    assert "sigma" not in result.to_json(include_samples=False)
    header, rows = result.csv_rows()
    assert header == ["u", "re_1", "im_1", "re_2", "im_2", "speed"]
    assert rows[0][0] == 0.0
    assert rows[-1][0] == pytest.approx(result.length)
    assert all(abs(r[-1] - 1.0) <= 1e-4 for r in rows)
