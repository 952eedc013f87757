#!/usr/bin/env python3
"""
Numerical kernels: adaptive Simpson, monotone inversion, golden section,
lattice shortest paths and polyline refinement.
"""

import math

import numpy as np
import pytest

from app.core.config import OptConfig, QuadConfig
from app.core.domains import boundary_distance_many, unit_disc
from app.core.errors import OutOfRange, QuadratureNonConvergence
from app.core.metric import metric_many
from app.utils.lattice import (
    lattice_shortest_path,
    polyline_length,
    refine_path,
    resample_polyline,
)
from app.utils.numerics import adaptive_simpson, golden_section, monotone_interp_invert, solve_monotone


def _disc_callables():
    disc = unit_disc()
    return (lambda Z, V: metric_many(disc, Z, V)), (lambda Z: boundary_distance_many(disc, Z))


# ===== ADAPTIVE SIMPSON =====

def test_simpson_constant_is_exact():
    assert adaptive_simpson(lambda t: 1.0, 0.0, 1.0) == 1.0


def test_simpson_cubic_and_poincare_density():
    cfg = QuadConfig(tol=1e-10)
    assert abs(adaptive_simpson(lambda t: 3 * t * t, 0.0, 1.0, cfg) - 1.0) <= 1e-10
    value = adaptive_simpson(lambda t: 1.0 / (1.0 - t * t), 0.0, 0.5, cfg)
    assert abs(value - math.atanh(0.5)) <= 1e-10


def test_simpson_reversed_bounds_and_empty_interval():
    f = lambda t: math.exp(t)
    assert adaptive_simpson(f, 1.0, 0.0) == pytest.approx(-(math.e - 1.0), abs=1e-8)
    assert adaptive_simpson(f, 0.3, 0.3) == 0.0


def test_simpson_additivity():
    cfg = QuadConfig(tol=1e-9)
    f = lambda t: 1.0 / (1.0 - t * t)
    whole = adaptive_simpson(f, 0.0, 0.7, cfg)
    split = adaptive_simpson(f, 0.0, 0.3, cfg) + adaptive_simpson(f, 0.3, 0.7, cfg)
    assert abs(whole - split) <= 2 * cfg.tol


def test_simpson_raises_at_max_depth():
    with pytest.raises(QuadratureNonConvergence) as info:
        adaptive_simpson(lambda t: abs(t - 1.0 / 3.0) ** 0.5, 0.0, 1.0, QuadConfig(tol=1e-14, max_depth=4))
    assert info.value.depth == 4
    assert info.value.b - info.value.a == pytest.approx(1.0 / 16)
    assert str(info.value).endswith("at depth 4")
    assert "boundary" not in str(info.value)


# ===== MONOTONE INVERSION =====

def test_interp_invert_examples():
    assert monotone_interp_invert([0, 1, 2], [0, 0.5, 1.0], 0.25) == 0.5
    assert monotone_interp_invert([0, 1, 2], [0, 0.5, 1.0], 0.5) == 1.0
    assert monotone_interp_invert([0, 1, 2, 3], [0, 0.5, 0.5, 1.0], 0.5) == 1.0


def test_interp_invert_out_of_range():
    with pytest.raises(OutOfRange):
        monotone_interp_invert([0, 1], [0, 1], 1.5)


def test_interp_invert_round_trip():
    grid = np.linspace(0.0, 2.0, 41)
    values = np.sinh(grid)
    rng = np.random.default_rng(3)
    for s in rng.uniform(0.0, values[-1], 200):
        t = monotone_interp_invert(grid, values, s)
        assert abs(np.interp(t, grid, values) - s) <= 1e-12


def test_solve_monotone_cube_root():
    x = solve_monotone(lambda x: x ** 3, lambda x: 3 * x * x, 2.0, 0.0, 2.0, 1.0, 1e-12)
    assert abs(x ** 3 - 2.0) <= 1e-12


def test_solve_monotone_flat_derivative_falls_back_to_bisection():
    x = solve_monotone(lambda x: x ** 3, lambda x: 0.0, 0.125, 0.0, 1.0, 0.0, 1e-12)
    assert x == pytest.approx(0.5, abs=1e-4)


# ===== GOLDEN SECTION =====

def test_golden_section_parabola():
    x, fx = golden_section(lambda x: (x - 0.3) ** 2 + 1.0, 0.0, 1.0, tol=1e-8)
    assert abs(x - 0.3) <= 1e-6
    assert fx == pytest.approx(1.0, abs=1e-10)


# ===== LATTICE + REFINEMENT =====

def test_lattice_path_connects_endpoints_and_refines_to_geodesic():
    density, interior = _disc_callables()
    z, w = np.array([0.0j]), np.array([0.5 + 0.0j])
    box = (np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    poly = lattice_shortest_path(density, interior, box, z, w, OptConfig(), margin=1e-9)
    assert np.allclose(poly[0], z) and np.allclose(poly[-1], w)

    trace = []
    refined = refine_path(density, interior, poly, OptConfig(), trace=trace)
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
    length = polyline_length(density, interior, refined, quad=QuadConfig(tol=1e-10))
    assert abs(length - math.atanh(0.5)) <= 1e-3
    assert length >= math.atanh(0.5) - 1e-9


def test_lattice_identical_endpoints_is_single_point():
    density, interior = _disc_callables()
    box = (np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    z = np.array([0.2 + 0.1j])
    poly = lattice_shortest_path(density, interior, box, z, z.copy())
    assert poly.shape == (1, 1)
    assert polyline_length(density, interior, poly) == 0.0


def test_resample_polyline_is_equally_spaced():
    poly = np.array([[0.0j], [0.3 + 0.0j], [0.3 + 0.3j]])
    out = resample_polyline(poly, 7)
    gaps = np.abs(np.diff(out[:, 0]))
    assert out.shape == (7, 1)
    assert np.allclose(gaps, 0.1)
