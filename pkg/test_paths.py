#!/usr/bin/env python3
"""
Paths: evaluation, derivatives, speed profiles, zero-speed sets, plateau
collapse, the reparametrisation map and path spec loading.
"""

import json
import math
import os

import numpy as np
import pytest

from app.core.domains import unit_disc
from app.core.errors import (
    DegenerateResult,
    InvalidPath,
    NotConstantOnInterval,
    OutOfRange,
    PathSpecError,
    PointOutsideDomain,
)
from app.core.fixtures import (
    isolated_zero_path,
    plateau_free_path,
    plateau_path,
    radial_path,
    sampled_plateau_path,
    spiral_path,
    two_plateau_path,
)
from app.core.path_loader import load_path, load_path_spec, path_from_spec, path_to_spec
from app.core.paths import (
    AffineSegment,
    ConstantSegment,
    IntervalSet,
    Path,
    SampledSegment,
    collapse,
    derivative,
    hausdorff,
    image_samples,
    reparam_map,
    speed_profile,
    split_sampled_plateaus,
    zero_speed_set,
)

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def _affine(lo, hi, p, q):
    return AffineSegment((lo, hi), np.array([p], dtype=complex), np.array([q], dtype=complex))


def _sine_path():
    params = np.linspace(0.0, 1.0, 201)
    return Path(unit_disc(), 1.0, (SampledSegment((0.0, 1.0), params, 0.5 * np.sin(params)),))


# ===== CONSTRUCTION =====

def test_path_rejects_gaps_and_jumps():
    with pytest.raises(InvalidPath):
        Path(unit_disc(), 2.0, (_affine(0.0, 1.0, 0, 0.2), _affine(1.5, 2.0, 0.2, 0.3)))
    with pytest.raises(InvalidPath):
        Path(unit_disc(), 2.0, (_affine(0.0, 1.0, 0, 0.2), _affine(1.0, 2.0, 0.3, 0.4)))
    with pytest.raises(InvalidPath):
        Path(unit_disc(), 3.0, (_affine(0.0, 1.0, 0, 0.2),))


def test_path_rejects_points_outside_domain():
    with pytest.raises(PointOutsideDomain):
        Path(unit_disc(), 1.0, (_affine(0.0, 1.0, 0, 1.2),))


def test_sampled_segment_needs_increasing_params():
    with pytest.raises(InvalidPath):
        SampledSegment((0.0, 1.0), np.array([0.0, 0.5, 0.5, 1.0]), np.zeros(4))


# ===== DERIVATIVE =====

def test_derivative_of_affine_constant_and_sampled_segments():
    gamma = Path(unit_disc(), 1.0, (_affine(0.0, 1.0, 0, 0.5),))
    assert np.allclose(derivative(gamma, 0.5), [0.5])

    still = Path(unit_disc(), 1.0, (ConstantSegment((0.0, 1.0), np.array([0.3 + 0.1j])),))
    assert np.allclose(derivative(still, 0.25), [0.0])

    value = derivative(_sine_path(), 0.5)
    assert abs(value[0] - 0.5 * math.cos(0.5)) <= 1e-6


def test_sampled_derivative_is_accurate_at_segment_ends():
    path = _sine_path()
    assert abs(derivative(path, 0.0)[0] - 0.5) <= 1e-6
    assert abs(derivative(path, 1.0)[0] - 0.5 * math.cos(1.0)) <= 1e-6


def test_derivative_undefined_at_junctions_and_outside():
    path = plateau_path()
    assert derivative(path, 1.0) is None
    assert np.allclose(derivative(path, 0.0), [0.25])
    with pytest.raises(OutOfRange):
        derivative(path, 3.5)


# ===== SPEED PROFILE / ZERO SET =====

def test_speed_profile_leaves_breakpoints_unflagged():
    samples = speed_profile(radial_path(), 8)
    assert samples.grid.shape[0] == 10
    assert samples.defined.sum() == 8
    assert not samples.defined[0] and not samples.defined[-1]
    assert samples.speeds[-1] == pytest.approx(4.0 / 3.0)


def test_zero_speed_set_reports_plateaus_as_intervals():
    path = plateau_path()
    zeros = zero_speed_set(speed_profile(path), path)
    assert zeros.intervals == ((1.0, 2.0),)
    assert zeros.points == ()

    path = two_plateau_path()
    assert zero_speed_set(speed_profile(path), path).intervals == ((0.5, 1.0), (2.0, 2.5))


def test_zero_speed_set_empty_for_regular_path():
    path = radial_path()
    assert zero_speed_set(speed_profile(path), path).is_empty


def test_short_zero_run_becomes_isolated_point():
    path = isolated_zero_path()
    zeros = zero_speed_set(speed_profile(path), path, eps_speed=1e-3)
    assert zeros.intervals == ()
    assert len(zeros.points) == 1
    assert zeros.points[0] == pytest.approx(0.5, abs=1e-9)


def test_repeated_samples_become_a_constant_segment():
    path = sampled_plateau_path()
    assert [seg.kind for seg in path.segments] == ["sampled", "constant", "sampled"]
    assert path.segments[1].interval == pytest.approx((1.0, 2.0))
    zeros = zero_speed_set(speed_profile(path), path)
    assert len(zeros.intervals) == 1
    assert zeros.intervals[0] == pytest.approx((1.0, 2.0))
    t = np.linspace(0.0, 3.0, 301)
    assert np.max(np.abs(path.evaluate_many(t) - plateau_path().evaluate_many(t))) <= 1e-12


def test_sampled_segment_without_repeats_is_kept_whole():
    path = isolated_zero_path()
    assert len(path.segments) == 1
    assert split_sampled_plateaus(path.segments[0]) == [path.segments[0]]


def test_interval_set_must_be_ordered():
    with pytest.raises(ValueError):
        IntervalSet(((0.5, 0.4),))
    with pytest.raises(ValueError):
        IntervalSet(((0.0, 0.5), (0.3, 0.6)))
    assert IntervalSet(((0.0, 0.5), (1.0, 1.25))).total_length == 0.75


# ===== COLLAPSE =====

def test_collapse_single_plateau():
    path = plateau_path()
    aux, plan = collapse(path, IntervalSet(((1.0, 2.0),)))
    assert aux.horizon == pytest.approx(2.0)
    assert plan.cumulative_offsets == (1.0,)
    assert np.allclose(aux.evaluate(0.5), [0.125])
    assert np.allclose(aux.evaluate(1.5), [0.375])


def test_collapse_composes_back_to_original():
    path = two_plateau_path()
    zeros = zero_speed_set(speed_profile(path), path)
    aux, plan = collapse(path, zeros)
    A = reparam_map(plan)
    t = np.linspace(0.0, path.horizon, 500)
    assert plan.tau == pytest.approx(2.0, abs=1e-12)
    assert np.max(np.abs(path.evaluate_many(t) - aux.evaluate_many(A(t)))) <= 1e-8
    assert zero_speed_set(speed_profile(aux), aux).is_empty


def test_collapse_with_empty_set_is_identity():
    path = radial_path()
    aux, plan = collapse(path, IntervalSet())
    assert aux is path
    assert plan.tau == path.horizon


def test_collapse_rejects_non_constant_interval():
    with pytest.raises(NotConstantOnInterval):
        collapse(radial_path(), IntervalSet(((0.2, 0.4),)))


def test_collapse_of_everything_is_degenerate():
    still = Path(unit_disc(), 1.0, (ConstantSegment((0.0, 1.0), np.array([0.1 + 0j])),))
    with pytest.raises(DegenerateResult):
        collapse(still, IntervalSet(((0.0, 1.0),)))


# ===== REPARAMETRISATION MAP =====

def test_reparam_map_values():
    _, plan = collapse(plateau_path(), IntervalSet(((1.0, 2.0),)))
    A = reparam_map(plan)
    assert A(0.5) == pytest.approx(0.5)
    assert A(1.5) == pytest.approx(1.0)
    assert A(2.5) == pytest.approx(1.5)
    assert A(3.0) == pytest.approx(2.0)


def test_reparam_map_is_monotone():
    path = two_plateau_path()
    _, plan = collapse(path, zero_speed_set(speed_profile(path), path))
    A = reparam_map(plan)
    t = np.sort(np.random.default_rng(0).uniform(0.0, path.horizon, 1000))
    assert np.all(np.diff(A(t)) >= 0.0)


def test_reparam_map_without_plateaus_is_identity():
    path = radial_path()
    _, plan = collapse(path, IntervalSet())
    t = np.linspace(0.0, path.horizon, 11)
    assert np.allclose(reparam_map(plan)(t), t)


# ===== IMAGES =====

def test_hausdorff_examples():
    assert hausdorff([0.0], [0.1]) == pytest.approx(0.1)
    pts = image_samples(spiral_path(), 128)
    assert hausdorff(pts, pts) == 0.0


def test_plateau_does_not_change_the_image():
    a = image_samples(plateau_path(), 512)
    b = image_samples(plateau_free_path(), 512)
    assert hausdorff(a, b) <= 1e-3


# ===== PATH SPECS =====

def test_load_path_matches_fixture():
    loaded = load_path(os.path.join(DATA_DIR, "plateau.json"))
    t = np.linspace(0.0, 3.0, 61)
    assert np.allclose(loaded.evaluate_many(t), plateau_path().evaluate_many(t))


def test_spec_round_trip_keeps_values():
    for path in (spiral_path(), isolated_zero_path()):
        again = path_from_spec(json.loads(json.dumps(path_to_spec(path))))
        t = np.linspace(0.0, path.horizon, 97)
        assert np.max(np.abs(again.evaluate_many(t) - path.evaluate_many(t))) <= 1e-9


def test_missing_or_broken_spec_files(tmp_path):
    with pytest.raises(PathSpecError):
        load_path_spec(str(tmp_path / "nope.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(PathSpecError):
        load_path(str(broken))


@pytest.mark.parametrize("spec", [
    {"domain": {"kind": "disc"}, "segments": []},
    {"domain": {"kind": "disc"}, "T": 1.0, "segments": []},
    {"domain": {"kind": "disc"}, "T": 1.0, "segments": [{"interval": [0, 1], "kind": "spline"}]},
    {"domain": {"kind": "disc"}, "T": 1.0, "segments": [{"interval": [0, 1], "kind": "affine", "from": [[0, 0]]}]},
    {"domain": {"kind": "disc"}, "T": 1.0, "segments": [{"interval": [0, 1], "kind": "constant", "at": "zero"}]},
])
def test_malformed_specs_raise_path_spec_error(spec):
    with pytest.raises(PathSpecError):
        path_from_spec(spec)
