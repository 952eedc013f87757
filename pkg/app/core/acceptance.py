"""
Built-in acceptance suite run by `python -m app.cli demo`.

Each check returns a CheckResult; a check that raises counts as failed,
except input errors while loading the built-in specs, which propagate.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from app.core.config import KOBPATH_SEED, OptConfig, ReparamConfig
from app.core.domains import annulus, polydisc, product, punctured_disc, unit_ball, unit_disc, upper_half_plane
from app.core.errors import InputError, NotInvertible
from app.core.fixtures import (
    ball_chord,
    detour_geodesic,
    random_paths,
    slowed_geodesic,
)
from app.core.metric import (
    disc_automorphism,
    distance,
    distance_many,
    distance_via_path_optimization,
    metric_many,
    royden_lower_bound,
)
from app.core.path_loader import load_path
from app.core.paths import Path, collapse, reparam_map, speed_profile, zero_speed_set
from app.core.properties import GeodesicParams, chord_arc_to_almost_geodesic, verify_corollary_b
from app.core.reparam import (
    direct_reparametrize_by_g,
    unit_speed_reparametrize,
    verify_key_equation,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class DemoSpecs:
    radial: Path
    plateau: Path
    two_plateaus: Path
    bidisc: Path
    l_shape: Path


def load_demo_specs(data_dir: str) -> DemoSpecs:
    """Built-in specs; any InputError here aborts the demo."""

    def _load(name: str) -> Path:
        return load_path(os.path.join(data_dir, name))

    return DemoSpecs(
        radial=_load("radial.json"),
        plateau=_load("plateau.json"),
        two_plateaus=_load("two_plateaus.json"),
        bidisc=_load("bidisc_chord.json"),
        l_shape=_load("l_shape.json"),
    )


# =====================================================
# CHECKS
# =====================================================
def check_geodesic_recovery(specs: DemoSpecs, cfg: ReparamConfig) -> CheckResult:
    result = unit_speed_reparametrize(specs.radial, cfg)
    u = np.linspace(0.0, result.length, 512)
    curve_err = float(np.max(np.abs(result.sigma.evaluate_many(u)[:, 0] - np.tanh(u))))
    length_err = abs(result.length - math.atanh(0.5))
    grid = np.linspace(0.0, result.length, 32)
    Z = result.sigma.evaluate_many(grid)
    I, J = np.triu_indices(32, k=1)
    dist_err = float(np.max(np.abs(distance_many(specs.radial.domain, Z[I], Z[J]) - (grid[J] - grid[I]))))
    ok = curve_err <= 1e-6 and length_err <= 1e-8 and dist_err <= 1e-8
    return CheckResult(1, "geodesic recovery", ok, f"|sigma-tanh|={curve_err:.2e} |l-atanh(.5)|={length_err:.2e} |K-|s-t||={dist_err:.2e}")


def check_unit_speed_suite(cfg: ReparamConfig, seed: int) -> CheckResult:
    worst_fraction, worst_key = 1.0, 0.0
    for path in random_paths(seed, 10):
        result = unit_speed_reparametrize(path, cfg)
        worst_fraction = min(worst_fraction, result.diagnostics.unit_speed_fraction)
        worst_key = max(worst_key, verify_key_equation(result, 16))
    ok = worst_fraction >= 0.99 and worst_key <= 1e-4
    return CheckResult(2, "unit-speed suite", ok, f"min fraction={worst_fraction:.4f} key eq={worst_key:.2e}")


def check_iff_clause(specs: DemoSpecs, cfg: ReparamConfig) -> CheckResult:
    witness = None
    try:
        direct_reparametrize_by_g(specs.plateau, cfg)
    except NotInvertible as err:
        witness = err.witness
    result = unit_speed_reparametrize(specs.plateau, cfg)
    diag = result.diagnostics
    overlaps = witness is not None and witness[0] < 2.0 and witness[1] > 1.0
    ok = (
        overlaps
        and result.collapsed
        and diag.length_discrepancy <= 1e-8
        and diag.image_hausdorff <= 2.0 * diag.image_spacing
    )
    return CheckResult(3, "iff clause", ok, f"witness={witness} dl={diag.length_discrepancy:.2e} H={diag.image_hausdorff:.2e}")


def check_collapse(specs: DemoSpecs, cfg: ReparamConfig) -> CheckResult:
    path = specs.two_plateaus
    zeros = zero_speed_set(speed_profile(path, cfg.n_per_segment), path, cfg.eps_speed, cfg.min_length)
    aux, plan = collapse(path, zeros)
    A = reparam_map(plan)
    t = np.linspace(0.0, path.horizon, 512)
    comp = float(np.max(np.abs(path.evaluate_many(t) - aux.evaluate_many(A(t)))))
    residual = zero_speed_set(speed_profile(aux, cfg.n_per_segment), aux, cfg.eps_speed, cfg.min_length)
    ok = abs(plan.tau - 2.0) <= 1e-12 and comp <= 1e-8 and not residual.intervals
    return CheckResult(4, "plateau collapse", ok, f"tau={plan.tau:g} |gamma-aux(A)|={comp:.2e}")


def check_corollary_a(specs: DemoSpecs, cfg: ReparamConfig, n_grid: int) -> CheckResult:
    cases = [
        (specs.radial, GeodesicParams(lambda_=1.0, kappa=0.0)),
        (specs.plateau, GeodesicParams(lambda_=1.0, kappa=0.0)),
        (specs.bidisc, GeodesicParams(lambda_=1.0, kappa=0.0)),
        (ball_chord(), GeodesicParams(lambda_=1.0, kappa=0.0)),
        (specs.l_shape, GeodesicParams(lambda_=1.5, kappa=0.05)),
    ]
    worst = -math.inf
    ok = True
    for path, params in cases:
        result, chord_arc, almost_geodesic = chord_arc_to_almost_geodesic(path, params, cfg, n_grid)
        ok = ok and chord_arc.passed and almost_geodesic.passed
        worst = max(worst, chord_arc.worst_slack, almost_geodesic.worst_slack)
    return CheckResult(5, "chord-arc -> almost-geodesic", ok, f"{len(cases)} curves, worst slack={worst:.2e}")


def check_corollary_b(n_grid: int) -> CheckResult:
    slowed = verify_corollary_b(slowed_geodesic(), GeodesicParams(lambda_=2.0, kappa=0.0), n_grid)
    detour = verify_corollary_b(detour_geodesic(), GeodesicParams(lambda_=1.0, kappa=0.1), n_grid)
    ok = slowed.passed and detour.passed
    return CheckResult(6, "almost-geodesic -> chord-arc", ok, f"(4,0): {slowed.worst_slack:.2e} (1,0.1): {detour.worst_slack:.2e}")


def mobius_max_relative_error(seed: int, count: int = 1000) -> float:
    rng = np.random.default_rng(seed)
    disc = unit_disc()
    worst = 0.0
    for _ in range(count):
        a, z, w = (r * np.exp(2j * np.pi * th) for r, th in zip(rng.uniform(0, 0.9, 3), rng.random(3)))
        v = complex(*rng.standard_normal(2))
        phi, dphi = disc_automorphism(a, float(rng.uniform(0, 2 * np.pi)))
        K0 = distance(disc, z, w)
        K1 = distance(disc, phi(z), phi(w))
        k0 = float(metric_many(disc, np.array([[z]]), np.array([[v]]))[0])
        k1 = float(metric_many(disc, np.array([[phi(z)]]), np.array([[dphi(z) * v]]))[0])
        worst = max(worst, abs(K1 - K0) / max(K0, 1e-300), abs(k1 - k0) / k0)
    return worst


# Disc diameters and bidisc chords from the origin: the straight chord is a geodesic.
GEODESIC_CHORDS: List[tuple] = [
    (unit_disc(), 0.0, 0.5),
    (unit_disc(), 0.3j, -0.4j),
    (unit_disc(), 0.2 + 0.2j, -0.3 - 0.3j),
    (unit_disc(), -0.6, 0.1),
    (unit_disc(), 0.1 - 0.5j, -0.05 + 0.25j),
    (unit_disc(), 0.0, -0.7j),
    (polydisc(1.0, 1.0), [0.0, 0.0], [0.5, 0.3]),
    (polydisc(1.0, 1.0), [0.0, 0.0], [0.2j, -0.4]),
    (polydisc(1.0, 1.0), [0.0, 0.0], [-0.3, 0.3j]),
    (polydisc(1.0, 1.0), [0.0, 0.0], [0.45, 0.1 + 0.1j]),
]


def check_metric_layer(seed: int, opt: OptConfig) -> CheckResult:
    mobius = mobius_max_relative_error(seed)
    opt_err = 0.0
    for domain, z, w in GEODESIC_CHORDS:
        opt_err = max(opt_err, abs(distance_via_path_optimization(domain, z, w, opt) - distance(domain, z, w)))
    ok = mobius <= 1e-10 and opt_err <= opt.target_gap
    return CheckResult(
        7, "metric layer", ok,
        f"mobius rel err={mobius:.2e} path-opt err={opt_err:.2e} over {len(GEODESIC_CHORDS)} pairs",
    )


def royden_fixtures() -> List[tuple]:
    return [
        (unit_disc(), 0.0, 0.25),
        (unit_ball(2), [0.1, 0.0], 0.3),
        (polydisc(1.0, 0.5), [0.0, 0.1], 0.2),
        (upper_half_plane(), 1j, 0.5),
        (punctured_disc(), 0.5, 0.2),
        (annulus(0.25), -0.6, 0.1),
        (product(unit_disc(), upper_half_plane()), [0.0, 1j], 0.4),
    ]


def check_royden(seed: int) -> CheckResult:
    disc_value = royden_lower_bound(unit_disc(), 0.0, 0.25, 64, 16, seed=seed)
    positive = all(royden_lower_bound(d, x, r, 64, 16, seed=seed) > 0.0 for d, x, r in royden_fixtures())
    ok = abs(disc_value - 1.0) <= 1e-10 and positive
    return CheckResult(8, "royden lower bound", ok, f"c_0={disc_value:.12f}")


# =====================================================
# SUITE
# =====================================================
def run_acceptance(
    data_dir: str,
    cfg: Optional[ReparamConfig] = None,
    n_grid: int = 64,
    seed: int = KOBPATH_SEED,
    opt: Optional[OptConfig] = None,
) -> List[CheckResult]:
    cfg = cfg or ReparamConfig()
    opt = opt or OptConfig()
    specs = load_demo_specs(data_dir)

    checks: List[Callable[[], CheckResult]] = [
        lambda: check_geodesic_recovery(specs, cfg),
        lambda: check_unit_speed_suite(cfg, seed),
        lambda: check_iff_clause(specs, cfg),
        lambda: check_collapse(specs, cfg),
        lambda: check_corollary_a(specs, cfg, n_grid),
        lambda: check_corollary_b(n_grid),
        lambda: check_metric_layer(seed, opt),
        lambda: check_royden(seed),
    ]
    results: List[CheckResult] = []
    for number, check in enumerate(checks, start=1):
        try:
            results.append(check())
        except InputError:
            raise
        except Exception as err:
            logger.exception("Acceptance check %d crashed", number)
            results.append(CheckResult(number, f"check {number}", False, f"{type(err).__name__}: {err}"))
        logger.info("Check %d: %s", number, "pass" if results[-1].passed else "FAIL")
    return results
