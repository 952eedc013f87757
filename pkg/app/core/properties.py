"""
Grid verification of the (lambda, kappa) almost-geodesic and chord-arc properties.

almost-geodesic:  |s-t|/lambda - kappa <= K(p(s), p(t)) <= lambda|s-t| + kappa  for all s, t
                  and  k(p(t); p'(t)) <= lambda  for almost every t
chord-arc:        l(p|[s,t]) <= lambda K(p(s), p(t)) + kappa                     for all s < t

Slack is "violation amount": a check passes when worst_slack <= tol.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.config import QuadConfig, ReparamConfig, thread_count
from app.core.errors import HypothesisViolated, OutOfRange
from app.core.metric import distance_many
from app.core.paths import Path, speed_profile
from app.core.reparam import ArcLengthTable, ReparamResult, arc_length, unit_speed_reparametrize

logger = logging.getLogger(__name__)

Row = Tuple[float, float, float, float, float]

DEFAULT_GRID = 64


class GeodesicParams(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lambda_: float = Field(default=1.0, alias="lambda", ge=1.0)
    kappa: float = Field(default=0.0, ge=0.0)

    def to_json(self) -> Dict[str, float]:
        return {"lambda": self.lambda_, "kappa": self.kappa}


@dataclass(frozen=True)
class PropertyReport:
    kind: str
    params: GeodesicParams
    passed: bool
    worst_slack: float
    witness: Tuple[float, float]
    condition: str
    grid_size: int
    tolerance: float
    rows: List[Row] = field(default_factory=list, repr=False, compare=False)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "params": self.params.to_json(),
            "verdict": self.verdict,
            "worst_slack": self.worst_slack,
            "witness": list(self.witness),
            "condition": self.condition,
            "grid_size": self.grid_size,
            "tolerance": self.tolerance,
        }


# =====================================================
# HELPERS
# =====================================================
def _pairs(n: int) -> Tuple[np.ndarray, np.ndarray]:
    I, J = np.triu_indices(n, k=1)
    return I, J


def pairwise_distances(path: Path, Z: np.ndarray, I: np.ndarray, J: np.ndarray) -> np.ndarray:
    """K(Z[I], Z[J]), split over KOBPATH_THREADS worker threads."""
    workers = thread_count()
    if workers == 1 or I.shape[0] < 2 * workers:
        return distance_many(path.domain, Z[I], Z[J])
    chunks = np.array_split(np.arange(I.shape[0]), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda c: distance_many(path.domain, Z[I[c]], Z[J[c]]), chunks))
    return np.concatenate(parts)


def _grid(path: Path, n_grid: int) -> np.ndarray:
    if n_grid < 2:
        raise ValueError("n_grid must be >= 2")
    return np.linspace(0.0, path.horizon, n_grid)


def arc_length_between(path: Path, table: ArcLengthTable, s: float, t: float) -> float:
    """l_X(path|[s, t]) = G(t) - G(s)."""
    if not (0.0 <= s <= t <= path.horizon):
        raise OutOfRange(f"need 0 <= s <= t <= {path.horizon}, got s={s}, t={t}")
    if table.path is not path and table.horizon != path.horizon:
        raise OutOfRange("table was built for another path")
    return table.value_at(t) - table.value_at(s)


# =====================================================
# VERIFIERS
# =====================================================
def verify_almost_geodesic(
    path: Path,
    params: GeodesicParams,
    n_grid: int = DEFAULT_GRID,
    tol: Optional[float] = None,
    n_per_segment: int = 64,
    quad: Optional[QuadConfig] = None,
) -> PropertyReport:
    lam, kap = params.lambda_, params.kappa
    if tol is None:
        tol = 1e-6 * (1.0 + arc_length(path, quad).total)
    grid = _grid(path, n_grid)
    Z = path.evaluate_many(grid)
    I, J = _pairs(n_grid)
    K = pairwise_distances(path, Z, I, J)
    gap = grid[J] - grid[I]

    lower_rhs = gap / lam - kap
    upper_rhs = lam * gap + kap
    lower = lower_rhs - K
    upper = K - upper_rhs
    slack = np.maximum(lower, upper)
    rhs = np.where(lower >= upper, lower_rhs, upper_rhs)

    rows: List[Row] = [
        (float(grid[i]), float(grid[j]), float(k), float(r), float(sl))
        for i, j, k, r, sl in zip(I, J, K, rhs, slack)
    ]
    best = int(np.argmax(slack))
    worst = float(slack[best])
    witness = (float(grid[I[best]]), float(grid[J[best]]))
    condition = "distance-lower" if lower[best] >= upper[best] else "distance-upper"

    samples = speed_profile(path, n_per_segment)
    ts = samples.grid[samples.defined]
    speeds = samples.speeds[samples.defined]
    speed_slack = speeds - lam
    rows.extend((float(t), float(t), float(sp), lam, float(sp - lam)) for t, sp in zip(ts, speeds))
    k = int(np.argmax(speed_slack))
    if speed_slack[k] > worst:
        worst = float(speed_slack[k])
        witness = (float(ts[k]), float(ts[k]))
        condition = "speed"

    report = PropertyReport(
        kind="almost-geodesic",
        params=params,
        passed=worst <= tol,
        worst_slack=worst,
        witness=witness,
        condition=condition,
        grid_size=n_grid,
        tolerance=tol,
        rows=rows,
    )
    logger.info("almost-geodesic %s: %s (worst slack %.3g at %s)", params.to_json(), report.verdict, worst, witness)
    return report


def verify_chord_arc(
    path: Path,
    params: GeodesicParams,
    n_grid: int = DEFAULT_GRID,
    tol: Optional[float] = None,
    quad: Optional[QuadConfig] = None,
) -> PropertyReport:
    lam, kap = params.lambda_, params.kappa
    grid = _grid(path, n_grid)
    table = arc_length(path, quad, extra_nodes=grid)
    tol = 1e-6 * (1.0 + table.total) if tol is None else tol

    G = np.array([table.value_at(float(t)) for t in grid])
    Z = path.evaluate_many(grid)
    I, J = _pairs(n_grid)
    K = pairwise_distances(path, Z, I, J)
    lengths = G[J] - G[I]
    rhs = lam * K + kap
    slack = lengths - rhs

    best = int(np.argmax(slack))
    report = PropertyReport(
        kind="chord-arc",
        params=params,
        passed=float(slack[best]) <= tol,
        worst_slack=float(slack[best]),
        witness=(float(grid[I[best]]), float(grid[J[best]])),
        condition="length",
        grid_size=n_grid,
        tolerance=tol,
        rows=[
            (float(grid[i]), float(grid[j]), float(l), float(r), float(sl))
            for i, j, l, r, sl in zip(I, J, lengths, rhs, slack)
        ],
    )
    logger.info("chord-arc %s: %s (worst slack %.3g at %s)", params.to_json(), report.verdict, report.worst_slack, report.witness)
    return report


# =====================================================
# COROLLARIES
# =====================================================
def chord_arc_to_almost_geodesic(
    path: Path,
    params: GeodesicParams,
    cfg: Optional[ReparamConfig] = None,
    n_grid: int = DEFAULT_GRID,
    tol: Optional[float] = None,
) -> Tuple[ReparamResult, PropertyReport, PropertyReport]:
    """
    A (lambda, kappa)-chord-arc path reparametrised by k-arc length is a
    (lambda, kappa)-almost-geodesic and still (lambda, kappa)-chord-arc.
    Returns (result, chord-arc report of sigma, almost-geodesic report of sigma).
    """
    hypothesis = verify_chord_arc(path, params, n_grid, tol)
    if not hypothesis.passed:
        raise HypothesisViolated(
            f"Path is not ({params.lambda_:g}, {params.kappa:g})-chord-arc "
            f"(worst slack {hypothesis.worst_slack:.3g} at {hypothesis.witness})",
            report=hypothesis,
        )
    result = unit_speed_reparametrize(path, cfg)
    sigma_tol = 1e-6 * (1.0 + result.length) if tol is None else tol
    chord_arc = verify_chord_arc(result.sigma, params, n_grid, sigma_tol)
    almost_geodesic = verify_almost_geodesic(result.sigma, params, n_grid, sigma_tol)
    return result, chord_arc, almost_geodesic


def almost_geodesic_to_chord_arc_params(params: GeodesicParams) -> GeodesicParams:
    lam = params.lambda_
    return GeodesicParams(lambda_=lam * lam, kappa=lam * lam * params.kappa)


def verify_corollary_b(
    path: Path,
    params: GeodesicParams,
    n_grid: int = DEFAULT_GRID,
    tol: Optional[float] = None,
) -> PropertyReport:
    """A (lambda, kappa)-almost-geodesic is (lambda^2, lambda^2 kappa)-chord-arc."""
    hypothesis = verify_almost_geodesic(path, params, n_grid, tol)
    if not hypothesis.passed:
        raise HypothesisViolated(
            f"Path is not a ({params.lambda_:g}, {params.kappa:g})-almost-geodesic "
            f"(worst slack {hypothesis.worst_slack:.3g}, {hypothesis.condition})",
            report=hypothesis,
        )
    return verify_chord_arc(path, almost_geodesic_to_chord_arc_params(params), n_grid, tol)


def minimal_kappa(
    path: Path,
    lambda_: float,
    check: Literal["chord-arc", "almost-geodesic"] = "chord-arc",
    n_grid: int = DEFAULT_GRID,
    tol: Optional[float] = None,
    precision: float = 1e-6,
) -> float:
    """Smallest kappa (to ``precision``) at which the check passes for fixed lambda."""
    verify = verify_chord_arc if check == "chord-arc" else verify_almost_geodesic

    def _passes(kappa: float) -> PropertyReport:
        return verify(path, GeodesicParams(lambda_=lambda_, kappa=kappa), n_grid, tol)

    start = _passes(0.0)
    if start.passed:
        return 0.0
    hi = max(start.worst_slack, precision) * 2.0
    top = _passes(hi)
    if not top.passed:
        raise HypothesisViolated(
            f"No kappa makes the {check} check pass at lambda={lambda_:g} ({top.condition})",
            report=top,
        )
    lo = 0.0
    while hi - lo > precision:
        mid = 0.5 * (lo + hi)
        if _passes(mid).passed:
            hi = mid
        else:
            lo = mid
    return hi
