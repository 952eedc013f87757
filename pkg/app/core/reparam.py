"""
Unit-speed reparametrisation.

    G(t)  = integral_0^t k_X(Gamma(s); Gamma'(s)) ds      (arc-length table)
    sigma = Gamma o G^{-1}  on [0, l],  l = G(tau)

Gamma is the input path when its zero-speed set has no interval of positive
length, otherwise the path with its plateaus collapsed.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import QuadConfig, ReparamConfig, ZERO_TOL
from app.core.domains import boundary_distance_many
from app.core.errors import ConstantPath, NotInvertible, OutOfRange
from app.core.metric import metric_floor_many, metric_many
from app.core.path_loader import path_to_spec
from app.core.paths import (
    CollapsePlan,
    IntervalSet,
    Path,
    SampledSegment,
    collapse,
    hausdorff,
    image_samples,
    image_spacing,
    speed_profile,
    zero_speed_set,
)
from app.utils.numerics import adaptive_simpson, monotone_interp_invert, solve_monotone

logger = logging.getLogger(__name__)

UNIT_SPEED_TOL = 1e-4
IMAGE_SAMPLES = 512


def segment_speed(path: Path, k: int) -> Callable[[float], float]:
    """Speed on the closed k-th segment (no switching to a neighbour at its ends)."""
    seg = path.segments[k]
    h = path.fd_step

    def _speed(t: float) -> float:
        ts = np.array([t])
        return float(metric_many(path.domain, seg.evaluate_many(ts), seg.derivative_many(ts, h))[0])

    return _speed


# =====================================================
# ARC-LENGTH TABLE
# =====================================================
@dataclass(frozen=True, eq=False)
class ArcLengthTable:
    grid: np.ndarray
    values: np.ndarray
    total: float
    quad_tol: float
    path: Path = field(repr=False)
    segment_ids: np.ndarray = field(repr=False)  # segment of each sub-interval [grid[i], grid[i+1]]
    local_tols: np.ndarray = field(repr=False)
    max_depth: int = 30

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    def value_at(self, t: float) -> float:
        """G(t): table value at the left node plus a local quadrature."""
        tol = ZERO_TOL * (1.0 + self.horizon)
        if t < -tol or t > self.horizon + tol:
            raise OutOfRange(f"t={t} outside [0, {self.horizon}]")
        t = min(max(t, 0.0), self.horizon)
        i = int(np.searchsorted(self.grid, t, side="right")) - 1
        if i >= self.grid.shape[0] - 1:
            return float(self.values[-1])
        if t == self.grid[i]:
            return float(self.values[i])
        speed = segment_speed(self.path, int(self.segment_ids[i]))
        local = adaptive_simpson(
            speed, float(self.grid[i]), t, QuadConfig(tol=float(self.local_tols[i]), max_depth=self.max_depth)
        )
        return float(min(max(self.values[i] + local, self.values[i]), self.values[i + 1]))

    def speed_at(self, t: float) -> float:
        i = min(max(int(np.searchsorted(self.grid, t, side="right")) - 1, 0), self.grid.shape[0] - 2)
        return segment_speed(self.path, int(self.segment_ids[i]))(t)

    def breakpoint_values(self) -> np.ndarray:
        idx = np.searchsorted(self.grid, self.path.breakpoints)
        idx = np.clip(idx, 0, self.grid.shape[0] - 1)
        values = self.values[idx].copy()
        values[0], values[-1] = 0.0, self.total
        return values

    def to_json(self) -> Dict[str, Any]:
        return {
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "total": self.total,
            "quad_tol": self.quad_tol,
        }


def arc_length(
    path: Path,
    quad: Optional[QuadConfig] = None,
    n_table: int = 64,
    extra_nodes: Optional[Sequence[float]] = None,
) -> ArcLengthTable:
    """
    Cumulative k-length on a grid holding every breakpoint, ``n_table`` sub-intervals
    per segment and any ``extra_nodes``. Each segment is integrated to quad.tol.

    Parameters where a segment's difference formula switches are nodes too,
    so every sub-interval sees a smooth integrand.
    """
    quad = quad or QuadConfig()
    extra = np.asarray([] if extra_nodes is None else list(extra_nodes), dtype=float)

    grid: List[float] = [0.0]
    values: List[float] = [0.0]
    seg_ids: List[int] = []
    tols: List[float] = []
    for k, seg in enumerate(path.segments):
        nodes = np.linspace(seg.start, seg.end, n_table + 1)
        candidates = np.concatenate([extra, seg.smooth_breaks(path.fd_step)])
        inside = candidates[(candidates > seg.start) & (candidates < seg.end)]
        nodes = np.union1d(nodes, inside)
        speed = segment_speed(path, k)
        for lo, hi in zip(nodes[:-1], nodes[1:]):
            if hi <= lo:
                continue
            tol = quad.tol * (hi - lo) / seg.width
            piece = 0.0 if seg.is_stationary() else adaptive_simpson(
                speed, float(lo), float(hi), QuadConfig(tol=tol, max_depth=quad.max_depth)
            )
            grid.append(float(hi))
            values.append(values[-1] + max(piece, 0.0))
            seg_ids.append(k)
            tols.append(tol)

    grid_arr = np.asarray(grid)
    grid_arr[-1] = path.horizon
    return ArcLengthTable(
        grid=grid_arr,
        values=np.asarray(values),
        total=float(values[-1]),
        quad_tol=quad.tol,
        path=path,
        segment_ids=np.asarray(seg_ids, dtype=int),
        local_tols=np.asarray(tols),
        max_depth=quad.max_depth,
    )


def check_strictly_increasing(
    table: ArcLengthTable,
    eps_G: float = 0.0,
    min_length: float = 0.0,
) -> Tuple[bool, Optional[Tuple[float, float]]]:
    """False plus the longest flat stretch when increments <= eps_G span >= min_length."""
    flat = np.diff(table.values) <= eps_G
    best: Optional[Tuple[float, float]] = None
    i = 0
    while i < flat.shape[0]:
        if not flat[i]:
            i += 1
            continue
        j = i
        while j + 1 < flat.shape[0] and flat[j + 1]:
            j += 1
        lo, hi = float(table.grid[i]), float(table.grid[j + 1])
        if hi - lo >= min_length and (best is None or hi - lo > best[1] - best[0]):
            best = (lo, hi)
        i = j + 1
    return best is None, best


def invert(table: ArcLengthTable, s: float, eps_inv: Optional[float] = None) -> float:
    """
    t with |G(t) - s| <= eps_inv; the leftmost preimage on a flat.

    The bracketing grid nodes give a linear-interpolation start; the
    safeguarded Newton step uses the speed as G'.
    """
    total = table.total
    eps = eps_inv if eps_inv is not None else 1e-10 * (1.0 + total)
    if s < -eps or s > total + eps:
        raise OutOfRange(f"s={s} outside [0, {total}]")
    s = min(max(s, 0.0), total)

    i = int(np.searchsorted(table.values, s, side="left"))
    if table.values[i] == s:
        return float(table.grid[i])
    lo, hi = float(table.grid[i - 1]), float(table.grid[i])
    x0 = monotone_interp_invert(table.grid[i - 1:i + 1], table.values[i - 1:i + 1], s)
    if abs(table.values[i - 1] - s) <= eps:
        return lo
    return solve_monotone(table.value_at, table.speed_at, s, lo, hi, x0, eps)


# =====================================================
# RESULT
# =====================================================
@dataclass(frozen=True)
class ReparamDiagnostics:
    max_speed_error: float
    unit_speed_fraction: float
    interior_nodes: int
    image_hausdorff: float
    image_spacing: float
    length_discrepancy: float
    sigma_length: float
    sigma_length_error: float


@dataclass(frozen=True, eq=False)
class ReparamResult:
    sigma: Path
    table: ArcLengthTable
    collapsed: bool
    plan: Optional[CollapsePlan]
    diagnostics: ReparamDiagnostics
    zeros: IntervalSet
    base_length: float

    @property
    def length(self) -> float:
        return self.table.total

    def to_json(self, include_samples: bool = True) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "length": self.length,
            "base_length": self.base_length,
            "collapsed": self.collapsed,
            "plan": self.plan.to_json() if self.plan is not None else None,
            "zero_set": self.zeros.to_json(),
            "diagnostics": asdict(self.diagnostics),
            "table": self.table.to_json(),
        }
        if include_samples:
            payload["sigma"] = path_to_spec(self.sigma)
        return payload

    def csv_rows(self) -> Tuple[List[str], List[List[float]]]:
        """Header and rows (u, re_1, im_1, ..., speed) at sigma's sample nodes."""
        dim = self.sigma.domain.dim
        header = ["u"] + [f"{part}_{j + 1}" for j in range(dim) for part in ("re", "im")] + ["speed"]
        nodes = np.unique(np.concatenate([
            seg.params - seg.shift if isinstance(seg, SampledSegment) else np.array(seg.interval)
            for seg in self.sigma.segments
        ]))
        nodes = nodes[(nodes >= 0.0) & (nodes <= self.sigma.horizon)]
        values = self.sigma.evaluate_many(nodes)
        speeds = self.sigma.speed_many(nodes)
        rows = []
        for u, z, sp in zip(nodes, values, speeds):
            coords = [float(x) for c in z for x in (c.real, c.imag)]
            rows.append([float(u)] + coords + [float(sp)])
        return header, rows


# =====================================================
# PIPELINE
# =====================================================
def _materialize_sigma(gamma: Path, table: ArcLengthTable, cfg: ReparamConfig) -> Path:
    """One Sampled segment of sigma per segment of Gamma, nodes spread by k-length."""
    total = table.total
    eps = cfg.inversion_tol(total)
    U = table.breakpoint_values()
    segments: List[SampledSegment] = []
    for k, seg in enumerate(gamma.segments):
        u_lo, u_hi = float(U[k]), float(U[k + 1])
        if u_hi - u_lo <= ZERO_TOL * (1.0 + total):
            continue
        count = max(4, int(round(cfg.n_out * (u_hi - u_lo) / total)))
        us = np.linspace(u_lo, u_hi, count)
        ts = np.empty(count)
        ts[0], ts[-1] = seg.start, seg.end
        for j in range(1, count - 1):
            ts[j] = min(max(invert(table, float(us[j]), eps), seg.start), seg.end)
        segments.append(SampledSegment((u_lo, u_hi), us, seg.evaluate_many(ts)))

    # zero-length segments were skipped: stitch the partition together
    fixed: List[SampledSegment] = []
    for i, seg in enumerate(segments):
        lo = 0.0 if i == 0 else fixed[-1].end
        hi = total if i == len(segments) - 1 else seg.end
        fixed.append(seg if (lo, hi) == seg.interval else seg.restrict(lo, hi))
    return Path(gamma.domain, total, tuple(fixed), join_tol=gamma.join_tol, margin=gamma.margin)


def _diagnose(
    path: Path,
    gamma: Path,
    base_table: ArcLengthTable,
    table: ArcLengthTable,
    sigma: Path,
    cfg: ReparamConfig,
) -> ReparamDiagnostics:
    samples = speed_profile(sigma, cfg.n_per_segment)
    errors = np.abs(samples.speeds[samples.defined] - 1.0)
    original = image_samples(path, IMAGE_SAMPLES)
    reparam = image_samples(sigma, IMAGE_SAMPLES)
    sigma_length = arc_length(sigma, cfg.quad, cfg.n_table).total
    return ReparamDiagnostics(
        max_speed_error=float(np.max(errors)),
        unit_speed_fraction=float(np.mean(errors <= UNIT_SPEED_TOL)),
        interior_nodes=int(errors.shape[0]),
        image_hausdorff=hausdorff(original, reparam),
        image_spacing=max(image_spacing(original), image_spacing(reparam)),
        length_discrepancy=abs(table.total - base_table.total),
        sigma_length=sigma_length,
        sigma_length_error=abs(sigma_length - table.total),
    )


def _reparametrize(path: Path, cfg: Optional[ReparamConfig], allow_collapse: bool) -> ReparamResult:
    cfg = cfg or ReparamConfig()
    base_table = arc_length(path, cfg.quad, cfg.n_table)
    if base_table.total <= cfg.eps_length:
        raise ConstantPath(base_table.total)

    samples = speed_profile(path, cfg.n_per_segment)
    zeros = zero_speed_set(samples, path, cfg.eps_speed, cfg.min_length)

    plan: Optional[CollapsePlan] = None
    gamma, table = path, base_table
    if zeros.intervals:
        if not allow_collapse:
            raise NotInvertible(zeros.intervals[0])
        gamma, plan = collapse(path, zeros)
        table = arc_length(gamma, cfg.quad, cfg.n_table)

    increasing, witness = check_strictly_increasing(table, eps_G=0.0)
    if not increasing:
        if not allow_collapse:
            raise NotInvertible(witness)
        logger.warning("Residual flat of G on %s after collapse; inverting leftmost", witness)

    sigma = _materialize_sigma(gamma, table, cfg)
    diagnostics = _diagnose(path, gamma, base_table, table, sigma, cfg)
    logger.info(
        "Reparametrised path of length %.10g (collapsed=%s, max |speed-1|=%.3g)",
        table.total, plan is not None, diagnostics.max_speed_error,
    )
    return ReparamResult(
        sigma=sigma,
        table=table,
        collapsed=plan is not None,
        plan=plan,
        diagnostics=diagnostics,
        zeros=zeros,
        base_length=base_table.total,
    )


def unit_speed_reparametrize(path: Path, cfg: Optional[ReparamConfig] = None) -> ReparamResult:
    return _reparametrize(path, cfg, allow_collapse=True)


def direct_reparametrize_by_g(path: Path, cfg: Optional[ReparamConfig] = None) -> ReparamResult:
    """Invert G on the path itself; NotInvertible when the zero-speed set holds an interval."""
    return _reparametrize(path, cfg, allow_collapse=False)


# =====================================================
# CHECKS
# =====================================================
def verify_key_equation(result: ReparamResult, n_checks: int = 16) -> float:
    """max |int_0^t k(sigma; sigma') du - t| over n_checks parameters in [0, l]."""
    checks = np.linspace(0.0, result.sigma.horizon, max(n_checks, 1))
    table = arc_length(result.sigma, QuadConfig(tol=result.table.quad_tol), extra_nodes=checks)
    return float(max(abs(table.value_at(float(t)) - t) for t in checks))


def euclidean_lipschitz_bound(
    result: ReparamResult,
    window: Optional[Tuple[float, float]] = None,
    n_samples: int = 512,
) -> float:
    """
    1/c with c the smallest value of k_X(sigma(u); v) over sampled u in the window
    and Euclidean-unit v; |sigma(s) - sigma(t)| <= |s - t| / c there.
    """
    lo, hi = window if window is not None else (0.0, result.sigma.horizon)
    if not (0.0 <= lo < hi <= result.sigma.horizon):
        raise OutOfRange(f"window {window} outside [0, {result.sigma.horizon}]")
    ts = np.union1d(np.linspace(lo, hi, n_samples), result.sigma.breakpoints)
    ts = ts[(ts >= lo) & (ts <= hi)]
    Z = result.sigma.evaluate_many(ts)
    if np.any(boundary_distance_many(result.sigma.domain, Z) <= 0.0):
        raise OutOfRange("window is not compactly contained in the domain")
    return float(1.0 / np.min(metric_floor_many(result.sigma.domain, Z)))
