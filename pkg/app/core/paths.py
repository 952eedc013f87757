"""
Absolutely continuous paths on [0, T] made of Constant / Affine / Sampled segments,
their speed profiles, zero-speed sets and the plateau-collapse construction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial.distance import directed_hausdorff

from app.core.config import EPS_CONST, EPS_JOIN, FD_STEP_FACTOR, INTERIOR_MARGIN, ZERO_TOL
from app.core.domains import Domain, boundary_distance_many, point_to_json, to_complex, to_real
from app.core.errors import (
    DegenerateResult,
    InvalidPath,
    NotConstantOnInterval,
    OutOfRange,
    PointOutsideDomain,
)
from app.core.metric import metric_many

logger = logging.getLogger(__name__)

Interval = Tuple[float, float]

CHECK_NODES = 33


# =====================================================
# SEGMENTS
# =====================================================
@dataclass(frozen=True, eq=False)
class Segment:
    interval: Interval

    kind = "segment"

    @property
    def start(self) -> float:
        return self.interval[0]

    @property
    def end(self) -> float:
        return self.interval[1]

    @property
    def width(self) -> float:
        return self.interval[1] - self.interval[0]

    def evaluate_many(self, ts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivative_many(self, ts: np.ndarray, h: float) -> np.ndarray:
        raise NotImplementedError

    def restrict(self, lo: float, hi: float) -> "Segment":
        raise NotImplementedError

    def shifted(self, offset: float) -> "Segment":
        """Same curve on [a - offset, b - offset]."""
        raise NotImplementedError

    def is_stationary(self) -> bool:
        return False

    def smooth_breaks(self, h: float) -> np.ndarray:
        """Interior parameters where derivative_many changes formula."""
        return np.empty(0)

    def start_value(self) -> np.ndarray:
        return self.evaluate_many(np.array([self.start]))[0]

    def end_value(self) -> np.ndarray:
        return self.evaluate_many(np.array([self.end]))[0]


@dataclass(frozen=True, eq=False)
class ConstantSegment(Segment):
    point: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=complex))

    kind = "constant"

    def __post_init__(self) -> None:
        object.__setattr__(self, "point", np.asarray(self.point, dtype=complex).reshape(-1))

    def evaluate_many(self, ts: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.point, (np.size(ts), self.point.shape[0])).copy()

    def derivative_many(self, ts: np.ndarray, h: float) -> np.ndarray:
        return np.zeros((np.size(ts), self.point.shape[0]), dtype=complex)

    def restrict(self, lo: float, hi: float) -> "ConstantSegment":
        return ConstantSegment((lo, hi), self.point)

    def shifted(self, offset: float) -> "ConstantSegment":
        return ConstantSegment((self.start - offset, self.end - offset), self.point)

    def is_stationary(self) -> bool:
        return True


@dataclass(frozen=True, eq=False)
class AffineSegment(Segment):
    p: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=complex))
    q: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=complex))

    kind = "affine"

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", np.asarray(self.p, dtype=complex).reshape(-1))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=complex).reshape(-1))

    @property
    def velocity(self) -> np.ndarray:
        return (self.q - self.p) / self.width

    def evaluate_many(self, ts: np.ndarray) -> np.ndarray:
        s = (np.asarray(ts, dtype=float) - self.start) / self.width
        return self.p[None, :] + s[:, None] * (self.q - self.p)[None, :]

    def derivative_many(self, ts: np.ndarray, h: float) -> np.ndarray:
        return np.broadcast_to(self.velocity, (np.size(ts), self.p.shape[0])).copy()

    def restrict(self, lo: float, hi: float) -> "AffineSegment":
        ends = self.evaluate_many(np.array([lo, hi]))
        return AffineSegment((lo, hi), ends[0], ends[1])

    def shifted(self, offset: float) -> "AffineSegment":
        return AffineSegment((self.start - offset, self.end - offset), self.p, self.q)

    def is_stationary(self) -> bool:
        return not np.any(np.abs(self.q - self.p) > 0.0)


@dataclass(frozen=True, eq=False)
class SampledSegment(Segment):
    """
    Cubic-spline interpolant through (params[i], points[i]).

    ``shift`` maps the segment interval back onto the spline's own parameter
    range: value(t) = spline(t + shift). Restricted or shifted copies share
    the spline of the original samples.
    """

    params: np.ndarray = field(default_factory=lambda: np.zeros(2))
    points: np.ndarray = field(default_factory=lambda: np.zeros((2, 1), dtype=complex))
    shift: float = 0.0
    _spline: Optional[CubicSpline] = field(default=None, repr=False)

    kind = "sampled"

    def __post_init__(self) -> None:
        params = np.asarray(self.params, dtype=float)
        points = np.asarray(self.points, dtype=complex)
        if points.ndim == 1:
            points = points[:, None]
        if params.ndim != 1 or params.shape[0] < 2 or params.shape[0] != points.shape[0]:
            raise InvalidPath("Sampled segment needs matching params/points with at least 2 samples")
        if np.any(np.diff(params) <= 0.0):
            raise InvalidPath("Sampled segment params must be strictly increasing")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "points", points)
        if self._spline is None:
            object.__setattr__(self, "_spline", CubicSpline(params, to_real(points), axis=0))

    def evaluate_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float).reshape(-1)
        return to_complex(self._spline(ts + self.shift))

    def derivative_many(self, ts: np.ndarray, h: float) -> np.ndarray:
        """Central differences; second-order one-sided within h of the segment ends."""
        ts = np.asarray(ts, dtype=float).reshape(-1)
        h = min(h, 0.25 * self.width)
        f = self.evaluate_many
        out = (f(ts + h) - f(ts - h)) / (2.0 * h)

        left = ts - h < self.start
        if np.any(left):
            t = ts[left]
            out[left] = (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2.0 * h)) / (2.0 * h)
        right = ts + h > self.end
        if np.any(right):
            t = ts[right]
            out[right] = (3.0 * f(t) - 4.0 * f(t - h) + f(t - 2.0 * h)) / (2.0 * h)
        return out

    def smooth_breaks(self, h: float) -> np.ndarray:
        h = min(h, 0.25 * self.width)
        return np.array([self.start + h, self.end - h])

    def restrict(self, lo: float, hi: float) -> "SampledSegment":
        return SampledSegment((lo, hi), self.params, self.points, self.shift, self._spline)

    def shifted(self, offset: float) -> "SampledSegment":
        return SampledSegment(
            (self.start - offset, self.end - offset), self.params, self.points,
            self.shift + offset, self._spline,
        )


def split_sampled_plateaus(seg: Segment, tol: float = EPS_JOIN) -> List[Segment]:
    """
    Runs of repeated samples become Constant segments and each moving stretch
    gets its own spline, so spline overshoot never leaks into a plateau.
    """
    if not isinstance(seg, SampledSegment) or seg.shift != 0.0:
        return [seg]
    params, points = seg.params, seg.points
    still = np.linalg.norm(points[1:] - points[:-1], axis=1) <= tol
    still &= (params[:-1] >= seg.start) & (params[1:] <= seg.end)
    if not np.any(still):
        return [seg]

    pieces: List[Segment] = []
    lo_idx, lo_t = 0, seg.start
    i, n = 0, still.shape[0]
    while i < n:
        if not still[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and still[j + 1] and np.linalg.norm(points[j + 2] - points[i]) <= tol:
            j += 1
        a, b = float(params[i]), float(params[j + 1])
        if a > lo_t:
            if i == lo_idx:
                return [seg]
            pieces.append(SampledSegment((lo_t, a), params[lo_idx:i + 1], points[lo_idx:i + 1]))
        pieces.append(ConstantSegment((a, b), points[i]))
        lo_idx, lo_t = j + 1, b
        i = j + 1
    if seg.end > lo_t:
        if params.shape[0] - lo_idx < 2:
            return [seg]
        pieces.append(SampledSegment((lo_t, seg.end), params[lo_idx:], points[lo_idx:]))
    return pieces


# =====================================================
# PATH
# =====================================================
@dataclass(frozen=True, eq=False)
class Path:
    """
    gamma: [0, horizon] -> domain.

    Validated at construction: the segment intervals partition [0, horizon],
    consecutive segments agree at junctions within ``join_tol`` and every
    checked point keeps Euclidean slack > ``margin`` to the boundary.
    Repeated samples inside a Sampled segment are stored as Constant segments.
    """

    domain: Domain
    horizon: float
    segments: Tuple[Segment, ...]
    join_tol: float = EPS_JOIN
    margin: float = INTERIOR_MARGIN

    def __post_init__(self) -> None:
        segments: List[Segment] = []
        for seg in self.segments:
            segments.extend(split_sampled_plateaus(seg, self.join_tol))
        object.__setattr__(self, "segments", tuple(segments))
        if not self.horizon > 0:
            raise InvalidPath(f"Horizon must be positive, got {self.horizon}")
        if not self.segments:
            raise InvalidPath("Path needs at least one segment")

        scale = ZERO_TOL * (1.0 + self.horizon)
        if abs(self.segments[0].start) > scale or abs(self.segments[-1].end - self.horizon) > scale:
            raise InvalidPath("Segment intervals must start at 0 and end at the horizon")
        for i, seg in enumerate(self.segments):
            if not seg.end > seg.start:
                raise InvalidPath(f"Segment #{i} has an empty interval {seg.interval}")
            if i and abs(self.segments[i - 1].end - seg.start) > scale:
                raise InvalidPath(f"Segments #{i - 1} and #{i} do not share an endpoint")

        dim = self.domain.dim
        for i, seg in enumerate(self.segments):
            nodes = seg.evaluate_many(np.linspace(seg.start, seg.end, CHECK_NODES))
            if nodes.shape[1] != dim:
                raise InvalidPath(f"Segment #{i} lives in C^{nodes.shape[1]}, domain is C^{dim}")
            slack = boundary_distance_many(self.domain, nodes)
            bad = np.nonzero(~(slack > self.margin))[0]
            if bad.size:
                raise PointOutsideDomain(point_to_json(nodes[bad[0]]), self.margin)
            if i:
                gap = float(np.linalg.norm(self.segments[i - 1].end_value() - seg.start_value()))
                if gap > self.join_tol:
                    raise InvalidPath(f"Junction #{i} is discontinuous (gap {gap:.3g})")

    # -------------------------------------------------
    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([self.segments[0].start] + [s.end for s in self.segments])

    @property
    def fd_step(self) -> float:
        return FD_STEP_FACTOR * self.horizon

    def _segment_ids(self, ts: np.ndarray) -> np.ndarray:
        starts = np.array([s.start for s in self.segments])
        return np.clip(np.searchsorted(starts, ts, side="right") - 1, 0, len(self.segments) - 1)

    def evaluate_many(self, ts: Iterable[float]) -> np.ndarray:
        ts = np.asarray(list(ts) if not isinstance(ts, np.ndarray) else ts, dtype=float).reshape(-1)
        out = np.empty((ts.shape[0], self.domain.dim), dtype=complex)
        ids = self._segment_ids(ts)
        for i in np.unique(ids):
            mask = ids == i
            out[mask] = self.segments[i].evaluate_many(ts[mask])
        return out

    def evaluate(self, t: float) -> np.ndarray:
        return self.evaluate_many(np.array([t]))[0]

    def derivative_many(self, ts: np.ndarray) -> np.ndarray:
        """Segment-wise derivative (right segment at junctions, left at the horizon)."""
        ts = np.asarray(ts, dtype=float).reshape(-1)
        out = np.empty((ts.shape[0], self.domain.dim), dtype=complex)
        ids = self._segment_ids(ts)
        for i in np.unique(ids):
            mask = ids == i
            out[mask] = self.segments[i].derivative_many(ts[mask], self.fd_step)
        return out

    def derivative(self, t: float) -> Optional[np.ndarray]:
        """gamma'(t); None at interior junctions, where the path need not be differentiable."""
        if not (0.0 <= t <= self.horizon):
            raise OutOfRange(f"t={t} outside [0, {self.horizon}]")
        inner = self.breakpoints[1:-1]
        if inner.size and np.min(np.abs(inner - t)) <= ZERO_TOL * (1.0 + self.horizon):
            return None
        return self.derivative_many(np.array([t]))[0]

    def speed_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float).reshape(-1)
        return metric_many(self.domain, self.evaluate_many(ts), self.derivative_many(ts))

    def variation(self, lo: float, hi: float, n: int = 65) -> float:
        """Max Euclidean deviation from gamma(lo) over [lo, hi] (samples plus breakpoints)."""
        bp = self.breakpoints
        ts = np.union1d(np.linspace(lo, hi, n), bp[(bp > lo) & (bp < hi)])
        values = self.evaluate_many(ts)
        return float(np.max(np.linalg.norm(values - values[0][None, :], axis=1)))


def derivative(path: Path, t: float) -> Optional[np.ndarray]:
    return path.derivative(t)


# =====================================================
# SPEED SAMPLES / ZERO-SPEED SET
# =====================================================
@dataclass(frozen=True, eq=False)
class SpeedSamples:
    grid: np.ndarray
    speeds: np.ndarray
    defined: np.ndarray  # False at breakpoints

    @property
    def median_spacing(self) -> float:
        return float(np.median(np.diff(self.grid)))


def speed_profile(path: Path, n_per_segment: int = 64) -> SpeedSamples:
    if n_per_segment < 2:
        raise ValueError("n_per_segment must be >= 2")
    bp = path.breakpoints
    frac = np.arange(1, n_per_segment + 1) / (n_per_segment + 1)
    interior = np.concatenate([s.start + frac * s.width for s in path.segments])
    grid = np.concatenate([bp, interior])
    defined = np.concatenate([np.zeros(bp.shape[0], bool), np.ones(interior.shape[0], bool)])
    order = np.argsort(grid, kind="stable")
    grid, defined = grid[order], defined[order]
    # Breakpoint speeds use the one-sided derivative of the adjacent segment; they stay unflagged.
    speeds = path.speed_many(grid)
    return SpeedSamples(grid=grid, speeds=speeds, defined=defined)


@dataclass(frozen=True)
class IntervalSet:
    intervals: Tuple[Interval, ...] = ()
    points: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "intervals", tuple((float(a), float(b)) for a, b in self.intervals))
        object.__setattr__(self, "points", tuple(float(p) for p in self.points))
        previous = -np.inf
        for a, b in self.intervals:
            if not (a >= 0.0 and b > a and a >= previous):
                raise ValueError(f"Intervals must be ordered, disjoint and non-degenerate: {self.intervals}")
            previous = b

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def total_length(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def to_json(self) -> dict:
        return {"intervals": [list(iv) for iv in self.intervals], "points": list(self.points)}


def _merge(raw: List[Tuple[float, float, bool]], tol: float) -> List[Tuple[float, float, bool]]:
    merged: List[Tuple[float, float, bool]] = []
    for lo, hi, exact in sorted(raw):
        if merged and lo <= merged[-1][1] + tol:
            plo, phi, pexact = merged[-1]
            merged[-1] = (plo, max(phi, hi), pexact or exact)
        else:
            merged.append((lo, hi, exact))
    return merged


def zero_speed_set(
    samples: SpeedSamples,
    path: Path,
    eps_speed: float = 0.0,
    min_length: Optional[float] = None,
) -> IntervalSet:
    """
    Sampled surrogate of {t : gamma'(t) = 0}.

    Runs of consecutive flagged nodes with speed <= eps_speed become
    intervals when they span at least ``min_length`` and isolated points
    otherwise. Stationary segments contribute their exact interval.
    """
    if min_length is None:
        min_length = 2.0 * samples.median_spacing
    tol = ZERO_TOL * (1.0 + path.horizon)

    raw: List[Tuple[float, float, bool]] = [
        (s.start, s.end, True) for s in path.segments if s.is_stationary()
    ]

    idx = np.nonzero(samples.defined)[0]
    is_zero = samples.speeds[idx] <= eps_speed
    run_start: Optional[int] = None
    for k in range(idx.shape[0] + 1):
        if k < idx.shape[0] and is_zero[k]:
            if run_start is None:
                run_start = k
            continue
        if run_start is not None:
            raw.append((float(samples.grid[idx[run_start]]), float(samples.grid[idx[k - 1]]), False))
            run_start = None

    intervals: List[Interval] = []
    points: List[float] = []
    for lo, hi, exact in _merge(raw, tol):
        if exact or (hi - lo >= min_length and hi > lo):
            intervals.append((lo, hi))
        else:
            points.append(0.5 * (lo + hi))

    if intervals or points:
        logger.debug("Zero-speed set: %d intervals, %d points", len(intervals), len(points))
    return IntervalSet(tuple(intervals), tuple(points))


# =====================================================
# COLLAPSE
# =====================================================
@dataclass(frozen=True)
class CollapsePlan:
    source: IntervalSet
    cumulative_offsets: Tuple[float, ...]
    tau: float
    horizon: float

    def to_json(self) -> dict:
        return {
            "intervals": [list(iv) for iv in self.source.intervals],
            "cumulative_offsets": list(self.cumulative_offsets),
            "tau": self.tau,
            "horizon": self.horizon,
        }


def collapse(path: Path, zeros: IntervalSet) -> Tuple[Path, CollapsePlan]:
    """
    Remove the plateaus listed in ``zeros``: gamma_aux(t) = gamma(t + offset_j)
    on the j-th kept piece, offset_j = total length removed before it.
    """
    if zeros.is_empty:
        return path, CollapsePlan(zeros, (), path.horizon, path.horizon)

    for j, (a, b) in enumerate(zeros.intervals):
        var = path.variation(a, b)
        if var > EPS_CONST:
            raise NotConstantOnInterval(j, (a, b), var)

    offsets = tuple(np.cumsum([b - a for a, b in zeros.intervals]).tolist())
    tau = path.horizon - offsets[-1]
    if not tau > ZERO_TOL * (1.0 + path.horizon):
        raise DegenerateResult(f"Collapsed horizon {tau:.3g} is not positive")

    edges = [0.0] + [x for iv in zeros.intervals for x in iv] + [path.horizon]
    shifts = (0.0,) + offsets
    pieces = [(edges[2 * k], edges[2 * k + 1], shifts[k]) for k in range(len(edges) // 2)]

    tol = ZERO_TOL * (1.0 + path.horizon)
    segments: List[Segment] = []
    for lo, hi, off in pieces:
        if hi - lo <= tol:
            continue
        for seg in path.segments:
            a, b = max(seg.start, lo), min(seg.end, hi)
            if b - a > tol:
                segments.append(seg.restrict(a, b).shifted(off))

    # Rounding in the shifts must not leave gaps in the partition.
    fixed: List[Segment] = []
    for i, seg in enumerate(segments):
        lo = 0.0 if i == 0 else fixed[-1].end
        hi = tau if i == len(segments) - 1 else seg.end
        fixed.append(seg if (lo, hi) == seg.interval else seg.restrict(lo, hi))

    logger.info(
        "Collapsed %d plateau(s) of total length %.6g; horizon %.6g -> %.6g",
        len(zeros.intervals), offsets[-1], path.horizon, tau,
    )
    aux = Path(path.domain, tau, tuple(fixed), join_tol=max(path.join_tol, EPS_CONST), margin=path.margin)
    return aux, CollapsePlan(zeros, offsets, tau, path.horizon)


# =====================================================
# REPARAMETRISATION MAP A
# =====================================================
@dataclass(frozen=True, eq=False)
class PiecewiseAffineMap:
    """Continuous monotone piecewise-affine map given by its knots."""

    xs: np.ndarray
    ys: np.ndarray

    def __call__(self, t):
        return np.interp(t, self.xs, self.ys)


def reparam_map(plan: CollapsePlan) -> PiecewiseAffineMap:
    """A: [0, T] -> [0, tau], flat on every collapsed interval and of slope 1 elsewhere."""
    xs: List[float] = [0.0]
    ys: List[float] = [0.0]
    removed = 0.0
    for (a, b), offset in zip(plan.source.intervals, plan.cumulative_offsets):
        for x, y in ((a, a - removed), (b, a - removed)):
            if x > xs[-1]:
                xs.append(x)
                ys.append(y)
        removed = offset
    if plan.horizon > xs[-1]:
        xs.append(plan.horizon)
        ys.append(plan.tau)
    return PiecewiseAffineMap(np.asarray(xs), np.asarray(ys))


# =====================================================
# IMAGES
# =====================================================
def image_params(path: Path, n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("n must be >= 2")
    return np.union1d(np.linspace(0.0, path.horizon, n), path.breakpoints)


def image_samples(path: Path, n: int = 512) -> np.ndarray:
    """Points of the image sampled densely in the parameter (breakpoints included)."""
    return path.evaluate_many(image_params(path, n))


def _as_rows(points: Sequence) -> np.ndarray:
    arr = np.asarray(points, dtype=complex)
    if arr.ndim <= 1:
        arr = arr.reshape(-1, 1)
    return to_real(arr)


def hausdorff(a: Sequence, b: Sequence) -> float:
    """Symmetric Hausdorff distance of two finite point sets in C^n."""
    A, B = _as_rows(a), _as_rows(b)
    return float(max(directed_hausdorff(A, B)[0], directed_hausdorff(B, A)[0]))


def image_spacing(points: Sequence) -> float:
    """Largest Euclidean gap between consecutive samples."""
    X = _as_rows(points)
    if X.shape[0] < 2:
        return 0.0
    return float(np.max(np.linalg.norm(np.diff(X, axis=0), axis=1)))
