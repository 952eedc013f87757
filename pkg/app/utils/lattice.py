"""
Lattice shortest paths and polyline refinement for a conformal-type length functional.

The kernels only see two callables supplied by the metric layer:
    density(Z, V) -> (m,)   metric k(z_i; v_i) for complex rows Z, V of shape (m, n)
    interior(Z)   -> (m,)   Euclidean slack to the complement (> 0 inside)
"""

from __future__ import annotations

import itertools
import logging
from typing import Callable, List, Optional, Tuple

import networkx as nx
import numpy as np
from scipy.integrate import simpson

from app.core.config import LATTICE_MAX_NODES, OptConfig, QuadConfig
from app.core.domains import to_complex, to_real
from app.core.errors import NoFeasiblePath
from app.utils.numerics import adaptive_simpson, golden_section

logger = logging.getLogger(__name__)

Density = Callable[[np.ndarray, np.ndarray], np.ndarray]
Interior = Callable[[np.ndarray], np.ndarray]

SEGMENT_NODES = 9
_S = np.linspace(0.0, 1.0, SEGMENT_NODES)


# =====================================================
# LENGTH FUNCTIONAL
# =====================================================
def segment_length(density: Density, interior: Interior, a: np.ndarray, b: np.ndarray) -> float:
    """k-length of the straight segment a -> b with a fixed Simpson rule (inf if it leaves the domain)."""
    chord = b - a
    Z = a[None, :] + _S[:, None] * chord[None, :]
    if np.any(interior(Z) <= 0.0):
        return float("inf")
    V = np.broadcast_to(chord, Z.shape)
    return float(simpson(density(Z, V), x=_S))


def polyline_length(
    density: Density,
    interior: Interior,
    polyline: np.ndarray,
    quad: Optional[QuadConfig] = None,
) -> float:
    """
    k-length of a complex polyline (k, n).

    Without ``quad`` the fixed rule of segment_length is used; with it every
    segment is integrated by adaptive Simpson.
    """
    total = 0.0
    for a, b in zip(polyline[:-1], polyline[1:]):
        if quad is None:
            total += segment_length(density, interior, a, b)
            continue
        chord = b - a
        if not np.any(chord):
            continue

        def _integrand(s: float, a=a, chord=chord) -> float:
            return float(density((a + s * chord)[None, :], chord[None, :])[0])

        total += adaptive_simpson(_integrand, 0.0, 1.0, quad)
    return total


# =====================================================
# LATTICE
# =====================================================
def _cells_per_axis(resolution: int, real_dim: int) -> int:
    if real_dim <= 2:
        return resolution
    cap = int(LATTICE_MAX_NODES ** (1.0 / real_dim)) - 1
    return max(4, min(resolution, cap))


def _plane_offsets(real_dim: int) -> List[np.ndarray]:
    """Half of the 8-neighbourhood inside every complex coordinate plane."""
    offsets = []
    for j in range(real_dim // 2):
        for dre, dim_ in ((1, 0), (0, 1), (1, 1), (1, -1)):
            off = np.zeros(real_dim, dtype=int)
            off[2 * j] = dre
            off[2 * j + 1] = dim_
            offsets.append(off)
    return offsets


def lattice_shortest_path(
    density: Density,
    interior: Interior,
    box: Tuple[np.ndarray, np.ndarray],
    z: np.ndarray,
    w: np.ndarray,
    cfg: Optional[OptConfig] = None,
    margin: float = 0.0,
) -> np.ndarray:
    """
    Dijkstra path from z to w on an axis-aligned lattice restricted to the domain.

    Edge weights are k at the edge midpoint times the edge vector. Raises
    NoFeasiblePath when the lattice graph disconnects z from w.
    """
    cfg = cfg or OptConfig()
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if np.allclose(z, w, rtol=0.0, atol=1e-15):
        return z[None, :].copy()

    lo, hi = (np.asarray(v, dtype=float) for v in box)
    real_dim = lo.shape[0]
    cells = _cells_per_axis(cfg.lattice_resolution, real_dim)
    shape = (cells + 1,) * real_dim
    spacing = (hi - lo) / cells

    axes = [np.linspace(lo[d], hi[d], cells + 1) for d in range(real_dim)]
    flat = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, real_dim)
    valid = interior(to_complex(flat)) > margin
    multi = np.stack(np.unravel_index(np.arange(flat.shape[0]), shape), axis=1)

    graph = nx.Graph()
    graph.add_nodes_from(np.nonzero(valid)[0].tolist())
    for off in _plane_offsets(real_dim):
        tgt = multi + off
        in_box = np.all((tgt >= 0) & (tgt <= cells), axis=1) & valid
        src = np.nonzero(in_box)[0]
        dst = np.ravel_multi_index(tuple(tgt[in_box].T), shape)
        keep = valid[dst]
        src, dst = src[keep], dst[keep]
        if src.size == 0:
            continue
        A = to_complex(flat[src])
        B = to_complex(flat[dst])
        mid = 0.5 * (A + B)
        ok = interior(mid) > margin
        weights = density(mid[ok], (B - A)[ok])
        graph.add_weighted_edges_from(zip(src[ok].tolist(), dst[ok].tolist(), weights.tolist()))

    for label, point in (("z", z), ("w", w)):
        x = to_real(point)
        base = np.floor((x - lo) / spacing).astype(int)
        graph.add_node(label)
        for delta in itertools.product((-1, 0, 1, 2), repeat=real_dim):
            idx = base + np.asarray(delta)
            if np.any(idx < 0) or np.any(idx > cells):
                continue
            node = int(np.ravel_multi_index(tuple(idx), shape))
            if not valid[node]:
                continue
            other = to_complex(flat[node])
            weight = segment_length(density, interior, point, other)
            if np.isfinite(weight):
                graph.add_edge(label, node, weight=weight)

    try:
        route = nx.dijkstra_path(graph, "z", "w", weight="weight")
    except (nx.NetworkXNoPath, nx.NodeNotFound) as err:
        raise NoFeasiblePath(
            f"Lattice with {cells} cells per axis disconnects the endpoints"
        ) from err

    logger.debug("Lattice path with %d vertices on a %s grid", len(route), shape)
    points = [z if n == "z" else w if n == "w" else to_complex(flat[n]) for n in route]
    return np.stack(points)


# =====================================================
# REFINEMENT
# =====================================================
def resample_polyline(polyline: np.ndarray, count: int) -> np.ndarray:
    """Resample to ``count`` points equally spaced in Euclidean arc length."""
    X = to_real(polyline)
    seg = np.linalg.norm(np.diff(X, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    if cum[-1] == 0.0:
        return polyline[:1].copy()
    targets = np.linspace(0.0, cum[-1], count)
    out = np.stack([np.interp(targets, cum, X[:, d]) for d in range(X.shape[1])], axis=1)
    return to_complex(out)


def subdivide_polyline(polyline: np.ndarray) -> np.ndarray:
    """Insert the midpoint of every segment; the traced curve is unchanged."""
    out = np.empty((2 * polyline.shape[0] - 1, polyline.shape[1]), dtype=polyline.dtype)
    out[0::2] = polyline
    out[1::2] = 0.5 * (polyline[:-1] + polyline[1:])
    return out


def _record(trace: Optional[List[float]], value: float) -> None:
    if trace is not None:
        trace.append(min(value, trace[-1]) if trace else value)


def _descend(
    density: Density,
    interior: Interior,
    X: np.ndarray,
    cfg: OptConfig,
    trace: Optional[List[float]],
) -> Tuple[np.ndarray, float]:
    """Sweeps over the interior points of the real polyline X until one gains < target_gap / 10."""

    def _seg(p: np.ndarray, q: np.ndarray) -> float:
        return segment_length(density, interior, to_complex(p), to_complex(q))

    total = polyline_length(density, interior, to_complex(X))
    step = 0.5 * float(np.mean(np.linalg.norm(np.diff(X, axis=0), axis=1)))

    for sweep in range(cfg.max_iters):
        previous = total
        for i in range(1, X.shape[0] - 1):
            for d in range(X.shape[1]):
                centre = X[i, d]
                current = _seg(X[i - 1], X[i]) + _seg(X[i], X[i + 1])

                def _local(value: float, i=i, d=d) -> float:
                    trial = X[i].copy()
                    trial[d] = value
                    return _seg(X[i - 1], trial) + _seg(trial, X[i + 1])

                best_x, best_len = golden_section(_local, centre - step, centre + step, tol=max(step * 1e-3, 1e-12))
                if best_len < current:
                    X[i, d] = best_x
        total = polyline_length(density, interior, to_complex(X))
        _record(trace, total)
        step = max(0.7 * step, 1e-9)
        if previous - total < cfg.target_gap / 10.0 and sweep >= 2:
            break

    logger.debug("%d control points settled after %d sweeps at length %.12g", X.shape[0] - 2, sweep + 1, total)
    return X, total


def refine_path(
    density: Density,
    interior: Interior,
    polyline: np.ndarray,
    cfg: Optional[OptConfig] = None,
    trace: Optional[List[float]] = None,
) -> np.ndarray:
    """
    Coordinate descent with golden-section line searches on every interior control point.

    Starts from ``control_points`` points spread by Euclidean arc length. After
    the sweeps settle, every segment is split at its midpoint and the descent
    repeats; this stops once a split gains no more than target_gap / 2 or the
    next split would exceed ``max_control_points``. ``trace`` receives the best
    length after every sweep, so it is non-increasing.
    """
    cfg = cfg or OptConfig()
    if polyline.shape[0] < 2:
        _record(trace, 0.0)
        return polyline.copy()

    X = to_real(resample_polyline(polyline, cfg.control_points + 2))
    if X.shape[0] < 3:
        _record(trace, polyline_length(density, interior, to_complex(X)))
        return to_complex(X)

    _record(trace, polyline_length(density, interior, to_complex(X)))
    best, best_total = _descend(density, interior, X, cfg, trace)

    while 2 * best.shape[0] - 3 <= cfg.max_control_points:
        finer = to_real(subdivide_polyline(to_complex(best)))
        finer, total = _descend(density, interior, finer, cfg, trace)
        gain = best_total - total
        if total < best_total:
            best, best_total = finer, total
        if gain <= cfg.target_gap / 2.0:
            break

    logger.debug("Refinement finished with %d control points at length %.12g", best.shape[0] - 2, best_total)
    return to_complex(best)
