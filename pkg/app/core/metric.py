"""
Kobayashi metric k_X(z; v) and distance K_X(z, w) on the supported model domains.

Disc, ball, polydisc and half-plane use the classical closed forms. The
punctured disc and the annulus push the half-plane (resp. strip) metric
through the covering map z = exp(i * zeta); their distances are the infimum
over a window of deck translations of the lifted distance. Polydiscs and
products take the maximum over factors.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Callable, List, Optional, Tuple

import numpy as np

from app.core.config import INTERIOR_MARGIN, KOBPATH_SEED, OptConfig, QuadConfig
from app.core.domains import (
    Domain,
    as_point,
    boundary_distance,
    boundary_distance_many,
    require_inside,
    to_complex,
    to_real,
)
from app.core.errors import BallNotContained, InvalidSampleCounts, NoFeasiblePath
from app.utils.lattice import (
    lattice_shortest_path,
    polyline_length,
    refine_path,
    segment_length,
)

logger = logging.getLogger(__name__)

DECK_WINDOW = 2  # deck translations k in [-DECK_WINDOW, DECK_WINDOW] around the principal lift


# =====================================================
# INFINITESIMAL METRIC
# =====================================================
def metric_many(domain: Domain, Z: np.ndarray, V: np.ndarray) -> np.ndarray:
    """k_X(z_i; v_i) for complex rows Z, V of shape (m, dim). No membership checks."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    V = np.atleast_2d(np.asarray(V, dtype=complex))
    kind = domain.kind

    if kind == "disc":
        return np.abs(V[:, 0]) / (1.0 - np.abs(Z[:, 0]) ** 2)

    if kind == "ball":
        a = 1.0 - np.sum(np.abs(Z) ** 2, axis=1)
        inner = np.sum(V * np.conj(Z), axis=1)
        return np.sqrt(np.sum(np.abs(V) ** 2, axis=1) / a + np.abs(inner) ** 2 / a ** 2)

    if kind == "polydisc":
        radii = np.asarray(domain.radii)[None, :]
        return np.max(radii * np.abs(V) / (radii ** 2 - np.abs(Z) ** 2), axis=1)

    if kind == "halfplane":
        return np.abs(V[:, 0]) / (2.0 * Z[:, 0].imag)

    if kind == "punctured_disc":
        mod = np.abs(Z[:, 0])
        return np.abs(V[:, 0]) / (2.0 * mod * -np.log(mod))

    if kind == "annulus":
        height = -math.log(domain.r)
        mod = np.abs(Z[:, 0])
        return math.pi * np.abs(V[:, 0]) / (2.0 * height * mod * np.sin(math.pi * -np.log(mod) / height))

    parts = [metric_many(f, Z[:, sl], V[:, sl]) for f, sl in domain.factor_slices()]
    return np.max(np.stack(parts, axis=1), axis=1)


def metric_floor_many(domain: Domain, Z: np.ndarray) -> np.ndarray:
    """min over Euclidean-unit v of k_X(z_i; v), in closed form."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    kind = domain.kind

    if kind == "ball":
        a = 1.0 - np.sum(np.abs(Z) ** 2, axis=1)
        # v orthogonal to z exists only for n >= 2
        return 1.0 / a if domain.n == 1 else 1.0 / np.sqrt(a)
    if kind == "polydisc":
        radii = np.asarray(domain.radii)[None, :]
        per_axis = radii / (radii ** 2 - np.abs(Z) ** 2)
        return 1.0 / np.sqrt(np.sum(per_axis ** -2, axis=1))
    if kind == "product":
        parts = np.stack([metric_floor_many(f, Z[:, sl]) for f, sl in domain.factor_slices()], axis=1)
        return 1.0 / np.sqrt(np.sum(parts ** -2, axis=1))
    # planar domains: k is conformal
    return metric_many(domain, Z, np.ones((Z.shape[0], 1), dtype=complex))


def infinitesimal_metric(domain: Domain, z: Any, v: Any, margin: float = INTERIOR_MARGIN) -> float:
    point = require_inside(domain, z, margin)
    vector = as_point(domain, v)
    return float(metric_many(domain, point[None, :], vector[None, :])[0])


# =====================================================
# DISTANCE
# =====================================================
def _disc_distance(Z: np.ndarray, W: np.ndarray, radius: float = 1.0) -> np.ndarray:
    z = Z / radius
    w = W / radius
    ratio = np.abs(z - w) / np.sqrt((1.0 - np.abs(z) ** 2) * (1.0 - np.abs(w) ** 2))
    return np.arcsinh(ratio)


def _halfplane_distance(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    return np.arcsinh(np.abs(Z - W) / (2.0 * np.sqrt(Z.imag * W.imag)))


def _lift(Z: np.ndarray) -> np.ndarray:
    """zeta with exp(i * zeta) = z: Re zeta = arg z, Im zeta = -log|z|."""
    return np.angle(Z) - 1j * np.log(np.abs(Z))


def _punctured_disc_distance(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    a, b = _lift(Z), _lift(W)
    shifts = 2.0 * math.pi * np.arange(-DECK_WINDOW, DECK_WINDOW + 1)
    lifted = _halfplane_distance(a[:, None], b[:, None] + shifts[None, :])
    return np.min(lifted, axis=1)


def _strip_distance(a: np.ndarray, b: np.ndarray, height: float) -> np.ndarray:
    """Distance in the strip 0 < Im < height, via zeta -> exp(pi * zeta / height) onto the half-plane."""
    scale = math.pi / height
    dx = scale * (a.real - b.real)
    dy = scale * (a.imag - b.imag)
    with np.errstate(over="ignore"):
        num = np.sinh(0.5 * dx) ** 2 + np.sin(0.5 * dy) ** 2
    den = np.sin(scale * a.imag) * np.sin(scale * b.imag)
    return np.arcsinh(np.sqrt(num / den))


def _annulus_distance(Z: np.ndarray, W: np.ndarray, r: float) -> np.ndarray:
    height = -math.log(r)
    a, b = _lift(Z), _lift(W)
    shifts = 2.0 * math.pi * np.arange(-DECK_WINDOW, DECK_WINDOW + 1)
    lifted = _strip_distance(a[:, None], b[:, None] + shifts[None, :], height)
    return np.min(lifted, axis=1)


def distance_many(domain: Domain, Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """K_X(z_i, w_i) for complex rows of shape (m, dim). No membership checks."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    kind = domain.kind

    if kind == "disc":
        return _disc_distance(Z[:, 0], W[:, 0])
    if kind == "ball":
        zz = np.sum(np.abs(Z) ** 2, axis=1)
        ww = np.sum(np.abs(W) ** 2, axis=1)
        zw = np.sum(Z * np.conj(W), axis=1)
        num = np.sum(np.abs(Z - W) ** 2, axis=1) - (zz * ww - np.abs(zw) ** 2)
        return np.arcsinh(np.sqrt(np.maximum(num, 0.0) / ((1.0 - zz) * (1.0 - ww))))
    if kind == "polydisc":
        parts = [_disc_distance(Z[:, i], W[:, i], rad) for i, rad in enumerate(domain.radii)]
        return np.max(np.stack(parts, axis=1), axis=1)
    if kind == "halfplane":
        return _halfplane_distance(Z[:, 0], W[:, 0])
    if kind == "punctured_disc":
        return _punctured_disc_distance(Z[:, 0], W[:, 0])
    if kind == "annulus":
        return _annulus_distance(Z[:, 0], W[:, 0], domain.r)

    parts = [distance_many(f, Z[:, sl], W[:, sl]) for f, sl in domain.factor_slices()]
    return np.max(np.stack(parts, axis=1), axis=1)


def distance(domain: Domain, z: Any, w: Any, margin: float = INTERIOR_MARGIN) -> float:
    p = require_inside(domain, z, margin)
    q = require_inside(domain, w, margin)
    if np.allclose(p, q, rtol=0.0, atol=1e-15):
        return 0.0
    return float(distance_many(domain, p[None, :], q[None, :])[0])


# =====================================================
# PATH OPTIMIZATION (numerical upper bound)
# =====================================================
def _natural_box(domain: Domain) -> Tuple[np.ndarray, np.ndarray]:
    kind = domain.kind
    if kind in ("disc", "punctured_disc", "annulus"):
        return np.array([-1.0, -1.0]), np.array([1.0, 1.0])
    if kind == "ball":
        return -np.ones(2 * domain.n), np.ones(2 * domain.n)
    if kind == "polydisc":
        radii = np.repeat(np.asarray(domain.radii), 2)
        return -radii, radii
    if kind == "halfplane":
        return np.array([-np.inf, 0.0]), np.array([np.inf, np.inf])
    boxes = [_natural_box(f) for f, _ in domain.factor_slices()]
    return np.concatenate([b[0] for b in boxes]), np.concatenate([b[1] for b in boxes])


def _lattice_box(domain: Domain, z: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    nat_lo, nat_hi = _natural_box(domain)
    if domain.dim == 1 and np.all(np.isfinite(nat_lo)) and np.all(np.isfinite(nat_hi)):
        return nat_lo, nat_hi
    X = to_real(np.stack([z, w]))
    lo_pts, hi_pts = X.min(axis=0), X.max(axis=0)
    pad = 0.5 * max(float(np.max(hi_pts - lo_pts)), 0.1)
    return np.maximum(lo_pts - pad, nat_lo), np.minimum(hi_pts + pad, nat_hi)


def distance_via_path_optimization(
    domain: Domain,
    z: Any,
    w: Any,
    opt_config: Optional[OptConfig] = None,
    trace: Optional[List[float]] = None,
) -> float:
    """
    Upper bound on K_X(z, w): minimise the k-length over polylines.

    Initial polyline: lattice shortest path, or the straight chord when it
    stays in the domain and is shorter. The refined polyline is re-measured
    with adaptive Simpson so the returned value is an honest path length.
    """
    cfg = opt_config or OptConfig()
    p = require_inside(domain, z, INTERIOR_MARGIN)
    q = require_inside(domain, w, INTERIOR_MARGIN)
    if np.allclose(p, q, rtol=0.0, atol=1e-15):
        if trace is not None:
            trace.append(0.0)
        return 0.0

    def density(Z: np.ndarray, V: np.ndarray) -> np.ndarray:
        return metric_many(domain, Z, V)

    def interior(Z: np.ndarray) -> np.ndarray:
        return boundary_distance_many(domain, Z)

    candidates = []
    try:
        lattice = lattice_shortest_path(
            density, interior, _lattice_box(domain, p, q), p, q, cfg, margin=INTERIOR_MARGIN
        )
        candidates.append(("lattice", lattice))
    except NoFeasiblePath:
        logger.warning("Lattice disconnected the endpoints; trying the straight chord")
        lattice = None

    chord = np.stack([p, q])
    if np.isfinite(segment_length(density, interior, p, q)) and np.all(
        interior(p[None, :] + np.linspace(0.0, 1.0, 65)[:, None] * (q - p)[None, :]) > 0.0
    ):
        candidates.append(("chord", chord))
    if not candidates:
        raise NoFeasiblePath("No feasible initial polyline between the endpoints")

    scored = [(polyline_length(density, interior, poly), name, poly) for name, poly in candidates]
    scored.sort(key=lambda item: item[0])
    initial_length, name, initial = scored[0]
    logger.info("Path optimization starts from the %s polyline (length %.6g)", name, initial_length)

    refined = refine_path(density, interior, initial, cfg, trace=trace)
    return polyline_length(density, interior, refined, quad=QuadConfig(tol=1e-10, max_depth=40))


# =====================================================
# ROYDEN-TYPE LOWER BOUND
# =====================================================
def royden_lower_bound(
    domain: Domain,
    x: Any,
    radius: float,
    n_points: int,
    n_dirs: int,
    seed: int = KOBPATH_SEED,
) -> float:
    """
    Sampled estimate of c_x = min k_X(y; v) over y in the Euclidean ball B(x, radius)
    and Euclidean-unit v. The centre and the coordinate directions are always sampled.
    """
    if n_points <= 0 or n_dirs <= 0:
        raise InvalidSampleCounts(f"n_points={n_points}, n_dirs={n_dirs}: both must be positive")
    if not radius > 0:
        raise BallNotContained(f"radius must be positive, got {radius}")
    centre = require_inside(domain, x, INTERIOR_MARGIN)
    if boundary_distance(domain, centre) <= radius:
        raise BallNotContained(
            f"Closed ball of radius {radius} around {centre.tolist()} leaves the domain"
        )

    rng = np.random.default_rng(seed)
    real_dim = 2 * domain.dim

    gauss = rng.standard_normal((n_points - 1, real_dim))
    gauss /= np.linalg.norm(gauss, axis=1, keepdims=True)
    radii = radius * rng.random(n_points - 1) ** (1.0 / real_dim)
    offsets = to_complex(gauss * radii[:, None])
    points = np.concatenate([centre[None, :], centre[None, :] + offsets], axis=0)

    axes = np.eye(real_dim)[: min(n_dirs, real_dim)]
    extra = rng.standard_normal((n_dirs - axes.shape[0], real_dim))
    dirs_real = np.concatenate([axes, extra], axis=0)
    dirs_real /= np.linalg.norm(dirs_real, axis=1, keepdims=True)
    dirs = to_complex(dirs_real)

    Z = np.repeat(points, dirs.shape[0], axis=0)
    V = np.tile(dirs, (points.shape[0], 1))
    return float(np.min(metric_many(domain, Z, V)))


# =====================================================
# DISC AUTOMORPHISMS
# =====================================================
def disc_automorphism(a: complex, theta: float) -> Tuple[Callable[[Any], Any], Callable[[Any], Any]]:
    """phi(z) = e^{i theta} (z - a) / (1 - conj(a) z) and its derivative."""
    if abs(a) >= 1.0:
        raise ValueError("automorphism centre must lie in the unit disc")
    rot = complex(math.cos(theta), math.sin(theta))
    ca = complex(a).conjugate()

    def phi(z):
        return rot * (z - a) / (1.0 - ca * z)

    def dphi(z):
        return rot * (1.0 - abs(a) ** 2) / (1.0 - ca * z) ** 2

    return phi, dphi
