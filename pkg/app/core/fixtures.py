"""
Constructed paths with known answers, shared by the demo suite and the tests.
"""

from __future__ import annotations

from typing import Callable, List

import numpy as np

from app.core.domains import Domain, polydisc, unit_ball, unit_disc
from app.core.paths import AffineSegment, ConstantSegment, Path, SampledSegment

SAMPLES_PER_SEGMENT = 201


def _c(*values: complex) -> np.ndarray:
    return np.asarray(values, dtype=complex)


def _sampled(domain: Domain, lo: float, hi: float, curve: Callable[[np.ndarray], np.ndarray]) -> SampledSegment:
    params = np.linspace(lo, hi, SAMPLES_PER_SEGMENT)
    points = np.asarray(curve(params), dtype=complex).reshape(params.shape[0], domain.dim)
    return SampledSegment((lo, hi), params, points)


def polyline_path(domain: Domain, vertices: List[np.ndarray], step: float = 1.0) -> Path:
    segments = [
        AffineSegment((k * step, (k + 1) * step), np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
        for k, (a, b) in enumerate(zip(vertices[:-1], vertices[1:]))
    ]
    return Path(domain, step * len(segments), tuple(segments))


# =====================================================
# DISC
# =====================================================
def radial_path() -> Path:
    """gamma(t) = t on [0, 0.5]; its unit-speed form is tanh."""
    return Path(unit_disc(), 0.5, (AffineSegment((0.0, 0.5), _c(0.0), _c(0.5)),))


def plateau_path() -> Path:
    return Path(
        unit_disc(),
        3.0,
        (
            AffineSegment((0.0, 1.0), _c(0.0), _c(0.25)),
            ConstantSegment((1.0, 2.0), _c(0.25)),
            AffineSegment((2.0, 3.0), _c(0.25), _c(0.5)),
        ),
    )


def sampled_plateau_path(samples: int = 301) -> Path:
    """plateau_path given as one Sampled segment; the repeated samples on [1, 2] form the plateau."""
    params = np.linspace(0.0, 3.0, samples)
    values = np.where(params <= 1.0, 0.25 * params, np.where(params <= 2.0, 0.25, 0.25 * (params - 1.0)))
    return Path(unit_disc(), 3.0, (SampledSegment((0.0, 3.0), params, values.astype(complex)),))


def plateau_free_path() -> Path:
    return polyline_path(unit_disc(), [_c(0.0), _c(0.25), _c(0.5)])


def two_plateau_path() -> Path:
    return Path(
        unit_disc(),
        3.0,
        (
            AffineSegment((0.0, 0.5), _c(0.0), _c(0.1)),
            ConstantSegment((0.5, 1.0), _c(0.1)),
            AffineSegment((1.0, 2.0), _c(0.1), _c(0.3)),
            ConstantSegment((2.0, 2.5), _c(0.3)),
            AffineSegment((2.5, 3.0), _c(0.3), _c(0.4)),
        ),
    )


def spiral_path() -> Path:
    """Rectangular spiral around 0 between the nearby points 0.1 and 0.18."""
    vertices = [_c((0.1 + 0.01 * k) * 1j ** k) for k in range(9)]
    return polyline_path(unit_disc(), vertices)


def l_shape_path() -> Path:
    return polyline_path(unit_disc(), [_c(0.0), _c(0.3), _c(0.3 + 0.3j)])


def slowed_geodesic() -> Path:
    """Unit speed on [0, 0.3], speed 1/2 on [0.3, 0.6] along the radius: a (2, 0)-almost-geodesic."""
    return Path(
        unit_disc(),
        0.6,
        (
            _sampled(unit_disc(), 0.0, 0.3, np.tanh),
            _sampled(unit_disc(), 0.3, 0.6, lambda u: np.tanh(0.3 + 0.5 * (u - 0.3))),
        ),
    )


def detour_geodesic(d: float = 0.03) -> Path:
    """Unit-speed radius that backs up by d once: a (1, 2d)-almost-geodesic."""
    a = 0.3
    return Path(
        unit_disc(),
        2 * a + 2 * d,
        (
            _sampled(unit_disc(), 0.0, a, np.tanh),
            _sampled(unit_disc(), a, a + d, lambda u: np.tanh(a - (u - a))),
            _sampled(unit_disc(), a + d, a + 2 * d, lambda u: np.tanh(a - d + (u - a - d))),
            _sampled(unit_disc(), a + 2 * d, 2 * a + 2 * d, lambda u: np.tanh(a + (u - a - 2 * d))),
        ),
    )


def isolated_zero_path() -> Path:
    """Speed vanishes only at t = 0.5."""
    return Path(unit_disc(), 1.0, (_sampled(unit_disc(), 0.0, 1.0, lambda t: 0.2 + 0.3 * (2 * t - 1) ** 3),))


# =====================================================
# HIGHER DIMENSION
# =====================================================
def bidisc_chord() -> Path:
    return polyline_path(polydisc(1.0, 1.0), [_c(0.0, 0.0), _c(0.5, 0.3)])


def ball_chord() -> Path:
    return polyline_path(unit_ball(2), [_c(0.0, 0.0), _c(0.3, 0.4)])


def random_paths(seed: int = 0, count: int = 10) -> List[Path]:
    """Piecewise-affine and sampled paths in the disc, the bidisc and ball(2)."""
    rng = np.random.default_rng(seed)
    domains = [unit_disc(), polydisc(1.0, 1.0), unit_ball(2)]
    out: List[Path] = []
    for k in range(count):
        domain = domains[k % len(domains)]
        dim = domain.dim
        radius = 0.35 / np.sqrt(dim)

        def point() -> np.ndarray:
            re, im = rng.uniform(-radius, radius, size=(2, dim))
            return re + 1j * im

        if k % 2 == 0:
            vertices = [point() for _ in range(int(rng.integers(2, 5)))]
            out.append(polyline_path(domain, vertices, step=float(rng.uniform(0.5, 1.5))))
        else:
            centre, amp = point(), point() * 0.5
            freq = float(rng.uniform(0.5, 1.5))

            def curve(t: np.ndarray, centre=centre, amp=amp, freq=freq) -> np.ndarray:
                return centre[None, :] + amp[None, :] * np.sin(freq * t)[:, None] + 0.3 * amp[None, :] * t[:, None]

            out.append(Path(domain, 1.0, (_sampled(domain, 0.0, 1.0, curve),)))
    return out
