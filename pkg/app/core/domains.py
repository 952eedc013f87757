"""
Model domains in C^n and their Euclidean geometry (membership, boundary distance).

JSON shapes:
    {"kind":"disc"} | {"kind":"ball","n":2} | {"kind":"polydisc","radii":[1,1]}
    {"kind":"halfplane"} | {"kind":"punctured_disc"} | {"kind":"annulus","r":0.25}
    {"kind":"product","factors":[...]}
"""

from __future__ import annotations

from typing import Any, Dict, List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from app.core.errors import DimensionMismatch, InputError, PointOutsideDomain

DomainKind = Literal["disc", "ball", "polydisc", "halfplane", "punctured_disc", "annulus", "product"]

SUPPORTED_KINDS: Tuple[str, ...] = (
    "disc", "ball", "polydisc", "halfplane", "punctured_disc", "annulus", "product",
)

MAX_NESTING = 8


class InvalidDomain(InputError):
    pass


class Domain(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: DomainKind
    n: int = 1
    radii: Tuple[float, ...] = ()
    r: float = 0.0
    factors: Tuple["Domain", ...] = ()

    @model_validator(mode="after")
    def _check_invariants(self) -> "Domain":
        if self.kind == "ball" and self.n < 1:
            raise ValueError("ball dimension must be a positive integer")
        if self.kind == "polydisc":
            if not self.radii:
                raise ValueError("polydisc needs at least one radius")
            if any(not (rad > 0) for rad in self.radii):
                raise ValueError("polydisc radii must be positive")
        if self.kind == "annulus" and not (0.0 < self.r < 1.0):
            raise ValueError("annulus inner radius must satisfy 0 < r < 1")
        if self.kind == "product":
            if not self.factors:
                raise ValueError("product needs at least one factor")
            if self.depth > MAX_NESTING:
                raise ValueError(f"product nesting deeper than {MAX_NESTING}")
        return self

    @property
    def dim(self) -> int:
        if self.kind == "ball":
            return self.n
        if self.kind == "polydisc":
            return len(self.radii)
        if self.kind == "product":
            return sum(f.dim for f in self.factors)
        return 1

    @property
    def depth(self) -> int:
        if self.kind != "product":
            return 0
        return 1 + max(f.depth for f in self.factors)

    def factor_slices(self) -> List[Tuple["Domain", slice]]:
        out: List[Tuple[Domain, slice]] = []
        start = 0
        for factor in self.factors:
            out.append((factor, slice(start, start + factor.dim)))
            start += factor.dim
        return out

    def to_json(self) -> Dict[str, Any]:
        if self.kind == "ball":
            return {"kind": "ball", "n": self.n}
        if self.kind == "polydisc":
            return {"kind": "polydisc", "radii": list(self.radii)}
        if self.kind == "annulus":
            return {"kind": "annulus", "r": self.r}
        if self.kind == "product":
            return {"kind": "product", "factors": [f.to_json() for f in self.factors]}
        return {"kind": self.kind}


Domain.model_rebuild()


# =====================================================
# CONSTRUCTORS
# =====================================================
def unit_disc() -> Domain:
    return Domain(kind="disc")


def unit_ball(n: int) -> Domain:
    return Domain(kind="ball", n=n)


def polydisc(*radii: float) -> Domain:
    return Domain(kind="polydisc", radii=tuple(float(r) for r in radii))


def upper_half_plane() -> Domain:
    return Domain(kind="halfplane")


def punctured_disc() -> Domain:
    return Domain(kind="punctured_disc")


def annulus(r: float) -> Domain:
    return Domain(kind="annulus", r=r)


def product(*factors: Domain) -> Domain:
    return Domain(kind="product", factors=tuple(factors))


def parse_domain(payload: Dict[str, Any]) -> Domain:
    if not isinstance(payload, dict) or "kind" not in payload:
        raise InvalidDomain("Domain must be an object with a 'kind' field")
    try:
        return Domain.model_validate(payload)
    except ValidationError as err:
        raise InvalidDomain(f"Invalid domain {payload}: {err.errors()[0].get('msg')}") from err


# =====================================================
# POINTS
# =====================================================
def _coerce_scalar(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InputError(f"Complex numbers are [re, im] pairs, got {value}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (str, bytes, dict)) or value is None:
        raise InputError(f"Cannot read {value!r} as a complex number")
    return complex(value)


def as_point(domain: Domain, z: Any) -> np.ndarray:
    """Coerce a scalar, a complex sequence or a list of [re, im] pairs to a (dim,) complex array."""
    try:
        if isinstance(z, np.ndarray):
            arr = np.asarray(z, dtype=complex).reshape(-1)
        elif isinstance(z, (list, tuple)):
            if len(z) == 2 and domain.dim != 2 and all(isinstance(x, (int, float)) for x in z):
                arr = np.array([complex(z[0], z[1])])
            else:
                arr = np.array([_coerce_scalar(x) for x in z], dtype=complex)
        elif isinstance(z, (int, float, complex, np.number)):
            arr = np.array([complex(z)])
        else:
            raise InputError(f"Cannot read {z!r} as a point of C^{domain.dim}")
    except (TypeError, ValueError) as err:
        raise InputError(f"Cannot read {z!r} as a point of C^{domain.dim}: {err}") from err
    if not np.all(np.isfinite(arr)):
        raise InputError(f"Point {z!r} has non-finite coordinates")
    if arr.shape[0] != domain.dim:
        raise DimensionMismatch(domain.dim, arr.shape[0])
    return arr


def point_to_json(z: np.ndarray) -> List[List[float]]:
    return [[float(c.real), float(c.imag)] for c in np.asarray(z).reshape(-1)]


def to_real(Z: np.ndarray) -> np.ndarray:
    """(..., n) complex -> (..., 2n) real, interleaving re/im per coordinate."""
    Z = np.asarray(Z, dtype=complex)
    return np.stack([Z.real, Z.imag], axis=-1).reshape(*Z.shape[:-1], 2 * Z.shape[-1])


def to_complex(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X[..., 0::2] + 1j * X[..., 1::2]


# =====================================================
# BOUNDARY DISTANCE / MEMBERSHIP
# =====================================================
def boundary_distance_many(domain: Domain, Z: np.ndarray) -> np.ndarray:
    """Euclidean distance from each row of Z (m, dim) to the complement; negative outside."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    kind = domain.kind
    if kind == "disc":
        return 1.0 - np.abs(Z[:, 0])
    if kind == "ball":
        return 1.0 - np.linalg.norm(Z, axis=1)
    if kind == "polydisc":
        radii = np.asarray(domain.radii)
        return np.min(radii[None, :] - np.abs(Z), axis=1)
    if kind == "halfplane":
        return Z[:, 0].imag
    if kind == "punctured_disc":
        mod = np.abs(Z[:, 0])
        return np.minimum(1.0 - mod, mod)
    if kind == "annulus":
        mod = np.abs(Z[:, 0])
        return np.minimum(1.0 - mod, mod - domain.r)
    parts = [boundary_distance_many(f, Z[:, sl]) for f, sl in domain.factor_slices()]
    return np.min(np.stack(parts, axis=1), axis=1)


def boundary_distance(domain: Domain, z: Any) -> float:
    return float(boundary_distance_many(domain, as_point(domain, z)[None, :])[0])


def contains(domain: Domain, z: Any, margin: float = 0.0) -> bool:
    """True iff z satisfies the defining inequalities with slack >= margin (and > 0)."""
    if margin < 0:
        raise InputError("margin must be non-negative")
    slack = boundary_distance(domain, z)
    return slack > 0.0 and slack >= margin


def require_inside(domain: Domain, z: Any, margin: float) -> np.ndarray:
    point = as_point(domain, z)
    if not contains(domain, point, margin):
        raise PointOutsideDomain(point_to_json(point), margin)
    return point
