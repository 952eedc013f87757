from typing import Any, Dict, Optional

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.core.config import ReparamConfig
from app.core.errors import KobpathError
from app.core.path_loader import path_from_spec
from app.core.properties import (
    GeodesicParams,
    chord_arc_to_almost_geodesic,
    verify_almost_geodesic,
    verify_chord_arc,
    verify_corollary_b,
)
from app.routers.errors import http_error

router = APIRouter(prefix="/verify", tags=["Verification"])


class VerifyRequest(BaseModel):
    path: Dict[str, Any]
    params: GeodesicParams = GeodesicParams()
    n_grid: int = Field(default=64, ge=2)
    tol: Optional[float] = Field(default=None, gt=0)


class CorollaryARequest(VerifyRequest):
    config: Optional[ReparamConfig] = None


# ===== ALMOST-GEODESIC =====

@router.post("/almost-geodesic")
def almost_geodesic(req: VerifyRequest):
    try:
        report = verify_almost_geodesic(path_from_spec(req.path), req.params, req.n_grid, req.tol)
    except KobpathError as err:
        raise http_error(err)
    return report.to_json()


# ===== CHORD-ARC =====

@router.post("/chord-arc")
def chord_arc(req: VerifyRequest):
    try:
        report = verify_chord_arc(path_from_spec(req.path), req.params, req.n_grid, req.tol)
    except KobpathError as err:
        raise http_error(err)
    return report.to_json()


# ===== CHORD-ARC -> ALMOST-GEODESIC =====

@router.post("/corollary-a")
def corollary_a(req: CorollaryARequest):
    try:
        result, ca, ag = chord_arc_to_almost_geodesic(
            path_from_spec(req.path), req.params, req.config, req.n_grid, req.tol
        )
    except KobpathError as err:
        raise http_error(err)
    return {
        "reparam": result.to_json(include_samples=False),
        "chord_arc": ca.to_json(),
        "almost_geodesic": ag.to_json(),
    }


# ===== ALMOST-GEODESIC -> CHORD-ARC =====

@router.post("/corollary-b")
def corollary_b(req: VerifyRequest):
    try:
        report = verify_corollary_b(path_from_spec(req.path), req.params, req.n_grid, req.tol)
    except KobpathError as err:
        raise http_error(err)
    return report.to_json()
