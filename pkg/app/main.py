# 📦 IMPORTS
import logging
from typing import Any, Dict, Optional

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from app.core.config import KOBPATH_SEED, OptConfig, ReparamConfig, configure_logging
from app.core.domains import SUPPORTED_KINDS, parse_domain
from app.core.errors import KobpathError
from app.core.metric import distance, distance_via_path_optimization, infinitesimal_metric, royden_lower_bound
from app.core.path_loader import path_from_spec
from app.core.reparam import direct_reparametrize_by_g, unit_speed_reparametrize
from app.routers import verify
from app.routers.errors import http_error

configure_logging()
logger = logging.getLogger("kobpath")


# 🚀 FASTAPI INIT
app = FastAPI(title="Kobayashi Path Service")
app.include_router(verify.router)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)


# ===== REQUEST MODELS =====

class MetricRequest(BaseModel):
    domain: Dict[str, Any]
    z: Any
    v: Any


class DistanceRequest(BaseModel):
    domain: Dict[str, Any]
    z: Any
    w: Any
    optimize: bool = False
    opt: Optional[OptConfig] = None


class RoydenRequest(BaseModel):
    domain: Dict[str, Any]
    x: Any
    radius: float
    n_points: int = 64
    n_dirs: int = 16
    seed: int = KOBPATH_SEED


class ReparamRequest(BaseModel):
    path: Dict[str, Any]
    direct: bool = False
    config: Optional[ReparamConfig] = None
    include_samples: bool = Field(default=False)


# 🟢 HEALTH CHECK
@app.get("/health")
def health():
    return {"status": "ok", "domains": list(SUPPORTED_KINDS)}


# 📐 METRIC
@app.post("/metric")
def metric(req: MetricRequest):
    try:
        domain = parse_domain(req.domain)
        return {"value": infinitesimal_metric(domain, req.z, req.v)}
    except KobpathError as err:
        raise http_error(err)


# 📏 DISTANCE
@app.post("/distance")
def kobayashi_distance(req: DistanceRequest):
    try:
        domain = parse_domain(req.domain)
        out: Dict[str, Any] = {"distance": distance(domain, req.z, req.w)}
        if req.optimize:
            out["upper_bound"] = distance_via_path_optimization(domain, req.z, req.w, req.opt)
        return out
    except KobpathError as err:
        raise http_error(err)


# 🔻 ROYDEN LOWER BOUND
@app.post("/royden")
def royden(req: RoydenRequest):
    try:
        domain = parse_domain(req.domain)
        value = royden_lower_bound(domain, req.x, req.radius, req.n_points, req.n_dirs, seed=req.seed)
        return {"value": value, "seed": req.seed}
    except KobpathError as err:
        raise http_error(err)


# 🔁 UNIT-SPEED REPARAMETRISATION
@app.post("/reparam")
def reparam(req: ReparamRequest):
    try:
        path = path_from_spec(req.path)
        pipeline = direct_reparametrize_by_g if req.direct else unit_speed_reparametrize
        result = pipeline(path, req.config)
    except KobpathError as err:
        raise http_error(err)
    logger.info("reparam: length=%.10g collapsed=%s", result.length, result.collapsed)
    return result.to_json(include_samples=req.include_samples)
