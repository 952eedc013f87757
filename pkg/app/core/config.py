from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

load_dotenv()

BASE_DIR = Path(__file__).resolve().parent.parent.parent

# Example: KOBPATH_THREADS=4 KOBPATH_LOG_LEVEL=DEBUG in .env
KOBPATH_LOG_LEVEL = os.getenv("KOBPATH_LOG_LEVEL", "INFO")
KOBPATH_DATA_DIR = Path(os.getenv("KOBPATH_DATA_DIR", str(BASE_DIR / "data")))
KOBPATH_SEED = int(os.getenv("KOBPATH_SEED", "0") or 0)

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"

# =====================================================
# NUMERICAL DEFAULTS
# =====================================================
INTERIOR_MARGIN = 1e-9
EPS_JOIN = 1e-10
EPS_CONST = 1e-9
EPS_SPEED = 1e-12
EPS_LENGTH = 1e-12
FD_STEP_FACTOR = 1e-4
ZERO_TOL = 1e-12
LATTICE_MAX_NODES = 20000


def thread_count() -> int:
    """Parallelism cap, read at call time so tests can patch the environment."""
    try:
        return max(1, int(os.getenv("KOBPATH_THREADS", "1") or 1))
    except ValueError:
        return 1


def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(
        level=getattr(logging, (level or KOBPATH_LOG_LEVEL).upper(), logging.INFO),
        format=LOG_FORMAT,
    )


class QuadConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    tol: float = Field(default=1e-8, gt=0)
    max_depth: int = Field(default=30, ge=4)


class OptConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    lattice_resolution: int = Field(default=32, gt=0)
    control_points: int = Field(default=16, gt=0)
    max_control_points: int = Field(default=256, gt=0)
    target_gap: float = Field(default=1e-3, gt=0)
    max_iters: int = Field(default=60, gt=0)


class ReparamConfig(BaseModel):
    """Knobs of the unit-speed pipeline. ``None`` means "derive from the path"."""

    model_config = ConfigDict(frozen=True)

    quad: QuadConfig = QuadConfig()
    n_per_segment: int = Field(default=64, ge=2)
    n_table: int = Field(default=64, ge=1)
    eps_speed: float = Field(default=EPS_SPEED, ge=0)
    min_length: Optional[float] = Field(default=None, gt=0)
    eps_inv: Optional[float] = Field(default=None, gt=0)
    eps_length: float = Field(default=EPS_LENGTH, ge=0)
    n_out: int = Field(default=1024, ge=8)

    def inversion_tol(self, length: float) -> float:
        if self.eps_inv is not None:
            return self.eps_inv
        return 1e-10 * (1.0 + length)
