"""
Command-line entry point.

    python -m app.cli reparam --input data/plateau.json --out out/
    python -m app.cli verify-ca --input data/spiral.json --lambda 1 --kappa 0
    python -m app.cli demo

Exit codes: 0 success/pass, 1 property verdict failed, 2 input error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.core.acceptance import run_acceptance
from app.core.config import KOBPATH_DATA_DIR, KOBPATH_SEED, QuadConfig, ReparamConfig, configure_logging
from app.core.domains import parse_domain
from app.core.errors import InputError, NumericalError, PathSpecError, PropertyError
from app.core.metric import distance, distance_via_path_optimization, infinitesimal_metric, royden_lower_bound
from app.core.path_loader import load_path
from app.core.properties import (
    GeodesicParams,
    PropertyReport,
    chord_arc_to_almost_geodesic,
    verify_almost_geodesic,
    verify_chord_arc,
    verify_corollary_b,
)
from app.core.reparam import ReparamResult, unit_speed_reparametrize, verify_key_equation
from app.core.reports import SLACK_HEADER, write_csv, write_json

logger = logging.getLogger(__name__)

Command = Literal[
    "metric", "distance", "reparam", "verify-ag", "verify-ca",
    "corollary-a", "corollary-b", "royden", "demo",
]
COMMANDS = ("metric", "distance", "reparam", "verify-ag", "verify-ca", "corollary-a", "corollary-b", "royden", "demo")

EXIT_OK, EXIT_VERDICT, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    command: Command
    input_path: Optional[str] = None
    output_dir: str = "out"
    quad_tol: Optional[float] = Field(default=None, gt=0)
    eps_speed: Optional[float] = Field(default=None, ge=0)
    eps_inv: Optional[float] = Field(default=None, gt=0)
    tol: Optional[float] = Field(default=None, gt=0)
    n_grid: int = Field(default=64, ge=2)
    n_out: Optional[int] = Field(default=None, ge=8)
    lambda_: float = Field(default=1.0, alias="lambda", ge=1.0)
    kappa: float = Field(default=0.0, ge=0.0)
    seed: int = KOBPATH_SEED
    data_dir: str = str(KOBPATH_DATA_DIR)

    @model_validator(mode="after")
    def _input_required(self) -> "RunConfig":
        if self.command != "demo":
            if not self.input_path:
                raise ValueError(f"'{self.command}' needs --input")
            if not os.path.exists(self.input_path):
                raise ValueError(f"input file {self.input_path} does not exist")
        return self

    @property
    def params(self) -> GeodesicParams:
        return GeodesicParams(lambda_=self.lambda_, kappa=self.kappa)

    def reparam_config(self) -> ReparamConfig:
        overrides: Dict[str, Any] = {}
        if self.quad_tol is not None:
            overrides["quad"] = QuadConfig(tol=self.quad_tol)
        if self.eps_speed is not None:
            overrides["eps_speed"] = self.eps_speed
        if self.eps_inv is not None:
            overrides["eps_inv"] = self.eps_inv
        if self.n_out is not None:
            overrides["n_out"] = self.n_out
        return ReparamConfig(**overrides)

    def settings(self) -> Dict[str, Any]:
        """Overrides recorded in report.json (paths excluded so reports compare across machines)."""
        return self.model_dump(exclude={"input_path", "output_dir", "data_dir"}, by_alias=True)


# =====================================================
# HELPERS
# =====================================================
def _read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except json.JSONDecodeError as err:
        raise PathSpecError(f"{path} is not valid JSON: {err}") from err
    if not isinstance(payload, dict) or "domain" not in payload:
        raise PathSpecError(f"{path} must be an object with a 'domain' field")
    return payload


def _field(payload: Dict[str, Any], key: str) -> Any:
    if key not in payload:
        raise InputError(f"Missing '{key}' in input")
    return payload[key]


def _number(payload: Dict[str, Any], key: str, cast: Callable[[Any], Any] = float) -> Any:
    value = _field(payload, key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"'{key}' must be a number, got {value!r}")
    try:
        return cast(value)
    except (TypeError, ValueError, OverflowError) as err:
        raise InputError(f"'{key}' must be a number, got {value!r}") from err


def _report_rows(report: PropertyReport) -> List[Tuple[float, ...]]:
    return list(report.rows)


def _write_sigma(config: RunConfig, result: ReparamResult) -> None:
    header, rows = result.csv_rows()
    write_csv(os.path.join(config.output_dir, "sigma.csv"), header, rows)


# =====================================================
# COMMANDS  (each returns (payload, ok))
# =====================================================
def _cmd_metric(config: RunConfig) -> Tuple[Dict[str, Any], bool]:
    payload = _read_json(config.input_path)
    domain = parse_domain(payload["domain"])
    value = infinitesimal_metric(domain, _field(payload, "z"), _field(payload, "v"))
    return {"domain": domain.to_json(), "value": value}, True


def _cmd_distance(config: RunConfig) -> Tuple[Dict[str, Any], bool]:
    payload = _read_json(config.input_path)
    domain = parse_domain(payload["domain"])
    z, w = _field(payload, "z"), _field(payload, "w")
    out: Dict[str, Any] = {"domain": domain.to_json(), "distance": distance(domain, z, w)}
    if payload.get("optimize"):
        out["upper_bound"] = distance_via_path_optimization(domain, z, w)
    return out, True


def _cmd_royden(config: RunConfig) -> Tuple[Dict[str, Any], bool]:
    payload = _read_json(config.input_path)
    domain = parse_domain(payload["domain"])
    seed = _number(payload, "seed", int) if "seed" in payload else config.seed
    value = royden_lower_bound(
        domain,
        _field(payload, "x"),
        _number(payload, "radius"),
        _number(payload, "n_points", int),
        _number(payload, "n_dirs", int),
        seed=seed,
    )
    return {"domain": domain.to_json(), "value": value, "seed": seed}, True


def _cmd_reparam(config: RunConfig) -> Tuple[Dict[str, Any], bool]:
    path = load_path(config.input_path)
    result = unit_speed_reparametrize(path, config.reparam_config())
    _write_sigma(config, result)
    out = result.to_json(include_samples=False)
    out["key_equation_deviation"] = verify_key_equation(result, 16)
    return out, True


def _verify(config: RunConfig, verifier: Callable[..., PropertyReport]) -> Tuple[Dict[str, Any], bool]:
    path = load_path(config.input_path)
    report = verifier(path, config.params, config.n_grid, config.tol)
    write_csv(os.path.join(config.output_dir, "slack.csv"), SLACK_HEADER, _report_rows(report))
    return {"report": report.to_json()}, report.passed


def _cmd_corollary_a(config: RunConfig) -> Tuple[Dict[str, Any], bool]:
    path = load_path(config.input_path)
    result, chord_arc, almost_geodesic = chord_arc_to_almost_geodesic(
        path, config.params, config.reparam_config(), config.n_grid, config.tol
    )
    _write_sigma(config, result)
    write_csv(os.path.join(config.output_dir, "slack.csv"), SLACK_HEADER, _report_rows(almost_geodesic))
    write_csv(os.path.join(config.output_dir, "chord_arc_slack.csv"), SLACK_HEADER, _report_rows(chord_arc))
    out = {
        "reparam": result.to_json(include_samples=False),
        "chord_arc": chord_arc.to_json(),
        "almost_geodesic": almost_geodesic.to_json(),
    }
    return out, chord_arc.passed and almost_geodesic.passed


def _cmd_demo(config: RunConfig) -> Tuple[Dict[str, Any], bool]:
    results = run_acceptance(config.data_dir, config.reparam_config(), config.n_grid, config.seed)
    print(f"{'#':>2}  {'check':<32} {'':<2} detail")
    for r in results:
        print(f"{r.number:>2}  {r.name:<32} {'✅' if r.passed else '❌'}  {r.detail}")
    ok = all(r.passed for r in results)
    print("ALL PASS" if ok else "FAILURES")
    return {"checks": [{"number": r.number, "name": r.name, "passed": r.passed} for r in results]}, ok


HANDLERS: Dict[str, Callable[[RunConfig], Tuple[Dict[str, Any], bool]]] = {
    "metric": _cmd_metric,
    "distance": _cmd_distance,
    "royden": _cmd_royden,
    "reparam": _cmd_reparam,
    "verify-ag": lambda c: _verify(c, verify_almost_geodesic),
    "verify-ca": lambda c: _verify(c, verify_chord_arc),
    "corollary-a": _cmd_corollary_a,
    "corollary-b": lambda c: _verify(c, verify_corollary_b),
    "demo": _cmd_demo,
}


def run(config: RunConfig) -> int:
    try:
        payload, ok = HANDLERS[config.command](config)
    except PropertyError as err:
        logger.error("%s: %s", type(err).__name__, err)
        report = getattr(err, "report", None)
        failure: Dict[str, Any] = {"command": config.command, "error": type(err).__name__, "message": str(err)}
        if isinstance(report, PropertyReport):
            failure["report"] = report.to_json()
        witness = getattr(err, "witness", None)
        if witness is not None:
            failure["witness"] = list(witness)
        write_json(os.path.join(config.output_dir, "report.json"), failure)
        return EXIT_VERDICT
    except (InputError, ValidationError) as err:
        print(f"input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as err:
        print(f"numerical error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL

    payload.update({"command": config.command, "ok": ok, "settings": config.settings()})
    write_json(os.path.join(config.output_dir, "report.json"), payload)
    return EXIT_OK if ok else EXIT_VERDICT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m app.cli", description="Kobayashi-metric path toolkit")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", dest="input_path")
    parser.add_argument("--out", dest="output_dir", default="out")
    parser.add_argument("--quad-tol", dest="quad_tol", type=float)
    parser.add_argument("--eps-speed", dest="eps_speed", type=float)
    parser.add_argument("--eps-inv", dest="eps_inv", type=float)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--n-grid", dest="n_grid", type=int, default=64)
    parser.add_argument("--n-out", dest="n_out", type=int)
    parser.add_argument("--lambda", dest="lambda_", type=float, default=1.0)
    parser.add_argument("--kappa", type=float, default=0.0)
    parser.add_argument("--seed", type=int, default=KOBPATH_SEED)
    parser.add_argument("--data-dir", dest="data_dir", default=str(KOBPATH_DATA_DIR))
    parser.add_argument("--log-level", dest="log_level")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    fields = {k: v for k, v in vars(args).items() if k != "log_level" and v is not None}
    try:
        config = RunConfig(**fields)
    except ValidationError as err:
        print(f"input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
