import json
import os
from typing import Any, Dict

import numpy as np

from app.core.domains import parse_domain, point_to_json, as_point
from app.core.errors import InputError, PathSpecError
from app.core.paths import AffineSegment, ConstantSegment, Path, SampledSegment


SEGMENT_KINDS = ("constant", "affine", "sampled")


def load_path_spec(path: str) -> Dict[str, Any]:

    if not os.path.exists(path):
        raise PathSpecError(f"Unknown path spec: {path}")

    try:
        with open(path, "r", encoding="utf-8") as f:
            spec = json.load(f)
    except json.JSONDecodeError as err:
        raise PathSpecError(f"{path} is not valid JSON: {err}") from err

    validate_path_spec(spec)

    return spec


def validate_path_spec(spec):

    if not isinstance(spec, dict):
        raise PathSpecError("Path spec must be a JSON object")

    for key in ("domain", "T", "segments"):
        if key not in spec:
            raise PathSpecError(f"Missing '{key}' in path spec")

    if not isinstance(spec["segments"], list) or not spec["segments"]:
        raise PathSpecError("'segments' must be a non-empty list")

    for i, segment in enumerate(spec["segments"]):

        kind = segment.get("kind")

        if kind not in SEGMENT_KINDS:
            raise PathSpecError(f"Segment #{i}: unknown kind {kind!r}")

        interval = segment.get("interval")
        if not isinstance(interval, list) or len(interval) != 2:
            raise PathSpecError(f"Segment #{i}: 'interval' must be [a, b]")

        required = {"constant": ("at",), "affine": ("from", "to"), "sampled": ("params", "points")}[kind]
        for key in required:
            if key not in segment:
                raise PathSpecError(f"Segment #{i} ({kind}) needs '{key}'")


def path_from_spec(spec: Dict[str, Any]) -> Path:
    """Build a validated Path; every failure surfaces as an InputError subclass."""

    validate_path_spec(spec)
    domain = parse_domain(spec["domain"])

    segments = []
    try:
        for i, raw in enumerate(spec["segments"]):
            interval = (float(raw["interval"][0]), float(raw["interval"][1]))
            kind = raw["kind"]
            if kind == "constant":
                segments.append(ConstantSegment(interval, as_point(domain, raw["at"])))
            elif kind == "affine":
                segments.append(
                    AffineSegment(interval, as_point(domain, raw["from"]), as_point(domain, raw["to"]))
                )
            else:
                points = np.stack([as_point(domain, p) for p in raw["points"]])
                segments.append(SampledSegment(interval, np.asarray(raw["params"], dtype=float), points))
        return Path(domain, float(spec["T"]), tuple(segments))
    except InputError:
        raise
    except (TypeError, ValueError, KeyError) as err:
        raise PathSpecError(f"Malformed path spec: {err}") from err


def path_to_spec(path: Path) -> Dict[str, Any]:

    segments = []
    for seg in path.segments:
        item: Dict[str, Any] = {"interval": [seg.start, seg.end], "kind": seg.kind}
        if isinstance(seg, ConstantSegment):
            item["at"] = point_to_json(seg.point)
        elif isinstance(seg, AffineSegment):
            item["from"] = point_to_json(seg.p)
            item["to"] = point_to_json(seg.q)
        else:
            params = np.union1d(seg.params - seg.shift, [seg.start, seg.end])
            params = params[(params >= seg.start) & (params <= seg.end)]
            item["params"] = params.tolist()
            item["points"] = [point_to_json(z) for z in seg.evaluate_many(params)]
        segments.append(item)

    return {"domain": path.domain.to_json(), "T": path.horizon, "segments": segments}


def load_path(path: str) -> Path:
    return path_from_spec(load_path_spec(path))
