"""Wire protocol: JSON commands, JSON events, and binary frame packets.

Commands arrive as JSON text frames and are schema-checked before
dispatch; any malformed input becomes a CommandError carrying a stable
error code, never a dropped connection. Strand positions stream in the
opposite direction as FramePacket binary frames:

    "HFRM" | frame_id u32 | strand_count u32
    per strand: vertex_count u32 | vertex_count x 3 float32

little-endian throughout, decodable from the layout alone.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import HairforgeError, MalformedFrame

FRAME_MAGIC = b"HFRM"

COMMAND_TYPES = frozenset({
    "chat", "select_style", "sim_control", "wind", "head_transform",
    "grab_begin", "grab_move", "grab_end", "trim", "grow", "set_params",
    "render", "set_stride",
})


class CommandError(HairforgeError):
    """Command rejected before dispatch; code is a stable machine string."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _require(payload: dict, key: str, kind, code: str = "bad_payload"):
    if key not in payload:
        raise CommandError(code, f"missing field {key!r}")
    value = payload[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise CommandError(code, f"field {key!r} must be a number")
        value = float(value)
        if not math.isfinite(value):
            raise CommandError(code, f"field {key!r} must be finite")
        return value
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise CommandError(code, f"field {key!r} must be an integer")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise CommandError(code, f"field {key!r} must be a string")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise CommandError(code, f"field {key!r} must be a boolean")
        return value
    if kind is dict:
        if not isinstance(value, dict):
            raise CommandError(code, f"field {key!r} must be an object")
        return value
    raise AssertionError(kind)


def _vec3(payload: dict, key: str):
    if key not in payload:
        raise CommandError("bad_payload", f"missing field {key!r}")
    value = payload[key]
    if (not isinstance(value, (list, tuple)) or len(value) != 3
            or any(isinstance(v, bool) or not isinstance(v, (int, float))
                   or not math.isfinite(float(v)) for v in value)):
        raise CommandError("bad_payload", f"field {key!r} must be 3 finite numbers")
    return tuple(float(v) for v in value)


def _validate_chat(p):
    text = _require(p, "text", str)
    return {"text": text}


def _validate_select_style(p):
    return {"style_id": _require(p, "style_id", str)}


def _validate_sim_control(p):
    out = {}
    if "running" in p:
        out["running"] = _require(p, "running", bool)
    if "reset" in p:
        out["reset"] = _require(p, "reset", bool)
    if not out:
        raise CommandError("bad_payload", "sim_control needs running and/or reset")
    return out


def _validate_wind(p):
    out = {"direction": _vec3(p, "direction"),
           "strength": _require(p, "strength", float)}
    if out["strength"] < 0:
        raise CommandError("bad_payload", "strength must be >= 0")
    for key in ("gust_amplitude", "gust_frequency"):
        if key in p:
            out[key] = _require(p, key, float)
    if "turbulence_seed" in p:
        out["turbulence_seed"] = _require(p, "turbulence_seed", int)
    if "enabled" in p:
        out["enabled"] = _require(p, "enabled", bool)
    return out


def _validate_head_transform(p):
    rot = p.get("rotation")
    if (not isinstance(rot, (list, tuple)) or len(rot) != 9
            or any(isinstance(v, bool) or not isinstance(v, (int, float))
                   or not math.isfinite(float(v)) for v in rot)):
        raise CommandError("bad_payload", "rotation must be 9 finite numbers, row-major")
    return {"rotation": tuple(float(v) for v in rot),
            "translation": _vec3(p, "translation")}


def _validate_grab_begin(p):
    radius = _require(p, "radius", float)
    if radius <= 0:
        raise CommandError("bad_payload", "radius must be positive")
    return {"origin": _vec3(p, "origin"), "direction": _vec3(p, "direction"),
            "radius": radius}


def _validate_grab_move(p):
    return {"target": _vec3(p, "target")}


def _validate_grab_end(p):
    return {}


def _validate_trim(p):
    selector = _require(p, "selector", str)
    if selector == "sphere":
        radius = _require(p, "radius", float)
        return {"selector": "sphere", "center": _vec3(p, "center"), "radius": radius}
    if selector == "below_plane":
        return {"selector": "below_plane", "point": _vec3(p, "point"),
                "normal": _vec3(p, "normal")}
    if selector == "tail":
        return {"selector": "tail", "strand_id": _require(p, "strand_id", int),
                "first_removed_index": _require(p, "first_removed_index", int)}
    raise CommandError("bad_payload", f"unknown trim selector {selector!r}")


def _validate_grow(p):
    ids = p.get("triangle_ids")
    if not isinstance(ids, (list, tuple)) or not ids or \
            any(isinstance(i, bool) or not isinstance(i, int) for i in ids):
        raise CommandError("bad_payload", "triangle_ids must be a non-empty integer list")
    out = {"triangle_ids": tuple(int(i) for i in ids),
           "count": _require(p, "count", int) if "count" in p else 50,
           "seed": _require(p, "seed", int) if "seed" in p else 0,
           "params": _require(p, "params", dict) if "params" in p else {}}
    if out["count"] < 1:
        raise CommandError("bad_payload", "count must be >= 1")
    return out


def _validate_set_params(p):
    params = _require(p, "params", dict)
    if not params:
        raise CommandError("bad_payload", "params must be a non-empty object")
    for key, value in params.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise CommandError("bad_payload", f"param {key!r} must be a number")
        if not math.isfinite(float(value)):
            raise CommandError("bad_payload", f"param {key!r} must be finite")
    return {"params": {str(k): float(v) for k, v in params.items()}}


def _validate_render(p):
    attrs = p.get("attrs", {})
    if not isinstance(attrs, dict):
        raise CommandError("bad_payload", "attrs must be an object")
    for key in attrs:
        if key not in ("gender", "hair_color", "head_pose", "misc"):
            raise CommandError("bad_payload", f"unknown render attribute {key!r}")
        if not isinstance(attrs[key], str):
            raise CommandError("bad_payload", f"attribute {key!r} must be a string")
    out = {"attrs": dict(attrs),
           "seed": _require(p, "seed", int) if "seed" in p else 0}
    if "camera" in p:
        cam = _require(p, "camera", dict)
        out["camera"] = cam
    return out


def _validate_set_stride(p):
    stride = _require(p, "stride", int)
    if stride < 1:
        raise CommandError("bad_payload", "stride must be >= 1")
    return {"stride": stride}


_VALIDATORS = {
    "chat": _validate_chat,
    "select_style": _validate_select_style,
    "sim_control": _validate_sim_control,
    "wind": _validate_wind,
    "head_transform": _validate_head_transform,
    "grab_begin": _validate_grab_begin,
    "grab_move": _validate_grab_move,
    "grab_end": _validate_grab_end,
    "trim": _validate_trim,
    "grow": _validate_grow,
    "set_params": _validate_set_params,
    "render": _validate_render,
    "set_stride": _validate_set_stride,
}


@dataclass(frozen=True, slots=True)
class Command:
    """One validated client command."""

    type: str
    payload: dict


def parse_command(raw) -> Command:
    """Validate one inbound text frame.

    Raises
    ------
    CommandError
        With code "bad_json", "unknown_type", or "bad_payload"; the
        session turns it into an error event rather than disconnecting.
    """
    if isinstance(raw, (bytes, bytearray)):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CommandError("bad_json", f"not utf-8: {exc}") from exc
    try:
        obj = json.loads(raw)
    except (json.JSONDecodeError, TypeError) as exc:
        raise CommandError("bad_json", f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise CommandError("bad_json", "command must be a JSON object")
    ctype = obj.get("type")
    if not isinstance(ctype, str) or ctype not in COMMAND_TYPES:
        raise CommandError("unknown_type", f"unknown command type {ctype!r}")
    payload = _VALIDATORS[ctype](obj)
    return Command(type=ctype, payload=payload)


# -- events ------------------------------------------------------------

def ack_event(command: str, **extra) -> dict:
    return {"event": "ack", "command": command, **extra}


def error_event(code: str, message: str, **extra) -> dict:
    return {"event": "error", "code": code, "message": message, **extra}


def candidates_event(entries) -> dict:
    return {"event": "candidates", "candidates": list(entries)}


def sim_status_event(session) -> dict:
    sim = session.sim
    return {
        "event": "sim_status",
        "running": bool(session.sim_running and sim is not None),
        "style": session.selected_style,
        "particles": 0 if sim is None else sim.particle_count,
        "strands": 0 if sim is None else len(sim.entry_runs()),
        "step_count": 0 if sim is None else sim.step_count,
    }


def render_progress_event(render_id: int, stage: str, **extra) -> dict:
    return {"event": "render_progress", "render_id": render_id,
            "stage": stage, **extra}


def render_done_event(render_id: int, png_base64: str, latency_s: float,
                      seed: int) -> dict:
    return {"event": "render_done", "render_id": render_id,
            "png_base64": png_base64, "latency_s": latency_s, "seed": seed}


# -- frame packets ------------------------------------------------------

def encode_frame(frame_id: int, state, stride: int = 1) -> bytes:
    """Pack every stride-th strand of the sim state into one frame."""
    runs = state.entry_runs()[::max(int(stride), 1)]
    parts = [FRAME_MAGIC, struct.pack("<II", frame_id & 0xFFFFFFFF, len(runs))]
    pos = state.pos
    for start, count in runs:
        parts.append(struct.pack("<I", int(count)))
        parts.append(np.ascontiguousarray(pos[start:start + count], "<f4").tobytes())
    return b"".join(parts)


@dataclass(frozen=True, slots=True)
class FrameData:
    """Decoded frame: per-strand float32 position arrays."""

    frame_id: int
    strands: tuple

    @property
    def strand_count(self) -> int:
        return len(self.strands)

    @property
    def vertex_total(self) -> int:
        return sum(s.shape[0] for s in self.strands)


def decode_frame(blob: bytes) -> FrameData:
    """Inverse of encode_frame; rejects any deviation from the layout.

    Raises
    ------
    MalformedFrame
    """
    if len(blob) < 12 or blob[:4] != FRAME_MAGIC:
        raise MalformedFrame("missing HFRM header")
    frame_id, strand_count = struct.unpack_from("<II", blob, 4)
    offset = 12
    strands = []
    for i in range(strand_count):
        if offset + 4 > len(blob):
            raise MalformedFrame(f"strand {i}: vertex count missing")
        (n,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        nbytes = n * 12
        if offset + nbytes > len(blob):
            raise MalformedFrame(f"strand {i}: vertex data missing")
        verts = np.frombuffer(blob, dtype="<f4", count=n * 3,
                              offset=offset).reshape(n, 3)
        strands.append(verts)
        offset += nbytes
    if offset != len(blob):
        raise MalformedFrame(f"{len(blob) - offset} trailing bytes")
    return FrameData(frame_id=frame_id, strands=tuple(strands))
