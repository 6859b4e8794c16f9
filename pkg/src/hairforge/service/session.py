"""Per-connection session: command dispatch, fixed-timestep sim loop,
and the brokered retrieval/generation flows.

All simulation mutation happens on the session's own loop; inbound
commands wait in a queue and are applied between frames in arrival
order. Generation requests run on the client's worker thread and are
observed through futures, so a 20-second backend never stalls a frame.
"""

from __future__ import annotations

import asyncio
import base64
import dataclasses
import itertools
import logging

import numpy as np

from ..errors import (EmptyGrab, EmptyText, HairforgeError, MalformedResponse,
                      NumericalBlowup, ServiceUnavailable, StaleHandle, Timeout)
from ..groom import TrimRegion, begin_grab, release_grab, trim, update_grab
from ..growth import GrowthParams, grow_region
from ..imaging import (Camera, GenerationRequest, canny, compose_prompt,
                       rasterize_strands)
from ..model import Hairstyle, PaintSelection, RenderAttributes
from ..retrieval import embed_text, retrieve_top_k, route_intent
from ..sim import (SimConfig, WindField, build_sim, retune, set_head_transform,
                   set_wind, snapshot_style, step_frame)
from . import protocol
from .protocol import CommandError

logger = logging.getLogger(__name__)

_session_ids = itertools.count(1)

DEFAULT_CHAT_WIND_STRENGTH = 60.0
DEFAULT_CHAT_WIND_DIRECTION = (1.0, 0.0, 0.0)
# gravity is a vector and cannot arrive through the scalar params map
_CONFIG_FIELDS = {f.name for f in dataclasses.fields(SimConfig)} - {"gravity"}
_ERROR_CODES = {
    ServiceUnavailable: "service_unavailable",
    Timeout: "timeout",
    MalformedResponse: "malformed_response",
}


def default_render_camera(width: int = 512, height: int = 512) -> Camera:
    """Frontal portrait framing used when the client sends no camera."""
    return Camera(eye=(0.0, 4.0, 42.0), target=(0.0, 0.0, 0.0),
                  width=width, height=height)


class Session:
    """One client's live authoring state plus its outbound event stream."""

    def __init__(self, library, fps: float = 60.0):
        self.id = next(_session_ids)
        self.library = library
        self.fps = float(fps)
        self.sim = None
        self.selected_style = None
        self.sim_running = True
        self.frame_stride = 1
        self.frame_id = 0
        self.grab = None
        self.commands: asyncio.Queue = asyncio.Queue()
        self.outbound: asyncio.Queue = asyncio.Queue()
        self.default_cfg = SimConfig()
        self.frames_sent = 0
        self._render_ids = itertools.count(1)
        self._render_tasks = set()
        self._closed = False

    # -- ingestion and emission -----------------------------------------

    def submit_raw(self, raw) -> None:
        """Queue one inbound text frame; applied between sim frames."""
        self.commands.put_nowait(raw)

    def _emit(self, event: dict) -> None:
        if not self._closed:
            self.outbound.put_nowait(("event", event))

    def _emit_frame(self, packet: bytes) -> None:
        if not self._closed:
            self.outbound.put_nowait(("frame", packet))
            self.frames_sent += 1

    def close(self) -> None:
        self._closed = True
        for task in self._render_tasks:
            task.cancel()

    # -- the loop --------------------------------------------------------

    async def run(self) -> None:
        """Fixed-timestep loop: drain commands, step, emit, sleep.

        An overrunning frame moves the deadline to now (frames drop;
        simulated time never rubber-bands to catch up).
        """
        loop = asyncio.get_running_loop()
        deadline = loop.time()
        try:
            while not self._closed:
                await self.drain_commands()
                self.tick()
                deadline = max(deadline + 1.0 / self.fps, loop.time())
                await asyncio.sleep(deadline - loop.time())
        finally:
            self.close()

    async def drain_commands(self) -> None:
        """Apply every queued command in arrival order."""
        while True:
            try:
                raw = self.commands.get_nowait()
            except asyncio.QueueEmpty:
                return
            await self.apply_raw(raw)

    def tick(self) -> None:
        """Advance one display frame and emit its packet, if simulating."""
        if self.sim is None or not self.sim_running:
            return
        try:
            step_frame(self.sim)
        except NumericalBlowup as exc:
            self.sim_running = False
            self._emit(protocol.error_event(
                "numerical_blowup", f"{exc} (state rolled back)",
                step=exc.step_index))
            self._emit(protocol.sim_status_event(self))
            return
        self.frame_id += 1
        self._emit_frame(protocol.encode_frame(self.frame_id, self.sim,
                                               self.frame_stride))

    # -- command dispatch --------------------------------------------------

    async def apply_raw(self, raw) -> None:
        """Parse and apply one command; all failures become error events."""
        try:
            cmd = protocol.parse_command(raw)
        except CommandError as exc:
            self._emit(protocol.error_event(exc.code, str(exc)))
            return
        handler = getattr(self, f"_cmd_{cmd.type}")
        try:
            handler(cmd.payload)
        except CommandError as exc:
            self._emit(protocol.error_event(exc.code, str(exc)))
        except HairforgeError as exc:
            code = type(exc).__name__.lower()
            self._emit(protocol.error_event(code, str(exc)))
        except Exception:
            # protocol safety: a handler bug must not drop the connection
            logger.exception("command %s failed", cmd.type)
            self._emit(protocol.error_event("internal", f"{cmd.type} failed"))

    def _require_sim(self):
        if self.sim is None:
            raise CommandError("no_style_selected", "select a style first")
        return self.sim

    # -- chat ------------------------------------------------------------

    def _cmd_chat(self, p: dict) -> None:
        text = p["text"]
        if not text.strip():
            self._emit(protocol.error_event("empty_text", "chat text is empty"))
            return
        intent = route_intent(text)
        if intent.kind == "retrieve":
            self._chat_retrieve(intent.query)
        elif intent.kind == "wind":
            self._chat_wind(intent)
        elif intent.kind == "simulate":
            self.sim_running = intent.on
            self._emit(protocol.ack_event("chat", intent="simulate", on=intent.on))
            self._emit(protocol.sim_status_event(self))
        elif intent.kind == "render":
            self._emit(protocol.ack_event("chat", intent="render"))
        else:
            self._emit(protocol.error_event("unknown_intent", intent.raw))

    def _chat_retrieve(self, query: str) -> None:
        try:
            emb = embed_text(query, self.library.provider)
        except EmptyText:
            self._emit(protocol.error_event("empty_text", f"no tokens in {query!r}"))
            return
        result = retrieve_top_k(self.library.index, emb, k=3)
        entries = []
        for style_id, score in result.entries:
            style = self.library.styles.get(style_id)
            entries.append({
                "id": style_id,
                "score": score,
                "caption": "" if style is None else style.caption,
                "thumbnail": f"/styles/{style_id}/thumbnail",
            })
        self._emit(protocol.candidates_event(entries))

    def _chat_wind(self, intent) -> None:
        sim = self._require_sim()
        strength = intent.strength if intent.strength is not None \
            else DEFAULT_CHAT_WIND_STRENGTH
        wind = WindField(direction=DEFAULT_CHAT_WIND_DIRECTION,
                         strength=float(strength), gust_amplitude=0.3,
                         gust_frequency=0.7, enabled=intent.on)
        set_wind(sim, wind)
        self._emit(protocol.ack_event("chat", intent="wind", on=intent.on,
                                      strength=float(strength)))

    # -- style and sim control -------------------------------------------

    def _build_from_style(self, style: Hairstyle) -> None:
        self.sim = build_sim(style, self.library.head, self.default_cfg)
        self.sim_running = True

    def _cmd_select_style(self, p: dict) -> None:
        style = self.library.styles.get(p["style_id"])
        if style is None:
            self._emit(protocol.error_event("unknown_style", p["style_id"]))
            return
        self.grab = None
        self.selected_style = style.id
        self._build_from_style(style)
        self._emit(protocol.ack_event("select_style", style_id=style.id))
        self._emit(protocol.sim_status_event(self))

    def _cmd_sim_control(self, p: dict) -> None:
        if p.get("reset"):
            if self.selected_style is None:
                raise CommandError("no_style_selected", "nothing to reset")
            self.grab = None
            self._build_from_style(self.library.styles[self.selected_style])
        if "running" in p:
            self.sim_running = p["running"]
        self._emit(protocol.ack_event("sim_control", **p))
        self._emit(protocol.sim_status_event(self))

    def _cmd_wind(self, p: dict) -> None:
        sim = self._require_sim()
        d = np.asarray(p["direction"], np.float64)
        norm = float(np.linalg.norm(d))
        if norm < 1e-12:
            raise CommandError("bad_payload", "wind direction must be non-zero")
        wind = WindField(direction=tuple(d / norm),
                         strength=p["strength"],
                         gust_amplitude=p.get("gust_amplitude", 0.0),
                         gust_frequency=p.get("gust_frequency", 1.0),
                         turbulence_seed=p.get("turbulence_seed", 0),
                         enabled=p.get("enabled", True))
        set_wind(sim, wind)
        self._emit(protocol.ack_event("wind", strength=p["strength"],
                                      enabled=wind.enabled))

    def _cmd_head_transform(self, p: dict) -> None:
        sim = self._require_sim()
        rotation = np.asarray(p["rotation"], np.float64).reshape(3, 3)
        set_head_transform(sim, rotation, np.asarray(p["translation"]))
        self._emit(protocol.ack_event("head_transform"))

    # -- grooming ----------------------------------------------------------

    def _cmd_grab_begin(self, p: dict) -> None:
        sim = self._require_sim()
        if self.grab is not None and self.grab.active:
            release_grab(sim, self.grab)
        d = np.asarray(p["direction"], np.float64)
        norm = float(np.linalg.norm(d))
        if norm < 1e-12:
            raise CommandError("bad_payload", "grab direction must be non-zero")
        try:
            self.grab = begin_grab(sim, (p["origin"], tuple(d / norm)),
                                   radius=p["radius"])
        except EmptyGrab:
            self._emit(protocol.error_event("empty_grab", "ray selected nothing"))
            return
        self._emit(protocol.ack_event("grab_begin",
                                      handle=self.grab.handle_id,
                                      particles=len(self.grab.particle_ids)))

    def _cmd_grab_move(self, p: dict) -> None:
        sim = self._require_sim()
        if self.grab is None:
            raise CommandError("no_grab", "no active grab handle")
        try:
            update_grab(sim, self.grab, p["target"])
        except StaleHandle:
            self.grab = None
            self._emit(protocol.error_event("stale_handle",
                                            "grabbed particles were removed"))
            return
        self._emit(protocol.ack_event("grab_move"))

    def _cmd_grab_end(self, p: dict) -> None:
        sim = self._require_sim()
        if self.grab is not None and self.grab.active:
            release_grab(sim, self.grab)
        self.grab = None
        self._emit(protocol.ack_event("grab_end"))

    def _cmd_trim(self, p: dict) -> None:
        sim = self._require_sim()
        if p["selector"] == "sphere":
            region = TrimRegion.sphere(p["center"], p["radius"])
        elif p["selector"] == "below_plane":
            n = np.asarray(p["normal"], np.float64)
            norm = float(np.linalg.norm(n))
            if norm < 1e-12:
                raise CommandError("bad_payload", "plane normal must be non-zero")
            region = TrimRegion.below_plane(p["point"], tuple(n / norm))
        else:
            region = TrimRegion.tail(p["strand_id"], p["first_removed_index"])
        _, removed = trim(sim, region)
        self._emit(protocol.ack_event("trim", removed=removed))
        self._emit(protocol.sim_status_event(self))

    def _cmd_grow(self, p: dict) -> None:
        sim = self._require_sim()
        unknown = set(p["params"]) - _GROWTH_FIELDS
        if unknown:
            raise CommandError("bad_payload", f"unknown growth params {sorted(unknown)}")
        params = GrowthParams(**{k: (int(v) if k == "steps" else v)
                                 for k, v in p["params"].items()})
        n_tris = len(self.library.head.triangles)
        bad = [i for i in p["triangle_ids"] if not 0 <= i < n_tris]
        if bad:
            raise CommandError(
                "bad_payload", f"triangle ids must lie in [0, {n_tris})")
        selection = PaintSelection(triangle_ids=p["triangle_ids"])
        new_strands = grow_region(self.library.head, selection, params,
                                  p["count"], rng_seed=p["seed"])
        current = snapshot_style(sim, self.selected_style or "session")
        merged = Hairstyle(id=current.id,
                           strands=tuple(current.strands) + tuple(new_strands),
                           caption=current.caption, source="groomed")
        self.grab = None
        self.sim = build_sim(merged, self.library.head, self.default_cfg)
        self._emit(protocol.ack_event("grow", added=len(new_strands)))
        self._emit(protocol.sim_status_event(self))

    def _cmd_set_params(self, p: dict) -> None:
        unknown = set(p["params"]) - _CONFIG_FIELDS
        if unknown:
            raise CommandError("bad_payload", f"unknown sim params {sorted(unknown)}")
        coerced = {k: (int(v) if k == "substeps" else v)
                   for k, v in p["params"].items()}
        try:
            self.default_cfg = dataclasses.replace(self.default_cfg, **coerced)
        except ValueError as exc:
            raise CommandError("bad_payload", str(exc)) from exc
        if self.sim is not None:
            retune(self.sim, self.default_cfg)
        self._emit(protocol.ack_event("set_params", applied=sorted(coerced)))

    def _cmd_set_stride(self, p: dict) -> None:
        self.frame_stride = p["stride"]
        self._emit(protocol.ack_event("set_stride", stride=self.frame_stride))

    # -- render flow -------------------------------------------------------

    def _cmd_render(self, p: dict) -> None:
        sim = self._require_sim()
        attrs = RenderAttributes(**p["attrs"])
        prompt = compose_prompt(attrs)  # AllEmpty surfaces as an error event
        cam_spec = p.get("camera", {})
        camera = default_render_camera()
        if cam_spec:
            camera = Camera(
                eye=tuple(cam_spec.get("eye", camera.eye)),
                target=tuple(cam_spec.get("target", camera.target)),
                up=tuple(cam_spec.get("up", camera.up)),
                fov_y_deg=float(cam_spec.get("fov_y_deg", camera.fov_y_deg)),
                width=int(cam_spec.get("width", camera.width)),
                height=int(cam_spec.get("height", camera.height)),
            )
        snapshot = snapshot_style(sim, self.selected_style or "session")
        shot = rasterize_strands(snapshot, camera, head=self.library.head)
        edge = canny(shot)
        req = GenerationRequest(edge_map=edge, prompt=prompt, seed=p["seed"],
                                width=camera.width, height=camera.height)
        render_id = next(self._render_ids)
        future = self.library.gen_client.submit(req)
        self._emit(protocol.render_progress_event(
            render_id, "queued",
            queue_length=self.library.gen_client.queue_length))
        task = asyncio.get_running_loop().create_task(
            self._finish_render(render_id, future, p["seed"]))
        self._render_tasks.add(task)
        task.add_done_callback(self._render_tasks.discard)

    async def _finish_render(self, render_id: int, future, seed: int) -> None:
        try:
            result = await asyncio.wrap_future(future)
        except HairforgeError as exc:
            code = _ERROR_CODES.get(type(exc), "generation_failed")
            self._emit(protocol.error_event(code, str(exc), render_id=render_id))
            return
        self._emit(protocol.render_done_event(
            render_id, base64.b64encode(result.png).decode("ascii"),
            result.latency_s, seed))


_GROWTH_FIELDS = {f.name for f in dataclasses.fields(GrowthParams)}
