"""HTTP/WebSocket application factory and the style library behind it.

The library is loaded once at startup: either a .hair/.json directory
with an optional prebuilt embedding index, or the in-memory fixture
corpus when no assets directory is given (zero-config serving). The
"mock" generation endpoint wires the client to an in-process transport
that echoes the posted edge map back as the generated PNG, so the full
render flow works offline.
"""

from __future__ import annotations

import asyncio
import dataclasses
import logging
import os
from pathlib import Path

import httpx
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, Response

from ..assets import load_database, load_index, thumbnail_path
from ..imaging import Camera, GenerationClient, encode_png, rasterize_strands
from ..retrieval import build_index, get_provider
from .session import Session

logger = logging.getLogger(__name__)

_ENV_PREFIX = "HAIRFORGE_"


@dataclasses.dataclass(frozen=True, slots=True)
class ServiceConfig:
    """Startup configuration; flags override HAIRFORGE_* env overrides."""

    port: int = 8787
    assets: str | None = None
    index: str | None = None
    embed_url: str = "fallback"
    gen_url: str = "mock"
    fps: float = 60.0

    @classmethod
    def from_env(cls, **overrides) -> "ServiceConfig":
        values = {}
        for field in dataclasses.fields(cls):
            env = os.environ.get(_ENV_PREFIX + field.name.upper())
            if env is not None:
                if field.type in ("int", int):
                    values[field.name] = int(env)
                elif field.type in ("float", float):
                    values[field.name] = float(env)
                else:
                    values[field.name] = env
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _mock_generation_transport() -> httpx.MockTransport:
    """Echo the posted edge PNG back as the 'generated' image."""

    def handler(request: httpx.Request) -> httpx.Response:
        body = request.read()
        start = body.find(b"\x89PNG\r\n\x1a\n")
        if start < 0:
            return httpx.Response(400, json={"error": "no PNG part found"})
        end = body.find(b"IEND", start)
        if end < 0:
            return httpx.Response(400, json={"error": "PNG part truncated"})
        return httpx.Response(200, content=body[start:end + 8],
                              headers={"content-type": "image/png"})

    return httpx.MockTransport(handler)


def make_generation_client(gen_url: str, timeout: float = 120.0) -> GenerationClient:
    if gen_url == "mock":
        return GenerationClient("http://mock.generation",
                                timeout=timeout,
                                transport=_mock_generation_transport())
    return GenerationClient(gen_url, timeout=timeout)


class StyleLibrary:
    """Immutable-after-load styles, head, retrieval index, and clients."""

    def __init__(self, styles, head, index, provider, gen_client,
                 assets_dir=None):
        self.styles = {s.id: s for s in styles}
        self.head = head
        self.index = index
        self.provider = provider
        self.gen_client = gen_client
        self.assets_dir = assets_dir
        self._thumbnails: dict = {}

    @classmethod
    def load(cls, config: ServiceConfig) -> "StyleLibrary":
        from ..fixtures import FIXTURE_IDS, make_head_mesh, make_style

        provider = get_provider(config.embed_url)
        gen_client = make_generation_client(config.gen_url)
        head = make_head_mesh()
        if config.assets:
            styles = load_database(config.assets)
        else:
            styles = [make_style(sid, mesh=head, strand_scale=0.08)
                      for sid in FIXTURE_IDS]
        if config.index:
            index = load_index(config.index)
        else:
            index = build_index([(s.id, s.caption) for s in styles], provider)
        return cls(styles, head, index, provider, gen_client,
                   assets_dir=config.assets)

    def thumbnail(self, style_id: str) -> bytes | None:
        """PNG preview: prebuilt file if present, else rasterized once."""
        if style_id not in self.styles:
            return None
        cached = self._thumbnails.get(style_id)
        if cached is not None:
            return cached
        if self.assets_dir:
            path = thumbnail_path(self.assets_dir, style_id)
            if Path(path).exists():
                png = Path(path).read_bytes()
                self._thumbnails[style_id] = png
                return png
        cam = Camera(eye=(0.0, 4.0, 42.0), target=(0.0, 0.0, 0.0),
                     width=128, height=128)
        png = encode_png(rasterize_strands(self.styles[style_id], cam,
                                           head=self.head))
        self._thumbnails[style_id] = png
        return png

    def close(self) -> None:
        self.gen_client.close()


def create_app(config: ServiceConfig | None = None,
               library: StyleLibrary | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    app = FastAPI(title="hairforge", version="0.1.0")
    app.state.config = config
    app.state.library = library or StyleLibrary.load(config)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/styles")
    def styles():
        lib = app.state.library
        return [{"id": s.id, "caption": s.caption,
                 "strand_count": s.strand_count,
                 "thumbnail": f"/styles/{s.id}/thumbnail"}
                for s in lib.styles.values()]

    @app.get("/styles/{style_id}/thumbnail")
    def thumbnail(style_id: str):
        png = app.state.library.thumbnail(style_id)
        if png is None:
            return JSONResponse({"error": f"unknown style {style_id!r}"},
                                status_code=404)
        return Response(content=png, media_type="image/png")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session = Session(app.state.library, fps=config.fps)
        loop_task = asyncio.create_task(session.run())
        sender_task = asyncio.create_task(_send_outbound(ws, session))
        try:
            while True:
                message = await ws.receive()
                if message["type"] == "websocket.disconnect":
                    break
                raw = message.get("text")
                if raw is None:
                    raw = message.get("bytes", b"")
                session.submit_raw(raw)
        except WebSocketDisconnect:
            pass
        finally:
            session.close()
            loop_task.cancel()
            sender_task.cancel()

    return app


async def _send_outbound(ws: WebSocket, session: Session) -> None:
    while True:
        kind, payload = await session.outbound.get()
        if kind == "frame":
            await ws.send_bytes(payload)
        else:
            await ws.send_json(payload)
