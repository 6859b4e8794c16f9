"""Transport-only client for the external image-generation service.

The service owns all diffusion logic; this side sends one multipart
POST per request and hands back PNG bytes. Requests are serialized
through a single worker thread: at most one in flight, the rest wait
in FIFO order, and callers holding a future never block anyone else's
event loop.
"""

from __future__ import annotations

import queue
import threading
import time
from concurrent.futures import Future
from dataclasses import dataclass, field

import httpx

from ..errors import MalformedResponse, ServiceUnavailable, Timeout
from .image import EdgeMap, encode_png

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True, slots=True)
class GenerationRequest:
    """One conditioned image request; sizes below 64 px are rejected."""

    edge_map: EdgeMap
    prompt: str
    seed: int = 0
    width: int = 512
    height: int = 512

    def __post_init__(self):
        if not self.prompt or not self.prompt.strip():
            raise ValueError("prompt must be non-empty")
        if self.width < 64 or self.height < 64:
            raise ValueError(f"size {self.width}x{self.height} below 64px minimum")


@dataclass(frozen=True, slots=True)
class ImageResult:
    """PNG bytes plus observed round-trip latency."""

    png: bytes = field(repr=False)
    latency_s: float = 0.0


class GenerationClient:
    """FIFO-serialized client bound to one service endpoint."""

    def __init__(self, base_url: str, timeout: float = 120.0, transport=None):
        self.base_url = base_url.rstrip("/")
        self._http = httpx.Client(timeout=timeout, transport=transport)
        self._queue: queue.Queue = queue.Queue()
        self._worker = None
        self._in_flight = False
        self._lock = threading.Lock()
        self._closed = False

    @property
    def queue_length(self) -> int:
        """Requests waiting behind the in-flight one."""
        return self._queue.qsize()

    @property
    def in_flight(self) -> bool:
        return self._in_flight

    def submit(self, req: GenerationRequest) -> Future:
        """Enqueue a request; the returned future resolves to ImageResult."""
        if self._closed:
            raise RuntimeError("client is closed")
        fut: Future = Future()
        self._queue.put((req, fut))
        with self._lock:
            if self._worker is None:
                self._worker = threading.Thread(target=self._run, daemon=True,
                                                name="generation-client")
                self._worker.start()
        return fut

    def close(self):
        if self._closed:
            return
        self._closed = True
        if self._worker is not None:
            self._queue.put(None)
            self._worker.join(timeout=5.0)
        self._http.close()

    def _run(self):
        while True:
            item = self._queue.get()
            if item is None:
                return
            req, fut = item
            if not fut.set_running_or_notify_cancel():
                continue
            self._in_flight = True
            try:
                fut.set_result(self._post(req))
            except BaseException as exc:
                fut.set_exception(exc)
            finally:
                self._in_flight = False

    def _post(self, req: GenerationRequest) -> ImageResult:
        start = time.perf_counter()
        try:
            resp = self._http.post(
                f"{self.base_url}/generate",
                files={"edge": ("edge.png", encode_png(req.edge_map), "image/png")},
                data={"prompt": req.prompt, "seed": str(req.seed),
                      "width": str(req.width), "height": str(req.height)},
            )
        except httpx.TimeoutException as exc:
            raise Timeout(f"generation exceeded deadline: {exc}") from exc
        except httpx.TransportError as exc:
            raise ServiceUnavailable(str(exc)) from exc
        latency = time.perf_counter() - start
        if resp.status_code != 200:
            detail = ""
            try:
                detail = resp.json().get("error", "")
            except Exception:
                detail = resp.text[:200]
            raise ServiceUnavailable(f"HTTP {resp.status_code}: {detail}")
        if not resp.content.startswith(_PNG_MAGIC):
            raise MalformedResponse("response body is not a PNG")
        return ImageResult(png=resp.content, latency_s=latency)


def request_generation(client: GenerationClient, req: GenerationRequest) -> ImageResult:
    """Blocking convenience wrapper: submit and wait for the result.

    Raises
    ------
    ServiceUnavailable, Timeout, MalformedResponse
    """
    return client.submit(req).result()
