"""Edge detection against the scripted reference, rasterizer contracts,
prompt composition, and the generation client over a mock transport."""

import threading

import httpx
import numpy as np
import pytest

from hairforge.errors import (AllEmpty, BadThresholds, DegenerateCamera,
                              EmptyImage, MalformedResponse,
                              ServiceUnavailable, Timeout)
from hairforge.fixtures import make_style
from hairforge.imaging import (Camera, EdgeMap, GenerationClient,
                               GenerationRequest, GrayImage, canny,
                               compose_prompt, decode_png, encode_png,
                               rasterize_strands, request_generation)
from hairforge.model import Hairstyle, RenderAttributes, Strand
from oracles.canny_reference import canny_reference


def gray(arr):
    return GrayImage.from_array(np.asarray(arr, np.uint8))


def oracle(arr, **kw):
    return np.array(canny_reference([list(r) for r in np.asarray(arr)], **kw),
                    np.uint8)


class TestCannyOracle:
    def test_vertical_step_is_single_line(self):
        img = np.zeros((64, 64), np.uint8)
        img[:, 32:] = 255
        out = canny(gray(img)).data
        assert np.array_equal(out, oracle(img))
        cols = np.unique(np.nonzero(out)[1])
        assert len(cols) == 1  # one-pixel-wide vertical edge
        assert (out[:, cols[0]] == 255).all()

    def test_constant_image_has_no_edges(self):
        out = canny(gray(np.full((32, 32), 128)))
        assert out.edge_pixel_count == 0

    @pytest.mark.parametrize("shape,seed", [((33, 29), 0), ((21, 40), 1),
                                            ((48, 48), 2), ((17, 17), 3)])
    def test_noise_matches_reference_bit_exactly(self, shape, seed):
        img = np.random.default_rng(seed).integers(0, 256, shape, np.uint8)
        assert np.array_equal(canny(gray(img)).data, oracle(img))

    def test_disk_and_ramp_match_reference(self):
        yy, xx = np.mgrid[0:40, 0:40]
        disk = np.where((xx - 20) ** 2 + (yy - 20) ** 2 < 144, 220, 30)
        ramp = np.tile(np.arange(48, dtype=np.uint8) * 5, (32, 1))
        for img in (disk, ramp):
            assert np.array_equal(canny(gray(img)).data, oracle(img))

    def test_nondefault_parameters_match_reference(self):
        img = np.random.default_rng(9).integers(0, 256, (30, 30), np.uint8)
        ours = canny(gray(img), sigma=0.8, low=40.0, high=90.0).data
        assert np.array_equal(ours, oracle(img, sigma=0.8, low=40.0, high=90.0))

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            img = gray(rng.integers(0, 256, (24, 24), np.uint8))
            loose = canny(img, low=50.0, high=200.0).data
            tight = canny(img, low=120.0, high=200.0).data
            assert not np.any((tight == 255) & (loose == 0))

    def test_bad_thresholds(self):
        img = gray(np.zeros((8, 8)))
        for low, high in ((200.0, 100.0), (100.0, 100.0), (-1.0, 50.0),
                          (10.0, 256.0)):
            with pytest.raises(BadThresholds):
                canny(img, low=low, high=high)
        with pytest.raises(ValueError):
            canny(img, sigma=0.0)

    def test_empty_image_rejected(self):
        with pytest.raises(EmptyImage):
            GrayImage.from_array(np.zeros((0, 4)))
        with pytest.raises(EmptyImage):
            GrayImage(width=0, height=4, data=np.zeros(0))

    def test_edge_map_is_binary(self):
        with pytest.raises(ValueError):
            EdgeMap(width=2, height=1, data=np.array([0, 7]))


class TestRaster:
    def test_empty_scene_is_black(self):
        cam = Camera(eye=(0, 0, 40), target=(0, 0, 0), width=64, height=64)
        img = rasterize_strands(Hairstyle(id="e", strands=(), source="procedural"), cam)
        assert img.data.sum() == 0

    def test_vertical_strand_lands_in_center_columns(self):
        strand = Strand([(0.0, -8.0 + i, 0.0) for i in range(17)])
        cam = Camera(eye=(0, 0, 40), target=(0, 0, 0), width=64, height=64)
        img = rasterize_strands(Hairstyle(id="v", strands=(strand,),
                                          source="procedural"), cam)
        lit_cols = np.unique(np.nonzero(img.data)[1])
        assert lit_cols.size > 0
        assert np.all(np.abs(lit_cols - 31.5) <= 1.5)  # center column band
        lit_rows = np.unique(np.nonzero(img.data)[0])
        assert lit_rows.size > 10  # covers a vertical span

    def test_deterministic(self, head_mesh):
        h = make_style("curly_long", strand_scale=0.05)
        cam = Camera(eye=(0, 5, 45), target=(0, 0, 0), width=96, height=96)
        a = rasterize_strands(h, cam, head=head_mesh)
        b = rasterize_strands(h, cam, head=head_mesh)
        assert np.array_equal(a.data, b.data)

    def test_head_silhouette_fills_center(self, head_mesh):
        cam = Camera(eye=(0, 0, 45), target=(0, 0, 0), width=64, height=64)
        img = rasterize_strands(Hairstyle(id="e", strands=(), source="procedural"),
                                cam, head=head_mesh)
        assert img.data[32, 32] > 0  # head straight ahead
        assert img.data[1, 1] == 0   # corners empty

    def test_strands_render_brighter_than_head(self, head_mesh):
        h = make_style("bob_short", strand_scale=0.05)
        cam = Camera(eye=(0, 5, 45), target=(0, 0, 0), width=128, height=128)
        img = rasterize_strands(h, cam, head=head_mesh)
        bare = rasterize_strands(Hairstyle(id="e", strands=(), source="procedural"),
                                 cam, head=head_mesh)
        assert img.data.max() > bare.data.max()

    def test_degenerate_camera(self):
        with pytest.raises(DegenerateCamera):
            Camera(eye=(1, 2, 3), target=(1, 2, 3))

    def test_raster_canny_pipeline_deterministic(self, head_mesh):
        h = make_style("wavy_medium", strand_scale=0.05)
        cam = Camera(eye=(0, 5, 45), target=(0, 0, 0), width=96, height=96)
        e1 = canny(rasterize_strands(h, cam, head=head_mesh))
        e2 = canny(rasterize_strands(h, cam, head=head_mesh))
        assert np.array_equal(e1.data, e2.data)
        assert e1.edge_pixel_count > 0  # strand contours do show up


class TestPng:
    def test_round_trip(self):
        img = gray(np.random.default_rng(3).integers(0, 256, (20, 30), np.uint8))
        back = decode_png(encode_png(img))
        assert np.array_equal(back.data, img.data)
        assert (back.width, back.height) == (30, 20)


class TestPrompt:
    def test_full_attribute_join(self):
        attrs = RenderAttributes(gender="Asian male", hair_color="blonde hair",
                                 head_pose="frontal face",
                                 misc="wear a sweater, in a park")
        assert compose_prompt(attrs) == (
            "Asian male, blonde hair, frontal face, wear a sweater, in a park")

    def test_single_field(self):
        assert compose_prompt(RenderAttributes(hair_color="purple hair")) == "purple hair"

    def test_all_empty(self):
        with pytest.raises(AllEmpty):
            compose_prompt(RenderAttributes())
        with pytest.raises(AllEmpty):
            compose_prompt(RenderAttributes(gender="  "))


def edge_fixture():
    data = np.zeros((64, 64), np.uint8)
    data[10:20, :] = 255
    return EdgeMap(width=64, height=64, data=data)


FIXTURE_PNG = encode_png(edge_fixture())


class TestClient:
    def make_client(self, handler, timeout=5.0):
        return GenerationClient("http://gen.test", timeout=timeout,
                                transport=httpx.MockTransport(handler))

    def test_echo_round_trip(self):
        seen = {}

        def handler(request):
            seen["url"] = str(request.url)
            seen["body"] = request.read()
            return httpx.Response(200, content=FIXTURE_PNG,
                                  headers={"content-type": "image/png"})

        client = self.make_client(handler)
        req = GenerationRequest(edge_map=edge_fixture(), prompt="purple hair",
                                seed=7)
        result = request_generation(client, req)
        client.close()
        assert result.png == FIXTURE_PNG
        assert result.latency_s >= 0.0
        assert seen["url"].endswith("/generate")
        body = seen["body"]
        assert b"purple hair" in body and b"image/png" in body
        assert b'name="seed"' in body and b"512" in body

    def test_fifo_queue_observable(self):
        gate = threading.Event()
        order = []

        def handler(request):
            body = request.read()
            marker = b"first" if b"first" in body else b"second"
            if marker == b"first":
                gate.wait(timeout=5.0)
            order.append(marker)
            return httpx.Response(200, content=FIXTURE_PNG)

        client = self.make_client(handler)
        f1 = client.submit(GenerationRequest(edge_map=edge_fixture(), prompt="first"))
        while not client.in_flight:
            pass
        f2 = client.submit(GenerationRequest(edge_map=edge_fixture(), prompt="second"))
        assert client.queue_length == 1  # second held behind the in-flight one
        gate.set()
        assert f1.result(timeout=5.0).png == FIXTURE_PNG
        assert f2.result(timeout=5.0).png == FIXTURE_PNG
        assert order == [b"first", b"second"]
        client.close()

    def test_http_error_maps_to_service_unavailable(self):
        def handler(request):
            return httpx.Response(503, json={"error": "model loading"})

        client = self.make_client(handler)
        with pytest.raises(ServiceUnavailable, match="model loading"):
            request_generation(client, GenerationRequest(edge_map=edge_fixture(),
                                                         prompt="x"))
        client.close()

    def test_transport_error_maps_to_service_unavailable(self):
        def handler(request):
            raise httpx.ConnectError("refused")

        client = self.make_client(handler)
        with pytest.raises(ServiceUnavailable):
            request_generation(client, GenerationRequest(edge_map=edge_fixture(),
                                                         prompt="x"))
        client.close()

    def test_timeout_maps_to_timeout(self):
        def handler(request):
            raise httpx.ReadTimeout("slow backend")

        client = self.make_client(handler)
        with pytest.raises(Timeout):
            request_generation(client, GenerationRequest(edge_map=edge_fixture(),
                                                         prompt="x"))
        client.close()

    def test_non_png_body_is_malformed(self):
        def handler(request):
            return httpx.Response(200, content=b"not a png")

        client = self.make_client(handler)
        with pytest.raises(MalformedResponse):
            request_generation(client, GenerationRequest(edge_map=edge_fixture(),
                                                         prompt="x"))
        client.close()

    def test_request_validation(self):
        with pytest.raises(ValueError):
            GenerationRequest(edge_map=edge_fixture(), prompt="")
        with pytest.raises(ValueError):
            GenerationRequest(edge_map=edge_fixture(), prompt="x", width=32)
