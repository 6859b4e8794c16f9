"""File-format round trips, corruption detection, and database loading."""

import struct
import time

import numpy as np
import pytest

from hairforge.assets import (load_database, load_index, read_hairstyle,
                              save_index, write_hairstyle, write_sidecar)
from hairforge.errors import (BadMagic, DuplicateId, HairforgeError,
                              TruncatedFile, VersionUnsupported)
from hairforge.model import Hairstyle, Strand
from hairforge.retrieval import EmbeddingIndex


def toy_style(n_strands=3, n_verts=5, seed=0):
    rng = np.random.default_rng(seed)
    strands = [Strand(rng.uniform(-10, 10, (n_verts, 3)).astype(np.float32))
               for _ in range(n_strands)]
    return Hairstyle(id="toy", strands=strands, source="procedural")


class TestHairFormat:
    def test_round_trip_bit_exact(self, tmp_path):
        h = toy_style()
        path = tmp_path / "toy.hair"
        write_hairstyle(h, path)
        back = read_hairstyle(path)
        assert back.strand_count == h.strand_count
        for a, b in zip(back.strands, h.strands):
            assert np.array_equal(a.vertices, b.vertices)

    def test_file_to_file_round_trip_byte_exact(self, tmp_path):
        h = toy_style(seed=4)
        p1 = tmp_path / "a.hair"
        p2 = tmp_path / "b.hair"
        write_hairstyle(h, p1)
        write_hairstyle(read_hairstyle(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_size_arithmetic(self, tmp_path):
        h = toy_style(n_strands=2, n_verts=7)
        path = tmp_path / "sized.hair"
        write_hairstyle(h, path)
        expected = 4 + 8 + 2 * (4 + 7 * 12)
        assert path.stat().st_size == expected

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.hair"
        path.write_bytes(b"JUNK" + b"\x00" * 16)
        with pytest.raises(BadMagic):
            read_hairstyle(path)

    def test_version_unsupported(self, tmp_path):
        path = tmp_path / "v9.hair"
        path.write_bytes(b"HAIR" + struct.pack("<II", 9, 0))
        with pytest.raises(VersionUnsupported):
            read_hairstyle(path)

    def test_truncation_detected_at_every_cut(self, tmp_path):
        h = toy_style(n_strands=2, n_verts=4)
        path = tmp_path / "full.hair"
        write_hairstyle(h, path)
        blob = path.read_bytes()
        cut_points = [6, 14, 30, len(blob) - 1]
        for cut in cut_points:
            clipped = tmp_path / f"cut{cut}.hair"
            clipped.write_bytes(blob[:cut])
            with pytest.raises(TruncatedFile):
                read_hairstyle(clipped)


class TestIndexFormat:
    def make_index(self, n=3, d=8, seed=0, provider_id="test-prov"):
        rng = np.random.default_rng(seed)
        rows = rng.normal(size=(n, d))
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        return EmbeddingIndex(matrix=rows, ids=tuple(f"id{i}" for i in range(n)),
                              provider_id=provider_id)

    def test_round_trip(self, tmp_path):
        index = self.make_index()
        path = tmp_path / "toy.hidx"
        save_index(index, path)
        back = load_index(path)
        assert back.ids == index.ids
        assert back.provider_id == index.provider_id
        assert np.allclose(back.matrix, index.matrix, atol=1e-6)
        assert np.allclose(np.linalg.norm(back.matrix, axis=1), 1.0, atol=1e-5)

    def test_file_to_file_round_trip_byte_exact(self, tmp_path):
        p1 = tmp_path / "a.hidx"
        p2 = tmp_path / "b.hidx"
        save_index(self.make_index(seed=2), p1)
        save_index(load_index(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic_and_truncation(self, tmp_path):
        good = tmp_path / "good.hidx"
        save_index(self.make_index(), good)
        blob = good.read_bytes()

        bad = tmp_path / "bad.hidx"
        bad.write_bytes(b"NOPE" + blob[4:])
        with pytest.raises(BadMagic):
            load_index(bad)

        for cut in (6, 20, len(blob) - 2):
            clipped = tmp_path / f"cut{cut}.hidx"
            clipped.write_bytes(blob[:cut])
            with pytest.raises((TruncatedFile, HairforgeError)):
                load_index(clipped)

    def test_non_unit_rows_rejected(self, tmp_path):
        index = self.make_index()
        path = tmp_path / "skewed.hidx"
        save_index(index, path)
        blob = bytearray(path.read_bytes())
        pid_len = struct.unpack_from("<I", blob, 8)[0]
        row_start = 12 + pid_len + 8
        struct.pack_into("<f", blob, row_start, 40.0)
        path.write_bytes(bytes(blob))
        with pytest.raises(HairforgeError):
            load_index(path)

    def test_large_index_loads_fast(self, tmp_path):
        index = self.make_index(n=1320, d=512, seed=7)
        path = tmp_path / "big.hidx"
        save_index(index, path)
        start = time.perf_counter()
        back = load_index(path)
        elapsed = time.perf_counter() - start
        assert back.size == 1320
        assert elapsed < 0.1


class TestDatabase:
    def test_empty_directory(self, tmp_path):
        assert load_database(tmp_path) == []

    def test_fixture_database_loads_with_captions(self, fixture_db_dir):
        styles = load_database(fixture_db_dir)
        assert len(styles) == 12
        assert all(s.caption for s in styles)
        assert all(s.strand_count > 0 for s in styles)

    def test_missing_sidecar_skipped(self, tmp_path, caplog):
        write_hairstyle(toy_style(), tmp_path / "lonely.hair")
        assert load_database(tmp_path) == []

    def test_duplicate_id_across_files(self, tmp_path):
        for stem in ("first", "second"):
            write_hairstyle(toy_style(), tmp_path / f"{stem}.hair")
            write_sidecar("same-id", "a caption", tmp_path / f"{stem}.json")
        with pytest.raises(DuplicateId):
            load_database(tmp_path)
