import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foal import (
    BlockFeatureSet,
    FeatureFileError,
    read_all,
    read_features,
    read_header,
    write_features,
)
from foal.features import HEADER_SIZE


def _samples(rng, count, n=2, e=3):
    return [(int(rng.integers(0, 100)),
             BlockFeatureSet(rng.normal(size=(n, e)).astype(np.float32)))
            for _ in range(count)]


def test_round_trip_is_bit_identical(tmp_path):
    rng = np.random.default_rng(1)
    samples = _samples(rng, 5)
    path = tmp_path / "five.foal"
    write_features(samples, path)
    header, loaded = read_all(path)
    assert header.sample_count == 5
    assert header.labeled
    for (cid, original), (cid2, reread) in zip(samples, loaded):
        assert cid == cid2
        assert original.blocks.tobytes() == reread.blocks.tobytes()


def test_empty_file_is_valid(tmp_path):
    path = tmp_path / "empty.foal"
    write_features([], path)
    header, loaded = read_all(path)
    assert header.sample_count == 0
    assert loaded == []


def test_file_size_arithmetic(tmp_path):
    rng = np.random.default_rng(2)
    n, e, v = 12, 768, 100
    path = tmp_path / "sized.foal"
    write_features(_samples(rng, v, n=n, e=e), path)
    assert path.stat().st_size == HEADER_SIZE + v * (4 + 4 * n * e)


def test_unlabeled_files(tmp_path):
    rng = np.random.default_rng(3)
    samples = [(None, s) for _, s in _samples(rng, 4)]
    path = tmp_path / "nolabel.foal"
    write_features(samples, path, labeled=False)
    header, loaded = read_all(path)
    assert not header.labeled
    assert path.stat().st_size == HEADER_SIZE + 4 * (4 * 2 * 3)
    assert all(cid is None for cid, _ in loaded)


def test_corrupted_magic_reports_offset_zero(tmp_path):
    path = tmp_path / "bad.foal"
    write_features([], path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    path.write_bytes(raw)
    with pytest.raises(FeatureFileError) as err:
        read_features(path)
    assert err.value.offset == 0


def test_unsupported_version_reports_offset(tmp_path):
    path = tmp_path / "v9.foal"
    write_features([], path)
    raw = bytearray(path.read_bytes())
    raw[4:8] = struct.pack("<I", 9)
    path.write_bytes(raw)
    with pytest.raises(FeatureFileError) as err:
        read_features(path)
    assert err.value.offset == 4


def test_truncation_names_sample_index(tmp_path):
    rng = np.random.default_rng(4)
    path = tmp_path / "cut.foal"
    write_features(_samples(rng, 3), path)
    raw = path.read_bytes()
    sample_bytes = 4 + 4 * 2 * 3
    # cut into the middle of the third sample
    path.write_bytes(raw[:HEADER_SIZE + 2 * sample_bytes + 5])
    with pytest.raises(FeatureFileError) as err:
        read_features(path)
    assert err.value.sample_index == 2


def test_trailing_garbage_rejected(tmp_path):
    rng = np.random.default_rng(5)
    path = tmp_path / "extra.foal"
    write_features(_samples(rng, 2), path)
    path.write_bytes(path.read_bytes() + b"\x00\x00")
    with pytest.raises(FeatureFileError):
        read_features(path)


def test_non_finite_payload_names_sample(tmp_path):
    rng = np.random.default_rng(6)
    path = tmp_path / "nan.foal"
    write_features(_samples(rng, 2), path)
    raw = bytearray(path.read_bytes())
    sample_bytes = 4 + 4 * 2 * 3
    # overwrite the first float of sample 1 with NaN
    offset = HEADER_SIZE + sample_bytes + 4
    raw[offset:offset + 4] = struct.pack("<f", float("nan"))
    path.write_bytes(raw)
    _, stream = read_features(path)
    with pytest.raises(FeatureFileError) as err:
        list(stream)
    assert err.value.sample_index == 1


def test_reading_is_lazy(tmp_path):
    rng = np.random.default_rng(7)
    path = tmp_path / "lazy.foal"
    write_features(_samples(rng, 10), path)
    header, stream = read_features(path)
    first = next(stream)
    assert first[0] is not None
    stream.close()  # abandoning the iterator must not leak the handle


def test_read_header_only(tmp_path):
    rng = np.random.default_rng(8)
    path = tmp_path / "head.foal"
    write_features(_samples(rng, 7, n=3, e=4), path)
    header = read_header(path)
    assert (header.sample_count, header.block_count, header.block_dim) == (7, 3, 4)


def test_mixed_shapes_rejected_at_write(tmp_path):
    rng = np.random.default_rng(9)
    good = BlockFeatureSet(rng.normal(size=(2, 3)).astype(np.float32))
    bad = BlockFeatureSet(rng.normal(size=(2, 4)).astype(np.float32))
    with pytest.raises(FeatureFileError) as err:
        write_features([(0, good), (1, bad)], tmp_path / "mixed.foal")
    assert err.value.sample_index == 1


@given(st.data())
@settings(max_examples=20, deadline=None)
def test_round_trip_property(tmp_path_factory, data):
    count = data.draw(st.integers(0, 6))
    n = data.draw(st.integers(1, 3))
    e = data.draw(st.integers(1, 5))
    seed = data.draw(st.integers(0, 2 ** 16))
    rng = np.random.default_rng(seed)
    samples = [(int(rng.integers(0, 2 ** 32)),
                BlockFeatureSet((1000 * rng.standard_normal((n, e)))
                                .astype(np.float32)))
               for _ in range(count)]
    path = tmp_path_factory.mktemp("rt") / "file.foal"
    write_features(samples, path)
    header, loaded = read_all(path)
    assert header.sample_count == count
    assert [cid for cid, _ in samples] == [cid for cid, _ in loaded]
    for (_, a), (_, b) in zip(samples, loaded):
        assert a.blocks.tobytes() == b.blocks.tobytes()
