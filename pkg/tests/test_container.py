import numpy as np
import pytest

from mscl import container
from mscl.container import (FrameRecord, StreamHeader, read_stream,
                            write_stream)
from mscl.errors import (BadMagic, InvalidField, MsclError,
                         NonzeroReservedBits, UnsupportedVersion)


def _header(frames=0, **kw):
    defaults = dict(width=64, height=48, frame_count=frames, colorspace=0,
                    qp=24, flags=7, fps_num=30, fps_den=1)
    defaults.update(kw)
    return StreamHeader(**defaults)


class TestRoundTrip:
    def test_empty_stream_is_header_only(self):
        data = write_stream(_header(0), [])
        assert len(data) == container.HEADER_SIZE == 20
        header, records = read_stream(data)
        assert header == _header(0)
        assert records == []

    def test_payload_round_trip(self):
        records = [
            FrameRecord(0, 0, b"", b"\x00abc"),
            FrameRecord(1, 31, b"\x00motion", b"\x00resid"),
            FrameRecord(1, 5, b"\x00", b""),
        ]
        data = write_stream(_header(3), records)
        header, back = read_stream(data)
        assert back == records
        assert header.frame_count == 3

    def test_randomized_records_round_trip(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            n = int(rng.integers(0, 6))
            records = []
            for _ in range(n):
                ftype = int(rng.integers(0, 2))
                d = 0 if ftype == 0 else int(rng.integers(0, 32))
                motion = b"" if ftype == 0 else rng.bytes(int(rng.integers(0, 40)))
                records.append(FrameRecord(ftype, d, motion,
                                           rng.bytes(int(rng.integers(0, 60)))))
            header = _header(n, width=int(rng.integers(16, 2000)),
                             height=int(rng.integers(16, 2000)),
                             qp=int(rng.integers(1, 256)),
                             flags=int(rng.integers(0, 8)))
            h2, r2 = read_stream(write_stream(header, records))
            assert h2 == header and r2 == records


class TestSideInfo:
    def test_side_byte_0x1f_is_factor_31(self):
        data = write_stream(_header(1), [FrameRecord(1, 31, b"", b"")])
        rec_off = container.HEADER_SIZE
        assert data[rec_off + 1] == 0x1F
        _, records = read_stream(data)
        assert records[0].d_index == 31

    def test_reserved_bits_rejected(self):
        data = bytearray(write_stream(_header(1), [FrameRecord(1, 31, b"", b"")]))
        data[container.HEADER_SIZE + 1] = 0x20
        with pytest.raises(NonzeroReservedBits):
            read_stream(bytes(data))

    def test_intra_with_motion_rejected(self):
        with pytest.raises(InvalidField):
            FrameRecord(0, 0, b"x", b"")
        with pytest.raises(InvalidField):
            FrameRecord(0, 3, b"", b"")


class TestErrors:
    def test_bad_magic(self):
        data = bytearray(write_stream(_header(0), []))
        data[:4] = b"XXXX"
        with pytest.raises(BadMagic):
            read_stream(bytes(data))

    def test_unsupported_version(self):
        data = bytearray(write_stream(_header(0), []))
        data[4] = 9
        with pytest.raises(UnsupportedVersion):
            read_stream(bytes(data))

    def test_trailing_garbage(self):
        data = write_stream(_header(0), []) + b"!"
        with pytest.raises(InvalidField):
            read_stream(data)

    def test_truncation_every_offset_clean(self):
        records = [FrameRecord(1, 3, b"\x00mo", b"\x00resid"),
                   FrameRecord(0, 0, b"", b"\x00intra")]
        data = write_stream(_header(2), records)
        for cut in range(len(data)):
            with pytest.raises(MsclError):
                read_stream(data[:cut])

    def test_header_field_validation(self):
        with pytest.raises(InvalidField):
            StreamHeader(8, 48, 0, 0, 24, 0)
        with pytest.raises(InvalidField):
            _header(0, colorspace=3)
        with pytest.raises(InvalidField):
            _header(0, flags=9)
        with pytest.raises(InvalidField):
            write_stream(_header(2), [])
