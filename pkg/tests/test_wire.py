from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from splitran import wire

GOLDEN = Path(__file__).parent / "data" / "golden_messages.hex"

GOLDEN_MESSAGES = {
    "load_report": wire.LoadReport(tbs_id=1, timestamp_us=0, slot_usage=0,
                                   arfcn_usage=1, data_rate_bps=0),
    "tbs_request": wire.TbsRequest(tbs_id=3, timestamp_us=1000, request_id=42),
    "tbs_response": wire.TbsResponse(tbs_id=2, timestamp_us=500_000,
                                     request_id=42, assigned=True, arfcn=5,
                                     timeslot=3),
    "sleep": wire.Sleep(tbs_id=1, timestamp_us=5_000_000, command_id=1),
    "wake": wire.Wake(tbs_id=2, timestamp_us=6_000_000, command_id=2),
    "ack": wire.Ack(tbs_id=2, timestamp_us=5, acked_command_id=7),
}


def _golden_rows():
    rows = []
    for line in GOLDEN.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        label, hexdump = line.split()
        rows.append((label, hexdump))
    return rows


@pytest.mark.parametrize("label, hexdump", _golden_rows())
def test_golden_encode(label, hexdump):
    assert wire.encode(GOLDEN_MESSAGES[label]).hex() == hexdump


@pytest.mark.parametrize("label, hexdump", _golden_rows())
def test_golden_decode(label, hexdump):
    assert wire.decode(bytes.fromhex(hexdump)) == GOLDEN_MESSAGES[label]


def test_spec_load_report_bytes():
    # Hand-assembled: type 1, tbs 1, ts 0, slots 0, arfcns 1, rate 0.
    expected = bytes([1, 1, 0] + [0] * 8 + [0, 1] + [0] * 4)
    assert wire.encode(GOLDEN_MESSAGES["load_report"]) == expected
    assert len(expected) == 17


def test_ack_length_and_type_byte():
    data = wire.encode(GOLDEN_MESSAGES["ack"])
    assert data[0] == 0x06
    assert len(data) == wire.message_length(6) == 15


u16 = st.integers(0, 0xFFFF)
u64 = st.integers(0, 2**64 - 1)
u32 = st.integers(0, 2**32 - 1)
u8 = st.integers(0, 0xFF)

messages = st.one_of(
    st.builds(wire.LoadReport, tbs_id=u16, timestamp_us=u64, slot_usage=u8,
              arfcn_usage=u8, data_rate_bps=u32),
    st.builds(wire.TbsRequest, tbs_id=u16, timestamp_us=u64, request_id=u32),
    st.builds(wire.TbsResponse, tbs_id=u16, timestamp_us=u64, request_id=u32,
              assigned=st.booleans(), arfcn=u16, timeslot=u8),
    st.builds(wire.Sleep, tbs_id=u16, timestamp_us=u64, command_id=u32),
    st.builds(wire.Wake, tbs_id=u16, timestamp_us=u64, command_id=u32),
    st.builds(wire.Ack, tbs_id=u16, timestamp_us=u64, acked_command_id=u32),
)


@given(messages)
def test_round_trip(msg):
    assert wire.decode(wire.encode(msg)) == msg


@given(messages, messages)
def test_injective(a, b):
    if a != b:
        assert wire.encode(a) != wire.encode(b)


@given(st.binary(max_size=64))
def test_fuzzed_decode_never_crashes(data):
    try:
        msg = wire.decode(data)
    except wire.WireError:
        return
    assert wire.encode(msg) == data


def test_decode_empty_is_truncated():
    with pytest.raises(wire.TruncatedMessage):
        wire.decode(b"")


def test_decode_unknown_type():
    with pytest.raises(wire.UnknownType):
        wire.decode(bytes([0] * 15))
    with pytest.raises(wire.UnknownType):
        wire.decode(bytes([7] * 15))


def test_decode_truncated_and_trailing():
    data = wire.encode(GOLDEN_MESSAGES["sleep"])
    with pytest.raises(wire.TruncatedMessage):
        wire.decode(data[:-1])
    with pytest.raises(wire.TrailingBytes):
        wire.decode(data + b"\x00")


def test_decode_bad_boolean():
    data = bytearray(wire.encode(GOLDEN_MESSAGES["tbs_response"]))
    data[wire.HEADER_LEN + 4] = 2  # assigned flag
    with pytest.raises(wire.MalformedField):
        wire.decode(bytes(data))
