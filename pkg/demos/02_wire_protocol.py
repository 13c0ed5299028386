"""
Backhaul wire protocol
======================

The six message types that cross the controller-station link, and their
fixed little-endian byte layout:

    [msg_type: u8][tbs_id: u16][timestamp_us: u64][payload]
"""

from splitran import wire

messages = [
    wire.LoadReport(tbs_id=1, timestamp_us=1_000_000,
                    slot_usage=3, arfcn_usage=1, data_rate_bps=7200),
    wire.TbsRequest(tbs_id=2, timestamp_us=1_500_000, request_id=42),
    wire.TbsResponse(tbs_id=2, timestamp_us=1_500_000, request_id=42,
                     assigned=True, arfcn=0, timeslot=1),
    wire.Sleep(tbs_id=1, timestamp_us=5_000_000, command_id=7),
    wire.Wake(tbs_id=1, timestamp_us=9_000_000, command_id=8),
    wire.Ack(tbs_id=1, timestamp_us=5_000_360, acked_command_id=7),
]

for msg in messages:
    data = wire.encode(msg)
    name = type(msg).__name__
    print(f"{name:<12} {len(data):>2} B  {data.hex()}")
    assert wire.decode(data) == msg  # bit-exact round trip

# The decoder returns typed errors instead of crashing on bad input.
for bad in (b"", bytes(15), wire.encode(messages[3])[:-1]):
    try:
        wire.decode(bad)
    except wire.WireError as exc:
        print(f"decode({bad.hex() or 'empty':<30}) -> {type(exc).__name__}")

# A refusal carries assigned=0 with the channel fields zeroed.
refusal = wire.TbsResponse(tbs_id=2, timestamp_us=2_000_000, request_id=43,
                           assigned=False, arfcn=0, timeslot=0)
print("refusal:", wire.encode(refusal).hex())
