"""
Logical-channel separation
==========================

Which side of the split RAN serves each logical channel?  Broadcast,
common control, paging and common traffic stay on the always-on control
station; dedicated traffic and its associated control belong to the
traffic stations, which may sleep.
"""

from splitran import (SEPARATION_MAP, InvalidChannel, LogicalChannel,
                      Standard, classify_channel, classify_request)

# The full separation table, grouped by standard.
for standard in Standard:
    print(f"\n{standard.value}")
    for (std, name), side in SEPARATION_MAP.items():
        if std is standard:
            print(f"  {name:<6} -> {side.value}")

# A packet-data request is high-rate: it triggers a station dispatch.
print("\nclassify_request(GSM_GPRS, PDTCH) =",
      classify_request(Standard.GSM_GPRS, "PDTCH").value)

# Voice stays on the control station, no dispatch needed.
print("classify_request(GSM_GPRS, TCH)   =",
      classify_request(Standard.GSM_GPRS, "TCH").value)

# Scenario files write channels as STANDARD:NAME tokens (case-insensitive).
channel = LogicalChannel.parse("lte:dtch")
print(f"parsed {channel} -> {classify_channel(channel).value}")

# Invalid pairs are rejected: BCH is a GSM name, not an LTE one.
try:
    classify_channel(LogicalChannel(Standard.LTE, "BCH"))
except InvalidChannel as exc:
    print("LTE:BCH rejected:", exc)
