"""
Least-loaded dispatching
========================

The controller keeps a sliding window of per-station load reports and
sends each high-rate request to the least-loaded ACTIVE station.  Low
rate requests never leave the control station.
"""

from splitran import (BelievedMode, CbsController, LogicalChannel, Standard,
                      wire)

PDTCH = LogicalChannel(Standard.GSM_GPRS, "PDTCH")
TCH = LogicalChannel(Standard.GSM_GPRS, "TCH")

cbs = CbsController()

# Stations report their load once a second; the first report registers
# the station with the controller.
cbs.ingest_load_report(wire.LoadReport(1, 0, 2, 1, 4800), now=0)
cbs.ingest_load_report(wire.LoadReport(2, 0, 0, 0, 0), now=0)
print("known stations:", cbs.known_tbs())
print("loads:", cbs.loads(now=0))

# A data request goes to the idle station.
result = cbs.dispatch(PDTCH, now=0)
print("PDTCH ->", result.decision)

# Voice is served locally.
print("TCH   ->", cbs.dispatch(TCH, now=0).decision)

# Ties break toward the lowest station id, so replays are exact.
# Station 2's window mean is now (0 + 9600) / 2 = 4800, same as 1's.
cbs.ingest_load_report(wire.LoadReport(2, 1_000_000, 2, 1, 9600), now=1_000_000)
print("loads:", cbs.loads(now=1_000_000))
print("tie   ->", cbs.dispatch(PDTCH, now=1_000_000).decision)

# If the chosen station refuses (all channels busy), the caller retries
# once with the refused station excluded.
retry = cbs.dispatch(PDTCH, now=1_000_000, exclude={1})
print("retry ->", retry.decision)

# With every station asleep the request is rejected, but the controller
# wakes the least-recently-slept station so a retransmission succeeds.
asleep = CbsController()
asleep.register_tbs(1, BelievedMode.SLEEPING, now=0)
asleep.register_tbs(2, BelievedMode.SLEEPING, now=5)
result = asleep.dispatch(PDTCH, now=10)
print("all asleep ->", result.decision, "| wake commands:", result.commands)
