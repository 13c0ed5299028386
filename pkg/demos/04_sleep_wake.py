"""
Sleeping control
================

Walk one traffic station through its full lifecycle: the sleeping
routine decides who sleeps, commands are acknowledged, the station
drains live sessions before closing down (52 ms) and waking takes the
full 8.4 s setup.
"""

from splitran import CbsController, TbsAgent, ThresholdPolicy, wire

cbs = CbsController()
agent = TbsAgent(1)
policy = ThresholdPolicy()   # 16.8 kB/s capacity, 70% up / 30% down bands

# Two lightly loaded stations: the total load fits on one station well
# under the low-water mark, so the routine keeps the most-loaded station
# and sheds the other (station 1 here, which still has a live session).
cbs.ingest_load_report(wire.LoadReport(1, 0, 1, 1, 1200), now=0)
cbs.ingest_load_report(wire.LoadReport(2, 0, 1, 1, 2400), now=0)
commands = cbs.sleeping_routine(policy, now=0)
print("routine emits:", commands)
assert commands[0].tbs_id == 1

# The station acks every command.  A sleep while sessions are live does
# not drop them: the agent refuses new work and drains first.
agent.handle_tbs_request(wire.TbsRequest(1, 0, request_id=100), now=0)
ack = agent.handle_command(wire.Sleep(1, 0, command_id=commands[0].command_id),
                           now=1_000)
print("ack:", ack, "| mode:", agent.mode.value, "| draining:", agent.drain_pending)
refused = agent.handle_tbs_request(wire.TbsRequest(1, 0, request_id=101), now=2_000)
print("new request while draining -> assigned =", refused.assigned)

# The last session ends; close-down starts and takes 52 ms.
agent.release_channel(100, now=500_000)
print("after drain:", agent.mode.value, "deadline:", agent.transition_deadline)
agent.step_transition(agent.transition_deadline)
print("asleep at 552 ms:", agent.mode.value)

# Waking is expensive: 8.4 s of initialization and synchronization.
agent.handle_command(wire.Wake(1, 0, command_id=99), now=1_000_000)
print("waking, ready at", agent.transition_deadline / 1e6, "s")
notification = agent.step_transition(agent.transition_deadline)
print("awake:", agent.mode.value, "| notifies controller:", notification)
