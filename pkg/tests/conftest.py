"""Shared harness: a standalone bench (rig + pool + clock) without the executor."""

import pytest

# acceptance reports stashed here render as a table in the terminal summary
ACCEPTANCE_REPORTS = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    for report in ACCEPTANCE_REPORTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in report.format_table().splitlines():
            terminalreporter.write_line(line)

from stratobc.datapool import PoolRegistry
from stratobc.domain.config import MissionConfig, tvac_config
from stratobc.domain.tasks import flight_task_specs
from stratobc.envsim import Profile, ProfilePoint, make_flight_profile
from stratobc.executor.clock import VirtualClock
from stratobc.halsim.rig import SimulatedRig
from stratobc.subsystems import initial_pool_values


class Bench:
    """Subsystem test bench: manual clock, powered rig, unenforced pool."""

    def __init__(self, cfg: MissionConfig | None = None, profile: Profile | None = None):
        self.cfg = cfg or MissionConfig()
        self.profile = profile or make_flight_profile()
        self.clock = VirtualClock()
        self.rig = SimulatedRig(self.profile, self.clock, self.cfg.noise)
        self.rig.set_all_power(True)
        self.rig.configure_default_adcs()
        self.pool = PoolRegistry(
            flight_task_specs(),
            initial_pool_values(self.cfg),
            now_ns=self.clock.now_ns,
            queue_capacities={"TC-Queue": self.cfg.queues.tc_capacity,
                              "Event-Queue": self.cfg.queues.event_capacity},
            enforce_access=False,
        )

    def advance(self, seconds: float) -> None:
        self.clock.sleep_ns(int(seconds * 1e9))


@pytest.fixture
def bench():
    return Bench()


@pytest.fixture
def tvac_bench():
    return Bench(cfg=tvac_config())


def constant_pressure_profile(mbar: float, temp_c: float = 20.0) -> Profile:
    return Profile("const", [
        ProfilePoint(0.0, mbar, temp_c, 40.4377, -3.672524, 100.0),
        ProfilePoint(1e6, mbar, temp_c, 40.4377, -3.672524, 100.0),
    ])


def ramp_profile(p0: float, p1: float, duration_s: float) -> Profile:
    return Profile("ramp", [
        ProfilePoint(0.0, p0, 20.0, 40.4377, -3.672524, 100.0),
        ProfilePoint(duration_s, p1, 20.0, 40.4377, -3.672524, 100.0),
    ])
