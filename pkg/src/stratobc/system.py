"""Assembly of the full onboard system: pool, rig, tasks, manager and link."""

from __future__ import annotations

from dataclasses import dataclass

from stratobc.datapool import BoundedQueue, PoolRegistry
from stratobc.domain import tasks as po
from stratobc.domain.config import MissionConfig
from stratobc.domain.tasks import TaskKind, flight_task_specs, validate_task_set
from stratobc.domain.types import OperatingMode
from stratobc.envsim import Profile
from stratobc.executor import ExecMode, Executor, RunArtifacts
from stratobc.halsim.i2c import TransactionLog
from stratobc.halsim.rig import SimulatedRig
from stratobc.manager import Manager
from stratobc.subsystems import (
    GpsMeasurer,
    HtlManager,
    ImuMeasurer,
    PcuManager,
    SdpuMeasurer,
    initial_pool_values,
)
from stratobc.ttc.link import LoopTransport, TcpListenerTransport
from stratobc.ttc.tasks import OnboardTmLog, SocketService, TcReceiver, TmSender, TtcLink


class SystemError(RuntimeError):
    pass


@dataclass
class ObswSystem:
    cfg: MissionConfig
    profile: Profile
    executor: Executor
    pool: PoolRegistry
    rig: SimulatedRig
    manager: Manager
    imu: ImuMeasurer
    gps: GpsMeasurer
    htl: HtlManager
    sdpu: SdpuMeasurer
    pcu: PcuManager
    tm_sender: TmSender
    tc_receiver: TcReceiver
    ttc_link: TtcLink
    tm_log: OnboardTmLog
    inbound_queue: BoundedQueue
    socket_service: SocketService | None = None

    @property
    def clock(self):
        return self.executor.clock

    def run(self, duration_s: float) -> RunArtifacts:
        if self.socket_service is not None:
            self.socket_service.start()
        try:
            return self.executor.run(duration_s)
        finally:
            if self.socket_service is not None:
                self.socket_service.stop()
            self.ttc_link.transport.close()


def build_system(
    cfg: MissionConfig,
    profile: Profile,
    mode: ExecMode,
    *,
    transport=None,
    stop_on_shutdown: bool = True,
    record_activations: bool = True,
    trace: bool = False,
    value_logs: bool = True,
    bus_log: TransactionLog | None = None,
) -> ObswSystem:
    """Wire the full task set against a fresh executor.

    `transport` defaults to a TCP listener in threaded mode and an
    in-memory loop transport in deterministic mode.
    """
    report = validate_task_set(flight_task_specs())
    if not report.ok:
        raise SystemError(f"shipped task set invalid: {report.errors}")

    executor = Executor(mode, time_scale=cfg.time_scale, trace=trace,
                        record_activations=record_activations)
    clock = executor.clock
    pool = PoolRegistry(
        flight_task_specs(),
        initial_pool_values(cfg),
        now_ns=clock.now_ns,
        queue_capacities={po.TC_QUEUE: cfg.queues.tc_capacity,
                          po.EVENT_QUEUE: cfg.queues.event_capacity},
        enforce_access=True,
    )
    rig = SimulatedRig(profile, clock, cfg.noise, bus_log=bus_log)
    rig.configure_default_adcs()

    def on_mode_change(new_mode: OperatingMode, _t_ms: float) -> None:
        if stop_on_shutdown and new_mode is OperatingMode.SHUTDOWN:
            executor.request_stop("shutdown reached")

    manager = Manager(pool, cfg, clock, on_mode_change=on_mode_change)

    imu = ImuMeasurer(rig, pool, clock, log_enabled=value_logs)
    gps = GpsMeasurer(rig, pool, clock)
    htl = HtlManager(rig, pool, clock, cfg, log_enabled=value_logs)
    sdpu = SdpuMeasurer(rig, pool, clock, cfg, log_enabled=True)
    pcu = PcuManager(rig, pool, clock, log_enabled=value_logs)

    if transport is None:
        if mode is ExecMode.THREADED:
            transport = TcpListenerTransport(cfg.gs.listen_host, cfg.gs.listen_port)
        else:
            transport = LoopTransport()
    link = TtcLink(transport, cfg, clock)
    tm_log = OnboardTmLog()
    event_queue = pool.queue(po.EVENT_QUEUE)
    tm_sender = TmSender(pool, link, event_queue, tm_log, cfg, clock)
    # activation queue for the sporadic receiver (internal plumbing, not a
    # registry object: capacity sized for burst chunks)
    inbound = BoundedQueue("ttc-inbound", 64, clock.now_ns)
    tc_receiver = TcReceiver(pool, link, tm_log, clock, inbound=inbound)

    specs = {s.name: s for s in flight_task_specs()}
    executor.register_cyclic(specs[po.TASK_IMU], imu.cycle)
    executor.register_cyclic(specs[po.TASK_GPS], gps.cycle)
    executor.register_cyclic(specs[po.TASK_HTL], htl.cycle)
    executor.register_cyclic(specs[po.TASK_SDPU], sdpu.cycle)
    executor.register_cyclic(specs[po.TASK_PCU], pcu.cycle)
    executor.register_cyclic(specs[po.TASK_TM_SENDER], tm_sender.cycle)
    executor.register_sporadic(specs[po.TASK_TC_HANDLER], pool.queue(po.TC_QUEUE),
                               manager.handle_tc)
    executor.register_sporadic(specs[po.TASK_EVENT_HANDLER], event_queue,
                               manager.handle_event)
    executor.register_sporadic(specs[po.TASK_TC_RECEIVER], inbound,
                               tc_receiver.handle_chunk)

    service = None
    if mode is ExecMode.THREADED and isinstance(transport, TcpListenerTransport):
        service = SocketService(transport, inbound)

    assert all(s.kind in (TaskKind.CYCLIC, TaskKind.SPORADIC) for s in specs.values())
    return ObswSystem(
        cfg=cfg, profile=profile, executor=executor, pool=pool, rig=rig,
        manager=manager, imu=imu, gps=gps, htl=htl, sdpu=sdpu, pcu=pcu,
        tm_sender=tm_sender, tc_receiver=tc_receiver, ttc_link=link,
        tm_log=tm_log, inbound_queue=inbound, socket_service=service,
    )
