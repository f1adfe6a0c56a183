"""Canned system scenarios producing run directories for the verifier.

Every scenario leaves a manifest plus a uniform artifact layout:

  run_dir/
    manifest.json         scenario name + parameters
    config.json           the mission config used
    mode_log.jsonl        {t_ms, mode} per transition
    events.jsonl          handled events with resulting mode
    acks.jsonl            one record per handled TC
    run_stats.json        executor statistics per task
    activation/*.csv      per-task activation logs (when recorded)
    values/*.csv          per-subsystem telemetry value logs
    tm/*.jsonl            onboard SC/HK frame logs
    gs/...                ground-station transcript (when a GS took part)
"""

from __future__ import annotations

import json
import subprocess
import sys
import time
from pathlib import Path
from typing import Any

from stratobc.domain.config import dump_config, flight_config, tvac_config
from stratobc.envsim import make_flight_profile, make_tvac_profile
from stratobc.executor import ExecMode, RunArtifacts
from stratobc.system import ObswSystem, build_system
from stratobc.ttc.gs import GsScript, VirtualGs

TVAC_HOLD_S = 1500.0


def _write_common(run_dir: Path, name: str, params: dict[str, Any],
                  system: ObswSystem, artifacts: RunArtifacts) -> None:
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "manifest.json", "w") as f:
        json.dump({"scenario": name, "params": params}, f, indent=2, sort_keys=True)
    with open(run_dir / "config.json", "w") as f:
        json.dump(dump_config(system.cfg), f, indent=2, sort_keys=True)
    with open(run_dir / "mode_log.jsonl", "w") as f:
        for t_ms, mode in system.manager.logs.mode_log:
            f.write(json.dumps({"t_ms": t_ms, "mode": mode.value}))
            f.write("\n")
    with open(run_dir / "events.jsonl", "w") as f:
        for entry in system.manager.logs.events:
            f.write(json.dumps(entry.jsonable(), sort_keys=True))
            f.write("\n")
    with open(run_dir / "acks.jsonl", "w") as f:
        for ack in system.manager.logs.acks:
            f.write(json.dumps(ack.jsonable(), sort_keys=True))
            f.write("\n")
    artifacts.write(run_dir)
    values_dir = run_dir / "values"
    values_dir.mkdir(exist_ok=True)
    for logger in (system.imu.log, system.htl.log, system.sdpu.log,
                   system.sdpu.atl_log, system.pcu.log):
        if logger.enabled and logger.rows:
            logger.write_csv(values_dir / f"{logger.name}.csv")
    system.tm_log.write_jsonl(run_dir / "tm")


def run_tvac_replay(
    run_dir: str | Path,
    *,
    time_scale: float = 60.0,
    hold_s: float = TVAC_HOLD_S,
    rate_mbar_min: float = 10.0,
    cfg_overrides: dict[str, Any] | None = None,
    gs_script: GsScript | None = None,
    duration_s: float | None = None,
    trace: bool = False,
) -> dict[str, Any]:
    """Deterministic vacuum-chamber replay: full pump-down, float timer,
    re-pressurisation, autonomous shutdown."""
    run_dir = Path(run_dir)
    cfg = tvac_config(time_scale=time_scale, **(cfg_overrides or {}))
    profile = make_tvac_profile(rate_mbar_min=rate_mbar_min, hold_s=hold_s, ramp_up=True)
    system = build_system(cfg, profile, ExecMode.DETERMINISTIC,
                          record_activations=False, trace=trace, value_logs=False)
    gs = None
    if gs_script is not None:
        gs = VirtualGs(system.ttc_link.transport, system.inbound_queue,
                       system.executor, gs_script)
    duration = duration_s if duration_s is not None else profile.duration_s + 120.0
    t0 = time.monotonic()
    artifacts = system.run(duration)
    wall_s = time.monotonic() - t0
    _write_common(run_dir, "tvac-replay",
                  {"time_scale": time_scale, "hold_s": hold_s, "wall_s": wall_s},
                  system, artifacts)
    profile.to_csv(run_dir / "profile.csv")
    if gs is not None:
        gs.transcript.write(run_dir / "gs", system.clock.now_s())
    return {"run_dir": str(run_dir), "stats": artifacts.stats(),
            "modes": [m.value for _, m in system.manager.logs.mode_log]}


def run_deterministic_nominal(
    run_dir: str | Path,
    *,
    duration_s: float = 60.0,
    gs_script: GsScript | None = None,
    trace: bool = False,
) -> dict[str, Any]:
    """Deterministic ground-test run on the flight profile (stays in
    PreLaunch for the default duration), with an optional virtual GS."""
    run_dir = Path(run_dir)
    cfg = flight_config()
    profile = make_flight_profile()
    system = build_system(cfg, profile, ExecMode.DETERMINISTIC, trace=trace)
    gs = VirtualGs(system.ttc_link.transport, system.inbound_queue,
                   system.executor, gs_script or GsScript())
    artifacts = system.run(duration_s)
    _write_common(run_dir, "deterministic-nominal", {"duration_s": duration_s},
                  system, artifacts)
    gs.transcript.write(run_dir / "gs", duration_s)
    return {"run_dir": str(run_dir), "stats": artifacts.stats()}


def _spawn_gs(address: str, record_dir: Path, duration_s: float,
              script_obj: dict[str, Any] | None, time_scale: float) -> subprocess.Popen:
    record_dir.mkdir(parents=True, exist_ok=True)
    cmd = [sys.executable, "-m", "stratobc.ttc.gs",
           "--connect", address, "--record", str(record_dir),
           "--duration", str(duration_s), "--time-scale", str(time_scale)]
    if script_obj is not None:
        script_path = record_dir / "script.json"
        script_path.write_text(json.dumps(script_obj, indent=2))
        cmd += ["--script", str(script_path)]
    return subprocess.Popen(cmd, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)


def run_threaded_system(
    run_dir: str | Path,
    *,
    duration_s: float = 60.0,
    time_scale: float = 1.0,
    gs_script_obj: dict[str, Any] | None = None,
    with_gs: bool = True,
    scenario_name: str = "threaded-nominal",
) -> dict[str, Any]:
    """Wall-clock run of the full task set with a real TCP ground station
    in a separate process."""
    run_dir = Path(run_dir)
    cfg = flight_config(time_scale=time_scale)
    profile = make_flight_profile()
    system = build_system(cfg, profile, ExecMode.THREADED, value_logs=True)
    gs_proc = None
    if with_gs:
        address = f"{system.ttc_link.transport.host}:{system.ttc_link.transport.port}"
        gs_proc = _spawn_gs(address, run_dir / "gs", duration_s + 2.0,
                            gs_script_obj, time_scale)
    try:
        artifacts = system.run(duration_s)
    finally:
        if gs_proc is not None:
            try:
                gs_proc.wait(timeout=15.0)
            except subprocess.TimeoutExpired:
                gs_proc.kill()
    _write_common(run_dir, scenario_name,
                  {"duration_s": duration_s, "time_scale": time_scale,
                   "with_gs": with_gs}, system, artifacts)
    return {"run_dir": str(run_dir), "stats": artifacts.stats()}


def nominal_gs_script() -> dict[str, Any]:
    """Light operator activity for bandwidth/responsiveness runs."""
    return {"actions": [
        {"t_s": 3.0, "tc": {"id": "Ping", "args": {}}},
        {"t_s": 5.0, "tc": {"id": "PowerSwitch", "args": {"switch": "TMU", "on": True}}},
        {"t_s": 8.0, "tc": {"id": "CalibrateImu", "args": {}}},
    ]}


def linkdrop_gs_script(drop_t_s: float = 12.0, reconnect_t_s: float = 22.0) -> dict[str, Any]:
    """Ten-second link outage with the heaters under manual authority
    beforehand, so the loss-forced fallback to autonomous is observable."""
    return {"actions": [
        {"t_s": 2.0, "tc": {"id": "SetAuthority", "args": {"authority": "Manual"}}},
        {"t_s": drop_t_s, "action": "drop"},
        {"t_s": reconnect_t_s, "action": "reconnect"},
    ]}
