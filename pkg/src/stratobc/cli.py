"""Command-line front end: scenario runs, profile dumps and verification."""

from __future__ import annotations

import json
from pathlib import Path

import click

from stratobc.envsim import make_flight_profile, make_tvac_profile
from stratobc.verify.report import acceptance_report
from stratobc.verify.stats import drift_stats_from_csv, mse as mse_fn


@click.group()
def main() -> None:
    """Stratospheric-balloon onboard software simulator."""


@main.command()
@click.option("--scenario", type=click.Choice(["tvac", "nominal-det", "nominal-threaded",
                                               "linkdrop"]), default="tvac")
@click.option("--record", "record_dir", type=click.Path(), required=True)
@click.option("--duration", "duration_s", type=float, default=None,
              help="simulated seconds (default: scenario-specific)")
@click.option("--time-scale", "time_scale", type=float, default=None)
def run(scenario: str, record_dir: str, duration_s: float | None,
        time_scale: float | None) -> None:
    """Run a canned scenario and record its artifacts."""
    from stratobc import scenarios

    if scenario == "tvac":
        out = scenarios.run_tvac_replay(record_dir, time_scale=time_scale or 60.0,
                                        duration_s=duration_s)
    elif scenario == "nominal-det":
        out = scenarios.run_deterministic_nominal(record_dir,
                                                  duration_s=duration_s or 60.0)
    elif scenario == "nominal-threaded":
        out = scenarios.run_threaded_system(
            record_dir, duration_s=duration_s or 60.0,
            time_scale=time_scale or 1.0,
            gs_script_obj=scenarios.nominal_gs_script(),
        )
    else:
        out = scenarios.run_threaded_system(
            record_dir, duration_s=duration_s or 35.0,
            time_scale=time_scale or 1.0,
            gs_script_obj=scenarios.linkdrop_gs_script(),
            scenario_name="linkdrop",
        )
    click.echo(json.dumps(out["stats"], indent=2, sort_keys=True))


@main.command()
@click.option("--listen", default="127.0.0.1:0", help="host:port for the ground link")
@click.option("--time-scale", "time_scale", type=float, default=1.0)
@click.option("--duration", "duration_s", type=float, default=600.0,
              help="simulated seconds to run")
@click.option("--profile", "profile_kind", type=click.Choice(["flight", "tvac"]),
              default="flight")
def serve(listen: str, time_scale: float, duration_s: float, profile_kind: str) -> None:
    """Run the onboard system live with its TM/TC listener, for operator
    consoles. Prints one JSON line with the bound address, then runs."""
    import dataclasses

    from stratobc.domain.config import flight_config, tvac_config
    from stratobc.envsim import make_flight_profile, make_tvac_profile
    from stratobc.executor import ExecMode
    from stratobc.system import build_system

    host, _, port = listen.partition(":")
    if profile_kind == "tvac":
        cfg = tvac_config(time_scale=time_scale)
        prof = make_tvac_profile(hold_s=1500.0, ramp_up=True)
    else:
        cfg = flight_config(time_scale=time_scale)
        prof = make_flight_profile()
    cfg = dataclasses.replace(
        cfg, gs=dataclasses.replace(cfg.gs, listen_host=host, listen_port=int(port or 0)))
    system = build_system(cfg, prof, ExecMode.THREADED, value_logs=False)
    transport = system.ttc_link.transport
    click.echo(json.dumps({"listening": f"{transport.host}:{transport.port}"}), nl=True)
    import sys

    sys.stdout.flush()
    artifacts = system.run(duration_s)
    click.echo(json.dumps({"stopped": artifacts.stop_reason,
                           "activations": artifacts.total_activations}))


@main.group()
def profile() -> None:
    """Environment profile tooling."""


@profile.command("dump")
@click.option("--kind", type=click.Choice(["tvac", "flight"]), default="tvac")
@click.option("--hold", "hold_s", type=float, default=0.0)
@click.option("--ramp-up/--no-ramp-up", default=False)
@click.option("--out", "out_path", type=click.Path(), default=None)
def profile_dump(kind: str, hold_s: float, ramp_up: bool, out_path: str | None) -> None:
    """Write a profile as CSV for plotting."""
    p = (make_tvac_profile(hold_s=hold_s, ramp_up=ramp_up) if kind == "tvac"
         else make_flight_profile())
    text = p.to_csv(Path(out_path) if out_path else None)
    if out_path is None:
        click.echo(text, nl=False)


@main.group()
def verify() -> None:
    """Run-verification analytics."""


@verify.command("drift")
@click.option("--log", "log_path", type=click.Path(exists=True), required=True,
              help="activation log CSV (n,theoretical_ms,actual_ms,drift_ms,deadline_met)")
@click.option("--period", "period_s", type=float, required=True, help="record period, seconds")
def verify_drift(log_path: str, period_s: float) -> None:
    s = drift_stats_from_csv(Path(log_path), period_s)
    click.echo(json.dumps({"task": s.task, "n": s.n, "avg_drift_s": s.avg_drift_s,
                           "max_drift_s": s.max_drift_s}, indent=2))


@verify.command("mse")
@click.option("--fixture", "fixture_path", type=click.Path(exists=True), required=True,
              help="theoretical voltages CSV (mux,channel,volts)")
@click.option("--measured", "measured_path", type=click.Path(exists=True), required=True,
              help="measured voltages CSV (mux,channel,volts)")
def verify_mse(fixture_path: str, measured_path: str) -> None:
    import csv

    def load(path: str) -> dict[tuple[int, int], float]:
        with open(path) as f:
            return {(int(r["mux"]), int(r["channel"])): float(r["volts"])
                    for r in csv.DictReader(f)}

    theoretical = load(fixture_path)
    measured = load(measured_path)
    common = sorted(set(theoretical) & set(measured))
    if not common:
        raise click.ClickException("no common (mux,channel) pairs between the files")
    pairs = [(theoretical[k], measured[k]) for k in common]
    click.echo(json.dumps({"pairs": len(pairs), "mse": mse_fn(pairs)}, indent=2))


@verify.command("report")
@click.option("--run", "run_root", type=click.Path(), required=True,
              help="root directory holding tvac/, threaded60/, linkdrop/ runs")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="write the machine-readable verdict JSON here")
def verify_report(run_root: str, out_path: str | None) -> None:
    report = acceptance_report(run_root)
    click.echo(report.format_table())
    if out_path is not None:
        report.write(Path(out_path))
    if not report.all_pass:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
