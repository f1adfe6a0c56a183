"""The mission mode automaton as a pure, total decision function.

PreLaunch -> Ascent1 -> Ascent2 -> Float1 -> Float2 -> Descent -> Shutdown,
with a direct Float1/Float2 -> Descent shortcut on cut-off. Operator
telecommands may force any forward move; backward moves are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

from stratobc.domain.config import MissionConfig
from stratobc.domain.types import Event, EventKind, OperatingMode, TcId, Telecommand

_FLOAT_MODES = (OperatingMode.FLOAT1, OperatingMode.FLOAT2)


@dataclass(frozen=True)
class Stimulus:
    """One evaluation's worth of inputs to the automaton.

    `pressure_mbar` may be None when the caller has no fresh reading (e.g. an
    operator-injected event); pressure-threshold rules then stay idle.
    """

    pressure_mbar: float | None = None
    pressure_rate_mbar_s: float = 0.0
    elapsed_in_mode_s: float = 0.0
    event: Event | None = None
    tc: Telecommand | None = None


@dataclass(frozen=True)
class TransitionResult:
    mode: OperatingMode
    changed: bool
    cause: str | None = None
    tc_rejected: bool = False
    reason: str | None = None


def _no_change(mode: OperatingMode) -> TransitionResult:
    return TransitionResult(mode=mode, changed=False)


def mode_transition(
    current: OperatingMode, stim: Stimulus, cfg: MissionConfig
) -> TransitionResult:
    """Evaluate one step of the mode automaton. Pure: no side effects.

    A forced-mode telecommand takes precedence over environmental triggers;
    an invalid (backward) one is rejected without evaluating the environment,
    since the call answers that command.
    """
    if stim.pressure_mbar is not None and stim.pressure_mbar < 0:
        raise ValueError(f"pressure must be >= 0, got {stim.pressure_mbar}")

    if current is OperatingMode.SHUTDOWN:
        # Absorbing: even a forced TC cannot leave Shutdown.
        if stim.tc is not None and stim.tc.id is TcId.SET_MODE:
            return TransitionResult(
                current, False, tc_rejected=True, reason="Shutdown is absorbing"
            )
        return _no_change(current)

    if stim.tc is not None and stim.tc.id is TcId.SET_MODE:
        return _apply_forced_mode(current, stim.tc)

    ev = stim.event
    if (
        ev is not None
        and ev.kind is EventKind.CUTOFF_DETECTED
        and current in _FLOAT_MODES
    ):
        return TransitionResult(OperatingMode.DESCENT, True, cause="cut-off event")

    return _apply_environment(current, stim, cfg)


def _apply_forced_mode(current: OperatingMode, tc: Telecommand) -> TransitionResult:
    raw = tc.args.get("mode")
    try:
        target = raw if isinstance(raw, OperatingMode) else OperatingMode.from_name(str(raw))
    except ValueError:
        return TransitionResult(
            current, False, tc_rejected=True, reason=f"unknown mode {raw!r}"
        )
    if target is current:
        return TransitionResult(current, False, cause="tc no-op")
    if current.is_forward(target):
        return TransitionResult(target, True, cause="tc forced")
    return TransitionResult(
        current,
        False,
        tc_rejected=True,
        reason=f"backward transition {current.value} -> {target.value} not allowed",
    )


def _apply_environment(
    current: OperatingMode, stim: Stimulus, cfg: MissionConfig
) -> TransitionResult:
    p = stim.pressure_mbar
    if current is OperatingMode.PRE_LAUNCH:
        if p is not None and p < cfg.ascent1_mbar:
            return TransitionResult(OperatingMode.ASCENT1, True, cause="pressure < ascent1")
    elif current is OperatingMode.ASCENT1:
        if p is not None and p < cfg.ascent2_mbar:
            return TransitionResult(OperatingMode.ASCENT2, True, cause="pressure < ascent2")
    elif current is OperatingMode.ASCENT2:
        if p is not None and p <= cfg.float1_mbar:
            return TransitionResult(OperatingMode.FLOAT1, True, cause="pressure <= float1")
    elif current is OperatingMode.FLOAT1:
        if stim.pressure_rate_mbar_s >= cfg.cutoff_rise_mbar_s:
            return TransitionResult(OperatingMode.DESCENT, True, cause="pressure rising")
        if stim.elapsed_in_mode_s >= cfg.float2_delta_s:
            return TransitionResult(OperatingMode.FLOAT2, True, cause="float2 delta elapsed")
    elif current is OperatingMode.FLOAT2:
        if stim.pressure_rate_mbar_s >= cfg.cutoff_rise_mbar_s:
            return TransitionResult(OperatingMode.DESCENT, True, cause="pressure rising")
    elif current is OperatingMode.DESCENT:
        if p is not None and p >= cfg.ascent1_mbar:
            return TransitionResult(OperatingMode.SHUTDOWN, True, cause="ground pressure")
    return _no_change(current)
