"""Mode automaton, task-set validation and config loading."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratobc.domain import (
    MissionConfig,
    Stimulus,
    TaskKind,
    TaskSpec,
    compute_ceilings,
    flight_task_specs,
    load_config,
    mode_transition,
    tvac_config,
    validate_task_set,
)
from stratobc.domain.config import ConfigError, dump_config
from stratobc.domain.tasks import ALL_PROTECTED_OBJECTS, TaskSetError
from stratobc.domain.types import (
    Event,
    EventKind,
    MODE_CHAIN,
    OperatingMode,
    TcId,
    Telecommand,
)

CFG = MissionConfig()


def tc_set_mode(target: OperatingMode, seq: int = 1) -> Telecommand:
    return Telecommand(TcId.SET_MODE, seq, {"mode": target.value})


class TestModeTransition:
    def test_float1_entry_at_threshold_pressure(self):
        r = mode_transition(OperatingMode.ASCENT2, Stimulus(pressure_mbar=21.4), CFG)
        assert r.mode is OperatingMode.FLOAT1 and r.changed

    def test_prelaunch_holds_at_ground_pressure(self):
        r = mode_transition(OperatingMode.PRE_LAUNCH, Stimulus(pressure_mbar=954.0), CFG)
        assert r.mode is OperatingMode.PRE_LAUNCH and not r.changed

    def test_float2_on_elapsed_delta(self):
        cfg = tvac_config()
        assert cfg.float2_delta_s == 1200.0
        r = mode_transition(
            OperatingMode.FLOAT1,
            Stimulus(pressure_mbar=20.0, elapsed_in_mode_s=1200.0),
            cfg,
        )
        assert r.mode is OperatingMode.FLOAT2

    def test_cutoff_event_forces_descent(self):
        ev = Event(EventKind.CUTOFF_DETECTED, t_ms=0.0)
        r = mode_transition(OperatingMode.FLOAT2, Stimulus(event=ev), CFG)
        assert r.mode is OperatingMode.DESCENT and r.changed

    def test_ascent_chain_thresholds(self):
        assert mode_transition(OperatingMode.PRE_LAUNCH, Stimulus(pressure_mbar=899.9), CFG).mode \
            is OperatingMode.ASCENT1
        assert mode_transition(OperatingMode.ASCENT1, Stimulus(pressure_mbar=299.0), CFG).mode \
            is OperatingMode.ASCENT2
        assert mode_transition(OperatingMode.DESCENT, Stimulus(pressure_mbar=910.0), CFG).mode \
            is OperatingMode.SHUTDOWN

    def test_tc_forward_jump_allowed(self):
        r = mode_transition(OperatingMode.PRE_LAUNCH, Stimulus(tc=tc_set_mode(OperatingMode.FLOAT2)), CFG)
        assert r.mode is OperatingMode.FLOAT2 and r.changed and not r.tc_rejected

    def test_tc_backward_rejected_keeps_mode(self):
        r = mode_transition(OperatingMode.DESCENT, Stimulus(tc=tc_set_mode(OperatingMode.ASCENT1)), CFG)
        assert r.mode is OperatingMode.DESCENT and r.tc_rejected and not r.changed

    def test_tc_precedence_over_environment(self):
        # pressure says Ascent1 but the TC forces Float1
        stim = Stimulus(pressure_mbar=500.0, tc=tc_set_mode(OperatingMode.FLOAT1))
        r = mode_transition(OperatingMode.PRE_LAUNCH, stim, CFG)
        assert r.mode is OperatingMode.FLOAT1

    def test_shutdown_absorbing(self):
        for stim in (Stimulus(pressure_mbar=10.0),
                     Stimulus(tc=tc_set_mode(OperatingMode.ASCENT1)),
                     Stimulus(event=Event(EventKind.CUTOFF_DETECTED, 0.0))):
            r = mode_transition(OperatingMode.SHUTDOWN, stim, CFG)
            assert r.mode is OperatingMode.SHUTDOWN and not r.changed

    def test_rate_cutoff_only_in_float(self):
        stim = Stimulus(pressure_mbar=500.0, pressure_rate_mbar_s=2.0)
        assert mode_transition(OperatingMode.ASCENT1, stim, CFG).mode is OperatingMode.ASCENT1
        assert mode_transition(OperatingMode.FLOAT1, stim, CFG).mode is OperatingMode.DESCENT

    def test_negative_pressure_rejected(self):
        with pytest.raises(ValueError):
            mode_transition(OperatingMode.PRE_LAUNCH, Stimulus(pressure_mbar=-1.0), CFG)


_stimuli = st.builds(
    Stimulus,
    pressure_mbar=st.one_of(st.none(), st.floats(0, 2000, allow_nan=False)),
    pressure_rate_mbar_s=st.floats(-10, 10, allow_nan=False),
    elapsed_in_mode_s=st.floats(0, 1e6, allow_nan=False),
    event=st.one_of(st.none(), st.builds(
        Event, kind=st.sampled_from(list(EventKind)), t_ms=st.just(0.0),
        payload=st.just({}))),
    tc=st.one_of(st.none(), st.builds(
        Telecommand, id=st.just(TcId.SET_MODE), seq=st.just(1),
        args=st.fixed_dictionaries(
            {"mode": st.sampled_from([m.value for m in MODE_CHAIN] + ["bogus"])}))),
)


class TestModeProperties:
    @settings(max_examples=300, deadline=None)
    @given(mode=st.sampled_from(list(OperatingMode)), stim=_stimuli)
    def test_total_and_never_backward(self, mode, stim):
        r = mode_transition(mode, stim, CFG)
        assert r.mode.rank >= mode.rank  # chain only moves forward

    @settings(max_examples=100, deadline=None)
    @given(stims=st.lists(_stimuli, max_size=40))
    def test_visited_sequence_is_chain_subsequence(self, stims):
        mode = OperatingMode.PRE_LAUNCH
        visited = [mode]
        for stim in stims:
            mode = mode_transition(mode, stim, CFG).mode
            if mode is not visited[-1]:
                visited.append(mode)
        ranks = [m.rank for m in visited]
        assert ranks == sorted(ranks)
        assert len(set(ranks)) == len(ranks)


class TestCeilings:
    def test_dp_nads_ceiling_is_imu_priority(self):
        ceilings = compute_ceilings(flight_task_specs(), ALL_PROTECTED_OBJECTS)
        assert ceilings["DP-NADS"] == 6

    def test_event_queue_ceiling(self):
        ceilings = compute_ceilings(flight_task_specs(), ALL_PROTECTED_OBJECTS)
        assert ceilings["Event-Queue"] == 3

    def test_single_task_single_object(self):
        spec = TaskSpec("only", TaskKind.CYCLIC, 100, 100, 4, ("DP-NADS",))
        assert compute_ceilings([spec]) == {"DP-NADS": 4}

    def test_permutation_invariant(self):
        specs = list(flight_task_specs())
        forward = compute_ceilings(specs)
        assert compute_ceilings(list(reversed(specs))) == forward

    def test_orphan_object_rejected(self):
        spec = TaskSpec("bad", TaskKind.CYCLIC, 100, 100, 1, ("No-Such-Cell",))
        with pytest.raises(TaskSetError, match="No-Such-Cell"):
            compute_ceilings([spec], known_objects=ALL_PROTECTED_OBJECTS)


class TestValidateTaskSet:
    def test_shipped_set_two_warnings_no_errors(self):
        report = validate_task_set(flight_task_specs())
        assert report.errors == []
        assert len(report.warnings) == 2
        joined = " | ".join(report.warnings)
        assert "HTL Manager" in joined
        sdpu_warning = next(w for w in report.warnings if w.startswith("SDPU Measurer"))
        assert "TM Sender" in sdpu_warning and "TC Receiver" in sdpu_warning

    def test_single_task_clean(self):
        report = validate_task_set([TaskSpec("t", TaskKind.CYCLIC, 100, 100, 1)])
        assert report.warnings == [] and report.errors == []

    def test_deadline_beyond_period_is_error(self):
        report = validate_task_set([TaskSpec("t", TaskKind.CYCLIC, 1000, 2000, 1)])
        assert any("deadline" in e for e in report.errors)

    def test_duplicate_names_error(self):
        specs = [TaskSpec("t", TaskKind.CYCLIC, 100, 100, 1),
                 TaskSpec("t", TaskKind.CYCLIC, 200, 200, 2)]
        assert any("duplicate" in e for e in validate_task_set(specs).errors)

    def test_shipped_priorities_in_range(self):
        assert all(1 <= s.priority <= 6 for s in flight_task_specs())

    def test_shipped_deadlines_within_periods(self):
        assert all(s.deadline_ms <= s.period_or_miat_ms for s in flight_task_specs())


class TestConfig:
    def test_defaults_valid(self):
        cfg = MissionConfig()
        assert cfg.ascent1_mbar > cfg.ascent2_mbar > cfg.float1_mbar > 0

    def test_threshold_order_enforced(self):
        with pytest.raises(ConfigError):
            MissionConfig(ascent1_mbar=100.0, ascent2_mbar=300.0)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            load_config({"ascent1_mbar": 900.0, "no_such_key": 1})

    def test_nested_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="heater"):
            load_config({"heater": {"bogus": 1}})

    def test_roundtrip_through_json(self):
        cfg = tvac_config()
        text = json.dumps(dump_config(cfg))
        loaded = load_config(json.loads(text))
        assert loaded == cfg

    def test_tvac_preset_values(self):
        cfg = tvac_config()
        assert cfg.float2_delta_s == 1200.0
        assert cfg.time_scale == 60.0

    def test_flight_float2_delta_is_six_hours(self):
        assert MissionConfig().float2_delta_s == 21600.0

    def test_duty_caps_differ_between_float_stages(self):
        heater = MissionConfig().heater
        assert heater.duty_cap(OperatingMode.FLOAT1) == 60.0
        assert heater.duty_cap(OperatingMode.FLOAT2) == 100.0
        assert heater.duty_cap(OperatingMode.DESCENT) == 0.0
