import { describe, expect, it } from "vitest";

import {
  GatewayEvent,
  SessionView,
  initialView,
  modeColor,
  reduce,
  tcEnabled,
} from "../shared/store.js";

function hk(mode: string, tMs: number, extra: Record<string, unknown> = {}): GatewayEvent {
  return {
    kind: "frame",
    frameType: "TM_HK",
    seq: 1,
    timestampMs: tMs,
    payload: {
      t_ms: tMs,
      mode,
      authority: "Autonomous",
      link: { downlink_kbps: 4.2, uplink_kbps: 0.2, reconnects: 1 },
      pcu: { t_ms: tMs, value: { voltage_v: 28.0 } },
      htl: { t_ms: tMs, value: { setpoint_c: 20 } },
      ...extra,
    },
  };
}

function sc(tMs: number, pressures: number[]): GatewayEvent {
  return {
    kind: "frame",
    frameType: "TM_SC",
    seq: 2,
    timestampMs: tMs,
    payload: {
      t_ms: tMs,
      nads: { t_ms: tMs, value: { accel_ms2: [0, 0, 9.8] } },
      el: { t_ms: tMs, value: { abs_pressure_mbar: pressures } },
      atl: { t_ms: tMs, value: { photodiode_v: [0.5] } },
    },
  };
}

describe("session view reducer", () => {
  it("renders the latest HK frame's mode, with its TM timestamp", () => {
    let view = initialView();
    view = reduce(view, hk("PreLaunch", 1000));
    view = reduce(view, hk("Float1", 11000));
    expect(view.mode.value).toBe("Float1");
    expect(view.mode.tMs).toBe(11000);
    expect(view.downlinkKbps).toBeCloseTo(4.2);
  });

  it("band color follows the current mode", () => {
    let view = initialView();
    view = reduce(view, hk("Ascent1", 1000));
    view = reduce(view, sc(1500, [900.2, 900.4]));
    expect(view.pressure).toHaveLength(1);
    expect(view.pressure[0].mbar).toBeCloseTo(900.3);
    expect(view.pressure[0].mode).toBe("Ascent1");
    expect(modeColor("Ascent1")).not.toBe(modeColor("Float1"));
  });

  it("tracks tc acks by sequence number", () => {
    let view = initialView();
    view = reduce(view, { kind: "tc-sent", seq: 5, id: "SetMode", tMs: 100 });
    expect(view.acks[0].status).toBe("pending");
    view = reduce(view, {
      kind: "frame",
      frameType: "TC_ACK",
      seq: 9,
      timestampMs: 200,
      payload: { ack_seq: 5, status: "accepted", reason: "tc forced" },
    });
    expect(view.acks[0].status).toBe("accepted");
    expect(view.acks[0].reason).toBe("tc forced");
  });

  it("disables telecommand entry while the link is lost", () => {
    let view = initialView();
    view = reduce(view, { kind: "link", status: "connected" });
    expect(tcEnabled(view)).toBe(true);
    view = reduce(view, { kind: "link", status: "lost" });
    expect(tcEnabled(view)).toBe(false);
  });

  it("keeps the pressure buffer bounded", () => {
    let view = initialView();
    view = reduce(view, hk("Float1", 0));
    for (let i = 0; i < 4000; i++) {
      view = reduce(view, sc(i * 1000, [21.5]));
    }
    expect(view.pressure.length).toBeLessThanOrEqual(3600);
  });

  it("every displayed value carries a telemetry timestamp", () => {
    let view = initialView();
    view = reduce(view, hk("Float1", 7000));
    view = reduce(view, sc(7500, [21.5]));
    expect(view.pcu?.tMs).toBe(7000);
    expect(view.nads?.tMs).toBe(7500);
    expect(view.atl?.tMs).toBe(7500);
  });
});
