// Session view state and its reducer. Pure functions so the console logic is
// testable without a browser: the UI and the gateway both replay GatewayEvents
// through reduce().

export type LinkStatus = "connecting" | "connected" | "lost";

export interface TimedValue<T> {
  value: T;
  tMs: number; // telemetry timestamp: every displayed number carries one
}

export interface PressurePoint {
  tMs: number;
  mbar: number;
  mode: string; // colors the plot band this point belongs to
}

export interface PendingAck {
  seq: number;
  id: string;
  sentAtMs: number;
  status: "pending" | "accepted" | "rejected";
  reason: string;
}

export interface SessionView {
  link: LinkStatus;
  mode: TimedValue<string>;
  authority: TimedValue<string>;
  pressure: PressurePoint[];
  htl: TimedValue<Record<string, unknown>> | null;
  nads: TimedValue<Record<string, unknown>> | null;
  pcu: TimedValue<Record<string, unknown>> | null;
  atl: TimedValue<Record<string, unknown>> | null;
  acks: PendingAck[];
  downlinkKbps: number;
  uplinkKbps: number;
  reconnects: number;
  lastFrameAtMs: number | null;
  frameCount: number;
}

export const MODE_COLORS: Record<string, string> = {
  PreLaunch: "#8a8f98",
  Ascent1: "#d9534f",
  Ascent2: "#5cb85c",
  Float1: "#4a90d9",
  Float2: "#d9534f",
  Descent: "#f0ad4e",
  Shutdown: "#222222",
};

export const PRESSURE_POINTS_MAX = 3600;

export function initialView(): SessionView {
  return {
    link: "connecting",
    mode: { value: "-", tMs: 0 },
    authority: { value: "-", tMs: 0 },
    pressure: [],
    htl: null,
    nads: null,
    pcu: null,
    atl: null,
    acks: [],
    downlinkKbps: 0,
    uplinkKbps: 0,
    reconnects: 0,
    lastFrameAtMs: null,
    frameCount: 0,
  };
}

export interface FrameEvent {
  kind: "frame";
  frameType: string; // "TM_SC" | "TM_HK" | "TC_ACK" | "EVENT" | "HEARTBEAT"
  seq: number;
  timestampMs: number;
  payload: unknown;
}

export interface LinkEvent {
  kind: "link";
  status: LinkStatus;
}

export interface TcSentEvent {
  kind: "tc-sent";
  seq: number;
  id: string;
  tMs: number;
}

export type GatewayEvent = FrameEvent | LinkEvent | TcSentEvent;

/** Telecommand entry is only allowed while the link is up. */
export function tcEnabled(view: SessionView): boolean {
  return view.link === "connected";
}

export function modeColor(mode: string): string {
  return MODE_COLORS[mode] ?? "#666666";
}

export function reduce(view: SessionView, evt: GatewayEvent): SessionView {
  switch (evt.kind) {
    case "link":
      return { ...view, link: evt.status };
    case "tc-sent":
      return {
        ...view,
        acks: [
          ...view.acks.slice(-49),
          { seq: evt.seq, id: evt.id, sentAtMs: evt.tMs, status: "pending", reason: "" },
        ],
      };
    case "frame":
      return applyFrame(view, evt);
  }
}

function applyFrame(view: SessionView, evt: FrameEvent): SessionView {
  const next: SessionView = {
    ...view,
    lastFrameAtMs: evt.timestampMs,
    frameCount: view.frameCount + 1,
  };
  const payload = (evt.payload ?? {}) as Record<string, any>;
  switch (evt.frameType) {
    case "TM_HK": {
      // the rendered mode is, by construction, the latest HK frame's mode
      next.mode = { value: String(payload.mode), tMs: payload.t_ms };
      next.authority = { value: String(payload.authority), tMs: payload.t_ms };
      next.pcu = payload.pcu ? { value: payload.pcu, tMs: payload.t_ms } : view.pcu;
      next.htl = payload.htl ? { value: payload.htl, tMs: payload.t_ms } : view.htl;
      if (payload.link) {
        next.downlinkKbps = Number(payload.link.downlink_kbps ?? 0);
        next.uplinkKbps = Number(payload.link.uplink_kbps ?? 0);
        next.reconnects = Number(payload.link.reconnects ?? 0);
      }
      return next;
    }
    case "TM_SC": {
      next.nads = payload.nads ? { value: payload.nads, tMs: payload.t_ms } : view.nads;
      next.atl = payload.atl ? { value: payload.atl, tMs: payload.t_ms } : view.atl;
      const pressures: number[] = payload.el?.value?.abs_pressure_mbar ?? [];
      if (pressures.length > 0) {
        const mbar = pressures.reduce((a, b) => a + b, 0) / pressures.length;
        const point: PressurePoint = {
          tMs: payload.t_ms,
          mbar,
          mode: view.mode.value,
        };
        next.pressure = [...view.pressure.slice(-(PRESSURE_POINTS_MAX - 1)), point];
      }
      return next;
    }
    case "TC_ACK": {
      const ackSeq = Number(payload.ack_seq);
      next.acks = view.acks.map((a) =>
        a.seq === ackSeq
          ? { ...a, status: payload.status === "accepted" ? "accepted" : "rejected",
              reason: String(payload.reason ?? "") }
          : a,
      );
      return next;
    }
    default:
      return next;
  }
}
