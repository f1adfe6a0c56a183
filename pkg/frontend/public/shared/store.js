// Session view state and its reducer. Pure functions so the console logic is
// testable without a browser: the UI and the gateway both replay GatewayEvents
// through reduce().
export const MODE_COLORS = {
    PreLaunch: "#8a8f98",
    Ascent1: "#d9534f",
    Ascent2: "#5cb85c",
    Float1: "#4a90d9",
    Float2: "#d9534f",
    Descent: "#f0ad4e",
    Shutdown: "#222222",
};
export const PRESSURE_POINTS_MAX = 3600;
export function initialView() {
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
/** Telecommand entry is only allowed while the link is up. */
export function tcEnabled(view) {
    return view.link === "connected";
}
export function modeColor(mode) {
    return MODE_COLORS[mode] ?? "#666666";
}
export function reduce(view, evt) {
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
function applyFrame(view, evt) {
    const next = {
        ...view,
        lastFrameAtMs: evt.timestampMs,
        frameCount: view.frameCount + 1,
    };
    const payload = (evt.payload ?? {});
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
            const pressures = payload.el?.value?.abs_pressure_mbar ?? [];
            if (pressures.length > 0) {
                const mbar = pressures.reduce((a, b) => a + b, 0) / pressures.length;
                const point = {
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
            next.acks = view.acks.map((a) => a.seq === ackSeq
                ? { ...a, status: payload.status === "accepted" ? "accepted" : "rejected",
                    reason: String(payload.reason ?? "") }
                : a);
            return next;
        }
        default:
            return next;
    }
}
