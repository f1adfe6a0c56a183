// Browser console: subscribes to the gateway's event stream, folds events
// through the shared reducer, renders. No mission state is ever mutated from
// here except by POSTing telecommands.

import {
  GatewayEvent,
  SessionView,
  initialView,
  modeColor,
  reduce,
  tcEnabled,
} from "../shared/store.js";

let view: SessionView = initialView();

const $ = (id: string) => document.getElementById(id)!;

// -- tabs --------------------------------------------------------------------

document.querySelectorAll("nav button").forEach((btn) => {
  btn.addEventListener("click", () => {
    document.querySelectorAll("nav button").forEach((b) => b.classList.remove("active"));
    document.querySelectorAll("section.tab").forEach((s) => s.classList.remove("active"));
    btn.classList.add("active");
    $(`tab-${(btn as HTMLElement).dataset.tab}`).classList.add("active");
    render();
  });
});

// -- event stream -------------------------------------------------------------

const source = new EventSource("/events");
source.onmessage = (msg) => {
  const evt = JSON.parse(msg.data);
  if (evt.kind === "snapshot") {
    view = evt.view as SessionView;
  } else {
    view = reduce(view, evt as GatewayEvent);
  }
  render();
};

// -- telecommand console --------------------------------------------------------

$("tc-form").addEventListener("submit", async (e) => {
  e.preventDefault();
  const id = ($("tc-id") as HTMLSelectElement).value;
  let args: unknown;
  try {
    args = JSON.parse(($("tc-args") as HTMLInputElement).value || "{}");
  } catch {
    alert("arguments must be valid JSON");
    return;
  }
  // client-side validation mirrors the onboard checks for quick feedback
  if (id === "SetHeater") {
    const duties = (args as any)?.duties_pct;
    if (duties && duties.some((d: number) => d < 0 || d > 100)) {
      alert("heater duties must be within 0..100 %");
      return;
    }
  }
  await fetch("/tc", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ id, args }),
  });
});

// -- rendering -------------------------------------------------------------------

function fmt(v: unknown): string {
  if (typeof v === "number") return v.toFixed(3);
  if (Array.isArray(v)) return v.map(fmt).join(", ");
  return String(v);
}

function rows(table: HTMLElement, entries: [string, unknown, number | null][]): void {
  table.innerHTML = entries
    .map(
      ([k, v, t]) =>
        `<tr><th>${k}</th><td>${fmt(v)}</td>` +
        `<td class="muted">${t === null ? "" : `t=${(t / 1000).toFixed(1)}s`}</td></tr>`,
    )
    .join("");
}

function render(): void {
  const chip = $("mode-chip");
  chip.textContent = view.mode.value;
  chip.style.background = modeColor(view.mode.value);
  $("link").textContent =
    view.link === "connected" ? "link up" : view.link === "lost" ? "LINK LOST" : "connecting…";
  $("banner").classList.toggle("show", view.link === "lost");
  $("bw").textContent = `down ${view.downlinkKbps.toFixed(2)} kbps · up ${view.uplinkKbps.toFixed(2)} kbps`;
  ($("tc-send") as HTMLButtonElement).disabled = !tcEnabled(view);

  const pcu = (view.pcu?.value as any)?.value ?? {};
  rows($("hk-table"), [
    ["mode", view.mode.value, view.mode.tMs],
    ["authority", view.authority.value, view.authority.tMs],
    ["bus voltage (V)", pcu.voltage_v ?? "-", view.pcu?.tMs ?? null],
    ["current (A)", pcu.current_a ?? "-", view.pcu?.tMs ?? null],
    ["power (W)", pcu.power_w ?? "-", view.pcu?.tMs ?? null],
    ["board temp (degC)", pcu.board_temp_c ?? "-", view.pcu?.tMs ?? null],
    ["reconnects", view.reconnects, null],
    ["frames", view.frameCount, null],
  ]);

  const htl = (view.htl?.value as any)?.value ?? {};
  rows($("htl-table"), [
    ["setpoint (degC)", htl.setpoint_c ?? "-", view.htl?.tMs ?? null],
    ["duties (%)", htl.heater_duties_pct ?? "-", view.htl?.tMs ?? null],
    ["plate temps (degC)", (htl.plate_temps_c ?? []).slice(0, 7), view.htl?.tMs ?? null],
    ["authority", htl.authority ?? "-", view.htl?.tMs ?? null],
  ]);

  const nads = (view.nads?.value as any)?.value ?? {};
  rows($("nads-table"), [
    ["accel (m/s2)", nads.accel_ms2 ?? "-", view.nads?.tMs ?? null],
    ["gyro (deg/s)", nads.gyro_dps ?? "-", view.nads?.tMs ?? null],
    ["mag (uT)", nads.mag_ut ?? "-", view.nads?.tMs ?? null],
    ["fix", nads.fix ? `${nads.fix.lat_deg}, ${nads.fix.lon_deg}` : "-", view.nads?.tMs ?? null],
  ]);

  $("acks").innerHTML = view.acks
    .slice()
    .reverse()
    .map(
      (a) =>
        `<li class="${a.status === "accepted" ? "ok" : a.status === "rejected" ? "bad" : "pend"}">` +
        `#${a.seq} ${a.id}: ${a.status}${a.reason ? ` (${a.reason})` : ""}</li>`,
    )
    .join("");

  drawPlot();
}

function drawPlot(): void {
  const canvas = $("plot") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (!ctx || view.pressure.length < 2) return;
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const pts = view.pressure;
  const t0 = pts[0].tMs;
  const t1 = pts[pts.length - 1].tMs;
  const pMax = Math.max(...pts.map((p) => p.mbar)) * 1.05 + 1;
  const x = (t: number) => ((t - t0) / Math.max(t1 - t0, 1)) * (w - 50) + 40;
  const y = (p: number) => h - 20 - (p / pMax) * (h - 40);

  // mode-colored bands under the trace
  for (let i = 0; i < pts.length - 1; i++) {
    ctx.fillStyle = modeColor(pts[i].mode) + "33";
    ctx.fillRect(x(pts[i].tMs), 10, Math.max(x(pts[i + 1].tMs) - x(pts[i].tMs), 1), h - 30);
  }
  ctx.strokeStyle = "#9ecbff";
  ctx.lineWidth = 1.6;
  ctx.beginPath();
  pts.forEach((p, i) => (i === 0 ? ctx.moveTo(x(p.tMs), y(p.mbar)) : ctx.lineTo(x(p.tMs), y(p.mbar))));
  ctx.stroke();
  ctx.fillStyle = "#8a93a1";
  ctx.font = "11px system-ui";
  ctx.fillText(`${pts[pts.length - 1].mbar.toFixed(1)} mbar`, w - 110, y(pts[pts.length - 1].mbar) - 6);
  ctx.fillText("0", 28, h - 18);
  ctx.fillText(pMax.toFixed(0), 8, 18);
}

render();
