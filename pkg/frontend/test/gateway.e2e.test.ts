// End-to-end console test against a live onboard system (separate python
// process, real TCP). Covers the operator flow: connect, watch housekeeping,
// force a mode, see the ack and the mode chip flip within one HK period,
// then lose the link and see the banner condition within the timeout.

import { ChildProcess, spawn } from "node:child_process";
import * as readline from "node:readline";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Gateway } from "../src/gateway.js";
import { tcEnabled } from "../shared/store.js";

const TIME_SCALE = 5; // sim seconds per wall second: one 10 s HK period = 2 s wall

let obsw: ChildProcess | null = null;
let gateway: Gateway | null = null;

async function spawnObsw(): Promise<{ host: string; port: number }> {
  obsw = spawn(
    "python3",
    ["-m", "stratobc.cli", "serve", "--listen", "127.0.0.1:0",
     "--time-scale", String(TIME_SCALE), "--duration", "3600"],
    { stdio: ["ignore", "pipe", "inherit"] },
  );
  const rl = readline.createInterface({ input: obsw.stdout! });
  for await (const line of rl) {
    const msg = JSON.parse(line);
    if (msg.listening) {
      const [host, port] = msg.listening.split(":");
      return { host, port: Number(port) };
    }
  }
  throw new Error("onboard process never reported its address");
}

async function until<T>(fn: () => T | undefined, timeoutMs: number, what: string): Promise<T> {
  const t0 = Date.now();
  for (;;) {
    const value = fn();
    if (value !== undefined) return value;
    if (Date.now() - t0 > timeoutMs) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 50));
  }
}

describe("console end-to-end", () => {
  beforeAll(async () => {
    const { host, port } = await spawnObsw();
    gateway = new Gateway({ obswHost: host, obswPort: port, listenPort: 0 });
    await gateway.start();
  }, 30_000);

  afterAll(() => {
    gateway?.close();
    obsw?.kill("SIGKILL");
  });

  it("populates housekeeping and accepts a forced mode within one HK period", async () => {
    const gw = gateway!;
    await until(() => (gw.state.link === "connected" ? true : undefined), 10_000, "link up");
    // first HK lands within one HK period (10 sim s at scale 5 = 2 s wall)
    await until(() => (gw.state.mode.value !== "-" ? true : undefined), 4_000, "first HK");
    expect(gw.state.mode.value).toBe("PreLaunch");
    expect(tcEnabled(gw.state)).toBe(true);

    const seq = gw.sendTc("SetMode", { mode: "Float1" });
    expect(seq).not.toBeNull();
    const ack = await until(
      () => gw.state.acks.find((a) => a.seq === seq && a.status !== "pending"),
      5_000,
      "tc ack",
    );
    expect(ack.status).toBe("accepted");
    // the mode chip (and with it the plot band color) flips on the next HK
    await until(() => (gw.state.mode.value === "Float1" ? true : undefined),
      4_000, "mode chip update");
    expect(gw.state.pressure.length).toBeGreaterThan(0);
  }, 30_000);

  it("declares the link lost within the heartbeat timeout when the onboard side dies", async () => {
    const gw = gateway!;
    obsw!.kill("SIGKILL");
    const t0 = Date.now();
    await until(() => (gw.state.link === "lost" ? true : undefined), 6_000, "link lost");
    expect(Date.now() - t0).toBeLessThan(4_000);
    expect(tcEnabled(gw.state)).toBe(false);
  }, 15_000);
});
