import { describe, expect, it } from "vitest";

import {
  Frame,
  FrameDecoder,
  FrameType,
  encodeFrame,
  jsonFrame,
  jsonPayload,
} from "../shared/frames.js";

const hex = (b: Uint8Array) => Buffer.from(b).toString("hex");
const unhex = (s: string) => new Uint8Array(Buffer.from(s, "hex"));

// Golden bytes produced by the onboard encoder: both ends must agree bit-exactly.
const GOLDEN_HEARTBEAT = "5ca701060000000100000000000000000000a1a7d1f6";
const GOLDEN_TC_PING =
  "5ca701030000000700000000000005dc00177b226964223a2250696e67222c2261726773223a7b7d7d8c9077a3";
const GOLDEN_HK =
  "5ca701020000000300000000000007d000117b226d6f6465223a22466c6f617431227d80efd7e3";

describe("frame codec", () => {
  it("matches the onboard encoder byte for byte", () => {
    expect(hex(encodeFrame({ type: FrameType.HEARTBEAT, seq: 1, timestampMs: 0, payload: new Uint8Array(0) })))
      .toBe(GOLDEN_HEARTBEAT);
    expect(hex(encodeFrame(jsonFrame(FrameType.TC, 7, 1500, { id: "Ping", args: {} }))))
      .toBe(GOLDEN_TC_PING);
  });

  it("decodes onboard-encoded frames", () => {
    const dec = new FrameDecoder();
    const frames = dec.feed(unhex(GOLDEN_HK));
    expect(frames).toHaveLength(1);
    expect(frames[0].type).toBe(FrameType.TM_HK);
    expect(frames[0].seq).toBe(3);
    expect(frames[0].timestampMs).toBe(2000);
    expect(jsonPayload(frames[0])).toEqual({ mode: "Float1" });
  });

  it("round-trips arbitrary frames", () => {
    const frame: Frame = jsonFrame(FrameType.EVENT, 0xdeadbeef, 123456789, {
      kind: "LinkLost",
      t: [1, 2, 3],
    });
    const dec = new FrameDecoder();
    const [back] = dec.feed(encodeFrame(frame));
    expect(back.seq).toBe(0xdeadbeef);
    expect(jsonPayload(back)).toEqual(jsonPayload(frame));
  });

  it("rejects any single-bit corruption of the protected region", () => {
    const data = encodeFrame(jsonFrame(FrameType.TC_ACK, 9, 42, { ack_seq: 1 }));
    for (let i = 2; i < data.length - 4; i++) {
      const corrupted = new Uint8Array(data);
      corrupted[i] ^= 0x10;
      const dec = new FrameDecoder();
      expect(dec.feed(corrupted)).toHaveLength(0);
    }
  });

  it("resynchronizes after garbage and counts skipped bytes", () => {
    const dec = new FrameDecoder();
    const good = encodeFrame({ type: FrameType.HEARTBEAT, seq: 2, timestampMs: 5, payload: new Uint8Array(0) });
    const frames = dec.feed(new Uint8Array([...Buffer.from("noise!"), ...good]));
    expect(frames).toHaveLength(1);
    expect(dec.resyncBytes).toBe(6);
  });

  it("handles partial feeds", () => {
    const data = encodeFrame(jsonFrame(FrameType.TM_SC, 4, 99, { t_ms: 99 }));
    const dec = new FrameDecoder();
    const out: Frame[] = [];
    for (let i = 0; i < data.length; i += 5) {
      out.push(...dec.feed(data.subarray(i, i + 5)));
    }
    expect(out).toHaveLength(1);
    expect(out[0].seq).toBe(4);
  });
});
