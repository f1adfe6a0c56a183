// Wire framing for the gondola link, mirrored bit-exactly from the onboard side:
// magic 5C A7, version 01, type, seq u32 BE, timestamp u64 BE (ms), length u16 BE,
// JSON payload, CRC-32 (IEEE) over version..payload.

export const MAGIC0 = 0x5c;
export const MAGIC1 = 0xa7;
export const VERSION = 0x01;
export const HEADER_LEN = 18;
export const CRC_LEN = 4;
export const MAX_PAYLOAD = 16384;

export enum FrameType {
  TM_SC = 0x01,
  TM_HK = 0x02,
  TC = 0x03,
  TC_ACK = 0x04,
  EVENT = 0x05,
  HEARTBEAT = 0x06,
}

export interface Frame {
  type: FrameType;
  seq: number;
  timestampMs: number;
  payload: Uint8Array;
}

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

export function crc32(data: Uint8Array): number {
  let crc = 0xffffffff;
  for (let i = 0; i < data.length; i++) {
    crc = CRC_TABLE[(crc ^ data[i]) & 0xff] ^ (crc >>> 8);
  }
  return (crc ^ 0xffffffff) >>> 0;
}

export function encodeFrame(frame: Frame): Uint8Array {
  if (frame.payload.length > MAX_PAYLOAD) {
    throw new Error(`payload of ${frame.payload.length} bytes exceeds ${MAX_PAYLOAD}`);
  }
  const total = HEADER_LEN + frame.payload.length + CRC_LEN;
  const out = new Uint8Array(total);
  const view = new DataView(out.buffer);
  out[0] = MAGIC0;
  out[1] = MAGIC1;
  out[2] = VERSION;
  out[3] = frame.type;
  view.setUint32(4, frame.seq >>> 0, false);
  view.setBigUint64(8, BigInt(Math.round(frame.timestampMs)), false);
  view.setUint16(16, frame.payload.length, false);
  out.set(frame.payload, HEADER_LEN);
  const crc = crc32(out.subarray(2, total - CRC_LEN));
  view.setUint32(total - CRC_LEN, crc, false);
  return out;
}

export function jsonFrame(type: FrameType, seq: number, timestampMs: number, obj: unknown): Frame {
  const payload =
    obj === null || obj === undefined
      ? new Uint8Array(0)
      : new TextEncoder().encode(JSON.stringify(obj));
  return { type, seq, timestampMs, payload };
}

export function jsonPayload(frame: Frame): unknown {
  if (frame.payload.length === 0) return null;
  return JSON.parse(new TextDecoder().decode(frame.payload));
}

/** Incremental decoder: partial reads accumulate, garbage is skipped until
 *  the next magic, bad CRCs/versions are dropped and counted. */
export class FrameDecoder {
  private buf = new Uint8Array(0);
  resyncBytes = 0;
  crcDropped = 0;
  versionDropped = 0;

  feed(data: Uint8Array): Frame[] {
    const merged = new Uint8Array(this.buf.length + data.length);
    merged.set(this.buf, 0);
    merged.set(data, this.buf.length);
    this.buf = merged;
    return this.scan();
  }

  private scan(): Frame[] {
    const frames: Frame[] = [];
    for (;;) {
      const idx = this.findMagic();
      if (idx < 0) {
        const keep = this.buf.length > 0 && this.buf[this.buf.length - 1] === MAGIC0 ? 1 : 0;
        this.resyncBytes += this.buf.length - keep;
        this.buf = this.buf.subarray(this.buf.length - keep);
        return frames;
      }
      if (idx > 0) {
        this.resyncBytes += idx;
        this.buf = this.buf.subarray(idx);
      }
      if (this.buf.length < HEADER_LEN) return frames;
      const view = new DataView(this.buf.buffer, this.buf.byteOffset, this.buf.byteLength);
      const plen = view.getUint16(16, false);
      if (plen > MAX_PAYLOAD) {
        this.resyncBytes += 2;
        this.buf = this.buf.subarray(2);
        continue;
      }
      const total = HEADER_LEN + plen + CRC_LEN;
      if (this.buf.length < total) return frames;
      const declared = view.getUint32(total - CRC_LEN, false);
      const computed = crc32(this.buf.subarray(2, total - CRC_LEN));
      if (declared !== computed) {
        this.crcDropped += 1;
        this.resyncBytes += 2;
        this.buf = this.buf.subarray(2);
        continue;
      }
      const version = this.buf[2];
      const type = this.buf[3];
      if (version !== VERSION) {
        this.versionDropped += 1;
        this.buf = this.buf.subarray(total);
        continue;
      }
      frames.push({
        type: type as FrameType,
        seq: view.getUint32(4, false),
        timestampMs: Number(view.getBigUint64(8, false)),
        payload: this.buf.slice(HEADER_LEN, HEADER_LEN + plen),
      });
      this.buf = this.buf.subarray(total);
    }
  }

  private findMagic(): number {
    for (let i = 0; i + 1 < this.buf.length; i++) {
      if (this.buf[i] === MAGIC0 && this.buf[i + 1] === MAGIC1) return i;
    }
    return -1;
  }
}
