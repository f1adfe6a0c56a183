// Gateway between the onboard TCP link and browser clients.
//
// One socket to the onboard listener; frames are decoded here and fanned out
// to any number of browser clients over server-sent events, so the page never
// touches the binary protocol. All state mutations travel the other way as
// telecommand frames built from POST /tc bodies - the UI has no other write
// path into the mission.

import * as http from "node:http";
import * as net from "node:net";
import * as fs from "node:fs";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import {
  Frame,
  FrameDecoder,
  FrameType,
  encodeFrame,
  jsonFrame,
  jsonPayload,
} from "../shared/frames.js";
import { GatewayEvent, SessionView, initialView, reduce } from "../shared/store.js";

const HERE = path.dirname(fileURLToPath(import.meta.url));

export interface GatewayOptions {
  obswHost: string;
  obswPort: number;
  listenPort: number;
  /** wall seconds of silence before the link is declared lost */
  lossTimeoutS?: number;
  staticDir?: string;
}

export class Gateway {
  private readonly opts: Required<GatewayOptions>;
  private socket: net.Socket | null = null;
  private decoder = new FrameDecoder();
  private clients = new Set<http.ServerResponse>();
  private server: http.Server;
  private view: SessionView = initialView();
  private tcSeq = 0;
  private lastRxWallMs = 0;
  private reconnectTimer: NodeJS.Timeout | null = null;
  private watchdog: NodeJS.Timeout;
  private closed = false;

  constructor(opts: GatewayOptions) {
    this.opts = {
      lossTimeoutS: 3.0,
      staticDir: path.resolve(HERE, "..", "..", "public"),
      ...opts,
    };
    this.server = http.createServer((req, res) => this.route(req, res));
    this.watchdog = setInterval(() => this.checkLiveness(), 250);
    this.watchdog.unref?.();
  }

  async start(): Promise<number> {
    this.connectObsw();
    await new Promise<void>((resolve) =>
      this.server.listen(this.opts.listenPort, "127.0.0.1", resolve),
    );
    const addr = this.server.address() as net.AddressInfo;
    return addr.port;
  }

  close(): void {
    this.closed = true;
    clearInterval(this.watchdog);
    if (this.reconnectTimer) clearTimeout(this.reconnectTimer);
    this.socket?.destroy();
    for (const client of this.clients) client.end();
    this.server.close();
  }

  get state(): SessionView {
    return this.view;
  }

  // -- onboard side ---------------------------------------------------------

  private connectObsw(): void {
    if (this.closed) return;
    const sock = net.createConnection(this.opts.obswPort, this.opts.obswHost);
    sock.setNoDelay(true);
    sock.on("connect", () => {
      this.lastRxWallMs = Date.now();
      this.publish({ kind: "link", status: "connected" });
    });
    sock.on("data", (data: Buffer) => {
      this.lastRxWallMs = Date.now();
      for (const frame of this.decoder.feed(new Uint8Array(data))) {
        this.onFrame(frame);
      }
    });
    const retry = () => {
      if (this.closed) return;
      this.socket = null;
      this.reconnectTimer = setTimeout(() => this.connectObsw(), 500);
    };
    sock.on("error", () => {
      /* close follows */
    });
    sock.on("close", () => {
      if (this.view.link === "connected") {
        this.publish({ kind: "link", status: "lost" });
      }
      retry();
    });
    this.socket = sock;
  }

  private checkLiveness(): void {
    if (
      this.view.link === "connected" &&
      Date.now() - this.lastRxWallMs > this.opts.lossTimeoutS * 1000
    ) {
      this.publish({ kind: "link", status: "lost" });
      this.socket?.destroy();
    }
  }

  private onFrame(frame: Frame): void {
    if (frame.type === FrameType.HEARTBEAT) {
      // echo keeps the onboard silence watchdog quiet
      this.sendFrame(jsonFrame(FrameType.HEARTBEAT, this.nextSeq(), Date.now(), null));
    }
    let payload: unknown = null;
    try {
      payload = jsonPayload(frame);
    } catch {
      payload = null;
    }
    this.publish({
      kind: "frame",
      frameType: FrameType[frame.type],
      seq: frame.seq,
      timestampMs: frame.timestampMs,
      payload,
    });
  }

  private nextSeq(): number {
    this.tcSeq += 1;
    return this.tcSeq;
  }

  private sendFrame(frame: Frame): boolean {
    if (!this.socket || this.socket.destroyed) return false;
    this.socket.write(encodeFrame(frame));
    return true;
  }

  sendTc(id: string, args: Record<string, unknown>): number | null {
    const seq = this.nextSeq();
    const sent = this.sendFrame(
      jsonFrame(FrameType.TC, seq, Date.now(), { id, args }),
    );
    if (!sent) return null;
    this.publish({ kind: "tc-sent", seq, id, tMs: Date.now() });
    return seq;
  }

  // -- browser side -----------------------------------------------------------

  private publish(evt: GatewayEvent): void {
    this.view = reduce(this.view, evt);
    const line = `data: ${JSON.stringify(evt)}\n\n`;
    for (const client of this.clients) {
      client.write(line);
    }
  }

  private route(req: http.IncomingMessage, res: http.ServerResponse): void {
    const url = req.url ?? "/";
    if (req.method === "GET" && url === "/events") {
      res.writeHead(200, {
        "content-type": "text/event-stream",
        "cache-control": "no-cache",
        connection: "keep-alive",
      });
      res.write(`data: ${JSON.stringify({ kind: "snapshot", view: this.view })}\n\n`);
      this.clients.add(res);
      req.on("close", () => this.clients.delete(res));
      return;
    }
    if (req.method === "GET" && url === "/state") {
      res.writeHead(200, { "content-type": "application/json" });
      res.end(JSON.stringify(this.view));
      return;
    }
    if (req.method === "POST" && url === "/tc") {
      let body = "";
      req.on("data", (chunk) => (body += chunk));
      req.on("end", () => {
        try {
          const { id, args } = JSON.parse(body || "{}");
          if (typeof id !== "string" || !id) throw new Error("missing TC id");
          const seq = this.sendTc(id, args ?? {});
          if (seq === null) {
            res.writeHead(503, { "content-type": "application/json" });
            res.end(JSON.stringify({ error: "link down" }));
          } else {
            res.writeHead(200, { "content-type": "application/json" });
            res.end(JSON.stringify({ seq }));
          }
        } catch (err) {
          res.writeHead(400, { "content-type": "application/json" });
          res.end(JSON.stringify({ error: String(err) }));
        }
      });
      return;
    }
    if (req.method === "GET") {
      this.serveStatic(url === "/" ? "/index.html" : url, res);
      return;
    }
    res.writeHead(405);
    res.end();
  }

  private serveStatic(url: string, res: http.ServerResponse): void {
    const safe = path.normalize(url).replace(/^(\.\.[/\\])+/, "");
    const file = path.join(this.opts.staticDir, safe);
    if (!file.startsWith(this.opts.staticDir) || !fs.existsSync(file) || !fs.statSync(file).isFile()) {
      res.writeHead(404);
      res.end("not found");
      return;
    }
    const types: Record<string, string> = {
      ".html": "text/html",
      ".js": "text/javascript",
      ".css": "text/css",
    };
    res.writeHead(200, { "content-type": types[path.extname(file)] ?? "application/octet-stream" });
    fs.createReadStream(file).pipe(res);
  }
}
