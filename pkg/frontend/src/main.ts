// CLI entry: gs-console gateway.
//   node dist/src/main.js --obsw 127.0.0.1:4910 --listen 8080

import { Gateway } from "./gateway.js";

function arg(name: string, fallback: string): string {
  const idx = process.argv.indexOf(`--${name}`);
  return idx >= 0 && process.argv[idx + 1] ? process.argv[idx + 1] : fallback;
}

const [obswHost, obswPort] = arg("obsw", "127.0.0.1:4910").split(":");
const listenPort = Number(arg("listen", "8080"));

const gateway = new Gateway({
  obswHost,
  obswPort: Number(obswPort),
  listenPort,
});

gateway.start().then((port) => {
  console.log(JSON.stringify({ console: `http://127.0.0.1:${port}/`, obsw: `${obswHost}:${obswPort}` }));
});

process.on("SIGINT", () => {
  gateway.close();
  process.exit(0);
});
