#!/usr/bin/env node
/**
 * model-adapter CLI
 *
 *   node dist/cli.js --model mean-intensity --transport stdio
 *   node dist/cli.js --model centroid --transport http --port 8377
 *
 * http mode prints one JSON line {"listening": <port>} on stdout once bound
 * (port 0 picks a free port).  Exit codes: 0 clean shutdown (stdin closed),
 * 1 bad usage, 2 unrecoverable framing error.
 */
import { PREDICTORS } from "./predictors";
import { serve } from "./serve";

function arg(name: string, fallback?: string): string | undefined {
  const idx = process.argv.indexOf(`--${name}`);
  if (idx >= 0 && idx + 1 < process.argv.length) return process.argv[idx + 1];
  return fallback;
}

async function main(): Promise<void> {
  const model = arg("model", "mean-intensity")!;
  const transport = arg("transport", "stdio")!;
  const port = Number(arg("port", "0"));
  const entry = PREDICTORS[model];
  if (!entry) {
    process.stderr.write(
      `unknown model ${model}; available: ${Object.keys(PREDICTORS).join(", ")}\n`);
    process.exit(1);
  }
  if (transport === "stdio") {
    await serve(entry.fn, { transport: "stdio", task: entry.task });
  } else if (transport === "http") {
    serve(entry.fn, {
      transport: "http", task: entry.task, port,
      onListen: (p) => process.stdout.write(JSON.stringify({ listening: p }) + "\n"),
    });
  } else {
    process.stderr.write(`unknown transport ${transport}\n`);
    process.exit(1);
  }
}

main().catch((err) => {
  process.stderr.write(`${err}\n`);
  process.exit(2);
});
