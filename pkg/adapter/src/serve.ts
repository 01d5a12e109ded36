/**
 * Serve a predictor behind the wire protocol.
 *
 * The adapter adds no semantic behavior: pixels are decoded, the predictor
 * runs, the result (or an error carrying the request id) goes back out.
 * One batch is processed at a time per connection; request order is
 * preserved positionally on stdio.
 */
import * as http from "node:http";

import { Predictor, Task, WireRequest, WireResponse } from "./types";
import { FrameDecoder, decodeImage, encodeFrame, errorResponse } from "./wire";

export interface ServeOptions {
  transport: "stdio" | "http";
  task: Task;
  port?: number;
  /** http only: invoked with the bound port once listening */
  onListen?: (port: number) => void;
}

export function handleRequest(predictor: Predictor, task: Task,
                              req: unknown): WireResponse {
  const id = (req && typeof req === "object" && "id" in req)
    ? String((req as WireRequest).id) : null;
  try {
    const img = decodeImage(req as WireRequest);
    const result = predictor(img);
    if (result.kind !== task) {
      throw new Error(`predictor returned ${result.kind}, expected ${task}`);
    }
    if (result.kind === "classification") {
      return { id, kind: "classification", labels: result.labels };
    }
    if (!Number.isFinite(result.value)) {
      throw new Error("predictor returned a non-finite value");
    }
    return { id, kind: "regression", value: result.value };
  } catch (err) {
    return errorResponse(id, err);
  }
}

export function serveStdio(predictor: Predictor, task: Task): Promise<void> {
  const decoder = new FrameDecoder();
  return new Promise((resolve, reject) => {
    process.stdin.on("data", (chunk: Buffer) => {
      let requests: unknown[];
      try {
        requests = decoder.push(chunk);
      } catch (err) {
        // framing is unrecoverable: report and quit non-zero
        process.stderr.write(`frame error: ${err}\n`);
        process.exit(2);
        return;
      }
      for (const req of requests) {
        process.stdout.write(encodeFrame(handleRequest(predictor, task, req)));
      }
    });
    process.stdin.on("end", () => resolve());
    process.stdin.on("error", reject);
  });
}

export function serveHttp(predictor: Predictor, task: Task, port: number,
                          onListen?: (port: number) => void): http.Server {
  const server = http.createServer((req, res) => {
    if (req.method !== "POST") {
      res.writeHead(405).end();
      return;
    }
    const chunks: Buffer[] = [];
    req.on("data", (c: Buffer) => chunks.push(c));
    req.on("end", () => {
      let response: WireResponse;
      try {
        response = handleRequest(
          predictor, task, JSON.parse(Buffer.concat(chunks).toString("utf-8")));
      } catch (err) {
        response = errorResponse(null, err);
      }
      const body = Buffer.from(JSON.stringify(response), "utf-8");
      res.writeHead(200, { "Content-Type": "application/json",
                           "Content-Length": body.length });
      res.end(body);
    });
  });
  server.listen(port, "127.0.0.1", () => {
    const addr = server.address();
    if (onListen && addr && typeof addr === "object") onListen(addr.port);
  });
  return server;
}

export function serve(predictor: Predictor, opts: ServeOptions):
    Promise<void> | http.Server {
  if (opts.transport === "stdio") {
    return serveStdio(predictor, opts.task);
  }
  return serveHttp(predictor, opts.task, opts.port ?? 0, opts.onListen);
}
