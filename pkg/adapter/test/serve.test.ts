import * as http from "node:http";
import { afterAll, describe, expect, it } from "vitest";

import { PREDICTORS, meanIntensity } from "../src/predictors";
import { handleRequest, serveHttp } from "../src/serve";
import { WireRequest, WireResponse } from "../src/types";

function makeReq(id: string, bytes: number[], w: number, h: number): WireRequest {
  return { id, width: w, height: h, channels: 1,
           pixels: Buffer.from(bytes).toString("base64") };
}

describe("handleRequest", () => {
  it("classifies a uniform image into the mean bucket", () => {
    const resp = handleRequest(meanIntensity, "classification",
                               makeReq("a", Array(16).fill(128), 4, 4));
    expect(resp.kind).toBe("classification");
    if (resp.kind === "classification") {
      expect(resp.labels[0]).toEqual({ label: "c4", score: 1.0 });
      expect(resp.labels).toHaveLength(8);
    }
    expect(resp.id).toBe("a");
  });

  it("breaks equidistant score ties toward the lower label", () => {
    const resp = handleRequest(meanIntensity, "classification",
                               makeReq("t", Array(4).fill(128), 2, 2));
    if (resp.kind === "classification") {
      expect(resp.labels.slice(0, 3).map((l) => l.label))
        .toEqual(["c4", "c3", "c5"]);
    }
  });

  it("answers malformed base64 with an error carrying the id", () => {
    const resp = handleRequest(meanIntensity, "classification", {
      id: "bad", width: 2, height: 2, channels: 1, pixels: "@@@" });
    expect(resp).toMatchObject({ id: "bad", kind: "error" });
  });

  it("reports predictor/task mismatches as errors", () => {
    const resp = handleRequest(meanIntensity, "regression",
                               makeReq("m", Array(4).fill(0), 2, 2));
    expect(resp).toMatchObject({ id: "m", kind: "error" });
  });

  it("computes the centroid offset exactly", () => {
    const img = [200, 0, 0, 0, 200, 0, 0, 0];  // mass in the left column
    const resp = handleRequest(PREDICTORS["centroid"].fn, "regression",
                               makeReq("c", img, 4, 2));
    expect(resp).toEqual({ id: "c", kind: "regression", value: -1.0 });
  });
});

describe("http transport", () => {
  const servers: http.Server[] = [];
  afterAll(() => servers.forEach((s) => s.close()));

  function post(port: number, payload: unknown): Promise<WireResponse> {
    return new Promise((resolve, reject) => {
      const body = Buffer.from(JSON.stringify(payload));
      const req = http.request(
        { host: "127.0.0.1", port, method: "POST", path: "/predict",
          headers: { "Content-Length": body.length } },
        (res) => {
          const chunks: Buffer[] = [];
          res.on("data", (c) => chunks.push(c));
          res.on("end", () => resolve(
            JSON.parse(Buffer.concat(chunks).toString())));
        });
      req.on("error", reject);
      req.end(body);
    });
  }

  it("serves predictions over POST with ids echoed in any order", async () => {
    const port = await new Promise<number>((resolve) => {
      servers.push(serveHttp(meanIntensity, "classification", 0, resolve));
    });
    const reqs = [makeReq("q1", Array(4).fill(0), 2, 2),
                  makeReq("q2", Array(4).fill(255), 2, 2),
                  makeReq("q3", Array(4).fill(96), 2, 2)];
    const resps = await Promise.all(reqs.map((r) => post(port, r)));
    const byId = new Map(resps.map((r) => [r.id, r]));
    expect(byId.size).toBe(3);
    const top = (id: string) => {
      const r = byId.get(id)!;
      return r.kind === "classification" ? r.labels[0].label : "?";
    };
    expect([top("q1"), top("q2"), top("q3")]).toEqual(["c0", "c7", "c3"]);
  });
});
