import { describe, expect, it } from "vitest";

import { HttpApiClient } from "../src/api.js";

function jsonResponse(doc: unknown): Response {
  return new Response(JSON.stringify(doc), {
    status: 200,
    headers: { "Content-Type": "application/json" },
  });
}

describe("http api client", () => {
  it("builds span + factor query strings", async () => {
    const urls: string[] = [];
    const client = new HttpApiClient("", async (input) => {
      urls.push(String(input));
      return jsonResponse({ slices: [] });
    });
    await client.slices("sp 1", { start_s: 2.5, end_s: 10 }, ["a.b.c", "d.e.f"]);
    expect(urls[0]).toBe("/api/speeches/sp%201/slices?start=2.5&end=10&factors=a.b.c%2Cd.e.f");
    await client.slices("sp", null);
    expect(urls[1]).toBe("/api/speeches/sp/slices");
  });

  it("posts recommend requests as JSON", async () => {
    let init: RequestInit | undefined;
    const client = new HttpApiClient("", async (_input, i) => {
      init = i;
      return jsonResponse({ candidates: [], bounds: null, skipped: 0 });
    });
    await client.recommend({
      speech_id: "x", granularity: "speech", mode: "script",
      selected_factors: [], k: 3, direction: "most-similar",
    });
    expect(init?.method).toBe("POST");
    expect(JSON.parse(String(init?.body)).k).toBe(3);
  });

  it("aborts a superseded in-flight request with the same key", async () => {
    const signals: AbortSignal[] = [];
    const client = new HttpApiClient("", (_input, init) => {
      signals.push(init!.signal!);
      return new Promise<Response>((resolve) => {
        // resolve slowly so the second call overlaps the first
        setTimeout(() => resolve(jsonResponse({ slices: [] })), 5);
      });
    });
    const first = client.slices("sp", null);
    const second = client.slices("sp", { start_s: 0, end_s: 1 });
    await second;
    expect(signals[0].aborted).toBe(true);
    expect(signals[1].aborted).toBe(false);
    await first.catch(() => undefined);
  });

  it("surfaces the machine error code from error bodies", async () => {
    const client = new HttpApiClient("", async () =>
      new Response(JSON.stringify({ error: { code: "NotFound", message: "nope" } }), { status: 404 }),
    );
    await expect(client.factors("ghost")).rejects.toThrow(/NotFound/);
  });
});
