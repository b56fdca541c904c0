import { describe, expect, it } from "vitest";

import {
  ApiError,
  LABEL_NOT_SARCASM,
  LABEL_SARCASM,
  LABEL_UNDECIDED,
  makeApi,
} from "../src/api";

describe("wire contract", () => {
  it("label strings match the server vocabulary byte for byte", () => {
    expect(LABEL_SARCASM).toBe("Sarcasm");
    expect(LABEL_NOT_SARCASM).toBe("NotSarcasm");
    expect(LABEL_UNDECIDED).toBe("Undecided");
  });

  it("surfaces structured error bodies as ApiError", async () => {
    const api = makeApi(async () =>
      new Response(JSON.stringify({ error: "conflict", message: "task is taken" }), {
        status: 409,
        headers: { "Content-Type": "application/json" },
      }),
    );
    const err = await api.submitLabel("a", "t1", LABEL_SARCASM).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.code).toBe("conflict");
    expect(err.message).toBe("task is taken");
  });

  it("keeps the status line when the error body is not JSON", async () => {
    const api = makeApi(async () => new Response("<html>boom</html>", { status: 500 }));
    const err = await api.progress().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("unknown");
    expect(err.message).toContain("500");
  });

  it("encodes task ids and annotator ids in URLs", async () => {
    const urls: string[] = [];
    const api = makeApi(async (url) => {
      urls.push(url);
      return new Response(JSON.stringify({ task: null }), {
        status: 200,
        headers: { "Content-Type": "application/json" },
      });
    });
    await api.nextTask("ann with space");
    await api.submitLabel("a", "task/9", LABEL_SARCASM).catch(() => undefined);
    expect(urls[0]).toBe("/api/tasks/next?annotator_id=ann%20with%20space");
    expect(urls[1]).toBe("/api/tasks/task%2F9/label");
  });
});
