import { describe, expect, it } from "vitest";

import { ApiClient, ServiceError } from "../src/api";
import { buildFormState, toRequest } from "../src/form";
import { STUB_METADATA, prediction, response, stubService } from "./stub";

const REQUEST = toRequest(buildFormState(STUB_METADATA));

describe("ApiClient", () => {
  it("fetches and returns the metadata document", async () => {
    const stub = stubService();
    const client = new ApiClient("", stub.fetch);
    expect(await client.metadata()).toEqual(STUB_METADATA);
  });

  it("returns the prediction exactly as the service sent it", async () => {
    const exact = 11234.567891234;
    const stub = stubService(() => response(200, prediction(exact)));
    const client = new ApiClient("", stub.fetch);
    const result = await client.predict(REQUEST);
    expect(result.price).toBe(exact); // no client-side rounding
    expect(stub.calls.filter((c) => c.url.endsWith("/predict"))).toHaveLength(1);
    expect(stub.calls[0].body).toEqual(REQUEST);
  });

  it("surfaces a 422 as a ServiceError with the field detail", async () => {
    const stub = stubService(() =>
      response(422, { code: "unknown_category", message: "unknown brand", field: "brand" }),
    );
    const client = new ApiClient("", stub.fetch);
    const err = await client.predict(REQUEST).catch((e) => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect(err.status).toBe(422);
    expect(err.detail.field).toBe("brand");
  });

  it("surfaces 503 with the service message", async () => {
    const stub = stubService(() =>
      response(503, { code: "model_unavailable", message: "no model is loaded" }),
    );
    const err = await new ApiClient("", stub.fetch).predict(REQUEST).catch((e) => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect(err.status).toBe(503);
  });

  it("propagates network failures as-is", async () => {
    const client = new ApiClient("", () => Promise.reject(new TypeError("fetch failed")));
    await expect(client.metadata()).rejects.toThrow("fetch failed");
  });

  it("copes with non-JSON error bodies", async () => {
    const client = new ApiClient("", async () => new Response("gateway busted", { status: 502 }));
    const err = await client.metadata().catch((e) => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect(err.detail.code).toBe("http_error");
  });
});
