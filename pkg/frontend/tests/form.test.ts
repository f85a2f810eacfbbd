import { describe, expect, it } from "vitest";

import {
  applyServiceError,
  buildFormState,
  isSubmittable,
  options,
  setField,
  toRequest,
  validateField,
} from "../src/form";
import { CATEGORICAL_FIELDS } from "../src/types";
import { STUB_METADATA } from "./stub";

describe("buildFormState", () => {
  it("mirrors the metadata vocabularies exactly, order included", () => {
    const state = buildFormState(STUB_METADATA);
    for (const field of CATEGORICAL_FIELDS) {
      expect(options(state, field)).toEqual(STUB_METADATA.vocabularies[field]);
    }
    expect(options(state, "brand")).toHaveLength(4);
  });

  it("starts valid and submittable with in-bounds defaults", () => {
    const state = buildFormState(STUB_METADATA);
    expect(isSubmittable(state)).toBe(true);
    expect(state.fields.vehicleType.value).toBe("bus"); // first advertised option
  });

  it("shows one option per advertised brand, even for large vocabularies", () => {
    const brands = Array.from({ length: 40 }, (_, i) => `brand${String(i).padStart(2, "0")}`);
    const metadata = {
      ...STUB_METADATA,
      vocabularies: { ...STUB_METADATA.vocabularies, brand: brands },
    };
    const state = buildFormState(metadata);
    expect(options(state, "brand")).toHaveLength(40);
    expect(options(state, "brand")).toEqual(brands);
  });

  it("is disabled with a message when a vocabulary is empty", () => {
    const metadata = {
      ...STUB_METADATA,
      vocabularies: { ...STUB_METADATA.vocabularies, brand: [] },
    };
    const state = buildFormState(metadata);
    expect(state.disabledReason).toMatch(/brand/);
    expect(isSubmittable(state)).toBe(false);
  });

  it("is identical when rebuilt from the same metadata (reload stability)", () => {
    expect(buildFormState(STUB_METADATA)).toEqual(buildFormState(STUB_METADATA));
  });
});

describe("validateField", () => {
  it("rejects values outside the advertised bounds", () => {
    expect(validateField(STUB_METADATA, "age", "200")).toMatch(/at most 154/);
    expect(validateField(STUB_METADATA, "powerPS", "5")).toMatch(/at least 10/);
    expect(validateField(STUB_METADATA, "kilometer", "0")).toMatch(/at least 1/);
    expect(validateField(STUB_METADATA, "age", "12")).toBeNull();
  });

  it("rejects non-integers and unknown categories", () => {
    expect(validateField(STUB_METADATA, "powerPS", "12.5")).toMatch(/whole number/);
    expect(validateField(STUB_METADATA, "powerPS", "abc")).toMatch(/whole number/);
    expect(validateField(STUB_METADATA, "brand", "notabrand")).toMatch(/brand/);
    expect(validateField(STUB_METADATA, "brand", "audi")).toBeNull();
  });

  it("accepts unbounded numeric fields above any finite value", () => {
    expect(validateField(STUB_METADATA, "kilometer", "999999")).toBeNull();
  });
});

describe("submit gating", () => {
  it("submit is enabled iff every field is valid", () => {
    let state = buildFormState(STUB_METADATA);
    expect(isSubmittable(state)).toBe(true);
    state = setField(state, "age", "200");
    expect(isSubmittable(state)).toBe(false);
    expect(state.fields.age.error).toMatch(/154/);
    state = setField(state, "age", "7");
    expect(isSubmittable(state)).toBe(true);
  });

  it("builds a typed request from the raw field values", () => {
    let state = buildFormState(STUB_METADATA);
    state = setField(state, "brand", "porsche");
    state = setField(state, "age", "3");
    state = setField(state, "damageRepaired", "true");
    const request = toRequest(state);
    expect(request.brand).toBe("porsche");
    expect(request.age).toBe(3);
    expect(request.damageRepaired).toBe(true);
    expect(request.isAutomatic).toBe(false);
    expect(typeof request.kilometer).toBe("number");
  });

  it("refuses to build a request from an invalid form", () => {
    const state = setField(buildFormState(STUB_METADATA), "age", "-5");
    expect(() => toRequest(state)).toThrow(/invalid/);
  });
});

describe("applyServiceError", () => {
  it("maps a 422 error body onto the named field", () => {
    const state = buildFormState(STUB_METADATA);
    const next = applyServiceError(state, {
      code: "unknown_category",
      message: "unknown brand 'zonda'",
      field: "brand",
    });
    expect(next.fields.brand.error).toBe("unknown brand 'zonda'");
    expect(isSubmittable(next)).toBe(false);
  });

  it("leaves the form untouched when the error names no field", () => {
    const state = buildFormState(STUB_METADATA);
    expect(applyServiceError(state, { code: "x", message: "boom" })).toBe(state);
  });
});
