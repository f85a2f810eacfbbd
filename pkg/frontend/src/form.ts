import type {
  ApiError,
  BooleanField,
  CategoricalField,
  FieldName,
  Metadata,
  NumericField,
  PredictionRequest,
} from "./types";
import { BOOLEAN_FIELDS, CATEGORICAL_FIELDS, NUMERIC_FIELDS } from "./types";

export interface FieldState {
  /** Raw input value; booleans are "true"/"false". */
  value: string;
  /** Local validation error, or an inline error adopted from the service. */
  error: string | null;
}

export interface FormState {
  metadata: Metadata;
  fields: Record<FieldName, FieldState>;
  /** Set when the metadata itself is unusable (e.g. an empty vocabulary). */
  disabledReason: string | null;
}

function isCategorical(field: FieldName): field is CategoricalField {
  return (CATEGORICAL_FIELDS as readonly string[]).includes(field);
}

function isNumeric(field: FieldName): field is NumericField {
  return (NUMERIC_FIELDS as readonly string[]).includes(field);
}

/** Dropdown options come from the service metadata and nowhere else. */
export function options(state: FormState, field: CategoricalField): string[] {
  return state.metadata.vocabularies[field] ?? [];
}

export function validateField(metadata: Metadata, field: FieldName, raw: string): string | null {
  if (isCategorical(field)) {
    const known = metadata.vocabularies[field] ?? [];
    return known.includes(raw) ? null : `choose one of the listed ${field} values`;
  }
  if (isNumeric(field)) {
    if (!/^-?\d+$/.test(raw.trim())) return `${field} must be a whole number`;
    const value = Number(raw);
    const bounds = metadata.bounds[field] ?? { min: null, max: null };
    if (bounds.min !== null && value < bounds.min) return `${field} must be at least ${bounds.min}`;
    if (bounds.max !== null && value > bounds.max) return `${field} must be at most ${bounds.max}`;
    return null;
  }
  return raw === "true" || raw === "false" ? null : `${field} must be true or false`;
}

const NUMERIC_DEFAULTS: Record<NumericField, number> = {
  age: 10,
  powerPS: 100,
  kilometer: 100000,
};

function clamp(value: number, bounds: { min: number | null; max: number | null }): number {
  let v = value;
  if (bounds.min !== null) v = Math.max(v, bounds.min);
  if (bounds.max !== null) v = Math.min(v, bounds.max);
  return v;
}

/** Build the initial state from /api/v1/metadata: dropdowns on their first
 * option, numerics on an in-bounds default, booleans off. */
export function buildFormState(metadata: Metadata): FormState {
  const fields = {} as Record<FieldName, FieldState>;
  let disabledReason: string | null = null;
  for (const field of CATEGORICAL_FIELDS) {
    const known = metadata.vocabularies[field] ?? [];
    if (known.length === 0) {
      disabledReason = `the service advertises no ${field} values; cannot build the form`;
      fields[field] = { value: "", error: "no values available" };
      continue;
    }
    fields[field] = { value: known[0], error: null };
  }
  for (const field of NUMERIC_FIELDS) {
    const bounds = metadata.bounds[field] ?? { min: null, max: null };
    const value = String(clamp(NUMERIC_DEFAULTS[field], bounds));
    fields[field] = { value, error: validateField(metadata, field, value) };
  }
  for (const field of BOOLEAN_FIELDS) {
    fields[field] = { value: "false", error: null };
  }
  return { metadata, fields, disabledReason };
}

export function setField(state: FormState, field: FieldName, raw: string): FormState {
  const next = { ...state.fields };
  next[field] = { value: raw, error: validateField(state.metadata, field, raw) };
  return { ...state, fields: next };
}

/** Submit is available exactly when every field is valid. */
export function isSubmittable(state: FormState): boolean {
  if (state.disabledReason !== null) return false;
  return Object.values(state.fields).every((f) => f.error === null);
}

export function toRequest(state: FormState): PredictionRequest {
  if (!isSubmittable(state)) {
    throw new Error("form has invalid fields; cannot build a request");
  }
  const f = state.fields;
  const num = (field: NumericField) => Number(f[field].value);
  const flag = (field: BooleanField) => f[field].value === "true";
  return {
    vehicleType: f.vehicleType.value,
    age: num("age"),
    powerPS: num("powerPS"),
    model: f.model.value,
    kilometer: num("kilometer"),
    fuelType: f.fuelType.value,
    brand: f.brand.value,
    damageRepaired: flag("damageRepaired"),
    isAutomatic: flag("isAutomatic"),
  };
}

/** Adopt a service-side rejection as an inline error on the named field. */
export function applyServiceError(state: FormState, error: ApiError): FormState {
  if (!error.field || !(error.field in state.fields)) return state;
  const field = error.field as FieldName;
  const next = { ...state.fields };
  next[field] = { ...next[field], error: error.message };
  return { ...state, fields: next };
}
