// Wire types of the prediction service (see the main README for the API).

export interface Bounds {
  min: number | null;
  max: number | null;
}

export interface Metadata {
  modelVersion: string;
  columns: string[];
  vocabularies: Record<string, string[]>;
  bounds: Record<string, Bounds>;
  booleans: string[];
}

export interface PredictionRequest {
  vehicleType: string;
  age: number;
  powerPS: number;
  model: string;
  kilometer: number;
  fuelType: string;
  brand: string;
  damageRepaired: boolean;
  isAutomatic: boolean;
}

export interface PredictionResponse {
  price: number;
  spread: { min: number; max: number; std: number };
  modelVersion: string;
}

export interface ApiError {
  code: string;
  message: string;
  field?: string;
}

export const CATEGORICAL_FIELDS = ["vehicleType", "model", "fuelType", "brand"] as const;
export const NUMERIC_FIELDS = ["age", "powerPS", "kilometer"] as const;
export const BOOLEAN_FIELDS = ["damageRepaired", "isAutomatic"] as const;

export type CategoricalField = (typeof CATEGORICAL_FIELDS)[number];
export type NumericField = (typeof NUMERIC_FIELDS)[number];
export type BooleanField = (typeof BOOLEAN_FIELDS)[number];
export type FieldName = CategoricalField | NumericField | BooleanField;

export const ALL_FIELDS: readonly FieldName[] = [
  ...CATEGORICAL_FIELDS,
  ...NUMERIC_FIELDS,
  ...BOOLEAN_FIELDS,
];
