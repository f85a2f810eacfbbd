import type { FieldName, PredictionRequest, PredictionResponse } from "./types";
import { ALL_FIELDS } from "./types";

export interface Scenario {
  request: PredictionRequest;
  response: PredictionResponse;
}

export interface ScenarioPair {
  base: Scenario;
  variant: Scenario;
  changedFields: FieldName[];
  /** variant estimate minus base estimate */
  delta: number;
}

export function diffFields(a: PredictionRequest, b: PredictionRequest): FieldName[] {
  return ALL_FIELDS.filter((field) => a[field] !== b[field]);
}

export function compareScenarios(base: Scenario, variant: Scenario): ScenarioPair {
  return {
    base,
    variant,
    changedFields: diffFields(base.request, variant.request),
    delta: variant.response.price - base.response.price,
  };
}

/** The explored variant becomes the base for the next round of edits. */
export function promoteVariant(pair: ScenarioPair): Scenario {
  return pair.variant;
}
