import type { PredictionResponse } from "./types";

const euro = new Intl.NumberFormat("en-US", { maximumFractionDigits: 0 });

/** Euro display: thousands separators, no decimals. Values are never
 * mutated; rounding happens only in the rendered string. */
export function formatEuro(value: number): string {
  return `€${euro.format(value)}`;
}

export interface ResultView {
  raw: number; // the service's estimate, untouched
  priceText: string;
  rangeText: string;
  stdText: string;
}

export function presentResult(response: PredictionResponse): ResultView {
  return {
    raw: response.price,
    priceText: formatEuro(response.price),
    rangeText: `${formatEuro(response.spread.min)} – ${formatEuro(response.spread.max)}`,
    stdText: `±${formatEuro(response.spread.std)}`,
  };
}

export function formatDelta(delta: number): string {
  const sign = delta > 0 ? "+" : delta < 0 ? "−" : "";
  return `${sign}${formatEuro(Math.abs(delta))}`;
}
