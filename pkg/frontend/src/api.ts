import type { ApiError, Metadata, PredictionRequest, PredictionResponse } from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx response from the service, carrying its structured error body. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly detail: ApiError,
  ) {
    super(detail.message);
    this.name = "ServiceError";
  }
}

async function errorBody(response: Response): Promise<ApiError> {
  try {
    const body = (await response.json()) as ApiError;
    if (body && typeof body.message === "string") return body;
  } catch {
    // fall through to the generic error
  }
  return { code: "http_error", message: `service returned HTTP ${response.status}` };
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async metadata(): Promise<Metadata> {
    const response = await this.fetchFn(`${this.baseUrl}/api/v1/metadata`);
    if (!response.ok) throw new ServiceError(response.status, await errorBody(response));
    return (await response.json()) as Metadata;
  }

  async predict(request: PredictionRequest): Promise<PredictionResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/api/v1/predict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) throw new ServiceError(response.status, await errorBody(response));
    return (await response.json()) as PredictionResponse;
  }
}
