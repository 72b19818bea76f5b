/** Typed client for the extraction service (POST /extract, GET /health). */

export interface SpanValue {
  text: string;
  start: number;
  end: number;
  score: number;
}

export interface ClassificationOutcome {
  labels: string[];
  probabilities: Record<string, number>;
}

export type StructureInstance = Record<string, SpanValue | SpanValue[]>;

export interface ExtractionResult {
  format_version: number;
  entities?: Record<string, SpanValue[]>;
  classifications?: Record<string, ClassificationOutcome>;
  structures?: Record<string, StructureInstance[]>;
}

export interface Violation {
  path: string;
  message: string;
}

export interface HealthInfo {
  status: string;
  model_id: string;
  config: Record<string, unknown>;
}

export interface ExtractOptions {
  threshold?: number;
  max_len?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly kind: string,
    message: string,
    readonly violations: Violation[] = [],
    readonly needed?: number,
    readonly maxLen?: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ExtractClient {
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  async extract(
    schema: unknown,
    text: string,
    options?: ExtractOptions,
    signal?: AbortSignal,
  ): Promise<ExtractionResult> {
    const payload: Record<string, unknown> = { schema, text };
    if (options !== undefined) {
      payload.options = options;
    }
    const res = await this.fetchFn(`${this.baseUrl}/extract`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
      signal,
    });
    const body = await res.json().catch(() => null);
    if (!res.ok) {
      throw new ApiError(
        res.status,
        body?.error ?? "HttpError",
        body?.message ?? `HTTP ${res.status}`,
        body?.violations ?? [],
        body?.needed,
        body?.max_len,
      );
    }
    return body as ExtractionResult;
  }

  async health(): Promise<HealthInfo> {
    const res = await this.fetchFn(`${this.baseUrl}/health`, { method: "GET" });
    if (!res.ok) {
      throw new ApiError(res.status, "HttpError", `HTTP ${res.status}`);
    }
    return (await res.json()) as HealthInfo;
  }
}
