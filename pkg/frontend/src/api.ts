/** Typed client for the retrieval service. All knowledge of routes,
 * payload shapes, and the {code, message, detail} error envelope
 * lives here; the rest of the app never touches fetch directly.
 */

export type Frame = "geomagnetic" | "user_centric";

export interface HealthResponse {
  status: string;
  world_version: number;
  facts: number;
  media: number;
  shared_params_version: number;
}

export interface ContextRequest {
  user_id: string;
  lat: number;
  lon: number;
  heading_deg: number;
  query_time?: number;
}

export interface Retrieval {
  media_id: string;
  kind: string;
  uri: string;
  lat: number;
  lon: number;
  timestamp: number;
}

export interface QueryResponse {
  query_id: string;
  resolved_text: string;
  logical_form: string;
  frame: string;
  params_version: number;
  retrievals: Retrieval[];
}

export interface Mark {
  media_id: string;
  relevant: boolean;
}

/** A non-2xx response, decoded from the service's error envelope. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail: unknown = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base: string, fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  health(): Promise<HealthResponse> {
    return this.request("GET", "/health");
  }

  setContext(body: ContextRequest): Promise<{ version: number }> {
    return this.request("POST", "/context", body);
  }

  query(body: { user_id: string; text: string; frame: Frame }): Promise<QueryResponse> {
    return this.request("POST", "/query", body);
  }

  feedback(body: {
    user_id: string;
    query_id: string;
    marks: Mark[];
  }): Promise<{ params_version: number }> {
    return this.request("POST", "/feedback", body);
  }

  /** Absolute URL for a retrieval's media file. */
  mediaUrl(r: Retrieval): string {
    return this.base + r.uri;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.base + path, init);
    if (resp.ok) {
      return (await resp.json()) as T;
    }
    let envelope: { code?: string; message?: string; detail?: unknown } = {};
    try {
      envelope = await resp.json();
    } catch {
      // non-JSON error body; fall through to the generic envelope
    }
    throw new ApiError(
      resp.status,
      envelope.code ?? "http_error",
      envelope.message ?? `request failed with status ${resp.status}`,
      envelope.detail ?? null,
    );
  }
}
