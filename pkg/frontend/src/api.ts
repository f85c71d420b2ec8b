import type {
  EmbeddingRecord,
  LogEntry,
  PointView,
  ReportView,
  StatusView,
  Suggestion,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client for the campaign service; every view renders from it. */
export class Api {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `cannot reach the campaign service: ${String(err)}`);
    }
    if (!resp.ok) {
      let detail = `request failed with status ${resp.status}`;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // keep the generic detail
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  status(): Promise<StatusView> {
    return this.request("/status");
  }

  points(): Promise<{ points: PointView[] }> {
    return this.request("/points");
  }

  suggestions(): Promise<{ suggestions: Suggestion[]; converged: boolean }> {
    return this.request("/suggestions");
  }

  embedding(): Promise<{ embedding: EmbeddingRecord[] }> {
    return this.request("/embedding");
  }

  report(): Promise<ReportView> {
    return this.request("/report");
  }

  log(): Promise<{ log: LogEntry[] }> {
    return this.request("/log");
  }

  submitMeasurement(body: {
    point_id: number;
    hardness: number;
    inverse_elasticity: number;
    note?: string;
  }): Promise<{ ok: boolean; sampled: number }> {
    return this.post("/measurements", body);
  }

  override(pointId: number): Promise<{ ok: boolean; pending_overrides: number[] }> {
    return this.post("/override", { point_id: pointId });
  }
}
