// Typed client for the session service. The console performs no diagnosis
// computation of its own: every number it shows comes from these payloads.

export interface ModelInfo {
  name: string;
  inputs: string[];
  outputs: string[];
  internals: string[];
  gates: number;
}

export interface Suggestion {
  kind: "control" | "probe";
  control: Record<string, number> | null;
  probe: string | null;
  expected_remaining: number | null;
  rationale: string;
}

export interface Hypothesis {
  faulty: string[];
  marks: boolean[];
  cardinality: number;
}

export interface HistoryRow {
  k: number;
  action_kind: string;
  action: string;
  obs: Record<string, number>;
  remaining: number;
  expected: number | null;
}

export interface Fit {
  n0: number;
  rate: number;
  n_inf: number;
  r_squared: number;
}

export interface Snapshot {
  id: string;
  model: string;
  mode: string;
  policy: string;
  components: string[];
  remaining: number;
  step: number;
  outcome: string | null;
  pending: Suggestion | null;
  hypotheses: Hypothesis[];
  history: HistoryRow[];
  fit: Fit | null;
}

export interface CreateSessionRequest {
  model: string;
  observation: Record<string, number>;
  mode?: "operator" | "simulated";
  policy?: string;
  seed?: number;
  controls?: string[];
  semantics?: "weak" | "strong";
  theta?: number;
  fault?: string[];
}

export interface ObserveResult {
  remaining: number;
  outcome: string | null;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class Client {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!res.ok) {
      let code = "http_error";
      let message = `${res.status}`;
      try {
        const body = (await res.json()) as { detail?: { code?: string; message?: string } };
        code = body.detail?.code ?? code;
        message = body.detail?.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, code, message);
    }
    return (await res.json()) as T;
  }

  async listModels(): Promise<ModelInfo[]> {
    const body = await this.request<{ models: ModelInfo[] }>("/models");
    return body.models;
  }

  createSession(req: CreateSessionRequest): Promise<Snapshot> {
    return this.request<Snapshot>("/sessions", { method: "POST", body: JSON.stringify(req) });
  }

  getSession(id: string): Promise<Snapshot> {
    return this.request<Snapshot>(`/sessions/${id}`);
  }

  suggest(id: string): Promise<Suggestion> {
    return this.request<Suggestion>(`/sessions/${id}/suggest`, { method: "POST" });
  }

  observe(
    id: string,
    values: Record<string, number>,
    controlOverride?: Record<string, number>,
  ): Promise<ObserveResult> {
    return this.request<ObserveResult>(`/sessions/${id}/observe`, {
      method: "POST",
      body: JSON.stringify({ values, control_override: controlOverride ?? null }),
    });
  }

  async traceCsv(id: string): Promise<string> {
    const res = await this.fetchFn(`${this.baseUrl}/sessions/${id}/trace.csv`);
    if (!res.ok) throw new ApiError(res.status, "http_error", `${res.status}`);
    return res.text();
  }
}
