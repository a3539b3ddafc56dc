// Typed client for the evaluation service. One in-flight mutating request
// per session: a newer action aborts and replaces the pending one.

export interface Diagnostic {
  message: string;
  rule?: string;
  start?: number;
  end?: number;
}

export interface EnvRow {
  var: string;
  type: string;
  value_pretty: string | null;
}

export interface ClosureInfo {
  hole: string;
  instance: number;
  path: [string, number][];
  site: number[];
  env: EnvRow[];
}

export interface TreeNode {
  tag: string;
  children?: TreeNode[];
  hole?: string;
  instance?: number;
  name?: string;
  value?: number;
  var?: string;
  ann?: string;
  from?: string;
  to?: string;
  other?: string;
  left_var?: string;
  right_var?: string;
}

export interface HoleInfo {
  type: string;
  ctx: string;
}

export interface RunResponse {
  type: string;
  result_pretty: string;
  result_tree: TreeNode;
  outcome: string;
  steps: number;
  closures: ClosureInfo[];
  holes: Record<string, HoleInfo>;
  diagnostics: Diagnostic[];
  resumed_from?: number;
  catch_up_steps?: number;
  verify_agreed?: boolean | null;
}

export interface ErrorDetail {
  diagnostics?: Diagnostic[];
  expected_type?: string;
  expected_ctx?: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: ErrorDetail | string,
  ) {
    super(typeof detail === "string" ? detail : (detail.diagnostics?.[0]?.message ?? "request failed"));
  }

  get diagnostics(): Diagnostic[] {
    if (typeof this.detail === "string") {
      return [{ message: this.detail }];
    }
    return this.detail.diagnostics ?? [{ message: this.message }];
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    abortable = false,
  ): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    if (abortable) {
      this.inflight?.abort();
      this.inflight = new AbortController();
      init.signal = this.inflight.signal;
    }
    const resp = await this.fetchFn(this.base + path, init);
    const payload = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ApiError(resp.status, (payload as { detail?: ErrorDetail | string }).detail ?? "request failed");
    }
    return payload as T;
  }

  async createSession(fuel?: number): Promise<string> {
    const body = fuel === undefined ? {} : { fuel };
    const out = await this.request<{ session_id: string }>("POST", "/session", body);
    return out.session_id;
  }

  runProgram(sessionId: string, source: string): Promise<RunResponse> {
    return this.request<RunResponse>(
      "POST",
      `/session/${sessionId}/program`,
      { source },
      true,
    );
  }

  fillHole(
    sessionId: string,
    hole: string,
    fragment: string,
    verify: boolean,
  ): Promise<RunResponse> {
    return this.request<RunResponse>(
      "POST",
      `/session/${sessionId}/fill`,
      { hole, source_fragment: fragment, verify },
      true,
    );
  }

  closure(sessionId: string, hole: string, instance: number): Promise<ClosureInfo> {
    return this.request<ClosureInfo>(
      "GET",
      `/session/${sessionId}/closure/${encodeURIComponent(hole)}/${instance}`,
    );
  }
}
