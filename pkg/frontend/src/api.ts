import type {
  CorrectionResponse,
  FeedbackResponse,
  PreviewResponse,
  RunDetail,
  RunListResponse,
  StoredVerdict,
  TraceResponse,
  VerdictPayload,
  VerdictsResponse,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
    private readonly authToken?: string,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers: Record<string, string> = {
      'Content-Type': 'application/json',
      ...(this.authToken ? { 'X-Auth-Token': this.authToken } : {}),
    };
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.baseUrl + path, { ...init, headers });
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { error?: string };
        if (body.error) detail = body.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  listRuns(): Promise<RunListResponse> {
    return this.request('/api/runs');
  }

  getRun(runId: string): Promise<RunDetail> {
    return this.request(`/api/runs/${encodeURIComponent(runId)}`);
  }

  getTrace(runId: string): Promise<TraceResponse> {
    return this.request(`/api/runs/${encodeURIComponent(runId)}/trace`);
  }

  preview(runId: string, correction: number): Promise<PreviewResponse> {
    const q = encodeURIComponent(String(correction));
    return this.request(`/api/runs/${encodeURIComponent(runId)}/preview?correction=${q}`);
  }

  submitVerdict(runId: string, verdict: VerdictPayload): Promise<{ stored: StoredVerdict }> {
    return this.request(`/api/runs/${encodeURIComponent(runId)}/verdicts`, {
      method: 'POST',
      body: JSON.stringify(verdict),
    });
  }

  getVerdicts(runId: string): Promise<VerdictsResponse> {
    return this.request(`/api/runs/${encodeURIComponent(runId)}/verdicts`);
  }

  exportFeedback(runIds?: string[]): Promise<FeedbackResponse> {
    const suffix = runIds && runIds.length ? `?runs=${encodeURIComponent(runIds.join(','))}` : '';
    return this.request(`/api/export/feedback${suffix}`);
  }

  setCorrection(value: number): Promise<{ version: number; value: number }> {
    return this.request('/api/config/correction', {
      method: 'PATCH',
      body: JSON.stringify({ value }),
    });
  }

  getCorrection(): Promise<CorrectionResponse> {
    return this.request('/api/config/correction');
  }

  frameUrl(runId: string, index: number): string {
    return `${this.baseUrl}/api/runs/${encodeURIComponent(runId)}/frames/${index}`;
  }
}
