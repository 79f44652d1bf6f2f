import type { Cov } from "./covariance";

export type Method = "emotion_prediction" | "folding_in" | "ensemble";

export interface PointQuery {
  point: [number, number];
}
export interface GaussianQuery {
  gaussian: { mean: [number, number]; cov: [number, number, number] };
}
export type Query = PointQuery | GaussianQuery;

export interface RetrievedClip {
  clip_id: string;
  score: number;
  mean: [number, number];
  cov: [number, number, number];
}

export interface RetrieveResponse {
  method: string;
  results: RetrievedClip[];
}

export interface ApiError {
  code: string;
  message: string;
}

/** Carries the server's error code verbatim for display. */
export class RetrievalError extends Error {
  readonly code: string;
  constructor(err: ApiError) {
    super(err.message);
    this.code = err.code;
  }
}

export function gaussianQuery(v: number, a: number, cov: Cov): GaussianQuery {
  return { gaussian: { mean: [v, a], cov: [cov.s11, cov.s12, cov.s22] } };
}

export interface RetrieveOptions {
  method: Method;
  topk: number;
  userId?: string;
}

/**
 * Retrieval client with at most one request in flight: issuing a new
 * query aborts the previous one, so stale results can never land after
 * fresher ones.
 */
export class AegClient {
  private inflight: AbortController | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async retrieve(query: Query, opts: RetrieveOptions): Promise<RetrieveResponse> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;

    const body: Record<string, unknown> = {
      query,
      method: opts.method,
      topk: opts.topk,
    };
    if (opts.userId) body.user_id = opts.userId;

    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.baseUrl}/retrieve`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
        signal: controller.signal,
      });
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
    if (!resp.ok) {
      throw new RetrievalError((await resp.json()) as ApiError);
    }
    return (await resp.json()) as RetrieveResponse;
  }

  cancel(): void {
    this.inflight?.abort();
    this.inflight = null;
  }
}
