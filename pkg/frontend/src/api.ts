/** Typed client for the summarization service HTTP API. */

export interface VideoInfo {
  video_id: string
  original_length: number
  query_hint: string
}

export interface SummaryResult {
  logits: number[][]
  predicted_labels: number[]
  selected_frames: number[]
  threshold: number
}

export interface ServiceError {
  error_code: string
  detail?: string
}

export class ApiError extends Error {
  readonly status: number
  readonly code: string

  constructor(status: number, code: string, detail?: string) {
    super(detail ? `${code}: ${detail}` : code)
    this.status = status
    this.code = code
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class ApiClient {
  private readonly baseUrl: string
  private readonly fetcher: FetchLike

  constructor(baseUrl = '', fetcher: FetchLike = (i, init) => fetch(i, init)) {
    this.baseUrl = baseUrl.replace(/\/$/, '')
    this.fetcher = fetcher
  }

  async health(): Promise<boolean> {
    try {
      const resp = await this.fetcher(`${this.baseUrl}/health`)
      return resp.ok
    } catch {
      return false
    }
  }

  async videos(): Promise<VideoInfo[]> {
    const resp = await this.fetcher(`${this.baseUrl}/videos`)
    if (!resp.ok) {
      throw await toApiError(resp)
    }
    return (await resp.json()) as VideoInfo[]
  }

  async summarize(
    videoId: string,
    query: string,
    threshold?: number
  ): Promise<SummaryResult> {
    const body: Record<string, unknown> = { video_id: videoId, query }
    if (threshold !== undefined) {
      body.threshold = threshold
    }
    const resp = await this.fetcher(`${this.baseUrl}/summarize`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    })
    if (!resp.ok) {
      throw await toApiError(resp)
    }
    return (await resp.json()) as SummaryResult
  }
}

async function toApiError(resp: Response): Promise<ApiError> {
  let code = 'unknown_error'
  let detail: string | undefined
  try {
    const body = (await resp.json()) as ServiceError
    if (body.error_code) {
      code = body.error_code
    }
    detail = body.detail
  } catch {
    // non-JSON error body; keep the generic code
  }
  return new ApiError(resp.status, code, detail)
}
