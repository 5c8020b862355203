import type { Assignment, Submission, SubmitResult, TaskPayload } from './types.js'

export class ApiError extends Error {
  constructor(public status: number, public rule: string, detail: string) {
    super(`${rule}: ${detail}`)
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

/** Thin JSON client for the annotation service. */
export class ApiClient {
  constructor(
    private baseUrl = '',
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init)
    const body = await response.json()
    if (!response.ok) {
      throw new ApiError(response.status, body.error ?? 'error', body.detail ?? '')
    }
    return body as T
  }

  getAssignment(annotator: string): Promise<Assignment> {
    return this.request<Assignment>(`/api/assignment?annotator=${encodeURIComponent(annotator)}`)
  }

  getTask(questionId: number): Promise<TaskPayload> {
    return this.request<TaskPayload>(`/api/task/${questionId}`)
  }

  postAnnotation(submission: Submission): Promise<SubmitResult> {
    return this.request<SubmitResult>('/api/annotation', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(submission),
    })
  }

  getExport(): Promise<Submission[]> {
    return this.request<Submission[]>('/api/export')
  }
}
