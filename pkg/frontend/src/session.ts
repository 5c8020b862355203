import type { ApiClient } from './api.js'
import type { Box, Flag, Submission, TaskPayload } from './types.js'

export type SessionPhase = 'loading' | 'annotating' | 'warned' | 'done'

/**
 * Drives one annotator through an assignment: task loading, selection
 * state, flag buttons, submission, and the warning/confirm loop. At most
 * one submission is in flight; the next task prefetches on acceptance.
 */
export class AnnotationSession {
  phase: SessionPhase = 'loading'
  task: TaskPayload | null = null
  selected = new Set<number>()
  boxes: Box[] = []
  flag: Flag = 'none'
  warning: string | null = null
  completed = 0
  total = 0

  private queue: number[] = []
  private inFlight = false
  private prefetched = new Map<number, TaskPayload>()

  constructor(private api: ApiClient, readonly annotatorId: string) {}

  async start(): Promise<void> {
    const assignment = await this.api.getAssignment(this.annotatorId)
    this.queue = [...assignment.pending]
    this.completed = assignment.completed.length
    this.total = assignment.pending.length + assignment.completed.length
    await this.advance()
  }

  private async advance(): Promise<void> {
    const next = this.queue.shift()
    if (next === undefined) {
      this.task = null
      this.phase = 'done'
      return
    }
    this.task = this.prefetched.get(next) ?? await this.api.getTask(next)
    this.prefetched.delete(next)
    this.selected.clear()
    this.boxes = []
    this.flag = 'none'
    this.warning = null
    this.phase = 'annotating'
    this.prefetchNext()
  }

  private prefetchNext(): void {
    const upcoming = this.queue[0]
    if (upcoming === undefined || this.prefetched.has(upcoming)) return
    this.api.getTask(upcoming).then(
      task => this.prefetched.set(upcoming, task),
      () => undefined, // prefetch is best-effort; advance() refetches
    )
  }

  toggleSegment(segmentId: number): void {
    if (this.selected.has(segmentId)) {
      this.selected.delete(segmentId)
    } else {
      this.selected.add(segmentId)
    }
    if (this.selected.size > 0) this.flag = 'none'
  }

  addBox(box: Box): void {
    this.boxes.push(box)
    this.flag = 'none'
  }

  removeBox(index: number): void {
    this.boxes.splice(index, 1)
  }

  setFlag(flag: Flag): void {
    // at most one flag active; flagging clears manual selections
    this.flag = this.flag === flag ? 'none' : flag
    if (this.flag !== 'none') {
      this.selected.clear()
      this.boxes = []
    }
  }

  get canSubmit(): boolean {
    return this.phase === 'annotating' &&
      (this.flag !== 'none' || this.selected.size > 0 || this.boxes.length > 0)
  }

  private buildSubmission(): Submission {
    if (!this.task) throw new Error('no task loaded')
    return {
      question_id: this.task.question_id,
      selected_segment_ids: [...this.selected].sort((a, b) => a - b),
      boxes: [...this.boxes],
      flag: this.flag,
      annotator_id: this.annotatorId,
    }
  }

  /**
   * Submit the current state. A server warning (e.g. count_mismatch)
   * holds the task in the 'warned' phase so the annotator can revise;
   * confirmSubmit() sends it anyway.
   */
  async submit(): Promise<void> {
    if (!this.canSubmit || this.inFlight) return
    this.inFlight = true
    try {
      const result = await this.api.postAnnotation(this.buildSubmission())
      if (result.warning && this.phase === 'annotating') {
        this.warning = result.warning
        this.phase = 'warned'
        return
      }
      this.completed += 1
      await this.advance()
    } finally {
      this.inFlight = false
    }
  }

  /** Accept the warned submission as-is and move on. */
  async confirmSubmit(): Promise<void> {
    if (this.phase !== 'warned') return
    this.completed += 1
    this.warning = null
    await this.advance()
  }

  /** Go back to editing after a warning. */
  revise(): void {
    if (this.phase !== 'warned') return
    this.warning = null
    this.phase = 'annotating'
  }
}
