import { beforeEach, describe, expect, it } from 'vitest'
import { AnnotationSession } from '../src/session.js'
import type { Assignment, Submission, SubmitResult, TaskPayload } from '../src/types.js'
import type { ApiClient } from '../src/api.js'

/** In-memory stand-in implementing the service contract for the 3 fixture tasks. */
class MockApi {
  submissions: Submission[] = []
  tasks: Record<number, TaskPayload> = {
    501: task(501, 'How many animals are there?', '2'),
    502: task(502, 'What is in the corner?', 'a sign'),
    503: task(503, 'Is it a nice day?', 'maybe'),
  }

  async getAssignment(annotator: string): Promise<Assignment> {
    const done = new Set(this.submissions.filter(s => s.annotator_id === annotator)
      .map(s => s.question_id))
    const all = [501, 502, 503]
    return {
      annotator_id: annotator,
      image_ids: [1],
      pending: all.filter(q => !done.has(q)),
      completed: all.filter(q => done.has(q)),
    }
  }

  async getTask(qid: number): Promise<TaskPayload> {
    return this.tasks[qid]
  }

  async postAnnotation(submission: Submission): Promise<SubmitResult> {
    this.submissions.push(structuredClone(submission))
    let warning: string | null = null
    const t = this.tasks[submission.question_id]
    if (t.question.toLowerCase().startsWith('how many') && submission.flag === 'none') {
      const count = submission.selected_segment_ids.length + submission.boxes.length
      if (count !== Number(t.answer)) warning = 'count_mismatch'
    }
    return { status: 'accepted', warning }
  }

  async getExport(): Promise<Submission[]> {
    const latest = new Map<string, Submission>()
    for (const s of this.submissions) {
      latest.set(`${s.question_id}:${s.annotator_id}`, s)
    }
    return [...latest.values()]
  }
}

function task(qid: number, question: string, answer: string): TaskPayload {
  return {
    question_id: qid,
    question,
    answer,
    image: { image_id: 1, url: '/static/images/img001.png', width: 16, height: 16 },
    segments: [
      { segment_id: 11, category: 'cat', display_color: 0, rle: { size: [16, 16], counts: [256] } },
      { segment_id: 12, category: 'dog', display_color: 1, rle: { size: [16, 16], counts: [256] } },
      { segment_id: 13, category: 'ball', display_color: 2, rle: { size: [16, 16], counts: [256] } },
    ],
  }
}

describe('AnnotationSession', () => {
  let api: MockApi
  let session: AnnotationSession

  beforeEach(async () => {
    api = new MockApi()
    session = new AnnotationSession(api as unknown as ApiClient, 'w1')
    await session.start()
  })

  it('loads the first pending task', () => {
    expect(session.phase).toBe('annotating')
    expect(session.task?.question_id).toBe(501)
    expect(session.total).toBe(3)
  })

  it('blocks submission with nothing selected and no flag', async () => {
    expect(session.canSubmit).toBe(false)
    await session.submit()
    expect(api.submissions).toHaveLength(0)
  })

  it('accepts a matching how-many selection without warning', async () => {
    session.toggleSegment(11)
    session.toggleSegment(12)
    await session.submit()
    expect(session.phase).toBe('annotating')
    expect(session.task?.question_id).toBe(502)
    expect(api.submissions).toHaveLength(1)
    expect(api.submissions[0].selected_segment_ids).toEqual([11, 12])
  })

  it('surfaces the count warning and allows revision (last write wins)', async () => {
    session.toggleSegment(11)
    await session.submit()
    expect(session.phase).toBe('warned')
    expect(session.warning).toBe('count_mismatch')

    session.revise()
    expect(session.phase).toBe('annotating')
    session.toggleSegment(12)
    await session.submit()
    expect(session.phase).toBe('annotating')
    expect(session.task?.question_id).toBe(502)

    const exported = await api.getExport()
    const rows = exported.filter(s => s.question_id === 501)
    expect(rows).toHaveLength(1)
    expect(rows[0].selected_segment_ids).toEqual([11, 12])
  })

  it('allows confirming a warned submission as-is', async () => {
    session.toggleSegment(11)
    await session.submit()
    expect(session.phase).toBe('warned')
    await session.confirmSubmit()
    expect(session.task?.question_id).toBe(502)
    expect((await api.getExport())[0].selected_segment_ids).toEqual([11])
  })

  it('gray flag submits with nothing selected', async () => {
    session.setFlag('ambiguous')
    expect(session.canSubmit).toBe(true)
    await session.submit()
    expect(api.submissions[0].flag).toBe('ambiguous')
    expect(api.submissions[0].selected_segment_ids).toEqual([])
  })

  it('flagging clears selections and toggling a segment clears the flag', () => {
    session.toggleSegment(11)
    session.setFlag('full_image')
    expect(session.selected.size).toBe(0)
    expect(session.flag).toBe('full_image')
    session.toggleSegment(12)
    expect(session.flag).toBe('none')
  })

  it('selection state mirrors toggles exactly', () => {
    session.toggleSegment(11)
    session.toggleSegment(13)
    session.toggleSegment(11)
    expect([...session.selected]).toEqual([13])
  })

  it('walks the whole assignment to done', async () => {
    session.toggleSegment(11)
    session.toggleSegment(12)
    await session.submit()
    session.addBox({ x: 1, y: 1, w: 3, h: 3 })
    await session.submit()
    session.setFlag('ambiguous')
    await session.submit()
    expect(session.phase).toBe('done')
    expect(session.completed).toBe(3)
    expect(api.submissions).toHaveLength(3)
  })

  it('resumes a partially completed assignment', async () => {
    session.toggleSegment(11)
    session.toggleSegment(12)
    await session.submit()
    const again = new AnnotationSession(api as unknown as ApiClient, 'w1')
    await again.start()
    expect(again.completed).toBe(1)
    expect(again.task?.question_id).toBe(502)
  })
})
