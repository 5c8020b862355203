import { afterAll, beforeAll, describe, expect, it } from 'vitest'
import { type ChildProcess, execFileSync, spawn } from 'node:child_process'
import { mkdtempSync } from 'node:fs'
import { tmpdir } from 'node:os'
import { join, resolve } from 'node:path'
import { ApiClient } from '../src/api.js'
import { AnnotationSession } from '../src/session.js'
import { dragToBox } from '../src/boxdraw.js'
import type { Submission } from '../src/types.js'

const REPO_ROOT = resolve(__dirname, '..', '..')

async function waitForServer(base: string, proc: ChildProcess): Promise<void> {
  for (let i = 0; i < 150; i++) {
    if (proc.exitCode !== null) throw new Error(`service exited with ${proc.exitCode}`)
    try {
      const r = await fetch(`${base}/api/export`)
      if (r.ok) return
    } catch {
      // not up yet
    }
    await new Promise(resolve => setTimeout(resolve, 200))
  }
  throw new Error(`service at ${base} did not come up`)
}

function startServer(dataDir: string, port: number, logPath: string): ChildProcess {
  return spawn('python3', [
    '-m', 'vqs', 'serve',
    '--data-dir', dataDir,
    '--port', String(port),
    '--log', logPath,
  ], { cwd: REPO_ROOT, stdio: 'ignore' })
}

function sortedExport(rows: Submission[]): Submission[] {
  return [...rows].sort((a, b) => a.question_id - b.question_id)
}

describe('browser client against the live service', () => {
  let fixtureDir: string
  let procA: ChildProcess
  let procB: ChildProcess
  let baseA: string
  let baseB: string

  beforeAll(async () => {
    fixtureDir = mkdtempSync(join(tmpdir(), 'vqs-ui-'))
    execFileSync('python3', [join(REPO_ROOT, 'scripts', 'make_ui_fixture.py'),
      '--out', fixtureDir])
    const portA = 21000 + Math.floor(Math.random() * 2000)
    const portB = portA + 1
    procA = startServer(fixtureDir, portA, join(fixtureDir, 'ui.log'))
    procB = startServer(fixtureDir, portB, join(fixtureDir, 'scripted.log'))
    baseA = `http://127.0.0.1:${portA}`
    baseB = `http://127.0.0.1:${portB}`
    await waitForServer(baseA, procA)
    await waitForServer(baseB, procB)
  })

  afterAll(() => {
    procA?.kill()
    procB?.kill()
  })

  it('serves the task image as a static asset', async () => {
    const r = await fetch(`${baseA}/static/images/img001.png`)
    expect(r.status).toBe(200)
    expect(r.headers.get('content-type')).toContain('image/png')
  })

  it('produces an export identical to the scripted-HTTP equivalent', async () => {
    // --- drive the client session through the 3-task assignment -----------
    const session = new AnnotationSession(new ApiClient(baseA), 'ui-worker')
    await session.start()
    expect(session.total).toBe(3)

    // task 501: "How many animals are there?" answer 2 -> select 2 segments
    expect(session.task?.question_id).toBe(501)
    expect(session.task?.segments).toHaveLength(3)
    session.toggleSegment(11)
    session.toggleSegment(12)
    await session.submit()
    expect(session.warning).toBeNull()

    // task 502: answer has no segment -> draw a tight box (drag at 8x zoom)
    expect(session.task?.question_id).toBe(502)
    const box = dragToBox(64, 64, 120, 112, 8, 16, 16)
    expect(box).toEqual({ x: 8, y: 8, w: 7, h: 6 })
    session.addBox(box!)
    await session.submit()

    // task 503: ambiguous -> gray flag, nothing selected
    expect(session.task?.question_id).toBe(503)
    session.setFlag('ambiguous')
    await session.submit()
    expect(session.phase).toBe('done')

    const uiExport = await new ApiClient(baseA).getExport()

    // --- scripted-HTTP equivalent against a fresh service instance --------
    const scripted: Submission[] = [
      { question_id: 501, selected_segment_ids: [11, 12], boxes: [], flag: 'none', annotator_id: 'ui-worker' },
      { question_id: 502, selected_segment_ids: [], boxes: [{ x: 8, y: 8, w: 7, h: 6 }], flag: 'none', annotator_id: 'ui-worker' },
      { question_id: 503, selected_segment_ids: [], boxes: [], flag: 'ambiguous', annotator_id: 'ui-worker' },
    ]
    for (const submission of scripted) {
      const r = await fetch(`${baseB}/api/annotation`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(submission),
      })
      expect(r.status).toBe(200)
    }
    const scriptedExport = (await (await fetch(`${baseB}/api/export`)).json()) as Submission[]

    expect(sortedExport(uiExport)).toEqual(sortedExport(scriptedExport))
  })
})
