import { ApiClient } from './api.js'
import { AnnotationSession } from './session.js'
import { dragToBox } from './boxdraw.js'
import { colorOf, overlayPixels } from './overlay.js'
import type { SegmentOverlay } from './types.js'

const SCALE = 24

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing element #${id}`)
  return node as T
}

class App {
  private session: AnnotationSession
  private overlayCanvases = new Map<number, HTMLCanvasElement>()
  private boxMode = false
  private drag: { x: number; y: number } | null = null

  constructor(annotator: string) {
    this.session = new AnnotationSession(new ApiClient(''), annotator)
  }

  async start() {
    try {
      await this.session.start()
      this.render()
    } catch (err) {
      this.showRetry(String(err))
    }
  }

  private showRetry(message: string) {
    const banner = el<HTMLDivElement>('retry-banner')
    banner.hidden = false
    banner.querySelector('span')!.textContent = `Could not reach the service: ${message}`
  }

  private render() {
    const s = this.session
    el<HTMLSpanElement>('progress').textContent = `${s.completed} / ${s.total} tasks`
    const done = el<HTMLDivElement>('done-banner')
    const workspace = el<HTMLDivElement>('workspace')
    done.hidden = s.phase !== 'done'
    workspace.hidden = s.phase === 'done'
    if (s.phase === 'done' || !s.task) return

    el<HTMLSpanElement>('question').textContent = s.task.question
    el<HTMLSpanElement>('answer').textContent = s.task.answer

    this.renderCanvases()
    this.renderLegend()
    this.renderBoxes()
    this.renderFlags()
    this.renderWarning()

    el<HTMLButtonElement>('submit').disabled = !s.canSubmit
    el<HTMLButtonElement>('box-mode').classList.toggle('active', this.boxMode)
  }

  private renderCanvases() {
    const task = this.session.task!
    const stack = el<HTMLDivElement>('canvas-stack')
    const w = task.image.width * SCALE
    const h = task.image.height * SCALE
    stack.style.width = `${w}px`
    stack.style.height = `${h}px`

    const image = el<HTMLImageElement>('photo')
    if (!image.src.endsWith(task.image.url)) image.src = task.image.url
    image.width = w
    image.height = h

    for (const canvas of this.overlayCanvases.values()) canvas.remove()
    this.overlayCanvases.clear()
    for (const segment of task.segments) {
      const canvas = document.createElement('canvas')
      canvas.width = task.image.width
      canvas.height = task.image.height
      canvas.className = 'overlay'
      canvas.style.width = `${w}px`
      canvas.style.height = `${h}px`
      const ctx = canvas.getContext('2d')!
      const pixels = overlayPixels(segment, task.image.width, task.image.height)
      ctx.putImageData(new ImageData(pixels, task.image.width, task.image.height), 0, 0)
      canvas.hidden = !this.session.selected.has(segment.segment_id)
      stack.appendChild(canvas)
      this.overlayCanvases.set(segment.segment_id, canvas)
    }
    this.renderBoxCanvas()
  }

  private renderBoxCanvas() {
    const task = this.session.task!
    const stack = el<HTMLDivElement>('canvas-stack')
    let canvas = document.getElementById('box-canvas') as HTMLCanvasElement | null
    if (!canvas) {
      canvas = document.createElement('canvas')
      canvas.id = 'box-canvas'
      canvas.className = 'overlay'
      stack.appendChild(canvas)
      canvas.addEventListener('mousedown', e => this.onDragStart(e))
      canvas.addEventListener('mouseup', e => this.onDragEnd(e))
    }
    canvas.width = task.image.width * SCALE
    canvas.height = task.image.height * SCALE
    canvas.style.width = canvas.style.height = ''
    const ctx = canvas.getContext('2d')!
    ctx.clearRect(0, 0, canvas.width, canvas.height)
    ctx.lineWidth = 2
    ctx.strokeStyle = '#111'
    for (const box of this.session.boxes) {
      ctx.strokeRect(box.x * SCALE, box.y * SCALE, box.w * SCALE, box.h * SCALE)
    }
    stack.appendChild(canvas) // keep on top
  }

  private onDragStart(e: MouseEvent) {
    if (!this.boxMode) return
    const rect = (e.target as HTMLElement).getBoundingClientRect()
    this.drag = { x: e.clientX - rect.left, y: e.clientY - rect.top }
  }

  private onDragEnd(e: MouseEvent) {
    if (!this.boxMode || !this.drag || !this.session.task) return
    const rect = (e.target as HTMLElement).getBoundingClientRect()
    const box = dragToBox(
      this.drag.x, this.drag.y,
      e.clientX - rect.left, e.clientY - rect.top,
      SCALE, this.session.task.image.width, this.session.task.image.height,
    )
    this.drag = null
    if (box) {
      this.session.addBox(box)
      this.render()
    }
  }

  private renderLegend() {
    const task = this.session.task!
    const legend = el<HTMLUListElement>('legend')
    legend.innerHTML = ''
    task.segments.forEach((segment: SegmentOverlay, index: number) => {
      const [r, g, b] = colorOf(segment.display_color)
      const item = document.createElement('li')
      const label = document.createElement('label')
      const checkbox = document.createElement('input')
      checkbox.type = 'checkbox'
      checkbox.checked = this.session.selected.has(segment.segment_id)
      checkbox.addEventListener('change', () => {
        this.session.toggleSegment(segment.segment_id)
        this.render()
      })
      const swatch = document.createElement('span')
      swatch.className = 'swatch'
      swatch.style.background = `rgb(${r},${g},${b})`
      label.append(checkbox, swatch, `${index + 1}. ${segment.category}`)
      item.appendChild(label)
      legend.appendChild(item)
    })
    if (task.segments.length === 0) {
      const note = document.createElement('li')
      note.textContent = 'No segments here: draw bounding boxes instead.'
      legend.appendChild(note)
      this.boxMode = true
    }
  }

  private renderBoxes() {
    const list = el<HTMLUListElement>('box-list')
    list.innerHTML = ''
    this.session.boxes.forEach((box, index) => {
      const item = document.createElement('li')
      item.textContent = `box ${index + 1}: (${box.x}, ${box.y}) ${box.w}×${box.h} `
      const remove = document.createElement('button')
      remove.textContent = 'delete'
      remove.addEventListener('click', () => {
        this.session.removeBox(index)
        this.render()
      })
      item.appendChild(remove)
      list.appendChild(item)
    })
  }

  private renderFlags() {
    el<HTMLButtonElement>('flag-full').classList.toggle('active', this.session.flag === 'full_image')
    el<HTMLButtonElement>('flag-unsure').classList.toggle('active', this.session.flag === 'ambiguous')
  }

  private renderWarning() {
    const banner = el<HTMLDivElement>('warning-banner')
    banner.hidden = this.session.phase !== 'warned'
    if (this.session.warning) {
      el<HTMLSpanElement>('warning-text').textContent =
        this.session.warning === 'count_mismatch'
          ? 'The number of selections does not match the answer. Revise, or confirm as-is.'
          : this.session.warning
    }
  }

  wire() {
    el<HTMLButtonElement>('submit').addEventListener('click', () => this.submit())
    el<HTMLButtonElement>('box-mode').addEventListener('click', () => {
      this.boxMode = !this.boxMode
      this.render()
    })
    el<HTMLButtonElement>('flag-full').addEventListener('click', () => {
      this.session.setFlag('full_image')
      this.render()
    })
    el<HTMLButtonElement>('flag-unsure').addEventListener('click', () => {
      this.session.setFlag('ambiguous')
      this.render()
    })
    el<HTMLButtonElement>('warning-revise').addEventListener('click', () => {
      this.session.revise()
      this.render()
    })
    el<HTMLButtonElement>('warning-confirm').addEventListener('click', async () => {
      await this.session.confirmSubmit()
      this.render()
    })
    el<HTMLButtonElement>('retry').addEventListener('click', () => {
      el<HTMLDivElement>('retry-banner').hidden = true
      this.start()
    })
    document.addEventListener('keydown', e => this.onKey(e))
  }

  private onKey(e: KeyboardEvent) {
    if (this.session.phase === 'done' || !this.session.task) return
    if (e.key >= '1' && e.key <= '9') {
      const index = Number(e.key) - 1
      const segment = this.session.task.segments[index]
      if (segment) {
        this.session.toggleSegment(segment.segment_id)
        this.render()
      }
    } else if (e.key === 'b' || e.key === 'B') {
      this.boxMode = !this.boxMode
      this.render()
    } else if (e.key === 'Enter') {
      this.submit()
    }
  }

  private async submit() {
    if (!this.session.canSubmit) return
    try {
      await this.session.submit()
      this.render()
    } catch (err) {
      this.showRetry(String(err))
    }
  }
}

const params = new URLSearchParams(window.location.search)
const app = new App(params.get('annotator') ?? 'anonymous')
app.wire()
app.start()
