import type { Box } from './types.js'

export const MIN_DRAG_PX = 2

/**
 * Turn a drag gesture (display coordinates) into a pixel-space box.
 * `scale` is display pixels per image pixel. Drags under MIN_DRAG_PX in
 * either direction are discarded; the result clamps to image bounds.
 */
export function dragToBox(
  startX: number, startY: number, endX: number, endY: number,
  scale: number, imageWidth: number, imageHeight: number,
): Box | null {
  const x0 = Math.min(startX, endX) / scale
  const y0 = Math.min(startY, endY) / scale
  const x1 = Math.max(startX, endX) / scale
  const y1 = Math.max(startY, endY) / scale
  if ((x1 - x0) * scale < MIN_DRAG_PX || (y1 - y0) * scale < MIN_DRAG_PX) return null

  const cx0 = Math.max(0, Math.min(Math.floor(x0), imageWidth - 1))
  const cy0 = Math.max(0, Math.min(Math.floor(y0), imageHeight - 1))
  const cx1 = Math.min(imageWidth, Math.max(Math.ceil(x1), cx0 + 1))
  const cy1 = Math.min(imageHeight, Math.max(Math.ceil(y1), cy0 + 1))
  const w = cx1 - cx0
  const h = cy1 - cy0
  if (w < 1 || h < 1) return null
  return { x: cx0, y: cy0, w, h }
}
