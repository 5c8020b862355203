import type { SegmentOverlay } from './types.js'
import { decodeRle } from './rle.js'

export const PALETTE: [number, number, number][] = [
  [230, 60, 60],
  [50, 130, 230],
  [60, 200, 90],
  [240, 180, 40],
  [170, 90, 230],
  [70, 210, 200],
  [240, 110, 40],
  [150, 150, 150],
  [120, 80, 40],
]

export function colorOf(displayColor: number): [number, number, number] {
  return PALETTE[((displayColor % PALETTE.length) + PALETTE.length) % PALETTE.length]
}

export const TINT_ALPHA = 0.45

/**
 * Build the RGBA pixels of one segment's translucent tint. Interior pixels
 * carry TINT_ALPHA; boundary pixels (a neighbor outside the mask or the
 * image) are fully opaque so overlapping segments stay distinguishable.
 */
export function overlayPixels(
  segment: SegmentOverlay, width: number, height: number,
): Uint8ClampedArray<ArrayBuffer> {
  const bits = decodeRle(segment.rle)
  const [r, g, b] = colorOf(segment.display_color)
  const rgba = new Uint8ClampedArray(width * height * 4)
  for (let row = 0; row < height; row++) {
    for (let col = 0; col < width; col++) {
      const i = row * width + col
      if (!bits[i]) continue
      const edge =
        row === 0 || row === height - 1 || col === 0 || col === width - 1 ||
        !bits[i - width] || !bits[i + width] || !bits[i - 1] || !bits[i + 1]
      rgba[i * 4] = r
      rgba[i * 4 + 1] = g
      rgba[i * 4 + 2] = b
      rgba[i * 4 + 3] = edge ? 255 : Math.round(TINT_ALPHA * 255)
    }
  }
  return rgba
}
