import type { Rle } from './types.js'

/**
 * Decode run lengths to a row-major 0/1 buffer of length height*width.
 * Runs traverse column-major (down each column) and alternate background
 * then foreground, starting with the background run.
 */
export function decodeRle(rle: Rle): Uint8Array {
  const [height, width] = rle.size
  const total = height * width
  let sum = 0
  for (const c of rle.counts) sum += c
  if (sum !== total) {
    throw new Error(`rle counts sum to ${sum}, expected ${height}x${width}=${total}`)
  }
  const out = new Uint8Array(total)
  let pos = 0
  let value = 0
  for (const count of rle.counts) {
    if (value === 1) {
      for (let k = 0; k < count; k++) {
        const col = Math.floor((pos + k) / height)
        const row = (pos + k) % height
        out[row * width + col] = 1
      }
    }
    pos += count
    value = 1 - value
  }
  return out
}

/** Inverse of decodeRle; used by tests to confirm round trips. */
export function encodeRle(bits: Uint8Array, height: number, width: number): Rle {
  const counts: number[] = []
  let current = 0
  let run = 0
  for (let col = 0; col < width; col++) {
    for (let row = 0; row < height; row++) {
      const v = bits[row * width + col]
      if (v === current) {
        run += 1
      } else {
        counts.push(run)
        current = v
        run = 1
      }
    }
  }
  counts.push(run)
  return { size: [height, width], counts }
}
