import { describe, expect, it } from 'vitest'
import { TINT_ALPHA, colorOf, overlayPixels } from '../src/overlay.js'
import { encodeRle } from '../src/rle.js'
import type { SegmentOverlay } from '../src/types.js'

function segmentFromBits(bits: number[], h: number, w: number, color = 0): SegmentOverlay {
  return {
    segment_id: 1,
    category: 'thing',
    display_color: color,
    rle: encodeRle(Uint8Array.from(bits), h, w),
  }
}

describe('overlayPixels', () => {
  it('leaves background fully transparent', () => {
    const seg = segmentFromBits([0, 0, 0, 0], 2, 2)
    const rgba = overlayPixels(seg, 2, 2)
    expect([...rgba]).toEqual(new Array(16).fill(0))
  })

  it('tints interior pixels with the translucent alpha', () => {
    // 4x4 solid block: pixel (1,1)..(2,2) would be interior only if the
    // block did not touch the border; a full block is all edge
    const bits = new Array(16).fill(1)
    const seg = segmentFromBits(bits, 4, 4)
    const rgba = overlayPixels(seg, 4, 4)
    expect(rgba[3]).toBe(255) // corner is an outline pixel
  })

  it('separates outline and interior alpha', () => {
    const bits = new Array(25).fill(0)
    for (let r = 1; r <= 3; r++) for (let c = 1; c <= 3; c++) bits[r * 5 + c] = 1
    const seg = segmentFromBits(bits, 5, 5, 2)
    const rgba = overlayPixels(seg, 5, 5)
    const alphaAt = (r: number, c: number) => rgba[(r * 5 + c) * 4 + 3]
    expect(alphaAt(1, 1)).toBe(255) // boundary of the blob
    expect(alphaAt(2, 2)).toBe(Math.round(TINT_ALPHA * 255)) // interior
    expect(alphaAt(0, 0)).toBe(0) // outside
    const [r, g, b] = colorOf(2)
    expect(rgba[(2 * 5 + 2) * 4]).toBe(r)
    expect(rgba[(2 * 5 + 2) * 4 + 1]).toBe(g)
    expect(rgba[(2 * 5 + 2) * 4 + 2]).toBe(b)
  })

  it('palette wraps around', () => {
    expect(colorOf(0)).toEqual(colorOf(9))
  })
})
