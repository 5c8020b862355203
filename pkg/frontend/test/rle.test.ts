import { describe, expect, it } from 'vitest'
import { decodeRle, encodeRle } from '../src/rle.js'

describe('decodeRle', () => {
  it('decodes an all-background mask', () => {
    expect([...decodeRle({ size: [2, 2], counts: [4] })]).toEqual([0, 0, 0, 0])
  })

  it('decodes an all-foreground mask', () => {
    expect([...decodeRle({ size: [2, 2], counts: [0, 4] })]).toEqual([1, 1, 1, 1])
  })

  it('traverses column-major: counts [0,1,3] set only pixel (0,0)', () => {
    expect([...decodeRle({ size: [2, 2], counts: [0, 1, 3] })]).toEqual([1, 0, 0, 0])
  })

  it('decodes interior runs: [1,2,1] sets (1,0) and (0,1)', () => {
    // column-major bits 0,1,1,0 -> row-major (1,0) and (0,1)
    expect([...decodeRle({ size: [2, 2], counts: [1, 2, 1] })]).toEqual([0, 1, 1, 0])
  })

  it('rejects counts that do not cover the grid', () => {
    expect(() => decodeRle({ size: [2, 2], counts: [3] })).toThrow(/sum/)
  })

  it('round-trips random masks', () => {
    let state = 12345
    const rand = () => (state = (state * 48271) % 2147483647) / 2147483647
    for (let trial = 0; trial < 50; trial++) {
      const h = 1 + Math.floor(rand() * 12)
      const w = 1 + Math.floor(rand() * 12)
      const bits = new Uint8Array(h * w)
      for (let i = 0; i < bits.length; i++) bits[i] = rand() < 0.5 ? 1 : 0
      const rle = encodeRle(bits, h, w)
      expect([...decodeRle(rle)]).toEqual([...bits])
    }
  })
})
