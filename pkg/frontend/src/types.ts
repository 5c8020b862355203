export interface Rle {
  size: [number, number] // [height, width]
  counts: number[]
}

export interface Box {
  x: number
  y: number
  w: number
  h: number
}

export type Flag = 'none' | 'full_image' | 'ambiguous'

export interface SegmentOverlay {
  segment_id: number
  category: string
  display_color: number
  rle: Rle
}

export interface TaskPayload {
  question_id: number
  question: string
  answer: string
  image: { image_id: number; url: string; width: number; height: number }
  segments: SegmentOverlay[]
}

export interface Assignment {
  annotator_id: string
  image_ids: number[]
  pending: number[]
  completed: number[]
}

export interface Submission {
  question_id: number
  selected_segment_ids: number[]
  boxes: Box[]
  flag: Flag
  annotator_id: string
}

export interface SubmitResult {
  status: string
  warning: string | null
}
