/** Pure view-model functions: everything here is a function of the last
 * service response plus local UI state — no inference math, no I/O. */

import type { SummaryResult } from './api'

export const FRAME_COUNT = 199
export const LABEL_NAMES = ['Bad', 'Not Good', 'Good', 'Very Good'] as const
export const LABEL_COLORS = ['#2b2d42', '#5c677d', '#f4a259', '#e63946'] as const

export interface HeatmapCell {
  index: number
  label: number
  color: string
  selected: boolean
}

/** Frames whose predicted label clears the threshold, recomputed
 * client-side so the slider never needs a round trip. */
export function selectFrames(labels: number[], threshold: number): number[] {
  const out: number[] = []
  for (let i = 0; i < labels.length; i++) {
    if (labels[i] >= threshold) {
      out.push(i)
    }
  }
  return out
}

export function heatmapCells(
  result: SummaryResult,
  threshold: number
): HeatmapCell[] {
  if (result.predicted_labels.length !== FRAME_COUNT) {
    throw new Error(
      `expected ${FRAME_COUNT} frame labels, got ${result.predicted_labels.length}`
    )
  }
  const selected = new Set(selectFrames(result.predicted_labels, threshold))
  return result.predicted_labels.map((label, index) => {
    if (!Number.isInteger(label) || label < 0 || label > 3) {
      throw new Error(`label ${label} at frame ${index} outside 0..3`)
    }
    return {
      index,
      label,
      color: LABEL_COLORS[label],
      selected: selected.has(index),
    }
  })
}

export function selectedCountText(labels: number[], threshold: number): string {
  return `${selectFrames(labels, threshold).length}/${labels.length}`
}

export interface ExplorerState {
  videoId: string | null
  query: string
  threshold: number
  result: SummaryResult | null
  requestInFlight: boolean
  /** Sequence number of the newest issued request; responses carrying an
   * older number are discarded as stale. */
  requestSeq: number
  error: string | null
}

export function initialState(): ExplorerState {
  return {
    videoId: null,
    query: '',
    threshold: 2,
    result: null,
    requestInFlight: false,
    requestSeq: 0,
    error: null,
  }
}

export function beginRequest(state: ExplorerState): ExplorerState {
  return {
    ...state,
    requestInFlight: true,
    requestSeq: state.requestSeq + 1,
    error: null,
  }
}

export function applyResult(
  state: ExplorerState,
  seq: number,
  result: SummaryResult
): ExplorerState {
  if (seq !== state.requestSeq) {
    return state // a newer request superseded this response
  }
  return { ...state, result, requestInFlight: false, error: null }
}

export function applyError(
  state: ExplorerState,
  seq: number,
  message: string
): ExplorerState {
  if (seq !== state.requestSeq) {
    return state
  }
  return { ...state, requestInFlight: false, error: message }
}

export function setThreshold(
  state: ExplorerState,
  threshold: number
): ExplorerState {
  if (![1, 2, 3].includes(threshold)) {
    throw new Error(`threshold ${threshold} outside {1,2,3}`)
  }
  return { ...state, threshold }
}
