/** DOM wiring: render functions are pure in (state) -> DOM mutations;
 * event handlers route through the state transitions in model.ts. */

import { ApiClient, ApiError, VideoInfo } from './api'
import {
  ExplorerState,
  applyError,
  applyResult,
  beginRequest,
  heatmapCells,
  initialState,
  selectedCountText,
  setThreshold,
} from './model'

export interface Elements {
  videoList: HTMLElement
  queryInput: HTMLInputElement
  submitButton: HTMLButtonElement
  thresholdSlider: HTMLInputElement
  thresholdValue: HTMLElement
  heatmap: HTMLElement
  strip: HTMLElement
  count: HTMLElement
  errorBanner: HTMLElement
  reloadButton: HTMLButtonElement
}

export class ExplorerApp {
  private state: ExplorerState = initialState()
  private videos: VideoInfo[] = []

  constructor(
    private readonly api: ApiClient,
    private readonly el: Elements
  ) {
    el.submitButton.addEventListener('click', () => void this.submit())
    el.queryInput.addEventListener('keydown', (ev) => {
      if (ev.key === 'Enter') {
        void this.submit()
      }
    })
    el.thresholdSlider.addEventListener('input', () => {
      this.state = setThreshold(this.state, Number(el.thresholdSlider.value))
      this.render()
    })
    el.reloadButton.addEventListener('click', () => void this.loadVideos())
  }

  async loadVideos(): Promise<void> {
    try {
      this.videos = await this.api.videos()
      this.state = { ...this.state, error: null }
    } catch (err) {
      this.videos = []
      this.state = { ...this.state, error: describe(err) }
    }
    this.renderVideoList()
    this.render()
  }

  async submit(): Promise<void> {
    const query = this.el.queryInput.value.trim()
    const videoId = this.state.videoId
    if (!query || !videoId || this.state.requestInFlight) {
      return
    }
    this.state = { ...this.state, query }
    this.state = beginRequest(this.state)
    const seq = this.state.requestSeq
    this.render()
    try {
      const result = await this.api.summarize(videoId, query)
      this.state = applyResult(this.state, seq, result)
    } catch (err) {
      this.state = applyError(this.state, seq, describe(err))
    }
    this.render()
  }

  private renderVideoList(): void {
    this.el.videoList.replaceChildren()
    if (this.videos.length === 0) {
      const empty = document.createElement('li')
      empty.className = 'empty'
      empty.textContent = 'No videos available.'
      this.el.videoList.appendChild(empty)
      return
    }
    for (const video of this.videos) {
      const item = document.createElement('li')
      const button = document.createElement('button')
      button.textContent = `${video.video_id} (${video.original_length} frames)`
      button.title = video.query_hint
      button.addEventListener('click', () => {
        this.state = { ...this.state, videoId: video.video_id }
        this.renderVideoList()
      })
      if (video.video_id === this.state.videoId) {
        button.classList.add('active')
      }
      item.appendChild(button)
      this.el.videoList.appendChild(item)
    }
  }

  private render(): void {
    const { result, threshold, error, requestInFlight } = this.state
    this.el.thresholdValue.textContent = String(threshold)
    this.el.submitButton.disabled = requestInFlight
    this.el.errorBanner.textContent = error ?? ''
    this.el.errorBanner.hidden = error === null

    this.el.heatmap.replaceChildren()
    this.el.strip.replaceChildren()
    if (!result) {
      this.el.count.textContent = ''
      return
    }
    const cells = heatmapCells(result, threshold)
    for (const cell of cells) {
      const div = document.createElement('div')
      div.className = 'cell'
      div.style.backgroundColor = cell.color
      div.title = `frame ${cell.index}: level ${cell.label}`
      this.el.heatmap.appendChild(div)

      const strip = document.createElement('div')
      strip.className = cell.selected ? 'cell on' : 'cell off'
      this.el.strip.appendChild(strip)
    }
    this.el.count.textContent = selectedCountText(
      result.predicted_labels,
      threshold
    )
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `service error: ${err.code}`
  }
  return `service unreachable: ${String(err)}`
}
