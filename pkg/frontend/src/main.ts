import { ApiClient } from './api'
import { ExplorerApp } from './app'

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (!node) {
    throw new Error(`missing element #${id}`)
  }
  return node as T
}

const app = new ExplorerApp(new ApiClient(), {
  videoList: el('video-list'),
  queryInput: el<HTMLInputElement>('query-input'),
  submitButton: el<HTMLButtonElement>('submit-button'),
  thresholdSlider: el<HTMLInputElement>('threshold-slider'),
  thresholdValue: el('threshold-value'),
  heatmap: el('heatmap'),
  strip: el('strip'),
  count: el('count'),
  errorBanner: el('error-banner'),
  reloadButton: el<HTMLButtonElement>('reload-button'),
})

void app.loadVideos()
