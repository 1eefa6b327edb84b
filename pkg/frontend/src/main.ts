import { ApiClient, ApiError } from './api.js';
import { chronologicalChart, sortedChart } from './charts.js';
import { ReviewQueue } from './queue.js';
import { RunView, debounce } from './state.js';
import type { FeedbackResponse, RunSummary } from './types.js';

const api = new ApiClient('');

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(message: string): void {
  const banner = el<HTMLDivElement>('error-banner');
  banner.textContent = message;
  banner.hidden = false;
  setTimeout(() => {
    banner.hidden = true;
  }, 6000);
}

async function refreshExportPanel(): Promise<FeedbackResponse | null> {
  try {
    const feedback = await api.exportFeedback();
    el<HTMLElement>('fp-list').innerHTML = feedback.false_positives
      .map((u) => `<li>${u.run_id} / unit ${u.unit}</li>`)
      .join('');
    el<HTMLElement>('fn-list').innerHTML = feedback.false_negatives
      .map((u) => `<li>${u.run_id} / unit ${u.unit}</li>`)
      .join('');
    return feedback;
  } catch (err) {
    showError(`feedback export failed: ${String(err)}`);
    return null;
  }
}

function renderCharts(view: RunView): void {
  el<HTMLDivElement>('chart-chrono-host').innerHTML = chronologicalChart(
    view.points,
    view.threshold,
    view.highlighted,
  );
  el<HTMLDivElement>('chart-sorted-host').innerHTML = sortedChart(
    view.points,
    view.threshold,
    view.highlighted,
  );
  el<HTMLElement>('threshold-readout').textContent =
    `line ${view.threshold.toFixed(4)} (c=${view.correction.toFixed(3)}), ` +
    `${view.highlighted.size} above`;
}

function renderQueue(queue: ReviewQueue, view: RunView): void {
  const host = el<HTMLDivElement>('queue-host');
  const item = queue.current();
  if (!item) {
    host.innerHTML = `<p class="done">queue empty — ${queue.items.length} reviewed</p>`;
    return;
  }
  const thumb = view.points.length
    ? `<img src="${api.frameUrl(queue.runId, item.unit)}" alt="frame ${item.unit}" width="224" height="224">`
    : '';
  const badges = queue.items
    .filter((i) => i.status === 'error')
    .map((i) => `<span class="badge error" title="${i.error ?? ''}">unit ${i.unit} failed</span>`)
    .join('');
  host.innerHTML =
    `${thumb}<p>unit <b>${item.unit}</b> — predicted ${item.predicted ? 'smoking' : 'clear'} ` +
    `(${queue.remaining()} left)</p>` +
    `<p class="hint">y = confirm, n = reject, u = undo</p>` +
    `<div class="badges">${badges}</div>`;
}

async function openRun(summary: RunSummary): Promise<void> {
  const view = new RunView(api, summary.run_id);
  try {
    await view.load();
  } catch (err) {
    showError(`failed to load run: ${String(err)}`);
    return;
  }
  renderCharts(view);

  const detail = await api.getRun(summary.run_id);
  const preview = await api.preview(summary.run_id, view.correction);
  const units = preview.indices.map((unit) => ({ unit, predicted: true }));
  const queue = new ReviewQueue(api, summary.run_id, units);
  renderQueue(queue, view);
  el<HTMLElement>('run-title').textContent =
    `${detail.run_id} — ${detail.source_id} (${detail.kind}, ${detail.unit_count} units)`;

  const slider = el<HTMLInputElement>('correction-slider');
  slider.value = String(view.correction);
  el<HTMLElement>('slider-readout').textContent = Number(slider.value).toFixed(3);
  const previewAt = debounce(async (value: number) => {
    try {
      const resp = await view.applyCorrection(value);
      if (resp) renderCharts(view);
    } catch (err) {
      showError(`preview failed: ${String(err)}`);
    }
  }, 150);
  slider.oninput = () => {
    el<HTMLElement>('slider-readout').textContent = Number(slider.value).toFixed(3);
    previewAt(Number(slider.value));
  };
  el<HTMLButtonElement>('commit-correction').onclick = async () => {
    try {
      const version = await view.commitCorrection();
      showError(`correction committed (config v${version})`);
    } catch (err) {
      showError(`commit failed: ${String(err)}`);
    }
  };

  document.onkeydown = async (event) => {
    try {
      if (event.key === 'y') await queue.decide(true);
      else if (event.key === 'n') await queue.decide(false);
      else if (event.key === 'u') await queue.undo();
      else return;
    } catch (err) {
      showError(err instanceof ApiError ? err.message : String(err));
    }
    renderQueue(queue, view);
    await refreshExportPanel();
  };
}

async function boot(): Promise<void> {
  let runs: RunSummary[];
  try {
    runs = (await api.listRuns()).runs;
  } catch (err) {
    showError(`cannot reach the detection service: ${String(err)}`);
    return;
  }
  const list = el<HTMLUListElement>('run-list');
  list.innerHTML = runs.length
    ? runs
        .map(
          (r) =>
            `<li><a href="#" data-run="${r.run_id}">${r.run_id}</a> ` +
            `<span class="meta">${r.kind} · ${r.source_id}</span></li>`,
        )
        .join('')
    : '<li class="meta">no runs yet — use the CLI scan command</li>';
  list.querySelectorAll('a[data-run]').forEach((a) => {
    a.addEventListener('click', (event) => {
      event.preventDefault();
      const runId = (a as HTMLAnchorElement).dataset.run!;
      const summary = runs.find((r) => r.run_id === runId)!;
      void openRun(summary);
    });
  });
  await refreshExportPanel();
}

void boot();
