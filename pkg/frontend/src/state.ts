import type { ApiClient } from './api.js';
import type { PreviewResponse, TracePoint } from './types.js';

/** Trailing-edge debounce for slider input. */
export function debounce<A extends unknown[]>(fn: (...args: A) => void, ms: number) {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), ms);
  };
}

/**
 * View state for one run's trace. The highlighted set is always a verbatim
 * copy of the server's preview/selection response; nothing is recomputed
 * client-side, so the charts can never drift from the authoritative logic.
 */
export class RunView {
  points: TracePoint[] = [];
  threshold = 0;
  correction = 0;
  highlighted: Set<number> = new Set();
  sourceId = '';
  private requestSeq = 0;

  constructor(
    private readonly api: ApiClient,
    readonly runId: string,
  ) {}

  async load(): Promise<void> {
    const trace = await this.api.getTrace(this.runId);
    this.points = trace.points;
    this.sourceId = trace.header.source_id;
    // the stored correction seeds the slider; the preview endpoint is the
    // single source of truth for what is above the line
    await this.applyCorrection(trace.header.correction);
  }

  /**
   * Ask the server what the selection would be at this correction. Stale
   * responses (superseded by a faster slider move) are dropped.
   */
  async applyCorrection(correction: number): Promise<PreviewResponse | null> {
    const ticket = ++this.requestSeq;
    const preview = await this.api.preview(this.runId, correction);
    if (ticket !== this.requestSeq) return null;
    this.correction = preview.correction;
    this.threshold = preview.threshold;
    this.highlighted = new Set(preview.indices);
    return preview;
  }

  async commitCorrection(): Promise<number> {
    const result = await this.api.setCorrection(this.correction);
    return result.version;
  }
}
