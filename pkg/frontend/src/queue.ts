import type { ApiClient } from './api.js';

export type ItemStatus = 'pending' | 'done' | 'error';

export interface QueueItem {
  unit: number;
  predicted: boolean;
  status: ItemStatus;
  human?: boolean;
  error?: string;
}

/**
 * Keyboard-driven confirm/reject queue. Every decision POSTs immediately;
 * a failed POST re-queues the item with an error badge instead of losing
 * it. Undo submits a superseding verdict (history stays on the server).
 */
export class ReviewQueue {
  items: QueueItem[];
  private decided: number[] = []; // units in decision order, for undo

  constructor(
    private readonly api: ApiClient,
    readonly runId: string,
    units: { unit: number; predicted: boolean }[],
    private readonly reviewer = 'review-ui',
  ) {
    this.items = units.map((u) => ({ unit: u.unit, predicted: u.predicted, status: 'pending' }));
  }

  current(): QueueItem | null {
    return this.items.find((item) => item.status === 'pending') ?? null;
  }

  remaining(): number {
    return this.items.filter((item) => item.status === 'pending').length;
  }

  /** Decide the current item; true = confirm the prediction's label. */
  async decide(human: boolean): Promise<QueueItem | null> {
    const item = this.current();
    if (!item) return null;
    try {
      await this.api.submitVerdict(this.runId, {
        unit: item.unit,
        predicted_label: item.predicted,
        human_label: human,
        reviewer: this.reviewer,
      });
      item.status = 'done';
      item.human = human;
      item.error = undefined;
      this.decided.push(item.unit);
    } catch (err) {
      item.status = 'error';
      item.error = String(err);
      // push the failed item to the back of the queue, badge intact
      this.items = this.items.filter((i) => i !== item).concat(item);
    }
    return item;
  }

  /** Retry a previously failed item (it becomes pending again). */
  retry(unit: number): void {
    const item = this.items.find((i) => i.unit === unit && i.status === 'error');
    if (item) {
      item.status = 'pending';
      item.error = undefined;
    }
  }

  /**
   * Undo the most recent decision: a superseding verdict restores agreement
   * with the prediction and the item reopens for review.
   */
  async undo(): Promise<QueueItem | null> {
    const unit = this.decided.pop();
    if (unit === undefined) return null;
    const item = this.items.find((i) => i.unit === unit);
    if (!item) return null;
    await this.api.submitVerdict(this.runId, {
      unit: item.unit,
      predicted_label: item.predicted,
      human_label: item.predicted,
      reviewer: this.reviewer,
    });
    item.status = 'pending';
    item.human = undefined;
    return item;
  }
}
