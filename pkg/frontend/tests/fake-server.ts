// In-memory stand-in for the detection service, close enough for client
// tests: preview recomputes mean + correction with a strict comparison,
// verdicts append to a log, feedback derives from latest verdicts.

import type { FetchLike } from '../src/api.js';
import type { StoredVerdict, TracePoint, UnitRef } from '../src/types.js';

export interface FakeServerOptions {
  runId?: string;
  values?: number[];
  correction?: number;
  /** When set, /preview ignores the math and returns these indices. */
  scriptedPreview?: (correction: number) => number[];
  failVerdicts?: boolean;
}

export interface FakeServer {
  fetch: FetchLike;
  verdictLog: StoredVerdict[];
  previewCalls: number[];
  expectedIndices(correction: number): number[];
}

const DEFAULT_VALUES = [0.05, -0.1, 0.32, 0.07, 0.41, -0.02, 0.18, 0.03, 0.29, -0.2];

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export function makeFakeServer(options: FakeServerOptions = {}): FakeServer {
  const runId = options.runId ?? 'run-1';
  const values = options.values ?? DEFAULT_VALUES;
  let storedCorrection = options.correction ?? 0;
  const verdictLog: StoredVerdict[] = [];
  const previewCalls: number[] = [];

  const mean = values.reduce((a, b) => a + b, 0) / values.length;
  const expectedIndices = (correction: number) =>
    values.map((v, i) => [v, i] as const).filter(([v]) => v > mean + correction).map(([, i]) => i);

  const points: TracePoint[] = values.map((sim, i) => ({ i, t: i, sim }));

  const summary = {
    run_id: runId,
    source_id: 'vid-1',
    kind: 'video',
    created_at: '2026-02-03T10:00:00+00:00',
    threshold: mean,
    unit_count: values.length,
  };

  const fetchImpl: FetchLike = async (input, init) => {
    const url = new URL(input, 'http://fake.local');
    const path = url.pathname;
    const method = (init?.method ?? 'GET').toUpperCase();

    if (path === '/api/runs' && method === 'GET') {
      return json({ schema_version: 1, runs: [summary] });
    }
    if (path === `/api/runs/${runId}` && method === 'GET') {
      return json({ schema_version: 1, ...summary, config: {}, artifacts: {} });
    }
    if (path === `/api/runs/${runId}/trace` && method === 'GET') {
      return json({
        schema_version: 1,
        header: {
          source_id: 'vid-1',
          query: 'smoking',
          correction: storedCorrection,
          threshold: mean + storedCorrection,
          n: values.length,
          multi_word_query: false,
        },
        points,
      });
    }
    if (path === `/api/runs/${runId}/preview` && method === 'GET') {
      const correction = Number(url.searchParams.get('correction'));
      if (Number.isNaN(correction)) return json({ error: 'correction required' }, 400);
      previewCalls.push(correction);
      const indices = options.scriptedPreview
        ? options.scriptedPreview(correction)
        : expectedIndices(correction);
      return json({
        schema_version: 1,
        run_id: runId,
        correction,
        threshold: mean + correction,
        indices,
      });
    }
    if (path === `/api/runs/${runId}/verdicts` && method === 'POST') {
      if (options.failVerdicts) return json({ error: 'storage down' }, 500);
      const body = JSON.parse(String(init?.body)) as Omit<StoredVerdict, 'run_id' | 'decided_at'>;
      if (body.unit < 0 || body.unit >= values.length) {
        return json({ error: `unknown unit ${body.unit}` }, 404);
      }
      const stored: StoredVerdict = { ...body, run_id: runId, decided_at: 'now' };
      verdictLog.push(stored);
      return json({ schema_version: 1, stored });
    }
    if (path === `/api/runs/${runId}/verdicts` && method === 'GET') {
      const latest: Record<string, StoredVerdict> = {};
      for (const v of verdictLog) latest[String(v.unit)] = v;
      return json({ schema_version: 1, latest, history_length: verdictLog.length });
    }
    if (path === '/api/export/feedback' && method === 'GET') {
      const latest = new Map<number, StoredVerdict>();
      for (const v of verdictLog) latest.set(v.unit, v);
      const fps: UnitRef[] = [];
      const fns: UnitRef[] = [];
      for (const unit of [...latest.keys()].sort((a, b) => a - b)) {
        const v = latest.get(unit)!;
        if (v.predicted_label && !v.human_label) fps.push({ run_id: runId, unit });
        if (!v.predicted_label && v.human_label) fns.push({ run_id: runId, unit });
      }
      return json({
        schema_version: 1,
        generated_at: 'now',
        false_positives: fps,
        false_negatives: fns,
      });
    }
    if (path === '/api/config/correction' && method === 'PATCH') {
      storedCorrection = (JSON.parse(String(init?.body)) as { value: number }).value;
      return json({ schema_version: 1, version: 1, key: 'correction', value: storedCorrection });
    }
    if (path === '/api/config/correction' && method === 'GET') {
      return json({ schema_version: 1, value: storedCorrection, version: 1 });
    }
    return json({ error: `no route ${method} ${path}` }, 404);
  };

  return { fetch: fetchImpl, verdictLog, previewCalls, expectedIndices };
}
