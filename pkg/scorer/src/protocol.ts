/**
 * Wire protocol shared by the stdio and HTTP servers.
 *
 * A message is either one bare request object or an envelope
 * {"requests": [...]} of at most BATCH_LIMIT requests, answered by
 * {"responses": [...]} in the same order. Every response carries
 * chosen_index plus a scores array aligned with the candidates;
 * padding slots score null and are never chosen. A request id, when
 * present, is echoed back unchanged.
 */

import { z } from 'zod';
import { PAD_TOKEN } from './features.js';
import { chooseIndex } from './serving.js';

export const BATCH_LIMIT = 64;

const requestSchema = z.object({
  id: z.union([z.string(), z.number()]).nullish(),
  task: z.enum(['predicate', 'argument']),
  span_text: z.string(),
  context_text: z.string().nullish(),
  candidates: z.array(z.string()).min(1),
  predicate_hint: z.string().nullish(),
});

export type ScoreRequest = z.infer<typeof requestSchema>;

export interface WindowModel {
  scoreWindow(task: string, spanText: string, candidates: string[]): number[];
}

export interface ScoreResponse {
  id?: string | number;
  chosen_index: number;
  scores: (number | null)[];
}

export class ProtocolError extends Error {}

function answer(req: ScoreRequest, model: WindowModel): ScoreResponse {
  if (req.candidates.every((c) => c === PAD_TOKEN)) {
    throw new ProtocolError('every candidate is padding');
  }
  const scores = model.scoreWindow(req.task, req.span_text, req.candidates);
  const response: ScoreResponse = {
    chosen_index: chooseIndex(scores),
    scores: scores.map((s) => (Number.isFinite(s) ? s : null)),
  };
  if (req.id !== undefined && req.id !== null) response.id = req.id;
  return response;
}

export type WireResult =
  | { ok: true; body: ScoreResponse | { responses: ScoreResponse[] } }
  | { ok: false; error: string };

/** Answer one already-parsed message; never throws. */
export function handleMessage(message: unknown, model: WindowModel): WireResult {
  try {
    if (
      typeof message === 'object' &&
      message !== null &&
      'requests' in message &&
      Array.isArray((message as { requests: unknown }).requests)
    ) {
      const requests = (message as { requests: unknown[] }).requests;
      if (requests.length === 0) {
        throw new ProtocolError('empty request batch');
      }
      if (requests.length > BATCH_LIMIT) {
        throw new ProtocolError(
          `batch of ${requests.length} exceeds limit of ${BATCH_LIMIT}`
        );
      }
      const responses = requests.map((raw) => answer(parseRequest(raw), model));
      return { ok: true, body: { responses } };
    }
    return { ok: true, body: answer(parseRequest(message), model) };
  } catch (err) {
    return { ok: false, error: err instanceof Error ? err.message : String(err) };
  }
}

function parseRequest(raw: unknown): ScoreRequest {
  const parsed = requestSchema.safeParse(raw);
  if (!parsed.success) {
    const issue = parsed.error.issues[0];
    throw new ProtocolError(
      `bad request: ${issue.path.join('.') || '(root)'}: ${issue.message}`
    );
  }
  return parsed.data;
}

/** Answer one NDJSON line; always returns exactly one line of output. */
export function handleLine(line: string, model: WindowModel): string {
  let message: unknown;
  try {
    message = JSON.parse(line);
  } catch {
    return JSON.stringify({ error: 'not valid JSON', kind: 'ProtocolViolationError' });
  }
  const result = handleMessage(message, model);
  if (!result.ok) {
    return JSON.stringify({ error: result.error, kind: 'ProtocolViolationError' });
  }
  return JSON.stringify(result.body);
}
