import { describe, expect, it } from 'vitest';
import { BATCH_LIMIT, handleLine, handleMessage, type WindowModel } from '../src/protocol.js';
import { chooseIndex } from '../src/serving.js';

/** Scores each candidate by its length; pads score -Infinity. */
const lengthModel: WindowModel = {
  scoreWindow(_task, _span, candidates) {
    return candidates.map((c) => (c === '<pad>' ? -Infinity : c.length));
  },
};

function request(extra: Record<string, unknown> = {}): Record<string, unknown> {
  return {
    task: 'argument',
    span_text: 'the couch',
    context_text: 'Eventually prop_1.',
    candidates: ['sofa', 'long_table', '<pad>'],
    predicate_hint: null,
    ...extra,
  };
}

describe('handleMessage', () => {
  it('answers a bare request with argmax and aligned scores', () => {
    const result = handleMessage(request(), lengthModel);
    expect(result.ok).toBe(true);
    if (!result.ok) return;
    const body = result.body as { chosen_index: number; scores: (number | null)[] };
    expect(body.chosen_index).toBe(1);
    expect(body.scores).toEqual([4, 10, null]);
    expect('id' in body).toBe(false);
  });

  it('echoes the id when one is given', () => {
    const result = handleMessage(request({ id: 'r-42' }), lengthModel);
    expect(result.ok).toBe(true);
    if (!result.ok) return;
    expect((result.body as { id?: string }).id).toBe('r-42');
  });

  it('answers envelopes in order', () => {
    const env = {
      requests: [request({ id: 1 }), request({ id: 2, candidates: ['rug'] })],
    };
    const result = handleMessage(env, lengthModel);
    expect(result.ok).toBe(true);
    if (!result.ok) return;
    const responses = (result.body as { responses: { id?: number }[] }).responses;
    expect(responses.map((r) => r.id)).toEqual([1, 2]);
  });

  it('rejects oversized batches', () => {
    const env = { requests: Array.from({ length: BATCH_LIMIT + 1 }, () => request()) };
    const result = handleMessage(env, lengthModel);
    expect(result.ok).toBe(false);
    if (result.ok) return;
    expect(result.error).toContain('65');
  });

  it('rejects requests without candidates', () => {
    const result = handleMessage(request({ candidates: [] }), lengthModel);
    expect(result.ok).toBe(false);
  });

  it('rejects unknown tasks', () => {
    const result = handleMessage(request({ task: 'ranking' }), lengthModel);
    expect(result.ok).toBe(false);
  });

  it('never chooses a pad slot', () => {
    const result = handleMessage(
      request({ candidates: ['<pad>', 'x', '<pad>'] }),
      lengthModel
    );
    expect(result.ok).toBe(true);
    if (!result.ok) return;
    expect((result.body as { chosen_index: number }).chosen_index).toBe(1);
  });

  it('refuses an all-pad window', () => {
    const result = handleMessage(request({ candidates: ['<pad>', '<pad>'] }), lengthModel);
    expect(result.ok).toBe(false);
  });
});

describe('handleLine', () => {
  it('returns one JSON line for one input line', () => {
    const line = handleLine(JSON.stringify(request({ id: 7 })), lengthModel);
    expect(line).not.toContain('\n');
    const parsed = JSON.parse(line);
    expect(parsed.id).toBe(7);
    expect(parsed.chosen_index).toBe(1);
  });

  it('keeps framing on parse failure', () => {
    const parsed = JSON.parse(handleLine('{nope', lengthModel));
    expect(parsed.kind).toBe('ProtocolViolationError');
  });

  it('serializes -Infinity scores as null', () => {
    const line = handleLine(JSON.stringify(request()), lengthModel);
    expect(JSON.parse(line).scores[2]).toBeNull();
  });
});

describe('chooseIndex', () => {
  it('breaks ties toward the lowest index', () => {
    expect(chooseIndex([1, 3, 3, 2])).toBe(1);
  });

  it('skips -Infinity entries', () => {
    expect(chooseIndex([-Infinity, -5, -Infinity])).toBe(1);
  });
});
