/**
 * Feature extraction for (span, candidate) pairs.
 *
 * Two ingredients feed the scorer:
 *  - a fixed surface-overlap prior identical to the serving-side lexical
 *    baseline, so an untrained model scores exactly like that baseline;
 *  - hashed conjunction features (span token x candidate label, plus a
 *    per-candidate bias) whose embeddings are the trainable part. These
 *    let the model learn pairings the surface prior cannot see, such as
 *    a mention word that never shares characters with its gold label.
 */

export const PAD_TOKEN = '<pad>';

const NON_ALNUM = /[^a-z0-9]+/g;

export function tokenSet(text: string): Set<string> {
  const out = new Set<string>();
  for (const tok of text.toLowerCase().split(NON_ALNUM)) {
    if (tok) out.add(tok);
  }
  return out;
}

export function trigramSet(text: string): Set<string> {
  const squeezed = text.toLowerCase().replace(NON_ALNUM, '');
  if (squeezed.length === 0) return new Set();
  if (squeezed.length < 3) return new Set([squeezed]);
  const out = new Set<string>();
  for (let i = 0; i + 3 <= squeezed.length; i++) {
    out.add(squeezed.slice(i, i + 3));
  }
  return out;
}

/** Surface prior: token-overlap fraction plus character-trigram Jaccard. */
export function lexicalPrior(spanText: string, candidate: string): number {
  const spanTokens = tokenSet(spanText);
  const candTokens = tokenSet(candidate);
  let hit = 0;
  for (const tok of candTokens) {
    if (spanTokens.has(tok)) hit++;
  }
  const overlap = candTokens.size ? hit / candTokens.size : 0;
  const spanTri = trigramSet(spanText);
  const candTri = trigramSet(candidate);
  let inter = 0;
  for (const tri of candTri) {
    if (spanTri.has(tri)) inter++;
  }
  const union = spanTri.size + candTri.size - inter;
  const jaccard = union ? inter / union : 0;
  return overlap + jaccard;
}

/** FNV-1a over UTF-16 code units, folded into the feature table. */
export function hashFeature(key: string, dim: number): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < key.length; i++) {
    h ^= key.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return (h >>> 0) % dim;
}

export interface CandidateFeatures {
  /** hashed feature table rows */
  indices: number[];
  /** weight per row; token conjunctions share mass so span length cancels */
  weights: number[];
  /** the fixed surface prior */
  prior: number;
}

/**
 * Hashed (span token x candidate) conjunctions. Deliberately no
 * span-independent candidate feature: a bias that fires on every request
 * only gets balancing negative pressure when its candidate happens to sit
 * in another gold's window, so across epochs the rarely-contested
 * candidates drift upward and swamp the informative conjunctions.
 */
export function featurize(
  spanText: string,
  candidate: string,
  task: string,
  dim: number
): CandidateFeatures {
  const indices: number[] = [];
  const weights: number[] = [];
  const toks = [...tokenSet(spanText)];
  const w = toks.length ? 1.0 / toks.length : 0;
  for (const tok of toks) {
    indices.push(hashFeature(`${task}|${tok}|${candidate}`, dim));
    weights.push(w);
  }
  return { indices, weights, prior: lexicalPrior(spanText, candidate) };
}
