/**
 * Deterministic sentence encoder: hashed word n-grams projected into a
 * fixed-dimension space, l2-normalized.
 *
 * Near-identical descriptions share almost all n-grams and land close in
 * cosine similarity; unrelated texts scatter near orthogonality. All
 * arithmetic is integer hashing plus float64 accumulation, so output is
 * bit-identical across runs and platforms for a pinned model.
 */

import { ModelSpec } from "./models.js";

/** FNV-1a 32-bit over a UTF-16 code-unit stream. */
function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export function tokenize(text: string): string[] {
  return text.toLowerCase().match(/[a-z0-9]+/g) ?? [];
}

function features(tokens: string[], bigrams: boolean): string[] {
  const out = [...tokens];
  if (bigrams) {
    for (let i = 0; i + 1 < tokens.length; i++) {
      out.push(`${tokens[i]}_${tokens[i + 1]}`);
    }
  }
  return out;
}

export function embed(text: string, model: ModelSpec): number[] {
  const vector = new Array<number>(model.dimension).fill(0);
  const tokens = tokenize(text);
  for (const feature of features(tokens, model.bigrams)) {
    const hash = fnv1a(`${model.seed}:${feature}`);
    const index = hash % model.dimension;
    // take the sign from bits uncorrelated with the index
    const sign = (hash >>> 16) & 1 ? 1 : -1;
    vector[index] += sign;
  }
  let norm = 0;
  for (const value of vector) norm += value * value;
  norm = Math.sqrt(norm);
  if (norm > 0) {
    for (let i = 0; i < vector.length; i++) vector[i] /= norm;
  }
  return vector;
}

export function cosine(a: number[], b: number[]): number {
  let dot = 0;
  for (let i = 0; i < a.length; i++) dot += a[i] * b[i];
  return dot;
}
