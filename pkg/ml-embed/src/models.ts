/**
 * Embedding model registry.
 *
 * Every model here is a deterministic hashed n-gram projection: no
 * downloaded weights, bit-identical output for a given model id on any
 * platform. The id doubles as the hash seed, so two models never share a
 * feature space.
 */

export interface ModelSpec {
  id: string;
  dimension: number;
  seed: string;
  /** include word bigrams next to unigrams */
  bigrams: boolean;
}

const REGISTRY: Record<string, ModelSpec> = {
  "hash-ngram-256-v1": {
    id: "hash-ngram-256-v1",
    dimension: 256,
    seed: "hash-ngram-256-v1",
    bigrams: true,
  },
  "hash-ngram-512-v1": {
    id: "hash-ngram-512-v1",
    dimension: 512,
    seed: "hash-ngram-512-v1",
    bigrams: true,
  },
  "hash-unigram-128-v1": {
    id: "hash-unigram-128-v1",
    dimension: 128,
    seed: "hash-unigram-128-v1",
    bigrams: false,
  },
};

export const DEFAULT_MODEL = "hash-ngram-256-v1";

export function resolveModel(id: string): ModelSpec {
  const spec = REGISTRY[id];
  if (!spec) {
    const known = Object.keys(REGISTRY).sort().join(", ");
    throw new Error(`unknown embedding model "${id}" (available: ${known})`);
  }
  return spec;
}

export function availableModels(): string[] {
  return Object.keys(REGISTRY).sort();
}
