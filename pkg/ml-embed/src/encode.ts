/** The encode operation: descriptions JSONL in, vectors JSONL out. */

import { embed } from "./encoder.js";
import { readDescriptions, writeVectors } from "./jsonl.js";
import { resolveModel } from "./models.js";

export interface EmbedRequest {
  input: string;
  output: string;
  model: string;
  batchSize: number;
}

export interface EncodeSummary {
  count: number;
  dimension: number;
  model: string;
  emptyDescriptions: number;
}

export function encode(
  request: EmbedRequest,
  warn: (message: string) => void = (m) => console.error(m),
): EncodeSummary {
  const model = resolveModel(request.model);
  const rows = readDescriptions(request.input);
  if (request.batchSize < 1) {
    throw new Error(`batch size must be >= 1, got ${request.batchSize}`);
  }
  const vectors: Array<{ id: string; vector: number[] }> = [];
  let empty = 0;
  for (let start = 0; start < rows.length; start += request.batchSize) {
    for (const row of rows.slice(start, start + request.batchSize)) {
      if (row.description.trim() === "") {
        warn(`warning: ${row.id} has an empty description; emitting a zero vector`);
        empty += 1;
      }
      vectors.push({ id: row.id, vector: embed(row.description, model) });
    }
  }
  writeVectors(request.output, vectors);
  return {
    count: vectors.length,
    dimension: model.dimension,
    model: model.id,
    emptyDescriptions: empty,
  };
}
