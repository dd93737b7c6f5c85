#!/usr/bin/env node
/**
 * ml-embed encode --in descriptions.jsonl --out vectors.jsonl
 *                 [--model hash-ngram-256-v1] [--batch 64]
 */

import { parseArgs } from "node:util";

import { encode } from "./encode.js";
import { DEFAULT_MODEL, availableModels } from "./models.js";

const USAGE = `usage: ml-embed encode --in <descriptions.jsonl> --out <vectors.jsonl>
                       [--model <id>] [--batch <n>]

models: ${availableModels().join(", ")} (default ${DEFAULT_MODEL})`;

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command !== "encode") {
    console.error(USAGE);
    return 2;
  }
  let parsed;
  try {
    parsed = parseArgs({
      args: rest,
      options: {
        in: { type: "string" },
        out: { type: "string" },
        model: { type: "string", default: DEFAULT_MODEL },
        batch: { type: "string", default: "64" },
      },
    });
  } catch (error) {
    console.error((error as Error).message);
    console.error(USAGE);
    return 2;
  }
  const { in: input, out: output, model, batch } = parsed.values;
  if (!input || !output) {
    console.error(USAGE);
    return 2;
  }
  const batchSize = Number.parseInt(batch ?? "64", 10);
  if (Number.isNaN(batchSize)) {
    console.error(`--batch must be an integer, got "${batch}"`);
    return 2;
  }
  try {
    const summary = encode({ input, output, model: model!, batchSize });
    console.log(JSON.stringify(summary));
    return 0;
  } catch (error) {
    console.error(`error: ${(error as Error).message}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
