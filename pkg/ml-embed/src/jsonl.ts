/** JSONL input/output for the two wire formats the sidecar speaks. */

import { readFileSync, writeFileSync } from "node:fs";

export interface InputRow {
  id: string;
  description: string;
}

export function readDescriptions(path: string): InputRow[] {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (error) {
    throw new Error(`cannot read input file ${path}: ${(error as Error).message}`);
  }
  const rows: InputRow[] = [];
  const lines = text.split("\n");
  for (let lineno = 1; lineno <= lines.length; lineno++) {
    const line = lines[lineno - 1].trim();
    if (!line) continue;
    let doc: unknown;
    try {
      doc = JSON.parse(line);
    } catch {
      throw new Error(`${path}: invalid JSON at line ${lineno}`);
    }
    const record = doc as Record<string, unknown>;
    if (typeof record.id !== "string" || record.id.length === 0) {
      throw new Error(`${path}: missing "id" at line ${lineno}`);
    }
    if (typeof record.description !== "string") {
      throw new Error(`${path}: missing "description" at line ${lineno}`);
    }
    rows.push({ id: record.id, description: record.description });
  }
  return rows;
}

export function writeVectors(
  path: string,
  rows: Array<{ id: string; vector: number[] }>,
): void {
  const lines = rows.map((row) => JSON.stringify({ id: row.id, vector: row.vector }));
  writeFileSync(path, lines.join("\n") + (lines.length ? "\n" : ""), "utf-8");
}
