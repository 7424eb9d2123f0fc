import { writeFileSync } from 'node:fs';

import { EMBEDDING_DIM, EmbeddingBackend, Pooling } from './embed.js';
import { tokenize } from './tokenize.js';
import { SentenceRecord } from './tsv.js';

function csvField(value: string): string {
  if (/[",\n\r]/.test(value)) {
    return `"${value.replaceAll('"', '""')}"`;
  }
  return value;
}

export interface ExtractionResult {
  rows: number;
  featureDim: number;
}

/**
 * Embed every record and write the classifier's CSV format:
 * provenance comment, header id,label,sentence,f0..f767, one row per
 * sentence in input order, features at 17 significant digits.
 */
export async function extractToCsv(
  records: SentenceRecord[],
  backend: EmbeddingBackend,
  modelId: string,
  pooling: Pooling,
  outputPath: string,
): Promise<ExtractionResult> {
  const embeddings = await backend.embed(
    records.map((r) => r.sentence),
    pooling,
  );
  if (embeddings.length !== records.length) {
    throw new Error(`backend returned ${embeddings.length} rows for ${records.length} sentences`);
  }
  const lines: string[] = [
    `# extractor: model_id=${modelId} backend=${backend.name} pooling=${pooling} revision=${backend.revision}`,
  ];
  const header = ['id', 'label', 'sentence'];
  for (let i = 0; i < EMBEDDING_DIM; i++) {
    header.push(`f${i}`);
  }
  lines.push(header.join(','));
  records.forEach((record, row) => {
    const vec = embeddings[row];
    if (vec.length !== EMBEDDING_DIM) {
      throw new Error(`row ${row}: expected ${EMBEDDING_DIM} features, got ${vec.length}`);
    }
    for (const v of vec) {
      if (!Number.isFinite(v)) {
        throw new Error(`row ${row}: non-finite feature value`);
      }
    }
    const fields = [csvField(record.id), String(record.label), csvField(record.sentence)];
    for (const v of vec) {
      fields.push(v.toPrecision(17));
    }
    lines.push(fields.join(','));
  });
  writeFileSync(outputPath, lines.join('\n') + '\n', 'utf-8');
  return { rows: records.length, featureDim: EMBEDDING_DIM };
}

export interface TokenGroup {
  name: string;
  token_span: [number, number];
  feature_span: [number, number];
}

export interface SentenceGroups {
  id: string;
  label: 0 | 1;
  tokens: string[];
  groups: TokenGroup[];
}

/**
 * One group per token: token spans partition the token sequence and
 * feature spans partition 0..768 into contiguous near-equal blocks, so the
 * explainer can attribute embedding regions to tokens.
 */
export function tokenGroups(record: SentenceRecord): SentenceGroups {
  const tokens = tokenize(record.sentence);
  if (tokens.length === 0) {
    throw new Error(`sentence has no tokens: ${JSON.stringify(record.sentence)}`);
  }
  const groups: TokenGroup[] = tokens.map((token, i) => {
    const start = Math.floor((EMBEDDING_DIM * i) / tokens.length);
    const end = Math.floor((EMBEDDING_DIM * (i + 1)) / tokens.length);
    return { name: token, token_span: [i, i + 1], feature_span: [start, end] };
  });
  return { id: record.id, label: record.label, tokens, groups };
}

export function extractTokenGroupsToJson(
  records: SentenceRecord[],
  modelId: string,
  outputPath: string,
): number {
  const doc = {
    version: 1,
    model_id: modelId,
    feature_dim: EMBEDDING_DIM,
    sentences: records.map(tokenGroups),
  };
  writeFileSync(outputPath, JSON.stringify(doc, null, 2) + '\n', 'utf-8');
  return records.length;
}
