import { tokenize } from './tokenize.js';

export const EMBEDDING_DIM = 768;

export type Pooling = 'cls' | 'mean';
export type BackendName = 'transformers' | 'hashed';

export const MODEL_CARDS: Record<string, string> = {
  'bert-italian-xxl': 'dbmdz/bert-base-italian-xxl-cased',
  'electra-italian-xxl': 'dbmdz/electra-base-italian-xxl-cased-discriminator',
};

export interface EmbeddingBackend {
  readonly name: BackendName;
  /** Identifier recorded in output provenance (checkpoint revision or surrogate tag). */
  readonly revision: string;
  embed(sentences: string[], pooling: Pooling): Promise<number[][]>;
}

export function resolveModelCard(modelId: string): string {
  const card = MODEL_CARDS[modelId];
  if (!card) {
    throw new Error(
      `unknown model id ${JSON.stringify(modelId)}; expected one of ${Object.keys(MODEL_CARDS).join(', ')}`,
    );
  }
  return card;
}

// ---------------------------------------------------------------------------
// Deterministic offline backend
//
// A stand-in for environments without checkpoint access (air-gapped CI):
// token vectors are drawn from a PRNG seeded by hash(model id, token), then
// pooled. Values are reproducible bit-for-bit across runs. This is NOT a
// semantic embedding; the provenance header marks it as a surrogate.

const HASHED_REVISION = 'offline-surrogate-v1';

function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function tokenVector(modelId: string, token: string): Float64Array {
  const next = mulberry32(fnv1a(`${modelId}:${token}`));
  const vec = new Float64Array(EMBEDDING_DIM);
  for (let i = 0; i < EMBEDDING_DIM; i++) {
    vec[i] = 2.0 * next() - 1.0;
  }
  return vec;
}

function poolTokens(vectors: Float64Array[], pooling: Pooling): number[] {
  const out = new Float64Array(EMBEDDING_DIM);
  let totalWeight = 0;
  for (let t = 0; t < vectors.length; t++) {
    // cls-style pooling weights early tokens more, mimicking a summary
    // token that attends from the sentence start; mean pooling is flat.
    const w = pooling === 'cls' ? 1.0 / (1 + t) : 1.0;
    totalWeight += w;
    for (let i = 0; i < EMBEDDING_DIM; i++) {
      out[i] += w * vectors[t][i];
    }
  }
  const result = new Array<number>(EMBEDDING_DIM);
  for (let i = 0; i < EMBEDDING_DIM; i++) {
    const pooled = out[i] / totalWeight;
    result[i] = pooling === 'cls' ? Math.tanh(pooled) : pooled;
  }
  return result;
}

export function hashedBackend(modelId: string): EmbeddingBackend {
  resolveModelCard(modelId);
  return {
    name: 'hashed',
    revision: HASHED_REVISION,
    async embed(sentences, pooling) {
      return sentences.map((sentence) => {
        const tokens = tokenize(sentence);
        if (tokens.length === 0) {
          throw new Error(`sentence has no tokens: ${JSON.stringify(sentence)}`);
        }
        return poolTokens(
          tokens.map((tok) => tokenVector(modelId, tok)),
          pooling,
        );
      });
    },
  };
}

// ---------------------------------------------------------------------------
// Pretrained-checkpoint backend (transformers.js)

export interface TransformersOptions {
  revision?: string;
  allowRemote?: boolean;
}

export async function transformersBackend(
  modelId: string,
  options: TransformersOptions = {},
): Promise<EmbeddingBackend> {
  const card = resolveModelCard(modelId);
  const revision = options.revision ?? 'main';
  let pipelineFactory: any;
  let env: any;
  try {
    const mod: any = await import('@huggingface/transformers');
    pipelineFactory = mod.pipeline;
    env = mod.env;
  } catch (err) {
    throw new Error(
      `the 'transformers' backend needs the optional @huggingface/transformers package ` +
        `(npm install @huggingface/transformers); import failed: ${(err as Error).message}`,
    );
  }
  if (options.allowRemote === false) {
    env.allowRemoteModels = false;
  }
  let extractor: any;
  try {
    extractor = await pipelineFactory('feature-extraction', card, { revision });
  } catch (err) {
    throw new Error(
      `cannot load checkpoint ${card}@${revision}: ${(err as Error).message}. ` +
        `If this host has no model access, rerun with --backend hashed (offline surrogate).`,
    );
  }
  return {
    name: 'transformers',
    revision,
    async embed(sentences, pooling) {
      const rows: number[][] = [];
      for (const sentence of sentences) {
        // hidden states: [1, tokens, 768]; h0 is the summary token
        const output = await extractor(sentence, { pooling: 'none' });
        const [, nTokens, dim] = output.dims;
        if (dim !== EMBEDDING_DIM) {
          throw new Error(`expected ${EMBEDDING_DIM}-dim hidden states, got ${dim}`);
        }
        const data: Float32Array = output.data;
        const row = new Array<number>(EMBEDDING_DIM).fill(0);
        if (pooling === 'cls') {
          for (let i = 0; i < EMBEDDING_DIM; i++) {
            row[i] = data[i];
          }
        } else {
          for (let t = 0; t < nTokens; t++) {
            for (let i = 0; i < EMBEDDING_DIM; i++) {
              row[i] += data[t * EMBEDDING_DIM + i] / nTokens;
            }
          }
        }
        rows.push(row);
      }
      return rows;
    },
  };
}

export async function makeBackend(
  backend: BackendName,
  modelId: string,
  options: TransformersOptions = {},
): Promise<EmbeddingBackend> {
  if (backend === 'hashed') {
    return hashedBackend(modelId);
  }
  return transformersBackend(modelId, options);
}
