#!/usr/bin/env node
/**
 * extract-embeddings extract --input data.tsv --model bert-italian-xxl \
 *     --output embeddings.csv [--pooling cls|mean] [--backend transformers|hashed] [--revision REV]
 * extract-embeddings token-groups --input data.tsv --model bert-italian-xxl --output groups.json
 *
 * Exit codes: 0 success, 1 runtime/data error, 2 usage error.
 */

import { readFileSync } from 'node:fs';
import process from 'node:process';

import { BackendName, Pooling, makeBackend } from './embed.js';
import { extractToCsv, extractTokenGroupsToJson } from './extract.js';
import { parseTsv } from './tsv.js';

interface Flags {
  [key: string]: string;
}

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith('--') || i + 1 >= argv.length) {
      throw new UsageError(`malformed arguments near ${JSON.stringify(key)}`);
    }
    flags[key.slice(2)] = argv[i + 1];
  }
  return flags;
}

class UsageError extends Error {}

function required(flags: Flags, name: string): string {
  const value = flags[name];
  if (value === undefined) {
    throw new UsageError(`missing required flag --${name}`);
  }
  return value;
}

function choice<T extends string>(value: string, allowed: readonly T[], flag: string): T {
  if (!(allowed as readonly string[]).includes(value)) {
    throw new UsageError(`--${flag} must be one of ${allowed.join(', ')}, got ${value}`);
  }
  return value as T;
}

async function run(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  if (!command || command === '--help' || command === '-h') {
    console.error('commands: extract, token-groups (see header comment for flags)');
    return command ? 0 : 2;
  }
  const flags = parseFlags(rest);
  const input = required(flags, 'input');
  const model = required(flags, 'model');
  const output = required(flags, 'output');
  const records = parseTsv(readFileSync(input, 'utf-8'));

  if (command === 'extract') {
    const pooling = choice<Pooling>(flags['pooling'] ?? 'cls', ['cls', 'mean'], 'pooling');
    const backendName = choice<BackendName>(
      flags['backend'] ?? 'transformers',
      ['transformers', 'hashed'],
      'backend',
    );
    const backend = await makeBackend(backendName, model, { revision: flags['revision'] });
    const result = await extractToCsv(records, backend, model, pooling, output);
    console.log(
      JSON.stringify({
        command: 'extract',
        rows: result.rows,
        feature_dim: result.featureDim,
        model_id: model,
        backend: backend.name,
        pooling,
        revision: backend.revision,
        output,
      }),
    );
    return 0;
  }
  if (command === 'token-groups') {
    const count = extractTokenGroupsToJson(records, model, output);
    console.log(JSON.stringify({ command: 'token-groups', sentences: count, model_id: model, output }));
    return 0;
  }
  throw new UsageError(`unknown command ${JSON.stringify(command)}`);
}

run(process.argv.slice(2))
  .then((code) => {
    process.exitCode = code;
  })
  .catch((err) => {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      process.exitCode = 2;
    } else {
      console.error(`error: ${(err as Error).message}`);
      process.exitCode = 1;
    }
  });
