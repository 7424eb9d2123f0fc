import { describe, expect, it } from 'vitest';

import { EMBEDDING_DIM, hashedBackend, resolveModelCard, transformersBackend } from '../src/embed.js';
import { tokenize } from '../src/tokenize.js';

describe('tokenize', () => {
  it('splits the reference sentence into at least five tokens', () => {
    const tokens = tokenize('Il cane rosicchia un osso');
    expect(tokens.length).toBeGreaterThanOrEqual(5);
    expect(tokens).toContain('cane');
  });

  it('keeps apostrophe clitics together and splits punctuation', () => {
    expect(tokenize("L'ufficiale ha voglia, di baciare Rosa.")).toEqual([
      "L'ufficiale",
      'ha',
      'voglia',
      ',',
      'di',
      'baciare',
      'Rosa',
      '.',
    ]);
  });

  it('preserves case', () => {
    expect(tokenize('Max è andato')).toEqual(['Max', 'è', 'andato']);
  });
});

describe('hashedBackend', () => {
  it('produces 768 finite entries per sentence', async () => {
    const backend = hashedBackend('bert-italian-xxl');
    const rows = await backend.embed(['Il cane rosicchia un osso', 'Quella storia mi ha spaventato'], 'cls');
    expect(rows).toHaveLength(2);
    for (const row of rows) {
      expect(row).toHaveLength(EMBEDDING_DIM);
      expect(row.every(Number.isFinite)).toBe(true);
    }
  });

  it('is deterministic across calls', async () => {
    const a = await hashedBackend('bert-italian-xxl').embed(['una frase qualunque'], 'cls');
    const b = await hashedBackend('bert-italian-xxl').embed(['una frase qualunque'], 'cls');
    expect(a).toEqual(b);
  });

  it('separates model identities and pooling modes', async () => {
    const sentence = ['Il cane rosicchia un osso'];
    const bert = await hashedBackend('bert-italian-xxl').embed(sentence, 'cls');
    const electra = await hashedBackend('electra-italian-xxl').embed(sentence, 'cls');
    const mean = await hashedBackend('bert-italian-xxl').embed(sentence, 'mean');
    expect(bert[0]).not.toEqual(electra[0]);
    expect(bert[0]).not.toEqual(mean[0]);
  });

  it('rejects unknown model ids', () => {
    expect(() => hashedBackend('gpt-italian')).toThrowError(/unknown model id/);
    expect(() => resolveModelCard('nope')).toThrowError(/unknown model id/);
  });

  it('rejects token-free sentences', async () => {
    await expect(hashedBackend('bert-italian-xxl').embed(['   '], 'cls')).rejects.toThrowError(/no tokens/);
  });
});

describe('transformersBackend', () => {
  it('fails with an actionable message when checkpoints are unreachable', async () => {
    await expect(
      transformersBackend('bert-italian-xxl', { allowRemote: false }),
    ).rejects.toThrowError(/@huggingface\/transformers|cannot load checkpoint/);
  }, 30000);
});
