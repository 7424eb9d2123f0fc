export interface SentenceRecord {
  id: string;
  label: 0 | 1;
  sentence: string;
}

export class TsvParseError extends Error {
  readonly line: number;

  constructor(message: string, line: number) {
    super(`line ${line}: ${message}`);
    this.name = 'TsvParseError';
    this.line = line;
  }
}

/**
 * Parse an ItaCoLa-style TSV: id<TAB>label<TAB>sentence, one record per
 * line, optional '#' comment lines, order preserved.
 */
export function parseTsv(text: string): SentenceRecord[] {
  const records: SentenceRecord[] = [];
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const raw = lines[i];
    const lineNo = i + 1;
    if (raw.trim() === '' || raw.startsWith('#')) {
      continue;
    }
    const fields = raw.split('\t');
    if (fields.length !== 3) {
      throw new TsvParseError(`expected 3 tab-separated fields, got ${fields.length}`, lineNo);
    }
    const [id, labelText, sentence] = fields;
    if (id.trim() === '') {
      throw new TsvParseError('empty id', lineNo);
    }
    if (labelText !== '0' && labelText !== '1') {
      throw new TsvParseError(`label must be 0 or 1, got ${JSON.stringify(labelText)}`, lineNo);
    }
    if (sentence.trim() === '') {
      throw new TsvParseError('empty sentence', lineNo);
    }
    records.push({ id, label: labelText === '1' ? 1 : 0, sentence });
  }
  if (records.length === 0) {
    throw new Error('input contains no records');
  }
  return records;
}
