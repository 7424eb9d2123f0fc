/**
 * Deterministic word-level tokenizer: words (unicode letters/digits,
 * apostrophe-joined clitics kept whole) and standalone punctuation marks.
 * Case is preserved, matching the cased checkpoints this tool targets.
 */
export function tokenize(sentence: string): string[] {
  const matches = sentence.match(/[\p{L}\p{N}]+(?:'[\p{L}\p{N}]+)*|[^\s\p{L}\p{N}]/gu);
  return matches ?? [];
}
