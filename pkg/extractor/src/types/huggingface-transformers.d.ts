// Optional runtime dependency, installed separately where checkpoint
// downloads are possible; typed loosely so the build never requires it.
declare module '@huggingface/transformers' {
  export const pipeline: (...args: unknown[]) => Promise<unknown>;
  export const env: Record<string, unknown>;
}
