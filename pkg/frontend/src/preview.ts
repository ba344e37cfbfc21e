// Multi-preview: one read-only what-if solve per thumbnail size.

import type { ApiClient } from "./api.js";
import type { Solution } from "./types.js";

export interface Thumbnail {
  width: number;
  height: number;
  solution: Solution | null;
  error: string | null;
}

export async function multiPreview(
  api: ApiClient,
  sessionId: string,
  sizes: Array<{ width: number; height: number }>,
): Promise<Thumbnail[]> {
  const out: Thumbnail[] = [];
  for (const size of sizes) {
    try {
      const response = await api.getSolution(sessionId, size);
      out.push({
        width: size.width,
        height: size.height,
        solution: response.solution,
        error: response.solution === null ? "infeasible" : null,
      });
    } catch (err) {
      out.push({ width: size.width, height: size.height, solution: null, error: String(err) });
    }
  }
  return out;
}
