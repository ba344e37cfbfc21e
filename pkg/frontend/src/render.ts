// Pure rendering helpers: every coordinate comes straight from a server
// solution payload.

import type { Solution, WidgetGeom } from "./types.js";

export interface RectSpec {
  id: string;
  left: number;
  top: number;
  width: number;
  height: number;
  conflict: boolean;
}

export function visibleRects(solution: Solution, conflictWidgets: Set<string> = new Set()): RectSpec[] {
  return solution.widgets
    .filter((w) => w.visible)
    .map((w) => ({
      id: w.id,
      left: w.left,
      top: w.top,
      width: w.width,
      height: w.height,
      conflict: conflictWidgets.has(w.id),
    }));
}

export function toSvg(
  solution: Solution,
  viewport: { width: number; height: number },
  conflictWidgets: Set<string> = new Set(),
): string {
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${viewport.width} ${viewport.height}">`,
    `<rect x="0" y="0" width="${viewport.width}" height="${viewport.height}" fill="white" stroke="#9aa4b0"/>`,
  ];
  for (const rect of visibleRects(solution, conflictWidgets)) {
    const stroke = rect.conflict ? "#d33" : "#39424e";
    parts.push(
      `<rect data-widget="${rect.id}" x="${rect.left}" y="${rect.top}" ` +
        `width="${rect.width}" height="${rect.height}" fill="#dbe6f3" stroke="${stroke}"/>`,
    );
    parts.push(
      `<text x="${rect.left + rect.width / 2}" y="${rect.top + rect.height / 2}" ` +
        `font-size="11" text-anchor="middle" dominant-baseline="central">${rect.id}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

/** Widgets named by conflicting constraint labels (for red highlighting). */
export function conflictWidgetIds(conflicts: string[], widgets: WidgetGeom[]): Set<string> {
  const out = new Set<string>();
  for (const label of conflicts) {
    for (const w of widgets) {
      if (label.includes(`:${w.id}`) || label.endsWith(w.id)) {
        out.add(w.id);
      }
    }
  }
  return out;
}
