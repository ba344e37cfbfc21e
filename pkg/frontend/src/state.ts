// Editor state: the rendered geometry always comes from the latest accepted
// server solution; drags only produce a ghost overlay.

import type { Solution, WidgetGeom } from "./types.js";

export interface PendingDrag {
  widgetId: string;
  startX: number;
  startY: number;
  currentX: number;
  currentY: number;
}

export interface EditorState {
  sessionId: string | null;
  revision: number;
  solution: Solution | null;
  conflicts: string[];
  selectedWidget: string | null;
  pendingDrag: PendingDrag | null;
  viewport: { width: number; height: number };
  previewSizes: Array<{ width: number; height: number }>;
  liveDrag: boolean;
}

export function initialState(): EditorState {
  return {
    sessionId: null,
    revision: -1,
    solution: null,
    conflicts: [],
    selectedWidget: null,
    pendingDrag: null,
    viewport: { width: 640, height: 480 },
    previewSizes: [],
    liveDrag: false,
  };
}

export function acceptServerPayload(
  state: EditorState,
  payload: { revision: number; solution: Solution | null; conflicts?: string[] },
): EditorState {
  return {
    ...state,
    revision: payload.revision,
    solution: payload.solution ?? state.solution,
    conflicts: payload.solution === null ? payload.conflicts ?? state.conflicts : [],
  };
}

export function beginDrag(state: EditorState, widgetId: string, x: number, y: number): EditorState {
  return {
    ...state,
    selectedWidget: widgetId,
    pendingDrag: { widgetId, startX: x, startY: y, currentX: x, currentY: y },
  };
}

export function updateDrag(state: EditorState, x: number, y: number): EditorState {
  if (!state.pendingDrag) {
    return state;
  }
  return { ...state, pendingDrag: { ...state.pendingDrag, currentX: x, currentY: y } };
}

export function endDrag(state: EditorState): { state: EditorState; moved: boolean; target: { id: string; left: number; top: number } | null } {
  const drag = state.pendingDrag;
  const next = { ...state, pendingDrag: null };
  if (!drag || (drag.currentX === drag.startX && drag.currentY === drag.startY)) {
    return { state: next, moved: false, target: null };
  }
  const geom = widgetGeometry(state, drag.widgetId);
  if (!geom) {
    return { state: next, moved: false, target: null };
  }
  const dx = drag.currentX - drag.startX;
  const dy = drag.currentY - drag.startY;
  return {
    state: next,
    moved: true,
    target: { id: drag.widgetId, left: geom.left + dx, top: geom.top + dy },
  };
}

/** Geometry as the server solved it; never locally mutated. */
export function widgetGeometry(state: EditorState, id: string): WidgetGeom | null {
  return state.solution?.widgets.find((w) => w.id === id) ?? null;
}

/** Ghost rectangle for the active drag, offset from the solved geometry. */
export function ghostRect(state: EditorState): WidgetGeom | null {
  const drag = state.pendingDrag;
  if (!drag) {
    return null;
  }
  const geom = widgetGeometry(state, drag.widgetId);
  if (!geom) {
    return null;
  }
  return {
    ...geom,
    left: geom.left + (drag.currentX - drag.startX),
    top: geom.top + (drag.currentY - drag.startY),
  };
}
