// Wire types mirroring the layout service's JSON schema.

export interface WidgetGeom {
  id: string;
  left: number;
  top: number;
  width: number;
  height: number;
  visible: boolean;
}

export interface Solution {
  optimal: boolean;
  satisfied_weight: number;
  widgets: WidgetGeom[];
  branch_choices: Record<string, number>;
  solve_ms: number;
}

export interface SessionCreated {
  id: string;
  revision: number;
  solution: Solution | null;
  conflicts?: string[];
}

export interface SolutionResponse {
  revision: number;
  solution: Solution | null;
  conflicts?: string[];
}

export type Edit =
  | { type: "insert_widget"; widget: { id: string; pref: [number, number]; min?: [number, number]; priority?: string }; pattern?: number; index?: number }
  | { type: "delete_widget"; id: string }
  | { type: "move_widget"; id: string; left: number; top: number }
  | { type: "resize_widget"; id: string; width: number; height: number }
  | { type: "set_viewport"; width: number; height: number }
  | { type: "add_pattern"; kind: string; args: Record<string, unknown> }
  | { type: "remove_pattern"; index: number }
  | { type: "add_constraint"; strength: "hard" | "soft"; weight?: number; formula: string }
  | { type: "remove_constraint"; label: string };

export type EditResult =
  | { kind: "ok"; revision: number; solution: Solution }
  | { kind: "conflict"; conflicts: string[] }
  | { kind: "stale"; actual: number }
  | { kind: "invalid"; reason: string };
