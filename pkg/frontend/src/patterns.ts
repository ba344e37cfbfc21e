// Pattern template schemas for the properties panel; parameters are checked
// before any request is sent so bad input surfaces inline.

export type FieldKind = "widget" | "widgets" | "rects" | "choice" | "number";

export interface FieldSchema {
  name: string;
  kind: FieldKind;
  required: boolean;
  choices?: string[];
}

export const PATTERN_SCHEMAS: Record<string, FieldSchema[]> = {
  hflow: [
    { name: "items", kind: "widgets", required: true },
    { name: "container", kind: "widget", required: false },
  ],
  vflow: [
    { name: "items", kind: "widgets", required: true },
    { name: "container", kind: "widget", required: false },
  ],
  eitherflow: [
    { name: "items", kind: "widgets", required: true },
    { name: "container", kind: "widget", required: false },
  ],
  rotate_group: [
    { name: "group", kind: "widget", required: true },
    { name: "children", kind: "widgets", required: true },
  ],
  equalize: [{ name: "items", kind: "widgets", required: true }],
  balanced: [
    { name: "items", kind: "widgets", required: true },
    { name: "container", kind: "widget", required: false },
  ],
  alt_positions: [
    { name: "target", kind: "widget", required: true },
    { name: "slots", kind: "rects", required: true },
  ],
  alt_widgets: [
    { name: "primary", kind: "widget", required: true },
    { name: "fallback", kind: "widget", required: true },
  ],
  optional: [
    { name: "target", kind: "widget", required: true },
    { name: "priority", kind: "choice", required: false, choices: ["high", "medium", "low"] },
  ],
};

export interface ValidationResult {
  ok: boolean;
  errors: Record<string, string>;
}

export function validatePatternParams(
  kind: string,
  params: Record<string, unknown>,
  knownWidgets: string[],
): ValidationResult {
  const schema = PATTERN_SCHEMAS[kind];
  const errors: Record<string, string> = {};
  if (!schema) {
    return { ok: false, errors: { kind: `unknown pattern ${kind}` } };
  }
  const known = new Set(knownWidgets);
  for (const fieldSchema of schema) {
    const value = params[fieldSchema.name];
    if (value === undefined || value === null || value === "") {
      if (fieldSchema.required) {
        errors[fieldSchema.name] = "required";
      }
      continue;
    }
    switch (fieldSchema.kind) {
      case "widget":
        if (typeof value !== "string" || (!known.has(value) && value !== "root")) {
          errors[fieldSchema.name] = `unknown widget ${String(value)}`;
        }
        break;
      case "widgets": {
        if (!Array.isArray(value) || value.length === 0) {
          errors[fieldSchema.name] = "needs at least one widget";
          break;
        }
        for (const id of value) {
          if (typeof id !== "string" || !known.has(id)) {
            errors[fieldSchema.name] = `unknown widget ${String(id)}`;
            break;
          }
        }
        break;
      }
      case "rects": {
        if (!Array.isArray(value) || value.length < 2) {
          errors[fieldSchema.name] = "needs at least two slots";
          break;
        }
        for (const rect of value) {
          if (!Array.isArray(rect) || rect.length !== 4 || rect.some((v) => typeof v !== "number")) {
            errors[fieldSchema.name] = "each slot is [x, y, w, h]";
            break;
          }
        }
        break;
      }
      case "choice":
        if (typeof value !== "string" || !(fieldSchema.choices ?? []).includes(value)) {
          errors[fieldSchema.name] = `one of ${(fieldSchema.choices ?? []).join(", ")}`;
        }
        break;
      case "number":
        if (typeof value !== "number" || !Number.isFinite(value)) {
          errors[fieldSchema.name] = "needs a number";
        }
        break;
    }
  }
  for (const name of Object.keys(params)) {
    if (!schema.some((f) => f.name === name)) {
      errors[name] = "unknown argument";
    }
  }
  return { ok: Object.keys(errors).length === 0, errors };
}
