// Editor shell: canvas, widget palette, properties panel, viewport sliders,
// and the multi-preview strip, wired to the layout service.

import { ApiClient } from "./api.js";
import { PATTERN_SCHEMAS, validatePatternParams } from "./patterns.js";
import { multiPreview } from "./preview.js";
import { conflictWidgetIds, toSvg } from "./render.js";
import { SingleFlight, Throttle } from "./scheduler.js";
import {
  EditorState,
  acceptServerPayload,
  beginDrag,
  endDrag,
  ghostRect,
  initialState,
  updateDrag,
} from "./state.js";
import type { Edit } from "./types.js";

const STARTER_SPEC = `layout "editor" {
  window { width: 360; height: 240; }
  widget a { pref: 80x40; }
  widget b { pref: 80x40; }
  widget c { pref: 80x40; }
  pattern hflow(items: [a, b, c], container: root);
}`;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

class Editor {
  private api: ApiClient;
  private state: EditorState = initialState();
  private flights = new SingleFlight();
  private liveThrottle = new Throttle(100);
  private status = el<HTMLElement>("status");
  private canvas = el<HTMLDivElement>("canvas");
  private specBox = el<HTMLTextAreaElement>("spec");
  private widgetCounter = 0;

  constructor() {
    this.api = new ApiClient(el<HTMLInputElement>("service-url").value);
    this.specBox.value = STARTER_SPEC;
    el<HTMLButtonElement>("load").addEventListener("click", () => void this.loadSpec());
    el<HTMLButtonElement>("add-widget").addEventListener("click", () => this.addWidget());
    el<HTMLButtonElement>("delete-widget").addEventListener("click", () => this.deleteSelected());
    el<HTMLButtonElement>("apply-pattern").addEventListener("click", () => this.instantiatePattern());
    el<HTMLInputElement>("live-drag").addEventListener("change", (event) => {
      this.state = { ...this.state, liveDrag: (event.target as HTMLInputElement).checked };
    });
    for (const axis of ["width", "height"] as const) {
      const slider = el<HTMLInputElement>(`viewport-${axis}`);
      slider.addEventListener("input", () => this.onViewportSlider());
    }
    el<HTMLButtonElement>("preview").addEventListener("click", () => void this.refreshPreviews());
    const kindSelect = el<HTMLSelectElement>("pattern-kind");
    for (const kind of Object.keys(PATTERN_SCHEMAS)) {
      const option = document.createElement("option");
      option.value = kind;
      option.textContent = kind;
      kindSelect.appendChild(option);
    }
    this.bindCanvasDrag();
  }

  private note(text: string): void {
    this.status.textContent = text;
  }

  private async loadSpec(): Promise<void> {
    this.api = new ApiClient(el<HTMLInputElement>("service-url").value);
    try {
      const created = await this.api.createSession(this.specBox.value);
      this.state = acceptServerPayload(
        { ...initialState(), sessionId: created.id, liveDrag: this.state.liveDrag },
        created,
      );
      const vw = el<HTMLInputElement>("viewport-width");
      const vh = el<HTMLInputElement>("viewport-height");
      this.state.viewport = { width: Number(vw.value), height: Number(vh.value) };
      this.note(`session ${created.id} at revision ${created.revision}`);
      this.redraw();
    } catch (err) {
      this.note(`load failed: ${String(err)}`);
    }
  }

  private submitEdit(edit: Edit, onAccept?: () => void): void {
    const sessionId = this.state.sessionId;
    if (!sessionId) {
      this.note("no session");
      return;
    }
    this.flights.submit(async () => {
      const result = await this.api.applyEditWithRetry(sessionId, this.state.revision, edit);
      if (result.kind === "ok") {
        this.state = acceptServerPayload(this.state, result);
        this.note(`revision ${result.revision} (${result.solution.solve_ms.toFixed(0)} ms)`);
        onAccept?.();
      } else if (result.kind === "conflict") {
        this.state = { ...this.state, conflicts: result.conflicts };
        this.note(`conflicting constraints: ${result.conflicts.join(", ")}`);
      } else if (result.kind === "invalid") {
        this.note(`rejected: ${result.reason}`);
      } else {
        this.note("revision mismatch persists");
      }
      this.redraw();
    });
  }

  private addWidget(): void {
    this.widgetCounter += 1;
    const id = `n${this.widgetCounter}`;
    this.submitEdit({ type: "insert_widget", widget: { id, pref: [60, 30] } });
  }

  private deleteSelected(): void {
    if (this.state.selectedWidget) {
      this.submitEdit({ type: "delete_widget", id: this.state.selectedWidget });
    }
  }

  private instantiatePattern(): void {
    const kind = el<HTMLSelectElement>("pattern-kind").value;
    const paramsText = el<HTMLTextAreaElement>("pattern-params").value || "{}";
    const errorsBox = el<HTMLElement>("pattern-errors");
    errorsBox.textContent = "";
    let params: Record<string, unknown>;
    try {
      params = JSON.parse(paramsText);
    } catch (err) {
      errorsBox.textContent = `params: not valid JSON (${String(err)})`;
      return;
    }
    const widgets = this.state.solution?.widgets.map((w) => w.id) ?? [];
    const validation = validatePatternParams(kind, params, widgets);
    if (!validation.ok) {
      errorsBox.textContent = Object.entries(validation.errors)
        .map(([field, message]) => `${field}: ${message}`)
        .join("\n");
      return;
    }
    this.submitEdit({ type: "add_pattern", kind, args: params });
  }

  private onViewportSlider(): void {
    const width = Number(el<HTMLInputElement>("viewport-width").value);
    const height = Number(el<HTMLInputElement>("viewport-height").value);
    this.state = { ...this.state, viewport: { width, height } };
    el<HTMLElement>("viewport-label").textContent = `${width} x ${height}`;
    this.submitEdit({ type: "set_viewport", width, height });
  }

  /** Pointer position in layout coordinates (the SVG scales to fit). */
  private canvasPoint(event: PointerEvent): { x: number; y: number } {
    const svg = this.canvas.querySelector("svg");
    if (!svg) {
      return { x: event.offsetX, y: event.offsetY };
    }
    const box = svg.getBoundingClientRect();
    return {
      x: ((event.clientX - box.left) * this.state.viewport.width) / box.width,
      y: ((event.clientY - box.top) * this.state.viewport.height) / box.height,
    };
  }

  private bindCanvasDrag(): void {
    this.canvas.addEventListener("pointerdown", (event) => {
      const target = (event.target as Element).closest("[data-widget]");
      if (!target) {
        return;
      }
      const id = target.getAttribute("data-widget")!;
      const point = this.canvasPoint(event);
      this.state = beginDrag(this.state, id, point.x, point.y);
      this.redraw();
    });
    this.canvas.addEventListener("pointermove", (event) => {
      if (!this.state.pendingDrag) {
        return;
      }
      const point = this.canvasPoint(event);
      this.state = updateDrag(this.state, point.x, point.y);
      this.redraw();
      if (this.state.liveDrag) {
        this.liveThrottle.call(() => {
          const ghost = ghostRect(this.state);
          if (ghost) {
            this.submitEdit({ type: "move_widget", id: ghost.id, left: ghost.left, top: ghost.top });
          }
        });
      }
    });
    this.canvas.addEventListener("pointerup", () => {
      const { state, moved, target } = endDrag(this.state);
      this.state = state;
      if (moved && target) {
        this.submitEdit({ type: "move_widget", id: target.id, left: target.left, top: target.top });
      } else {
        this.redraw();
      }
    });
  }

  private async refreshPreviews(): Promise<void> {
    if (!this.state.sessionId) {
      return;
    }
    const sizes = [
      { width: 300, height: 100 },
      { width: 100, height: 300 },
      { width: 200, height: 200 },
    ];
    const strip = el<HTMLDivElement>("previews");
    const thumbnails = await multiPreview(this.api, this.state.sessionId, sizes);
    strip.innerHTML = "";
    for (const thumb of thumbnails) {
      const cell = document.createElement("div");
      cell.className = "thumb";
      if (thumb.solution) {
        cell.innerHTML = toSvg(thumb.solution, { width: thumb.width, height: thumb.height });
      } else {
        cell.textContent = `⚠ ${thumb.error}`;
        cell.classList.add("thumb-error");
      }
      const caption = document.createElement("div");
      caption.textContent = `${thumb.width}x${thumb.height}`;
      cell.appendChild(caption);
      strip.appendChild(cell);
    }
  }

  private redraw(): void {
    const solution = this.state.solution;
    if (!solution) {
      this.canvas.innerHTML = "<p>no solution</p>";
      return;
    }
    const conflictIds = conflictWidgetIds(this.state.conflicts, solution.widgets);
    this.canvas.innerHTML = toSvg(solution, this.state.viewport, conflictIds);
    const ghost = ghostRect(this.state);
    if (ghost) {
      const svg = this.canvas.querySelector("svg");
      if (svg) {
        const overlay = document.createElementNS("http://www.w3.org/2000/svg", "rect");
        overlay.setAttribute("x", String(ghost.left));
        overlay.setAttribute("y", String(ghost.top));
        overlay.setAttribute("width", String(ghost.width));
        overlay.setAttribute("height", String(ghost.height));
        overlay.setAttribute("class", "ghost");
        svg.appendChild(overlay);
      }
    }
    el<HTMLElement>("revision").textContent = `revision ${this.state.revision}`;
    const rows = solution.widgets
      .map(
        (w) =>
          `<tr data-row="${w.id}"><td>${w.id}</td><td>${w.left.toFixed(1)}, ${w.top.toFixed(1)}</td>` +
          `<td>${w.width.toFixed(1)}x${w.height.toFixed(1)}</td><td>${w.visible ? "" : "hidden"}</td></tr>`,
      )
      .join("");
    el<HTMLElement>("widget-table").innerHTML = rows;
  }
}

new Editor();
