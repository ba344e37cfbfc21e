// End-to-end against the real layout service: spawns `orc serve` and drives
// it exactly the way the editor does.

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { visibleRects } from "../src/render.js";
import { acceptServerPayload, initialState } from "../src/state.js";
import type { EditorState, Solution } from "../src/types.js";

const PORT = 8931 + Math.floor(Math.random() * 500);
const BASE = `http://127.0.0.1:${PORT}`;

const ROTATION_SPEC = `layout "rotation" {
  window { width: 300; height: 60; }
  widget g { pref: 100x100; }
  widget c1 { pref: 40x40; }
  widget c2 { pref: 40x40; }
  widget c3 { pref: 40x40; }
  pattern rotate_group(group: g, children: [c1, c2, c3]);
}`;

const RIBBON_SPEC = `layout "ribbon" {
  window { width: 200; height: 60; }
  widget h { pref: 60x30; priority: high; }
  widget m { pref: 60x30; priority: medium; }
  widget l { pref: 60x30; priority: low; }
  pattern optional(target: h);
  pattern optional(target: m);
  pattern optional(target: l);
  constraint hard: h.left == 0 && h.top == 0 && m.left == h.right && m.top == 0 && l.left == m.right && l.top == 0;
}`;

let service: ChildProcess;

async function waitForService(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const response = await fetch(`${BASE}/v1/sessions/none/solution`);
      if (response.status === 404) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("layout service did not come up");
}

beforeAll(async () => {
  service = spawn("python3", ["-m", "orclayout.cli", "serve", "--port", String(PORT)], {
    cwd: new URL("../..", import.meta.url).pathname,
    stdio: "ignore",
  });
  await waitForService();
}, 30000);

afterAll(() => {
  service?.kill();
});

function orientation(solution: Solution): "horizontal" | "vertical" {
  return solution.branch_choices["p0:rotate_group:or"] === 2 ? "horizontal" : "vertical";
}

describe("editor against the live service", () => {
  it("viewport slider sweep flips the rotation orientation exactly once", async () => {
    const api = new ApiClient(BASE);
    const created = await api.createSession(ROTATION_SPEC);
    expect(created.solution).not.toBeNull();
    let state: EditorState = acceptServerPayload(
      { ...initialState(), sessionId: created.id },
      created,
    );
    const seen: string[] = [orientation(state.solution!)];
    // trade width for height, as the linked sliders do
    for (let width = 280; width >= 60; width -= 20) {
      const result = await api.applyEditWithRetry(created.id, state.revision, {
        type: "set_viewport",
        width,
        height: 360 - width,
      });
      expect(result.kind).toBe("ok");
      if (result.kind === "ok") {
        state = acceptServerPayload(state, result);
        expect(state.revision).toBe(result.revision); // displayed == server
        seen.push(orientation(state.solution!));
      }
    }
    const flips = seen.filter((o, i) => i > 0 && o !== seen[i - 1]).length;
    expect(flips).toBe(1);
    expect(seen[0]).toBe("horizontal");
    expect(seen[seen.length - 1]).toBe("vertical");
    await api.deleteSession(created.id);
  }, 30000);

  it("shrinking the viewport hides optional widgets in priority order", async () => {
    const api = new ApiClient(BASE);
    const created = await api.createSession(RIBBON_SPEC);
    let state: EditorState = acceptServerPayload(
      { ...initialState(), sessionId: created.id },
      created,
    );
    const visibleAt = new Map<number, string[]>();
    for (const width of [200, 130, 70]) {
      const result = await api.applyEditWithRetry(created.id, state.revision, {
        type: "set_viewport",
        width,
        height: 60,
      });
      expect(result.kind).toBe("ok");
      if (result.kind === "ok") {
        state = acceptServerPayload(state, result);
        visibleAt.set(
          width,
          state.solution!.widgets.filter((w) => w.visible).map((w) => w.id),
        );
      }
    }
    expect(visibleAt.get(200)).toEqual(["h", "m", "l"]);
    expect(visibleAt.get(130)).toEqual(["h", "m"]); // low disappears first
    expect(visibleAt.get(70)).toEqual(["h"]); // then medium
    await api.deleteSession(created.id);
  }, 30000);

  it("every rendered coordinate matches the latest service payload", async () => {
    const api = new ApiClient(BASE);
    const created = await api.createSession(RIBBON_SPEC);
    let state: EditorState = acceptServerPayload(
      { ...initialState(), sessionId: created.id },
      created,
    );
    const result = await api.applyEditWithRetry(created.id, state.revision, {
      type: "resize_widget",
      id: "m",
      width: 70,
      height: 25,
    });
    expect(result.kind).toBe("ok");
    if (result.kind === "ok") {
      state = acceptServerPayload(state, result);
    }
    const latest = await api.getSolution(created.id);
    expect(latest.revision).toBe(state.revision);
    const rendered = visibleRects(state.solution!);
    const byId = new Map(latest.solution!.widgets.map((w) => [w.id, w]));
    for (const rect of rendered) {
      const server = byId.get(rect.id)!;
      expect(rect.left).toBe(server.left);
      expect(rect.top).toBe(server.top);
      expect(rect.width).toBe(server.width);
      expect(rect.height).toBe(server.height);
    }
    await api.deleteSession(created.id);
  }, 30000);

  it("multi-preview thumbnails show opposite orientations without touching the session", async () => {
    const { multiPreview } = await import("../src/preview.js");
    const api = new ApiClient(BASE);
    const created = await api.createSession(ROTATION_SPEC);
    const thumbs = await multiPreview(api, created.id, [
      { width: 300, height: 100 },
      { width: 100, height: 300 },
    ]);
    expect(thumbs[0].solution).not.toBeNull();
    expect(thumbs[1].solution).not.toBeNull();
    expect(orientation(thumbs[0].solution!)).toBe("horizontal");
    expect(orientation(thumbs[1].solution!)).toBe("vertical");
    const after = await api.getSolution(created.id);
    expect(after.revision).toBe(0); // previews never mutate the session
    await api.deleteSession(created.id);
  }, 30000);

  it("instantiating a pattern through an edit re-renders from the response", async () => {
    const api = new ApiClient(BASE);
    const created = await api.createSession(
      `layout "p" { window { width: 300; height: 120; } widget x { pref: 40x40; } widget y { pref: 40x40; } }`,
    );
    const result = await api.applyEditWithRetry(created.id, 0, {
      type: "add_pattern",
      kind: "hflow",
      args: { items: ["x", "y"], container: "root" },
    });
    expect(result.kind).toBe("ok");
    if (result.kind === "ok") {
      const byId = new Map(result.solution.widgets.map((w) => [w.id, w]));
      expect(byId.get("x")).toMatchObject({ left: 0, top: 0 });
      expect(byId.get("y")).toMatchObject({ left: 40, top: 0 });
    }
    await api.deleteSession(created.id);
  }, 30000);
});
