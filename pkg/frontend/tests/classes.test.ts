import { afterAll, beforeAll, describe, expect, inject, it } from "vitest";

import { ApiClient } from "../src/api";
import { App } from "../src/app";
import { memberIds } from "../src/classes";
import { pairKey } from "../src/sankey";
import { byId } from "../src/scene";
import { resetServer } from "./helpers";

const base = inject("blobBase");

describe("class propagation on the live blob run", () => {
  let app: App;

  beforeAll(async () => {
    await resetServer(base);
    app = new App(new ApiClient(base));
    await app.init();
  });

  afterAll(async () => {
    await resetServer(base);
  });

  it("sharing colors recolors that iteration's bars and dots in-session", async () => {
    const before = app.scene();
    await app.shareColorsFor("3");
    const cls = app.activeClass!;
    expect(cls).not.toBeNull();
    const groups = app.iterations.get("3")!.groups;
    expect([...cls.labels].sort()).toEqual(groups.map((g) => `3.${g.group_id}`).sort());

    const runColor = new Map(
      app.embedding.rows.map((r) => [`${r.iteration}.${r.group}`, r.color]),
    );
    const scene = app.scene();
    for (const g of groups) {
      const tag = `3.${g.group_id}`;
      const override = cls.groupColors.get(tag)!;
      expect(override).toBeDefined();
      expect(byId(scene, `bar-${tag}`)!.attrs.fill).toBe(override);
      expect(byId(scene, `dot-${tag}`)!.attrs.fill).toBe(override);
      expect(override).not.toBe(runColor.get(tag));
    }
    // groups of other iterations keep their run colors
    expect(byId(scene, "bar-2.0")!.attrs.fill).toBe(runColor.get("2.0"));

    app.clearClass();
    expect(app.scene()).toEqual(before);
  });

  it("a transition class labels the group's members by destination", async () => {
    await app.transitionClass("3", 0, "from");
    const cls = app.activeClass!;
    const arrows = cls.labels.filter((l) => l.includes("→"));
    expect(arrows.length).toBeGreaterThan(0);
    for (const label of arrows) expect(label.startsWith("3.0→" + "4.")).toBe(true);
    expect(cls.labels).toContain("other");
    const total = Object.values(cls.counts).reduce((a, b) => a + b, 0);
    expect(total).toBe(app.summary.manifest.n_items);
    // per-connector counts agree with the transition matrix row
    const matrix = app.transitions.get(pairKey("3", "4"))!;
    const i = matrix.from_group_ids.indexOf(0);
    matrix.to_group_ids.forEach((tid, j) => {
      const count = matrix.counts[i]![j]!;
      if (count > 0) {
        expect(cls.counts[`3.0→${"4"}.${tid}`]).toBe(count);
      }
    });
    app.clearClass();
  });

  it("the 'to' direction runs the same labeling toward the previous axis", async () => {
    await app.transitionClass("3", 0, "to");
    const cls = app.activeClass!;
    const arrows = cls.labels.filter((l) => l.includes("→"));
    expect(arrows.length).toBeGreaterThan(0);
    for (const label of arrows) expect(label.startsWith("3.0→" + "2.")).toBe(true);
    app.clearClass();
  });

  it("connector details split the union into left/shared/right", async () => {
    // a connector that actually carries items
    const matrix = app.transitions.get(pairKey("3", "4"))!;
    let conn: { from: string; fromGroup: number; to: string; toGroup: number } | null = null;
    outer: for (let i = 0; i < matrix.from_group_ids.length; i++) {
      for (let j = 0; j < matrix.to_group_ids.length; j++) {
        if (matrix.counts[i]![j]! > 0) {
          conn = {
            from: "3",
            fromGroup: matrix.from_group_ids[i]!,
            to: "4",
            toGroup: matrix.to_group_ids[j]!,
          };
          break outer;
        }
      }
    }
    const before = app.scene();
    await app.connectorDetails(conn!);
    const cls = app.activeClass!;
    for (const label of cls.labels) {
      expect(["left only", "shared", "right only", "other"]).toContain(label);
    }
    expect(cls.counts["shared"]).toBeGreaterThan(0);
    // item-level labels recolor nothing at the group level
    expect(cls.groupColors.size).toBe(0);
    expect(app.scene()).toEqual(before);

    const res = await fetch(cls.csvUrl);
    expect(res.status).toBe(200);
    const lines = (await res.text()).trim().split("\n");
    expect(lines).toHaveLength(app.summary.manifest.n_items + 1);
    app.clearClass();
  });

  it("a failed class POST keeps the current class and raises the banner", async () => {
    await app.shareColorsFor("3");
    const kept = app.activeClass;
    await app.transitionClass("3", 99, "from"); // no such group
    expect(app.staleBanner).toContain("422");
    expect(app.activeClass).toBe(kept);
    app.staleBanner = null;
    app.clearClass();
  });

  it("hover state resolves the bar menu's connector token", () => {
    app.hover({ from: "3", fromGroup: 1, to: "4", toGroup: 2 });
    expect(app.connectorFromBar("3", 1)).toEqual(app.state.hovered);
    expect(app.connectorFromBar("4", 2)).toEqual(app.state.hovered);
    expect(app.connectorFromBar("3", 0)).toBeNull();
    app.hover(null);
  });

  it("memberIds picks exactly the group's items", async () => {
    const it3 = app.iterations.get("3")!;
    const ids = memberIds(it3.assignments, it3.item_ids, 0);
    const size = it3.groups.find((g) => g.group_id === 0)!.size;
    expect(ids).toHaveLength(size);
    const set = new Set(ids);
    it3.assignments.forEach((g, i) => {
      expect(set.has(it3.item_ids[i]!)).toBe(g === 0);
    });
  });
});
