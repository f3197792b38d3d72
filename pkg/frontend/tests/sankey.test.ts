import { afterAll, beforeAll, describe, expect, inject, it } from "vitest";

import { ApiClient } from "../src/api";
import { App } from "../src/app";
import { layoutAxes, pairKey, type SankeyData } from "../src/sankey";
import { byId, nodesOfKind } from "../src/scene";
import { resetServer } from "./helpers";

const base = inject("blobBase");

function sankeyData(app: App): SankeyData {
  return {
    runKeys: app.runKeys,
    iterations: app.iterations,
    embedding: app.embedding,
    pairs: app.pairs,
    transitions: app.transitions,
    violins: app.violins,
    classColors: null,
  };
}

describe("alluvial view against the live blob run", () => {
  let app: App;

  beforeAll(async () => {
    await resetServer(base);
    app = new App(new ApiClient(base));
    await app.init();
  });

  afterAll(async () => {
    await resetServer(base);
  });

  it("per source group, band widths sum to the bar height within 1px at 3 zooms", () => {
    // the geometric contract: tested at three zoom levels and a non-unit
    // device pixel ratio, reading widths out of the rendered scene
    for (const zoom of [0.6, 1, 2.3]) {
      const vp = { width: 1400, height: 640, zoom, dpr: 1.5 };
      const scene = app.scene({ ...vp, width: vp.width, height: vp.height * 2 });
      const axes = layoutAxes(sankeyData(app), app.state, vp);
      const barOf = new Map<string, number>();
      for (const axis of axes) {
        for (const bar of axis.bars) barOf.set(`${axis.key}.${bar.groupId}`, bar.height);
      }
      const sums = new Map<string, number>();
      for (const band of nodesOfKind(scene, "path")) {
        if (!band.id?.startsWith("band-")) continue;
        const key = `${band.attrs.from}.${band.attrs.fromGroup}`;
        sums.set(key, (sums.get(key) ?? 0) + Number(band.attrs.width));
      }
      expect(sums.size).toBeGreaterThan(0);
      for (const [key, total] of sums) {
        const bar = barOf.get(key);
        expect(bar, `bar for ${key}`).toBeDefined();
        expect(
          Math.abs(total - bar!),
          `zoom ${zoom}: bands of ${key} sum ${total} vs bar ${bar}`,
        ).toBeLessThanOrEqual(1);
      }
    }
  });

  it("band widths are proportional to overlap counts within one pixel", () => {
    const scene = app.scene();
    const [a, b] = app.pairs[0]!;
    const matrix = app.transitions.get(pairKey(a, b))!;
    const axes = layoutAxes(sankeyData(app), app.state, {
      width: 1280,
      height: 360,
      zoom: 1,
      dpr: 1,
    });
    const srcAxis = axes.find((ax) => ax.key === a)!;
    matrix.from_group_ids.forEach((gid, i) => {
      const bar = srcAxis.bars.find((bb) => bb.groupId === gid)!;
      const rowTotal = matrix.counts[i]!.reduce((x, y) => x + y, 0);
      matrix.to_group_ids.forEach((tid, j) => {
        const count = matrix.counts[i]![j]!;
        if (count === 0) return;
        const band = byId(scene, `band-${a}.${gid}-${b}.${tid}`);
        expect(band).not.toBeNull();
        const ideal = (count / rowTotal) * bar.height;
        expect(Math.abs(Number(band!.attrs.width) - ideal)).toBeLessThanOrEqual(1);
        expect(band!.attrs.count).toBe(count);
      });
    });
  });

  it("stacks bars in the 1D embedding order", () => {
    const key = app.runKeys[2]!;
    const order = app.embedding.axis_orders[key]!;
    const scene = app.scene();
    const ys = order.map((gid) => Number(byId(scene, `bar-${key}.${gid}`)!.attrs.y));
    const sorted = [...ys].sort((p, q) => p - q);
    expect(ys).toEqual(sorted);
  });

  it("hiding a middle axis draws it dashed and bridges the bands across", async () => {
    const middle = app.runKeys[2]!; // "4"
    const left = app.runKeys[1]!;
    const right = app.runKeys[3]!;
    await app.toggleAxis(middle);
    expect(app.pairs.map(([x, y]) => pairKey(x, y))).toContain(pairKey(left, right));
    const scene = app.scene();
    expect(byId(scene, `axis-line-${middle}`)?.attrs.dash).toBe("4,3");
    expect(byId(scene, `bar-${middle}.0`)).toBeNull();
    const bridged = nodesOfKind(scene, "path").filter(
      (p) => p.id?.startsWith(`band-${left}.`) && p.attrs.to === right,
    );
    expect(bridged.length).toBeGreaterThan(0);
    // conservation also holds across the bridge
    const matrix = app.transitions.get(pairKey(left, right))!;
    const total = matrix.counts.flat().reduce((x, y) => x + y, 0);
    expect(total).toBe(app.summary.manifest.n_items);
    await app.toggleAxis(middle); // restore
  });

  it("violin channel replaces bars, split puts membership left in blue", async () => {
    await app.setViolinChannel("split");
    const scene = app.scene();
    const key = app.runKeys[0]!;
    expect(byId(scene, `bar-${key}.0`)).toBeNull();
    const left = byId(scene, `violin-membership--1-${key}.0`);
    const right = byId(scene, `violin-outlier-1-${key}.0`);
    expect(left).not.toBeNull();
    expect(right).not.toBeNull();
    expect(left!.attrs.fill).toBe("#3b6fb5");
    expect(right!.attrs.fill).toBe("#c23b3b");
    await app.setViolinChannel("off");
    expect(byId(app.scene(), `bar-${key}.0`)).not.toBeNull();
  });

  it("hovering a connector raises its band and shows the count label", () => {
    const [a, b] = app.pairs[0]!;
    const matrix = app.transitions.get(pairKey(a, b))!;
    let gid = -1;
    let tid = -1;
    outer: for (let i = 0; i < matrix.from_group_ids.length; i++) {
      for (let j = 0; j < matrix.to_group_ids.length; j++) {
        if (matrix.counts[i]![j]! > 0) {
          gid = matrix.from_group_ids[i]!;
          tid = matrix.to_group_ids[j]!;
          break outer;
        }
      }
    }
    app.hover({ from: a, fromGroup: gid, to: b, toGroup: tid });
    const scene = app.scene();
    const band = byId(scene, `band-${a}.${gid}-${b}.${tid}`)!;
    expect(band.attrs.hovered).toBe(true);
    expect(Number(band.attrs.opacity)).toBeGreaterThan(0.9);
    const label = byId(scene, `band-label-${a}.${gid}-${b}.${tid}`)!;
    expect(String(label.attrs.text)).toContain(String(band.attrs.count));
    app.hover(null);
  });

  it("a failed visibility change keeps the view and raises the stale banner", async () => {
    let failNext = false;
    const flaky: typeof fetch = (url, init) => {
      if (failNext) {
        failNext = false;
        return Promise.reject(new Error("connection lost"));
      }
      return fetch(url, init);
    };
    const flakyApp = new App(new ApiClient(base, flaky));
    await flakyApp.init();
    const visibleBefore = [...flakyApp.state.visible];
    const sceneBefore = flakyApp.scene();

    failNext = true;
    await flakyApp.toggleAxis(flakyApp.runKeys[1]!);
    expect(flakyApp.state.visible).toEqual(visibleBefore);
    expect(flakyApp.staleBanner).toContain("connection lost");
    const banner = byId(flakyApp.scene(), "stale-banner");
    expect(banner).not.toBeNull();
    expect(String(banner!.attrs.message)).toContain("connection lost");
    // the underlying content is unchanged, only the banner was added
    flakyApp.staleBanner = null;
    expect(flakyApp.scene()).toEqual(sceneBefore);

    // and the next successful change clears the failure path
    await flakyApp.toggleAxis(flakyApp.runKeys[1]!);
    expect(flakyApp.state.visible).not.toEqual(visibleBefore);
    expect(flakyApp.staleBanner).toBeNull();
    await resetServer(base);
  });
});
