import { beforeAll, describe, expect, inject, it } from "vitest";

import { ApiClient, ApiError } from "../src/api";
import { App } from "../src/app";
import { shareColors, showTransitions, similarityOf } from "../src/classes";
import { byId, nodesOfKind, type SceneNode } from "../src/scene";
import { buildWordclouds, layoutCloud, orderClouds } from "../src/wordcloud";
import { resetServer } from "./helpers";

const topicsBase = inject("topicsBase");
const blobBase = inject("blobBase");

const GAINED_GREEN = "#1d7a34";
const LOST_RED = "#b02a2a";

function termNodes(root: SceneNode): SceneNode[] {
  return nodesOfKind(root, "text").filter((n) => n.id?.startsWith("term-"));
}

describe("word clouds on the live topics run", () => {
  let app: App;

  beforeAll(async () => {
    await resetServer(topicsBase);
    app = new App(new ApiClient(topicsBase));
    await app.init();
  });

  it("a full-iteration class yields one weighted cloud per group", async () => {
    const cls = await shareColors(app.api, "4", app.runKeys);
    const groups = app.iterations.get("4")!.groups;
    expect([...cls.labels].sort()).toEqual(groups.map((g) => `4.${g.group_id}`).sort());
    expect(cls.groupColors.size).toBe(groups.length);

    const payload = await app.api.wordclouds(cls.id, "frequency");
    expect(payload.mode).toBe("frequency");
    expect(payload.clouds).toHaveLength(groups.length);

    const scene = buildWordclouds(payload, "label", {});
    for (const label of cls.labels) {
      const cloud = byId(scene, `cloud-${label}`)!;
      expect(cloud).toBeDefined();
      const terms = termNodes(cloud);
      expect(terms.length).toBeGreaterThan(0);
      // emitted biggest-first, and font size tracks |weight|
      const sizes = terms.map((t) => Number(t.attrs.size));
      for (let i = 1; i < sizes.length; i++) {
        expect(sizes[i]!).toBeLessThanOrEqual(sizes[i - 1]! + 1e-9);
      }
    }
  });

  it("topic-weight clouds come from the fitted topic rows, all nonnegative", async () => {
    const cls = await shareColors(app.api, "4", app.runKeys);
    const payload = await app.api.wordclouds(cls.id, "topic_weight");
    expect(payload.mode).toBe("topic_weight");
    expect(payload.clouds.length).toBeGreaterThan(0);
    for (const cloud of payload.clouds) {
      expect("entries" in cloud).toBe(true);
      if ("entries" in cloud) {
        expect(Object.keys(cloud.entries).length).toBeGreaterThan(0);
        for (const w of Object.values(cloud.entries)) expect(w).toBeGreaterThanOrEqual(0);
      }
    }
  });

  it("difference clouds color gained terms green and lost terms red", async () => {
    const cls = await showTransitions(app.api, "4", "5", 0, app.runKeys);
    expect(cls.labels.some((l) => l.includes("→"))).toBe(true);

    const payload = await app.api.wordclouds(cls.id, "difference");
    expect(payload.mode).toBe("difference");
    expect(payload.clouds.length).toBeGreaterThan(0);

    const scene = buildWordclouds(payload, "label", {});
    let churn = 0;
    for (const raw of payload.clouds) {
      expect("cloud" in raw).toBe(true);
      if (!("cloud" in raw)) continue;
      churn += raw.lost.length + raw.gained.length;
      const cloud = byId(scene, `cloud-${raw.cloud.class_label}`)!;
      expect(cloud).toBeDefined();
      expect(cloud.attrs.lost).toBe(raw.lost.join(","));
      expect(cloud.attrs.gained).toBe(raw.gained.join(","));
      for (const term of termNodes(cloud)) {
        const w = term.attrs.weight as number;
        if (w > 0) expect(term.attrs.fill).toBe(GAINED_GREEN);
        if (w < 0) expect(term.attrs.fill).toBe(LOST_RED);
      }
    }
    // topic membership actually moves between K=4 and K=5
    expect(churn).toBeGreaterThan(0);
  });

  it("reordering clouds needs no refetch: one payload, three orders", async () => {
    const cls = await app.api.createClass({ kind: "full", iteration: "4" });
    const payload = await app.api.wordclouds(cls.id, "frequency");

    const byLabel = buildWordclouds(payload, "label", {});
    const labels = byLabel.children!.map((c) => String(c.attrs.label));
    expect(labels).toEqual([...labels].sort());

    // per-label item counts from the class POST drive the doc-count order
    const docCounts = new Map(Object.entries(cls.counts));
    const byCount = buildWordclouds(payload, "doc_count", { docCounts });
    const counts = byCount.children!.map((c) => docCounts.get(String(c.attrs.label)) ?? 0);
    for (let i = 1; i < counts.length; i++) {
      expect(counts[i]!).toBeLessThanOrEqual(counts[i - 1]!);
    }

    const similarity = new Map(labels.map((l, i) => [l, -i]));
    const bySim = orderClouds(
      labels.map((label) => ({ label })),
      "similarity",
      { similarity },
    );
    expect(bySim.map((c) => c.label)).toEqual([...labels].reverse());
  });

  it("loaded clouds join the scene and reorder without a refetch", async () => {
    await app.shareColorsFor("4");
    await app.loadWordclouds(app.activeClass!.id, "frequency");
    const panel = byId(app.scene(), "wordclouds")!;
    expect(panel).toBeDefined();
    expect(panel.attrs.ordering).toBe("label");
    expect(panel.children!.length).toBeGreaterThan(0);

    app.setCloudOrdering("doc_count");
    const byCount = byId(app.scene(), "wordclouds")!;
    expect(byCount.attrs.ordering).toBe("doc_count");
    const counts = byCount.children!.map(
      (c) => app.activeClass!.counts[String(c.attrs.label)] ?? 0,
    );
    for (let i = 1; i < counts.length; i++) {
      expect(counts[i]!).toBeLessThanOrEqual(counts[i - 1]!);
    }

    app.setCloudOrdering("similarity");
    const bySim = byId(app.scene(), "wordclouds")!;
    const sim = similarityOf(app.activeClass!.labels, app.embedding);
    const xs = bySim.children!.map((c) => sim.get(String(c.attrs.label)) ?? 0);
    for (let i = 1; i < xs.length; i++) {
      expect(xs[i]!).toBeGreaterThanOrEqual(xs[i - 1]!);
    }

    app.setCloudOrdering("label");
    app.clearClass();
  });

  it("class CSV downloads with one line per item plus a header", async () => {
    const cls = await shareColors(app.api, "4", app.runKeys);
    const res = await fetch(cls.csvUrl);
    expect(res.status).toBe(200);
    const text = await res.text();
    const lines = text.trim().split("\n");
    expect(lines).toHaveLength(app.summary.manifest.n_items + 1);
    expect(lines[0]!.startsWith("item_id,")).toBe(true);
  });

  it("numeric runs reject word clouds with a 422", async () => {
    const api = new ApiClient(blobBase);
    const run = await api.run();
    const cls = await api.createClass({
      kind: "full",
      iteration: run.manifest.iteration_keys[0]!,
    });
    await expect(api.wordclouds(cls.id, "frequency")).rejects.toThrowError(ApiError);
    await expect(api.wordclouds(cls.id, "frequency")).rejects.toMatchObject({ status: 422 });
  });
});

describe("spiral cloud layout (pure)", () => {
  const entries: [string, number][] = [
    ["alpha", 9.5],
    ["bravo", -7.2],
    ["charlie", 5.1],
    ["delta", 3.3],
    ["echo", -2.8],
    ["foxtrot", 2.1],
    ["golf", 1.4],
    ["hotel", 0.9],
  ];

  it("is deterministic for a fixed input", () => {
    expect(layoutCloud(entries, 220, 220)).toEqual(layoutCloud(entries, 220, 220));
  });

  it("places terms without overlap, biggest first", () => {
    const nodes = layoutCloud(entries, 220, 220);
    expect(nodes).toHaveLength(entries.length);
    // recompute each box from the emitted node, slightly shrunk for rounding
    const boxes = nodes.map((n) => {
      const font = Number(n.attrs.size);
      const w = String(n.attrs.text).length * font * 0.58 - 0.4;
      const h = font * 1.1 - 0.4;
      return {
        x: Number(n.attrs.x) - w / 2,
        y: Number(n.attrs.y) - h / 2,
        w,
        h,
      };
    });
    for (let i = 0; i < boxes.length; i++) {
      for (let j = i + 1; j < boxes.length; j++) {
        const a = boxes[i]!;
        const b = boxes[j]!;
        const overlap =
          a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
        expect(overlap, `${nodes[i]!.id} overlaps ${nodes[j]!.id}`).toBe(false);
      }
    }
    // emitted in descending |weight| order, so fonts are non-increasing
    const sizes = nodes.map((n) => Number(n.attrs.size));
    for (let i = 1; i < sizes.length; i++) {
      expect(sizes[i]!).toBeLessThanOrEqual(sizes[i - 1]!);
    }
    // sign carries the palette: negative weights read as losses
    const bravo = nodes.find((n) => n.id === "term-bravo")!;
    expect(bravo.attrs.fill).toBe(LOST_RED);
  });
});
