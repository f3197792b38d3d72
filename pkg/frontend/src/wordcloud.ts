/**
 * Word clouds per class label. The engine ships only (term, weight) pairs;
 * placement is a simple Archimedean spiral with box collision, entirely
 * client-side, so re-ordering clouds is a sort and not a refetch.
 * Difference clouds: gained terms green, lost terms red, sized by |delta|.
 */

import type { TermCloudPayload, WordcloudPayload } from "./api";
import { group, node, type SceneNode } from "./scene";

const GAINED_GREEN = "#1d7a34";
const LOST_RED = "#b02a2a";
const TERM_COLOR = "#23324d";
const MIN_FONT = 9;
const MAX_FONT = 26;

export type CloudOrdering = "label" | "similarity" | "doc_count";

interface Box {
  x: number;
  y: number;
  w: number;
  h: number;
}

function collides(a: Box, boxes: Box[]): boolean {
  for (const b of boxes) {
    if (a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h) return true;
  }
  return false;
}

/** Spiral placement, biggest terms first; deterministic for fixed input. */
export function layoutCloud(
  entries: [string, number][],
  width: number,
  height: number,
): SceneNode[] {
  const weights = entries.map(([, w]) => Math.abs(w));
  const hi = Math.max(...weights, 1e-12);
  const ordered = entries
    .map(([term, w], i) => ({ term, w, i }))
    .sort((a, b) => Math.abs(b.w) - Math.abs(a.w) || a.i - b.i);
  const placed: Box[] = [];
  const out: SceneNode[] = [];
  const cx = width / 2;
  const cy = height / 2;
  for (const { term, w } of ordered) {
    const font = MIN_FONT + (MAX_FONT - MIN_FONT) * (Math.abs(w) / hi);
    // crude glyph metrics are fine: the layout only has to avoid overlap
    const box: Box = { x: 0, y: 0, w: term.length * font * 0.58, h: font * 1.1 };
    let angle = 0;
    let radius = 0;
    for (let step = 0; step < 2000; step++) {
      box.x = cx + radius * Math.cos(angle) - box.w / 2;
      box.y = cy + radius * Math.sin(angle) - box.h / 2;
      if (!collides(box, placed)) break;
      angle += 0.6;
      radius += 0.35;
    }
    placed.push({ ...box });
    out.push(
      node(
        "text",
        {
          x: round1(box.x + box.w / 2),
          y: round1(box.y + box.h / 2),
          text: term,
          size: round1(font),
          fill: w < 0 ? LOST_RED : TERM_COLOR,
          weight: w,
          anchor: "middle",
        },
        `term-${term}`,
      ),
    );
  }
  return out;
}

export interface CloudContext {
  /** mean 1D position per class label, for similarity ordering */
  similarity?: Map<string, number>;
  /** document count per class label */
  docCounts?: Map<string, number>;
}

export function orderClouds(
  clouds: { label: string }[],
  ordering: CloudOrdering,
  ctx: CloudContext,
): { label: string }[] {
  const sorted = [...clouds];
  if (ordering === "similarity" && ctx.similarity) {
    const sim = ctx.similarity;
    sorted.sort(
      (a, b) => (sim.get(a.label) ?? 0) - (sim.get(b.label) ?? 0) || cmp(a.label, b.label),
    );
  } else if (ordering === "doc_count" && ctx.docCounts) {
    const dc = ctx.docCounts;
    sorted.sort(
      (a, b) => (dc.get(b.label) ?? 0) - (dc.get(a.label) ?? 0) || cmp(a.label, b.label),
    );
  } else {
    sorted.sort((a, b) => cmp(a.label, b.label));
  }
  return sorted;
}

export function buildWordclouds(
  payload: WordcloudPayload,
  ordering: CloudOrdering,
  ctx: CloudContext,
  cloudSize = 220,
): SceneNode {
  const flat = payload.clouds.map((c) => {
    const cloud: TermCloudPayload = "cloud" in c ? c.cloud : c;
    return { label: cloud.class_label, cloud, full: c };
  });
  const ordered = orderClouds(flat, ordering, ctx) as typeof flat;
  const children = ordered.map(({ label, cloud, full }, i) => {
    const terms = layoutCloud(Object.entries(cloud.entries), cloudSize, cloudSize);
    // difference clouds carry gained-green styling on positive deltas
    if (payload.mode === "difference") {
      for (const t of terms) {
        if ((t.attrs.weight as number) > 0) t.attrs.fill = GAINED_GREEN;
      }
    }
    const meta: Record<string, string | number | boolean> = {
      label,
      mode: payload.mode,
      index: i,
    };
    if ("lost" in full) {
      meta.lost = full.lost.join(",");
      meta.gained = full.gained.join(",");
    }
    return group(`cloud-${label}`, terms, meta);
  });
  return group("wordclouds", children, { mode: payload.mode, ordering });
}

function cmp(a: string, b: string): number {
  return a < b ? -1 : a > b ? 1 : 0;
}

function round1(v: number): number {
  return Math.round(v * 10) / 10;
}
