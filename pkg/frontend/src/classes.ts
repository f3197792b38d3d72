/**
 * Class propagation: turn a selection into a persisted item attribute via
 * POST /class, surface the CSV download link, and recolor the current
 * session's bars and dots by the class labels.
 */

import type { ApiClient, ClassPayload, EmbeddingPayload } from "./api";

export interface ActiveClass {
  id: string;
  name: string;
  csvUrl: string;
  /** "<iteration>.<gid>" -> color override for bars/dots */
  groupColors: Map<string, string>;
  labels: string[];
  /** items per label, for the doc-count cloud ordering */
  counts: Record<string, number>;
}

// categorical palette for class label recoloring
const CLASS_PALETTE = [
  "#4c78a8",
  "#f58518",
  "#54a24b",
  "#e45756",
  "#72b7b2",
  "#eeca3b",
  "#b279a2",
  "#9d755d",
];

export function classColorOf(labels: string[], label: string): string {
  const i = labels.indexOf(label);
  return CLASS_PALETTE[(i < 0 ? 0 : i) % CLASS_PALETTE.length]!;
}

/**
 * A full-iteration class labels every group of that iteration "key.gid";
 * groups elsewhere keep their run colors. Transition/connector labels are
 * per-item ("3.0→4.1", "shared", ...), not group references, so they
 * contribute no group recoloring; they exist for clouds and the CSV.
 */
export function groupColorOverrides(
  payload: ClassPayload,
  runKeys: string[],
): Map<string, string> {
  const out = new Map<string, string>();
  for (const label of payload.labels) {
    const dot = label.lastIndexOf(".");
    if (dot <= 0) continue;
    const key = label.slice(0, dot);
    if (!runKeys.includes(key)) continue; // e.g. "other" buckets
    out.set(label, classColorOf(payload.labels, label));
  }
  return out;
}

export async function shareColors(
  api: ApiClient,
  iteration: string,
  runKeys: string[],
): Promise<ActiveClass> {
  const payload = await api.createClass({ kind: "full", iteration });
  return toActive(api, payload, runKeys);
}

export async function showTransitions(
  api: ApiClient,
  from: string,
  to: string,
  source: number,
  runKeys: string[],
): Promise<ActiveClass> {
  const payload = await api.createClass({ kind: "transition", from, to, source });
  return toActive(api, payload, runKeys);
}

export async function transitionDetails(
  api: ApiClient,
  from: string,
  a: number,
  to: string,
  b: number,
  runKeys: string[],
): Promise<ActiveClass> {
  const payload = await api.createClass({ kind: "connector", from, to, a, b });
  return toActive(api, payload, runKeys);
}

function toActive(api: ApiClient, payload: ClassPayload, runKeys: string[]): ActiveClass {
  return {
    id: payload.id,
    name: payload.name,
    csvUrl: api.classCsvUrl(payload.id),
    groupColors: groupColorOverrides(payload, runKeys),
    labels: payload.labels,
    counts: payload.counts,
  };
}

/**
 * Mean 1D position per group-addressable label, for ordering clouds by
 * similarity along the shared embedding axis.
 */
export function similarityOf(
  labels: string[],
  embedding: EmbeddingPayload,
): Map<string, number> {
  const x1d = new Map(embedding.rows.map((r) => [`${r.iteration}.${r.group}`, r.x1d]));
  const out = new Map<string, number>();
  for (const label of labels) {
    const v = x1d.get(label);
    if (v !== undefined) out.set(label, v);
  }
  return out;
}

/** Members of the selected group, for "Select members". */
export function memberIds(
  assignments: number[],
  itemIds: string[],
  gid: number,
): string[] {
  const out: string[] = [];
  assignments.forEach((g, i) => {
    if (g === gid) out.push(itemIds[i]!);
  });
  return out;
}

/** Neighbours of an iteration among the visible pairs, for menu wiring. */
export function adjacentPairs(
  iteration: string,
  pairs: [string, string][],
): { before: string | null; after: string | null } {
  let before: string | null = null;
  let after: string | null = null;
  for (const [a, b] of pairs) {
    if (b === iteration) before = a;
    if (a === iteration) after = b;
  }
  return { before, after };
}
