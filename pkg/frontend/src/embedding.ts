/**
 * Scatter of every pooled group under the chosen projection. Painted in
 * five passes so the busiest state stays readable: hidden iterations faded,
 * visible dots, the selected iteration's column labeled, the hovered
 * connector's endpoints dotted, and the clicked group's connection web with
 * arrowheads and counts (incoming navy-dashed, outgoing solid).
 */

import type { EmbeddingPayload, TransitionPayload } from "./api";
import { group, node, type SceneNode } from "./scene";
import type { ViewState } from "./state";

export interface EmbeddingViewport {
  width: number;
  height: number;
}

const NAVY = "#1a2b6d";
const DOT_R = 4;
const PAD = 16;

export interface WebEdge {
  from: string;
  fromGroup: number;
  to: string;
  toGroup: number;
  count: number;
  incoming: boolean;
}

/**
 * Overlap edges touching the selected group in the adjacent visible
 * iterations; `transitions` holds the consecutive visible pairs.
 */
export function connectionWeb(
  selected: { iteration: string; group: number },
  pairs: [string, string][],
  transitions: Map<string, TransitionPayload>,
): WebEdge[] {
  const edges: WebEdge[] = [];
  for (const [a, b] of pairs) {
    const matrix = transitions.get(`${a}~${b}`);
    if (!matrix) continue;
    if (a === selected.iteration) {
      const i = matrix.from_group_ids.indexOf(selected.group);
      if (i < 0) continue;
      matrix.to_group_ids.forEach((tid, j) => {
        const count = matrix.counts[i]![j]!;
        if (count > 0) {
          edges.push({ from: a, fromGroup: selected.group, to: b, toGroup: tid, count, incoming: false });
        }
      });
    } else if (b === selected.iteration) {
      const j = matrix.to_group_ids.indexOf(selected.group);
      if (j < 0) continue;
      matrix.from_group_ids.forEach((fid, i) => {
        const count = matrix.counts[i]![j]!;
        if (count > 0) {
          edges.push({ from: a, fromGroup: fid, to: b, toGroup: selected.group, count, incoming: true });
        }
      });
    }
  }
  return edges;
}

export function buildEmbedding(
  embedding: EmbeddingPayload,
  state: ViewState,
  pairs: [string, string][],
  transitions: Map<string, TransitionPayload>,
  classColors: Map<string, string> | null,
  vp: EmbeddingViewport,
): SceneNode {
  const rows = embedding.rows;
  const xs = rows.map((r) => r.x);
  const ys = rows.map((r) => r.y);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = Math.min(...ys);
  const yHi = Math.max(...ys);
  const sx = (v: number) =>
    PAD + ((v - xLo) / (xHi - xLo || 1)) * (vp.width - 2 * PAD);
  const sy = (v: number) =>
    PAD + ((v - yLo) / (yHi - yLo || 1)) * (vp.height - 2 * PAD);

  const visible = new Set(state.visible);
  const sizes = rows.map((r) => r.size_value);
  const sizeLo = Math.min(...sizes);
  const sizeHi = Math.max(...sizes);
  const radius = (r: (typeof rows)[number]) => {
    if (state.sizeAttribute === "uniform") return DOT_R;
    const t = (r.size_value - sizeLo) / (sizeHi - sizeLo || 1);
    return DOT_R * (0.6 + 1.4 * t);
  };
  const colorOf = (r: (typeof rows)[number]) =>
    classColors?.get(`${r.iteration}.${r.group}`) ?? r.color;
  const position = new Map<string, (typeof rows)[number]>(
    rows.map((r) => [`${r.iteration}.${r.group}`, r]),
  );

  const hiddenPass: SceneNode[] = [];
  const visiblePass: SceneNode[] = [];
  const labelPass: SceneNode[] = [];
  for (const r of rows) {
    const dot = node(
      "circle",
      {
        cx: round2(sx(r.x)),
        cy: round2(sy(r.y)),
        r: round2(radius(r)),
        fill: colorOf(r),
        opacity: visible.has(r.iteration) ? 1 : 0.18,
        iteration: r.iteration,
        group: r.group,
        noise: r.is_noise,
        archetype: r.archetype,
      },
      `dot-${r.iteration}.${r.group}`,
    );
    (visible.has(r.iteration) ? visiblePass : hiddenPass).push(dot);
    if (state.selected?.iteration === r.iteration) {
      labelPass.push(
        node(
          "text",
          {
            x: round2(sx(r.x)),
            y: round2(sy(r.y) - radius(r) - 3),
            text: `${r.iteration}.${r.group}`,
            anchor: "middle",
          },
          `dot-label-${r.iteration}.${r.group}`,
        ),
      );
    }
  }

  const hoverPass: SceneNode[] = [];
  if (state.hovered) {
    for (const end of [
      `${state.hovered.from}.${state.hovered.fromGroup}`,
      `${state.hovered.to}.${state.hovered.toGroup}`,
    ]) {
      const r = position.get(end);
      if (!r) continue;
      hoverPass.push(
        node(
          "circle",
          {
            cx: round2(sx(r.x)),
            cy: round2(sy(r.y)),
            r: round2(radius(r) + 3),
            stroke: "#222222",
            dash: "2,2",
            fill: "none",
          },
          `hover-ring-${end}`,
        ),
      );
    }
  }

  const webPass: SceneNode[] = [];
  if (state.selected) {
    for (const edge of connectionWeb(state.selected, pairs, transitions)) {
      const a = position.get(`${edge.from}.${edge.fromGroup}`);
      const b = position.get(`${edge.to}.${edge.toGroup}`);
      if (!a || !b) continue;
      webPass.push(
        node(
          "arrow",
          {
            x1: round2(sx(a.x)),
            y1: round2(sy(a.y)),
            x2: round2(sx(b.x)),
            y2: round2(sy(b.y)),
            stroke: edge.incoming ? NAVY : "#333333",
            dash: edge.incoming ? "5,3" : "",
            count: edge.count,
          },
          `web-${edge.from}.${edge.fromGroup}-${edge.to}.${edge.toGroup}`,
        ),
      );
      webPass.push(
        node(
          "text",
          {
            x: round2((sx(a.x) + sx(b.x)) / 2),
            y: round2((sy(a.y) + sy(b.y)) / 2 - 4),
            text: String(edge.count),
            anchor: "middle",
          },
          `web-count-${edge.from}.${edge.fromGroup}-${edge.to}.${edge.toGroup}`,
        ),
      );
    }
  }

  return group("embedding", [
    group("pass-hidden", hiddenPass),
    group("pass-visible", visiblePass),
    group("pass-labels", labelPass),
    group("pass-hover", hoverPass),
    group("pass-web", webPass),
  ], { method: embedding.method, color_mode: embedding.color_mode });
}

function round2(v: number): number {
  return Math.round(v * 100) / 100;
}
