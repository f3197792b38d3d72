/**
 * Archetype-threshold panel: the sweep curve (archetype count and noise
 * share as functions of the recurrence threshold) plus a spinner. Changing
 * the spinner is one POST; the response alone re-labels completeness and
 * archetype colors. The run color table never changes with the threshold,
 * so item-colored dots keep their exact color values.
 */

import type { ArchetypePayload, SweepCurve } from "./api";
import { group, node, type SceneNode } from "./scene";

export interface ThresholdViewport {
  width: number;
  height: number;
}

export function buildThresholdPanel(
  model: ArchetypePayload,
  sweep: SweepCurve,
  vp: ThresholdViewport,
): SceneNode {
  const margin = { left: 34, right: 10, top: 8, bottom: 22 };
  const innerW = vp.width - margin.left - margin.right;
  const innerH = vp.height - margin.top - margin.bottom;
  const points = sweep.curve;
  const tLo = points[0]?.threshold ?? 2;
  const tHi = points[points.length - 1]?.threshold ?? tLo + 1;
  const xOf = (t: number) => margin.left + ((t - tLo) / (tHi - tLo || 1)) * innerW;

  const children: SceneNode[] = [];
  for (const [field, color] of [
    ["n_archetypes", "#7b3fa0"],
    ["noise_pct", "#888888"],
  ] as const) {
    const values = points.map((p) => p[field]);
    const hi = Math.max(...values, 1);
    let d = "";
    points.forEach((p, i) => {
      const y = margin.top + innerH - (p[field] / hi) * innerH;
      d += `${i === 0 ? "M" : " L"} ${round2(xOf(p.threshold))} ${round2(y)}`;
    });
    children.push(
      node("path", { d, stroke: color, fill: "none", series: field }, `curve-${field}`),
    );
  }
  // current pick marker on the curve
  children.push(
    node(
      "line",
      {
        x1: round2(xOf(model.threshold)),
        y1: margin.top,
        x2: round2(xOf(model.threshold)),
        y2: margin.top + innerH,
        stroke: "#333333",
      },
      "threshold-marker",
    ),
  );
  children.push(
    node(
      "spinner",
      {
        value: model.threshold,
        min: tLo,
        max: tHi,
        default: model.default_threshold,
        action: "set-threshold",
      },
      "threshold-spinner",
    ),
  );
  children.push(
    node(
      "text",
      {
        x: margin.left,
        y: vp.height - 6,
        text: `${model.n_archetypes} archetypes, ${round2(model.noise_pct)}% noise`,
        anchor: "start",
      },
      "threshold-readout",
    ),
  );
  // archetype color legend follows the current model
  const legend: SceneNode[] = [];
  const ids = Object.keys(model.archetype_colors).sort((a, b) => Number(a) - Number(b));
  ids.forEach((aid, i) => {
    legend.push(
      node(
        "rect",
        {
          x: margin.left + i * 18,
          y: vp.height - 20,
          width: 14,
          height: 8,
          fill: model.archetype_colors[aid]!,
          archetype: Number(aid),
          noise: model.noise_archetype_ids.includes(Number(aid)),
        },
        `legend-${aid}`,
      ),
    );
  });
  children.push(group("archetype-legend", legend, { count: ids.length }));
  return group("threshold-panel", children, {
    threshold: model.threshold,
    n_archetypes: model.n_archetypes,
  });
}

function round2(v: number): number {
  return Math.round(v * 100) / 100;
}
