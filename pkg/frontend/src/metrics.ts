/**
 * Multi-line chart of every iteration metric across the sweep axis.
 * Direction drives the palette: warm for higher-is-better, cool for
 * lower-is-better. Iterations fully covered by archetypes get a dark
 * gridline and an asterisk on their tick label.
 */

import type { RunSummary } from "./api";
import { group, node, type SceneNode } from "./scene";

// warm for higher_better, cool for lower_better
const WARM = ["#d62728", "#ff7f0e", "#e377c2", "#bcbd22", "#8c564b"];
const COOL = ["#1f77b4", "#17becf", "#9467bd", "#2ca02c", "#7f7f7f"];

export interface MetricsViewport {
  width: number;
  height: number;
}

export interface TooltipModel {
  iteration: string;
  metrics: { name: string; value: number | null; direction: string }[];
}

/** Everything shown when hovering a chart point: all metrics of that column. */
export function tooltipModel(summary: RunSummary, key: string): TooltipModel {
  const entries = summary.metrics[key] ?? {};
  return {
    iteration: key,
    metrics: Object.keys(entries)
      .sort()
      .map((name) => ({
        name,
        value: entries[name]!.value,
        direction: entries[name]!.direction,
      })),
  };
}

export function buildMetricsChart(
  summary: RunSummary,
  completeIterations: string[],
  viewport: MetricsViewport,
): SceneNode {
  const keys = summary.manifest.iteration_keys;
  const complete = new Set(completeIterations);
  const margin = { left: 40, right: 12, top: 8, bottom: 24 };
  const innerW = viewport.width - margin.left - margin.right;
  const innerH = viewport.height - margin.top - margin.bottom;
  const xOf = (i: number) =>
    margin.left + (keys.length > 1 ? (i / (keys.length - 1)) * innerW : innerW / 2);

  // each metric normalized to its own [min, max] so lines share the panel
  const names = metricNames(summary);
  const children: SceneNode[] = [];

  keys.forEach((key, i) => {
    const isComplete = complete.has(key);
    children.push(
      node(
        "line",
        {
          x1: xOf(i),
          y1: margin.top,
          x2: xOf(i),
          y2: margin.top + innerH,
          stroke: isComplete ? "#333333" : "#dddddd",
          "stroke-width": isComplete ? 1.5 : 1,
        },
        `gridline-${key}`,
      ),
    );
    children.push(
      node(
        "text",
        {
          x: xOf(i),
          y: viewport.height - 6,
          text: isComplete ? `${key}*` : key,
          anchor: "middle",
          fill: isComplete ? "#111111" : "#555555",
        },
        `tick-${key}`,
      ),
    );
  });

  let warmUsed = 0;
  let coolUsed = 0;
  for (const name of names) {
    const direction = summary.directions[name] ?? "higher_better";
    const color =
      direction === "lower_better"
        ? COOL[coolUsed++ % COOL.length]!
        : WARM[warmUsed++ % WARM.length]!;
    const values = keys.map((k) => summary.metrics[k]?.[name]?.value ?? null);
    const present = values.filter((v): v is number => v !== null);
    if (present.length === 0) continue;
    const lo = Math.min(...present);
    const hi = Math.max(...present);
    const span = hi - lo || 1;
    const points: SceneNode[] = [];
    let d = "";
    let pen = false;
    values.forEach((v, i) => {
      if (v === null) {
        pen = false;
        return;
      }
      const x = xOf(i);
      const y = margin.top + innerH - ((v - lo) / span) * innerH;
      d += `${pen ? " L" : " M"} ${round2(x)} ${round2(y)}`;
      pen = true;
      points.push(
        node(
          "circle",
          { cx: round2(x), cy: round2(y), r: 2.5, fill: color, iteration: keys[i]!, metric: name, value: v },
          `pt-${name}-${keys[i]}`,
        ),
      );
    });
    children.push(
      node(
        "path",
        { d: d.trim(), stroke: color, fill: "none", "stroke-width": 1.5, metric: name, direction },
        `line-${name}`,
      ),
    );
    children.push(...points);
  }
  return group("metrics-chart", children, { width: viewport.width, height: viewport.height });
}

export function metricNames(summary: RunSummary): string[] {
  const names = new Set<string>();
  for (const key of summary.manifest.iteration_keys) {
    for (const name of Object.keys(summary.metrics[key] ?? {})) names.add(name);
  }
  return [...names].sort();
}

function round2(v: number): number {
  return Math.round(v * 100) / 100;
}
