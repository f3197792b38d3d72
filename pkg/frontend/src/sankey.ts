/**
 * Alluvial view: one vertical axis per visible iteration, bars stacked in
 * 1D-embedding order (noise last, engine-provided), ribbons between
 * consecutive visible axes sized by overlap counts. Hidden axes draw as
 * dashed lines and the ribbons bridge across them.
 *
 * Per-source-group ribbon widths are allocated against the snapped bar
 * height (largest remainder), so they sum to the bar within one device
 * pixel at any zoom; that is the geometric contract the tests hold us to.
 */

import type {
  EmbeddingPayload,
  IterationPayload,
  TransitionPayload,
  ViolinPayload,
} from "./api";
import { allocate, ribbonPath, snap, stackBars, type BarLayout } from "./geometry";
import { group, node, type SceneNode } from "./scene";
import type { ViewState } from "./state";

export interface SankeyViewport {
  width: number;
  height: number;
  zoom: number;
  dpr: number;
}

export interface SankeyData {
  runKeys: string[];
  iterations: Map<string, IterationPayload>;
  embedding: EmbeddingPayload;
  /** consecutive visible pairs, as the service computed them */
  pairs: [string, string][];
  transitions: Map<string, TransitionPayload>;
  violins: ViolinPayload | null;
  /** active class recoloring: "<iter>.<gid>" -> hex, else run color table */
  classColors: Map<string, string> | null;
}

export const MEMBERSHIP_BLUE = "#3b6fb5";
export const OUTLIER_RED = "#c23b3b";
const NOISE_GRAY = "#9e9e9e";
const BAR_WIDTH = 14;
const BAR_GAP = 4;
const MARGIN = { top: 20, bottom: 28, left: 30, right: 30 };

export function pairKey(a: string, b: string): string {
  return `${a}~${b}`;
}

export interface AxisLayout {
  key: string;
  x: number;
  visible: boolean;
  bars: BarLayout[];
}

/**
 * Bars scale with zoom; the per-item scale is chosen so the largest visible
 * axis fits the viewport at zoom 1.
 */
export function layoutAxes(
  data: SankeyData,
  state: ViewState,
  vp: SankeyViewport,
): AxisLayout[] {
  const usable = vp.height - MARGIN.top - MARGIN.bottom;
  let maxLoad = 1;
  for (const key of state.visible) {
    const it = data.iterations.get(key);
    if (!it) continue;
    const total =
      it.groups.reduce((a, g) => a + g.size, 0) + BAR_GAP * Math.max(0, it.groups.length - 1);
    maxLoad = Math.max(maxLoad, total);
  }
  const scale = (usable / maxLoad) * vp.zoom;

  const axes: AxisLayout[] = [];
  const innerW = vp.width - MARGIN.left - MARGIN.right;
  const n = data.runKeys.length;
  data.runKeys.forEach((key, i) => {
    const x = MARGIN.left + (n > 1 ? (i / (n - 1)) * innerW : innerW / 2);
    const visible = state.visible.includes(key);
    const it = data.iterations.get(key);
    let bars: BarLayout[] = [];
    if (visible && it) {
      const order = data.embedding.axis_orders[key] ?? it.groups.map((g) => g.group_id);
      const sizes = new Map(it.groups.map((g) => [g.group_id, g.size]));
      bars = stackBars(order, sizes, scale, BAR_GAP * vp.zoom, MARGIN.top, vp.dpr);
    }
    axes.push({ key, x: snap(x, vp.dpr), visible, bars });
  });
  return axes;
}

export function buildSankey(data: SankeyData, state: ViewState, vp: SankeyViewport): SceneNode {
  const axes = layoutAxes(data, state, vp);
  const axisOf = new Map(axes.map((a) => [a.key, a]));
  const colorOf = buildColorIndex(data);
  const children: SceneNode[] = [];

  // ribbons first so bars and labels paint over them
  for (const [from, to] of data.pairs) {
    const matrix = data.transitions.get(pairKey(from, to));
    const axisA = axisOf.get(from);
    const axisB = axisOf.get(to);
    if (!matrix || !axisA || !axisB) continue;
    children.push(buildRibbons(matrix, axisA, axisB, colorOf, state, vp));
  }

  for (const axis of axes) {
    children.push(buildAxis(axis, data, state, vp, colorOf));
  }

  return group("sankey", children, {
    width: vp.width,
    height: vp.height,
    zoom: vp.zoom,
  });
}

function buildColorIndex(data: SankeyData): (key: string, gid: number) => string {
  const table = new Map<string, string>();
  for (const row of data.embedding.rows) {
    table.set(`${row.iteration}.${row.group}`, row.color);
  }
  return (key, gid) => {
    const tag = `${key}.${gid}`;
    return data.classColors?.get(tag) ?? table.get(tag) ?? NOISE_GRAY;
  };
}

function buildAxis(
  axis: AxisLayout,
  data: SankeyData,
  state: ViewState,
  vp: SankeyViewport,
  colorOf: (key: string, gid: number) => string,
): SceneNode {
  const children: SceneNode[] = [];
  if (!axis.visible) {
    // hidden axes stay clickable as dashed lines
    children.push(
      node(
        "line",
        {
          x1: axis.x,
          y1: MARGIN.top,
          x2: axis.x,
          y2: vp.height - MARGIN.bottom,
          stroke: "#aaaaaa",
          dash: "4,3",
        },
        `axis-line-${axis.key}`,
      ),
    );
  } else {
    const it = data.iterations.get(axis.key);
    const byId = new Map(it?.groups.map((g) => [g.group_id, g]) ?? []);
    const violins = violinsFor(data, axis.key);
    for (const bar of axis.bars) {
      const info = byId.get(bar.groupId);
      const selected =
        state.selected?.iteration === axis.key && state.selected.group === bar.groupId;
      if (state.violinChannel !== "off" && violins.size > 0) {
        children.push(
          ...buildViolinGlyph(axis, bar, violins, state.violinChannel, vp, selected),
        );
      } else {
        children.push(
          node(
            "rect",
            {
              x: axis.x - BAR_WIDTH / 2,
              y: bar.y,
              width: BAR_WIDTH,
              height: bar.height,
              fill: colorOf(axis.key, bar.groupId),
              noise: info?.is_noise ?? false,
              selected,
              group: bar.groupId,
              iteration: axis.key,
            },
            `bar-${axis.key}.${bar.groupId}`,
          ),
        );
      }
    }
  }
  children.push(
    node(
      "text",
      {
        x: axis.x,
        y: vp.height - 8,
        text: axis.key,
        anchor: "middle",
        action: "toggle-visibility",
        hidden: !axis.visible,
      },
      `axis-label-${axis.key}`,
    ),
  );
  return group(`axis-${axis.key}`, children, { x: axis.x, visible: axis.visible });
}

function violinsFor(data: SankeyData, key: string): Map<string, ViolinPayload["violins"][number]> {
  const out = new Map<string, ViolinPayload["violins"][number]>();
  for (const v of data.violins?.violins ?? []) {
    if (v.iteration === key) out.set(`${v.channel}.${v.group}`, v);
  }
  return out;
}

/**
 * Violin replacing a bar: the density polygon spans the bar vertically.
 * Split mode puts membership on the left in blue and outlier on the right
 * in red; single channels mirror the same curve to both sides.
 */
function buildViolinGlyph(
  axis: AxisLayout,
  bar: BarLayout,
  violins: Map<string, ViolinPayload["violins"][number]>,
  channel: string,
  vp: SankeyViewport,
  selected: boolean,
): SceneNode[] {
  const half = BAR_WIDTH * 1.6;
  const sides: { name: string; sign: -1 | 1; color: string }[] =
    channel === "split"
      ? [
          { name: "membership", sign: -1, color: MEMBERSHIP_BLUE },
          { name: "outlier", sign: 1, color: OUTLIER_RED },
        ]
      : [
          { name: channel, sign: -1, color: channel === "outlier" ? OUTLIER_RED : MEMBERSHIP_BLUE },
          { name: channel, sign: 1, color: channel === "outlier" ? OUTLIER_RED : MEMBERSHIP_BLUE },
        ];
  const out: SceneNode[] = [];
  for (const side of sides) {
    const v = violins.get(`${side.name}.${bar.groupId}`);
    if (!v) continue;
    if (v.render_as_bar) {
      out.push(
        node(
          "rect",
          {
            x: side.sign < 0 ? axis.x - BAR_WIDTH / 2 : axis.x,
            y: bar.y,
            width: BAR_WIDTH / 2,
            height: bar.height,
            fill: side.color,
            channel: side.name,
            group: bar.groupId,
            iteration: axis.key,
            flat: true,
            selected,
          },
          `violin-${side.name}-${side.sign}-${axis.key}.${bar.groupId}`,
        ),
      );
      continue;
    }
    let d = "";
    v.grid.forEach((t, i) => {
      const y = bar.y + (1 - t) * bar.height;
      const w = (v.density[i] ?? 0) * v.width_scale * half * side.sign;
      d += `${i === 0 ? "M" : " L"} ${round2(axis.x + w)} ${round2(y)}`;
    });
    d += ` L ${round2(axis.x)} ${round2(bar.y)} Z`;
    out.push(
      node(
        "path",
        {
          d,
          fill: side.color,
          channel: side.name,
          group: bar.groupId,
          iteration: axis.key,
          median: v.median,
          selected,
        },
        `violin-${side.name}-${side.sign}-${axis.key}.${bar.groupId}`,
      ),
    );
  }
  return out;
}

function buildRibbons(
  matrix: TransitionPayload,
  axisA: AxisLayout,
  axisB: AxisLayout,
  colorOf: (key: string, gid: number) => string,
  state: ViewState,
  vp: SankeyViewport,
): SceneNode {
  const barA = new Map(axisA.bars.map((b) => [b.groupId, b]));
  const barB = new Map(axisB.bars.map((b) => [b.groupId, b]));
  const posB = new Map(matrix.to_group_ids.map((g, j) => [g, j]));

  // widths per source group: largest-remainder against the snapped bar
  const widths = new Map<number, number[]>();
  matrix.from_group_ids.forEach((gid, i) => {
    const bar = barA.get(gid);
    if (bar) widths.set(gid, allocate(bar.height, matrix.counts[i]!, vp.dpr));
  });

  // destination-side stacking offset per target group, consumed in source order
  const offsetB = new Map<number, number>(matrix.to_group_ids.map((g) => [g, 0]));

  const ribbons: SceneNode[] = [];
  matrix.from_group_ids.forEach((gid, i) => {
    const src = barA.get(gid);
    const w = widths.get(gid);
    if (!src || !w) return;
    let yA = src.y;
    matrix.to_group_ids.forEach((tid) => {
      const j = posB.get(tid)!;
      const count = matrix.counts[i]![j]!;
      const width = w[j]!;
      if (count <= 0 || width <= 0) return;
      const dst = barB.get(tid);
      if (!dst) return;
      const yB = dst.y + (offsetB.get(tid) ?? 0);
      offsetB.set(tid, (offsetB.get(tid) ?? 0) + width);
      const hovered =
        state.hovered !== null &&
        state.hovered.from === matrix.from &&
        state.hovered.fromGroup === gid &&
        state.hovered.to === matrix.to &&
        state.hovered.toGroup === tid;
      ribbons.push(
        node(
          "path",
          {
            d: ribbonPath(axisA.x + BAR_WIDTH / 2, yA, width, axisB.x - BAR_WIDTH / 2, yB, width),
            fill: colorOf(matrix.from, gid),
            opacity: hovered ? 0.95 : 0.45,
            from: matrix.from,
            fromGroup: gid,
            to: matrix.to,
            toGroup: tid,
            count,
            width,
            hovered,
          },
          `band-${matrix.from}.${gid}-${matrix.to}.${tid}`,
        ),
      );
      if (hovered) {
        ribbons.push(
          node(
            "text",
            {
              x: (axisA.x + axisB.x) / 2,
              y: (yA + yB) / 2,
              text: `${matrix.from}.${gid} -> ${matrix.to}.${tid}: ${count}`,
              anchor: "middle",
            },
            `band-label-${matrix.from}.${gid}-${matrix.to}.${tid}`,
          ),
        );
      }
      yA += width;
    });
  });
  return group(`ribbons-${matrix.from}~${matrix.to}`, ribbons, {
    from: matrix.from,
    to: matrix.to,
  });
}

/** Context-menu entries for a bar; the app wires the actions. */
export function barMenu(iteration: string, gid: number): { label: string; action: string }[] {
  return [
    { label: "Share colors", action: `class-full:${iteration}` },
    { label: "Show transitions from", action: `class-transition-from:${iteration}.${gid}` },
    { label: "Show transitions to", action: `class-transition-to:${iteration}.${gid}` },
    { label: "Show transition details", action: `class-connector:${iteration}.${gid}` },
    { label: "Select members", action: `select:${iteration}.${gid}` },
  ];
}

function round2(v: number): number {
  return Math.round(v * 100) / 100;
}
