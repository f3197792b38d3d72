/**
 * Pixel-grid geometry for the alluvial view. The contract: for every source
 * group, the rendered band widths must sum to the group's bar height within
 * one pixel at any zoom. Naive per-band rounding drifts by up to half a
 * device pixel per band, so widths are allocated with a largest-remainder
 * pass against the already-snapped bar height.
 */

/** Snap a length to the device pixel grid. */
export function snap(v: number, dpr: number): number {
  return Math.round(v * dpr) / dpr;
}

/**
 * Split `total` (a snapped length) into grid-aligned parts proportional to
 * `weights`. Zero weights get zero. The parts sum to `total` exactly.
 */
export function allocate(total: number, weights: number[], dpr: number): number[] {
  const sum = weights.reduce((a, b) => a + b, 0);
  if (sum <= 0 || total <= 0) return weights.map(() => 0);
  const cells = Math.round(total * dpr); // total is grid-aligned already
  const ideal = weights.map((w) => (w / sum) * cells);
  const floors = ideal.map(Math.floor);
  let left = cells - floors.reduce((a, b) => a + b, 0);
  // hand leftover cells to the largest fractional remainders; ties go to
  // the earlier index so the allocation is deterministic
  const order = ideal
    .map((v, i) => ({ i, frac: v - Math.floor(v) }))
    .sort((a, b) => b.frac - a.frac || a.i - b.i);
  const out = [...floors];
  for (let k = 0; k < order.length && left > 0; k++) {
    const slot = order[k]!;
    if (weights[slot.i]! > 0) {
      out[slot.i]! += 1;
      left -= 1;
    }
  }
  // every positive weight still rounds up to at least one cell if any are
  // left; with fewer cells than bands some bands legitimately collapse
  return out.map((c) => c / dpr);
}

export interface BarLayout {
  groupId: number;
  y: number;
  height: number;
}

/**
 * Stack group bars down an axis: heights proportional to sizes via `scale`
 * (pixels per item), fixed gaps between bars, everything snapped.
 */
export function stackBars(
  groupIds: number[],
  sizes: Map<number, number>,
  scale: number,
  gap: number,
  top: number,
  dpr: number,
): BarLayout[] {
  const out: BarLayout[] = [];
  let y = snap(top, dpr);
  for (const gid of groupIds) {
    const height = snap((sizes.get(gid) ?? 0) * scale, dpr);
    out.push({ groupId: gid, y, height });
    y = snap(y + height + gap, dpr);
  }
  return out;
}

/** Cubic horizontal ribbon between two vertical segments. */
export function ribbonPath(
  x0: number,
  y0: number,
  w0: number,
  x1: number,
  y1: number,
  w1: number,
): string {
  const mx = (x0 + x1) / 2;
  return (
    `M ${x0} ${y0}` +
    ` C ${mx} ${y0} ${mx} ${y1} ${x1} ${y1}` +
    ` L ${x1} ${y1 + w1}` +
    ` C ${mx} ${y1 + w1} ${mx} ${y0 + w0} ${x0} ${y0 + w0}` +
    ` Z`
  );
}
