/**
 * The whole interactive state of the client, serializable into the URL
 * fragment so a session can be shared as a link. Everything else on screen
 * is derived from this plus server data.
 */

export type ViolinChannel = "off" | "membership" | "outlier" | "split";
export type ColorMode = "by_item" | "by_archetype";

export interface GroupRef {
  iteration: string;
  group: number;
}

export interface ConnectorRef {
  from: string;
  fromGroup: number;
  to: string;
  toGroup: number;
}

export interface ViewState {
  /** iteration keys currently shown as axes, in run order */
  visible: string[];
  selected: GroupRef | null;
  hovered: ConnectorRef | null;
  violinChannel: ViolinChannel;
  colorMode: ColorMode;
  projection: string;
  /** "uniform" or "size" (engine-provided size_value per dot) */
  sizeAttribute: string;
  /** null = server default */
  threshold: number | null;
}

export function defaultState(runKeys: string[]): ViewState {
  return {
    visible: [...runKeys],
    selected: null,
    hovered: null,
    violinChannel: "off",
    colorMode: "by_item",
    projection: "mds",
    sizeAttribute: "size",
    threshold: null,
  };
}

const CHANNELS: ViolinChannel[] = ["off", "membership", "outlier", "split"];
const COLOR_MODES: ColorMode[] = ["by_item", "by_archetype"];

/**
 * Enforce the state invariants against the run: visible keys must exist
 * (and at least two remain), the selection must point into a visible
 * iteration, a hovered connector must join two visible iterations.
 */
export function sanitize(state: ViewState, runKeys: string[]): ViewState {
  const known = new Set(runKeys);
  let visible = state.visible.filter((k) => known.has(k));
  if (visible.length < 2) visible = [...runKeys];
  const visSet = new Set(visible);
  const selected =
    state.selected && visSet.has(state.selected.iteration) ? state.selected : null;
  const hovered =
    state.hovered && visSet.has(state.hovered.from) && visSet.has(state.hovered.to)
      ? state.hovered
      : null;
  return {
    visible: runKeys.filter((k) => visSet.has(k)), // keep run order
    selected,
    hovered,
    violinChannel: CHANNELS.includes(state.violinChannel) ? state.violinChannel : "off",
    colorMode: COLOR_MODES.includes(state.colorMode) ? state.colorMode : "by_item",
    projection: state.projection || "mds",
    sizeAttribute: state.sizeAttribute || "size",
    threshold:
      state.threshold !== null && Number.isInteger(state.threshold) && state.threshold >= 2
        ? state.threshold
        : null,
  };
}

// fragment grammar: #v=2,3,4&sel=3.1&hov=3.1~4.2&ch=split&cm=by_item&pm=mds&sz=size&th=4
// pair separator is "~": group ids can be -1 and seed-sweep keys contain "-"
// keys absent when at their default, so a fresh session has a clean URL

export function encodeState(state: ViewState, runKeys: string[]): string {
  const parts: string[] = [];
  if (state.visible.length !== runKeys.length) {
    parts.push(`v=${state.visible.map(encodeURIComponent).join(",")}`);
  }
  if (state.selected) {
    parts.push(`sel=${encodeURIComponent(state.selected.iteration)}.${state.selected.group}`);
  }
  if (state.hovered) {
    const h = state.hovered;
    parts.push(
      `hov=${encodeURIComponent(h.from)}.${h.fromGroup}~${encodeURIComponent(h.to)}.${h.toGroup}`,
    );
  }
  if (state.violinChannel !== "off") parts.push(`ch=${state.violinChannel}`);
  if (state.colorMode !== "by_item") parts.push(`cm=${state.colorMode}`);
  if (state.projection !== "mds") parts.push(`pm=${encodeURIComponent(state.projection)}`);
  if (state.sizeAttribute !== "size") parts.push(`sz=${encodeURIComponent(state.sizeAttribute)}`);
  if (state.threshold !== null) parts.push(`th=${state.threshold}`);
  return parts.length ? `#${parts.join("&")}` : "";
}

export function decodeState(fragment: string, runKeys: string[]): ViewState {
  const state = defaultState(runKeys);
  const raw = fragment.startsWith("#") ? fragment.slice(1) : fragment;
  if (!raw) return state;
  for (const part of raw.split("&")) {
    const eq = part.indexOf("=");
    if (eq < 0) continue;
    const key = part.slice(0, eq);
    const value = part.slice(eq + 1);
    switch (key) {
      case "v":
        state.visible = value.split(",").map(decodeURIComponent).filter(Boolean);
        break;
      case "sel": {
        const ref = parseGroupRef(value);
        if (ref) state.selected = ref;
        break;
      }
      case "hov": {
        const sep = value.indexOf("~");
        if (sep < 0) break;
        const a = parseGroupRef(value.slice(0, sep));
        const b = parseGroupRef(value.slice(sep + 1));
        if (a && b) {
          state.hovered = {
            from: a.iteration,
            fromGroup: a.group,
            to: b.iteration,
            toGroup: b.group,
          };
        }
        break;
      }
      case "ch":
        state.violinChannel = value as ViolinChannel;
        break;
      case "cm":
        state.colorMode = value as ColorMode;
        break;
      case "pm":
        state.projection = decodeURIComponent(value);
        break;
      case "sz":
        state.sizeAttribute = decodeURIComponent(value);
        break;
      case "th": {
        const n = Number(value);
        if (Number.isInteger(n)) state.threshold = n;
        break;
      }
    }
  }
  return sanitize(state, runKeys);
}

function parseGroupRef(token: string): GroupRef | null {
  // split on the LAST dot: eps-sweep keys like "0.3" contain dots, but the
  // group id is always the final integer segment (-1 = noise)
  const dot = token.lastIndexOf(".");
  if (dot < 0) return null;
  const group = Number(token.slice(dot + 1));
  if (!Number.isInteger(group)) return null;
  return { iteration: decodeURIComponent(token.slice(0, dot)), group };
}
