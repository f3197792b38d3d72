/**
 * Retained scene graph. Every view builder emits one of these trees; the
 * DOM painter walks it and a test can diff two trees node by node. Keeping
 * rendering as data is what makes "reload the URL, diff the scene" a real
 * assertion instead of a screenshot comparison.
 */

export type AttrValue = string | number | boolean;

export interface SceneNode {
  kind: string; // "group" | "rect" | "path" | "line" | "circle" | "text" | ...
  id?: string;
  attrs: Record<string, AttrValue>;
  children?: SceneNode[];
}

export function group(id: string, children: SceneNode[], attrs: Record<string, AttrValue> = {}): SceneNode {
  return { kind: "group", id, attrs, children };
}

export function node(kind: string, attrs: Record<string, AttrValue>, id?: string): SceneNode {
  return id === undefined ? { kind, attrs } : { kind, id, attrs };
}

/** Depth-first walk, parents before children. */
export function walk(root: SceneNode, visit: (n: SceneNode, path: string) => void, path = ""): void {
  const here = path ? `${path}/${label(root)}` : label(root);
  visit(root, here);
  for (const child of root.children ?? []) walk(child, visit, here);
}

function label(n: SceneNode): string {
  return n.id ?? n.kind;
}

/**
 * Structural diff of two scene trees. Returns human-readable difference
 * strings; an empty array means the trees render identically. Numeric
 * attributes are compared exactly: both trees are supposed to come from the
 * same data through the same pure builders, so any drift is a bug.
 */
export function diffScene(a: SceneNode, b: SceneNode): string[] {
  const out: string[] = [];
  diffInto(a, b, label(a), out);
  return out;
}

function diffInto(a: SceneNode, b: SceneNode, path: string, out: string[]): void {
  if (a.kind !== b.kind) {
    out.push(`${path}: kind ${a.kind} != ${b.kind}`);
    return;
  }
  if (a.id !== b.id) out.push(`${path}: id ${a.id} != ${b.id}`);
  const keys = new Set([...Object.keys(a.attrs), ...Object.keys(b.attrs)]);
  for (const key of keys) {
    const va = a.attrs[key];
    const vb = b.attrs[key];
    if (va !== vb) out.push(`${path}: attr ${key} ${fmt(va)} != ${fmt(vb)}`);
  }
  const ca = a.children ?? [];
  const cb = b.children ?? [];
  if (ca.length !== cb.length) {
    out.push(`${path}: ${ca.length} children != ${cb.length}`);
  }
  const n = Math.min(ca.length, cb.length);
  for (let i = 0; i < n; i++) {
    const childA = ca[i]!;
    diffInto(childA, cb[i]!, `${path}/${i}:${label(childA)}`, out);
  }
}

function fmt(v: AttrValue | undefined): string {
  return v === undefined ? "<absent>" : JSON.stringify(v);
}

/** Collect all nodes of a kind, in render order. */
export function nodesOfKind(root: SceneNode, kind: string): SceneNode[] {
  const hits: SceneNode[] = [];
  walk(root, (n) => {
    if (n.kind === kind) hits.push(n);
  });
  return hits;
}

/** First node with the given id, or null. */
export function byId(root: SceneNode, id: string): SceneNode | null {
  let hit: SceneNode | null = null;
  walk(root, (n) => {
    if (hit === null && n.id === id) hit = n;
  });
  return hit;
}
