/**
 * Paints a scene tree into the document: SVG elements for everything the
 * user hovers or clicks (bars, ribbons, violins, labels), a canvas layer
 * for the scatter once it grows past ~1000 dots. Only this file touches
 * the DOM; everything upstream is plain data.
 */

import { type SceneNode, nodesOfKind } from "./scene";

const SVG_NS = "http://www.w3.org/2000/svg";
const CANVAS_DOT_LIMIT = 1000;

type Handler = (action: string, target: SceneNode, event: Event) => void;

export function paint(root: SceneNode, host: HTMLElement, onAction: Handler): void {
  host.textContent = "";
  host.style.position = "relative";
  const dots = nodesOfKind(root, "circle").length;
  if (dots > CANVAS_DOT_LIMIT) {
    paintDotsToCanvas(root, host);
  }
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(root.attrs.width ?? 1280));
  svg.setAttribute("height", String(root.attrs.height ?? 720));
  svg.style.position = "relative";
  svg.appendChild(arrowheadDefs());
  appendSvg(root, svg, onAction, dots > CANVAS_DOT_LIMIT);
  host.appendChild(svg);
}

function arrowheadDefs(): Element {
  const defs = document.createElementNS(SVG_NS, "defs");
  const marker = document.createElementNS(SVG_NS, "marker");
  marker.setAttribute("id", "arrowhead");
  marker.setAttribute("markerWidth", "8");
  marker.setAttribute("markerHeight", "6");
  marker.setAttribute("refX", "7");
  marker.setAttribute("refY", "3");
  marker.setAttribute("orient", "auto");
  const tip = document.createElementNS(SVG_NS, "path");
  tip.setAttribute("d", "M 0 0 L 8 3 L 0 6 Z");
  tip.setAttribute("fill", "context-stroke");
  marker.appendChild(tip);
  defs.appendChild(marker);
  return defs;
}

function appendSvg(n: SceneNode, parent: Element, onAction: Handler, skipDots: boolean): void {
  let el: Element | null = null;
  switch (n.kind) {
    case "group": {
      el = document.createElementNS(SVG_NS, "g");
      break;
    }
    case "rect":
    case "circle":
    case "line":
    case "path":
    case "text": {
      if (n.kind === "circle" && skipDots && n.id?.startsWith("dot-")) break;
      el = document.createElementNS(SVG_NS, n.kind);
      break;
    }
    case "arrow": {
      el = document.createElementNS(SVG_NS, "line");
      el.setAttribute("marker-end", "url(#arrowhead)");
      break;
    }
    case "spinner": {
      const input = document.createElement("input");
      input.type = "number";
      input.min = String(n.attrs.min);
      input.max = String(n.attrs.max);
      input.value = String(n.attrs.value);
      input.addEventListener("change", (ev) => onAction(String(n.attrs.action), n, ev));
      const wrapper = document.createElementNS(SVG_NS, "foreignObject");
      wrapper.setAttribute("width", "70");
      wrapper.setAttribute("height", "28");
      wrapper.appendChild(input);
      el = wrapper;
      break;
    }
  }
  if (!el) return;
  for (const [key, value] of Object.entries(n.attrs)) {
    if (key === "text" || key === "action") continue;
    if (key === "dash") {
      if (value) el.setAttribute("stroke-dasharray", String(value));
      continue;
    }
    if (key === "anchor") {
      el.setAttribute("text-anchor", String(value));
      continue;
    }
    el.setAttribute(key, String(value));
  }
  if (n.kind === "text") el.textContent = String(n.attrs.text ?? "");
  if (n.id) el.setAttribute("data-id", n.id);
  if (n.attrs.action) {
    el.addEventListener("click", (ev) => onAction(String(n.attrs.action), n, ev));
  }
  if (n.id && (n.id.startsWith("bar-") || n.id.startsWith("violin-"))) {
    el.addEventListener("contextmenu", (ev) => {
      ev.preventDefault();
      onAction("menu:bar", n, ev);
    });
  }
  if (n.id?.startsWith("band-") && n.kind === "path") {
    el.addEventListener("contextmenu", (ev) => {
      ev.preventDefault();
      onAction("menu:band", n, ev);
    });
  }
  parent.appendChild(el);
  for (const child of n.children ?? []) appendSvg(child, el, onAction, skipDots);
}

/** One-shot context menu; picking an entry or clicking elsewhere closes it. */
export function showMenu(
  host: HTMLElement,
  x: number,
  y: number,
  entries: { label: string; action: string }[],
  pick: (action: string) => void,
): void {
  host.querySelector("[data-id=context-menu]")?.remove();
  const menu = document.createElement("div");
  menu.setAttribute("data-id", "context-menu");
  menu.style.cssText =
    `position:absolute;left:${x}px;top:${y}px;z-index:10;` +
    "background:#fff;border:1px solid #bbb;box-shadow:1px 2px 6px rgba(0,0,0,.2);" +
    "font-size:12px;min-width:160px";
  const dismiss = (ev: Event) => {
    if (!menu.contains(ev.target as Node)) close();
  };
  const close = () => {
    menu.remove();
    document.removeEventListener("mousedown", dismiss);
  };
  for (const entry of entries) {
    const item = document.createElement("div");
    item.textContent = entry.label;
    item.style.cssText = "padding:4px 10px;cursor:pointer";
    item.addEventListener("mouseenter", () => (item.style.background = "#eef"));
    item.addEventListener("mouseleave", () => (item.style.background = ""));
    item.addEventListener("click", () => {
      close();
      pick(entry.action);
    });
    menu.appendChild(item);
  }
  document.addEventListener("mousedown", dismiss);
  host.appendChild(menu);
}

function paintDotsToCanvas(root: SceneNode, host: HTMLElement): void {
  const canvas = document.createElement("canvas");
  canvas.width = Number(root.attrs.width ?? 1280);
  canvas.height = Number(root.attrs.height ?? 720);
  // under the svg so vector overlays still paint on top of the dots
  canvas.style.position = "absolute";
  canvas.style.left = "0";
  canvas.style.top = "0";
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  for (const dot of nodesOfKind(root, "circle")) {
    if (!dot.id?.startsWith("dot-")) continue;
    ctx.globalAlpha = Number(dot.attrs.opacity ?? 1);
    ctx.fillStyle = String(dot.attrs.fill);
    ctx.beginPath();
    ctx.arc(Number(dot.attrs.cx), Number(dot.attrs.cy), Number(dot.attrs.r), 0, Math.PI * 2);
    ctx.fill();
  }
  host.appendChild(canvas);
}
